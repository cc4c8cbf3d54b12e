//! Batch runner: config ingestion, per-case pipelines, records and plot data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::contour;
use crate::error::{LabError, Result};
use crate::families::{self, FamilyParams};
use crate::measures::{self, EmpiricalMeasure};
use crate::poly::{Polynomial, SendovInstance};
use crate::potential::{self, CircleDensity};
use crate::rootfind;
use crate::sendov;

/// Environment variable holding the worker count for sweeps.
pub const THREADS_ENV: &str = "SENDOV_LAB_THREADS";
pub const IDENTITY_TOL: f64 = 1e-8;
pub const MEAN_TOL: f64 = 1e-9;
pub const BALAYAGE_MEAN_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Identities,
    Balayage,
    Winding,
    Family,
    Fourier,
    Sweep,
}

impl FromStr for Command {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_owned()))
            .map_err(|_| LabError::Config(format!("unknown command `{s}`")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(LabError::Config(format!("format `{s}` is not one of json, csv"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    ExampleCircle,
    ExampleOrigin,
    Miller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    ZeroScatter,
    BalayageDensity,
    DdCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    One(usize),
    Many(Vec<usize>),
}

impl DegreeSpec {
    pub fn values(&self) -> Vec<usize> {
        match self {
            DegreeSpec::One(n) => vec![*n],
            DegreeSpec::Many(v) => v.clone(),
        }
    }
}

/// Inline polynomial: exactly one of `coeffs` (ascending) or `roots`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlinePolynomial {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<Complex64>>,
    /// Distinguished real zero, making the case a Sendov instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomEnsemble {
    pub seed: u64,
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotRequest {
    pub kind: PlotKind,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<InlinePolynomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomEnsemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<DegreeSpec>,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    #[serde(default)]
    pub lambdas: Vec<Complex64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Circle nodes for balayage and Fourier quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_nodes: Option<usize>,
    /// Balayage radius `R`.
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_r1")]
    pub r1: f64,
    #[serde(default = "default_r2")]
    pub r2: f64,
    /// Identity sample points per case.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotRequest>,
}

fn one() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    rootfind::DEFAULT_TOL
}
fn default_radius() -> f64 {
    1.1
}
fn default_r1() -> f64 {
    contour::DEFAULT_R1
}
fn default_r2() -> f64 {
    contour::DEFAULT_R2
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(LabError::Config(s.to_owned()));
        let sources = [self.family.is_some(), self.polynomial.is_some(), self.random.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return bad("exactly one of `family`, `polynomial`, `random` is required");
        }
        if self.family.is_some() && self.n.as_ref().is_none_or(|n| n.values().is_empty()) {
            return bad("`family` needs `n`");
        }
        if let Some(p) = &self.polynomial {
            if p.coeffs.is_some() == p.roots.is_some() {
                return bad("`polynomial` needs exactly one of `coeffs`, `roots`");
            }
        }
        if let Some(r) = &self.random {
            if r.n_min < 2 || r.n_max < r.n_min {
                return bad("`random` needs 2 <= n_min <= n_max");
            }
        }
        if !(self.tol > 0.0) {
            return bad("`tol` must be positive");
        }
        if !(self.radius > 1.0) {
            return bad("`radius` must exceed 1");
        }
        if !(0.0 < self.r1 && self.r1 < self.r2 && self.r2 < 1.0) {
            return bad("`r1`, `r2` need 0 < r1 < r2 < 1");
        }
        if self.quad_nodes == Some(0) {
            return bad("`quad_nodes` must be positive");
        }
        Ok(())
    }
}

/// One unit of work.
#[derive(Debug, Clone)]
pub struct Case {
    pub label: String,
    pub poly: Polynomial,
    pub instance: Option<SendovInstance>,
    pub params: Option<FamilyParams>,
    /// Stream for per-case randomness.
    pub stream: u64,
}

/// Monic polynomial whose roots are uniform in the closed unit disk.
pub fn random_disk_polynomial(rng: &mut impl Rng, n: usize) -> Result<Polynomial> {
    let roots: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    Polynomial::from_roots(&roots, Complex64::new(1.0, 0.0))
}

/// `count` points in `|z| <= radius`, each at least `min_dist` from every
/// point of `avoid`.
pub fn sample_points(rng: &mut impl Rng, avoid: &[Complex64], count: usize, min_dist: f64, radius: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if z.norm() <= radius && avoid.iter().all(|p| (z - p).norm() >= min_dist) {
            out.push(z);
        }
    }
    out
}

pub fn case_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn config_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.random.as_ref().map_or(0, |r| r.seed)
}

pub fn build_cases(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    if let Some(kind) = cfg.family {
        let ns = cfg.n.as_ref().map(DegreeSpec::values).unwrap_or_default();
        return ns
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                let (inst, params) = match kind {
                    FamilyKind::ExampleCircle => (families::example_circle(n)?, None),
                    FamilyKind::ExampleOrigin => (families::example_origin(n)?, None),
                    FamilyKind::Miller => {
                        let p = FamilyParams::new(n, cfg.c1, cfg.c2, cfg.lambdas.clone())?;
                        (families::miller_family(&p)?, Some(p))
                    }
                };
                let label = format!("{}:{n}", serde_json::to_value(kind).unwrap_or_default().as_str().unwrap_or(""));
                Ok(Case {
                    label,
                    poly: inst.f().clone(),
                    instance: Some(inst),
                    params,
                    stream: i as u64,
                })
            })
            .collect();
    }
    if let Some(p) = &cfg.polynomial {
        let poly = match (&p.coeffs, &p.roots) {
            (Some(c), None) => Polynomial::from_coeffs(c.clone())?,
            (None, Some(r)) => Polynomial::from_roots(r, Complex64::new(1.0, 0.0))?,
            _ => return Err(LabError::Config("`polynomial` needs exactly one of `coeffs`, `roots`".into())),
        };
        let instance = match p.a {
            Some(a) => {
                let poly = if poly.roots().is_some() {
                    poly.clone()
                } else {
                    let rs = rootfind::find_roots(&poly, cfg.tol)?.require_converged()?;
                    Polynomial::with_roots(poly.coeffs().to_vec(), rs.points)?
                };
                Some(SendovInstance::new(poly, a)?)
            }
            None => None,
        };
        return Ok(vec![Case {
            label: "inline".into(),
            poly,
            instance,
            params: None,
            stream: 0,
        }]);
    }
    let r = cfg.random.as_ref().ok_or_else(|| LabError::Config("no instance source".into()))?;
    let ns = cfg.n.as_ref().map(DegreeSpec::values);
    (0..r.count)
        .map(|i| {
            let mut rng = case_rng(r.seed, i as u64);
            let n = match &ns {
                Some(v) if !v.is_empty() => v[i % v.len()],
                _ => rng.gen_range(r.n_min..=r.n_max),
            };
            Ok(Case {
                label: format!("random:{i}"),
                poly: random_disk_polynomial(&mut rng, n)?,
                instance: None,
                params: None,
                stream: i as u64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub label: String,
    pub n: usize,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: Map<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    /// `(re, im, is_critical)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_scatter: Option<Vec<(f64, f64, bool)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balayage_density: Option<CircleDensity>,
    /// `(theta, lhs)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dd_curve: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub version: String,
    pub command: Command,
    pub config: ExperimentConfig,
    pub cases: Vec<CaseResult>,
    pub failed: usize,
    pub all_passed: bool,
    pub plot: PlotData,
    /// Excluded from determinism comparisons.
    pub wall_time_s: f64,
}

impl ExperimentRecord {
    /// The record without its wall time, as compact JSON.
    pub fn numeric_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        serde_json::to_string(&r).expect("record serializes")
    }
}

struct Metrics {
    map: Map<String, Value>,
    passed: bool,
}

impl Metrics {
    fn new() -> Self {
        Self {
            map: Map::new(),
            passed: true,
        }
    }

    fn put(&mut self, key: &str, v: impl Serialize) {
        self.map.insert(key.to_owned(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn put_c(&mut self, key: &str, z: Complex64) {
        self.put(&format!("{key}_re"), z.re);
        self.put(&format!("{key}_im"), z.im);
    }

    /// Hard assertion, recorded under `key`.
    fn require(&mut self, key: &str, ok: bool) {
        self.put(key, ok);
        self.passed &= ok;
    }
}

fn nodes(cfg: &ExperimentConfig, atoms: usize) -> usize {
    cfg.quad_nodes.unwrap_or_else(|| potential::default_nodes(atoms))
}

fn zeros_of(case: &Case, tol: f64) -> Result<Vec<Complex64>> {
    match case.poly.roots() {
        Some(r) => Ok(r.to_vec()),
        None => Ok(rootfind::find_roots(&case.poly, tol)?.require_converged()?.points),
    }
}

fn critical_of(case: &Case) -> Result<Vec<Complex64>> {
    if case.poly.degree() < 2 {
        return Ok(Vec::new());
    }
    match &case.instance {
        Some(inst) => sendov::instance_critical_points(inst),
        None => Ok(sendov::critical_points(&case.poly)?.points),
    }
}

fn run_check(cfg: &ExperimentConfig, case: &Case, m: &mut Metrics) -> Result<()> {
    let zeros = zeros_of(case, cfg.tol)?;
    let xi = critical_of(case)?;
    let rep = sendov::margins_from(&zeros, &xi)?;
    m.put("min_margin", rep.min_margin);
    m.put_c("worst_zero", rep.worst_zero);
    let in_disk = zeros.iter().all(|z| z.norm() <= 1.0 + crate::poly::DISK_TOL);
    m.put("roots_in_disk", in_disk);
    // Zeros outside the disk void the hypothesis; the margin is then informational.
    if in_disk {
        m.require("sendov_holds", rep.holds);
    } else {
        m.put("sendov_holds", rep.holds);
    }
    if in_disk && case.instance.is_none() {
        m.require("gauss_lucas", sendov::gauss_lucas_check(&case.poly)?);
    }
    if let Some(inst) = &case.instance {
        m.put("a", inst.a());
        if !cfg.deltas.is_empty() && inst.a() > 0.0 {
            let d = sendov::degot_suite(inst, &cfg.deltas)?;
            m.put("degot_hypothesis", d.hypothesis);
            m.put("degot_all_positive", d.all_positive());
            m.put("fan_slack", d.fan_slack);
        }
        let z = measures::quantitative_zetas(inst)?;
        m.put("log_inv_zeta", z.log_inv_zeta);
        m.put("log_xi_minus_a", z.log_xi_minus_a);
    }
    Ok(())
}

fn run_identities(cfg: &ExperimentConfig, case: &Case, m: &mut Metrics) -> Result<()> {
    let zeros = zeros_of(case, cfg.tol)?;
    let xi = critical_of(case)?;
    let mut avoid = zeros.clone();
    avoid.extend_from_slice(&xi);
    let mut rng = case_rng(config_seed(cfg), case.stream);
    let zs = sample_points(&mut rng, &avoid, cfg.samples, potential::MIN_SAMPLE_DISTANCE, 1.5);
    let f = match case.poly.roots() {
        Some(_) => case.poly.clone(),
        None => Polynomial::with_roots(case.poly.coeffs().to_vec(), zeros.clone())?,
    };
    let rep = potential::verify_basic_identities(&f, &zs)?;
    let worst = rep.max_residual();
    m.put("samples", rep.samples.len());
    m.put("max_identity_residual", worst);
    m.put("mean_residual", rep.mean_residual);
    m.require("identities_ok", worst < IDENTITY_TOL);
    m.require("mean_ok", rep.mean_residual < MEAN_TOL);
    Ok(())
}

fn run_balayage(cfg: &ExperimentConfig, case: &Case, m: &mut Metrics, plot: &mut PlotData) -> Result<()> {
    let zeros = EmpiricalMeasure::uniform(zeros_of(case, cfg.tol)?)?;
    let xi = critical_of(case)?;
    let k = nodes(cfg, zeros.len()).max(potential::MIN_BALAYAGE_NODES);
    let bz = potential::balayage(&zeros, cfg.radius, k)?;
    m.put("balayage_min", bz.min());
    m.put("balayage_mean", bz.mean());
    m.require("balayage_positive", bz.min() >= 0.0);
    m.require("balayage_mean_one", (bz.mean() - 1.0).abs() <= BALAYAGE_MEAN_TOL);
    if !xi.is_empty() {
        let bx = potential::balayage(&EmpiricalMeasure::uniform(xi)?, cfg.radius, k)?;
        let gap = bz.sup_gap(&bx)?;
        m.put("sup_gap", gap);
        m.put("scaled_gap", potential::balk_scaled_gap(gap, case.poly.degree(), cfg.radius));
    }
    plot.balayage_density = Some(bz);
    Ok(())
}

fn run_winding(cfg: &ExperimentConfig, case: &Case, m: &mut Metrics) -> Result<()> {
    let zeros = zeros_of(case, cfg.tol)?;
    let xi = critical_of(case)?;
    let choice = contour::select_radius_from(&zeros, &xi, cfg.r1, cfg.r2)?;
    let w = contour::winding_number(&case.poly, choice.radius)?;
    let oracle = contour::count_inside(&zeros, &xi, choice.radius)?;
    m.put("radius", choice.radius);
    m.put("objective", choice.objective);
    m.put("winding", w.winding);
    m.put("zero_pole_count", oracle);
    m.put("samples_used", w.samples_used);
    m.require("winding_matches", w.winding == oracle);
    Ok(())
}

fn run_family(case: &Case, m: &mut Metrics, plot: &mut PlotData) -> Result<()> {
    let (p, inst) = match (&case.params, &case.instance) {
        (Some(p), Some(i)) => (p, i),
        _ => return Err(LabError::Config("`family` command needs `family: miller`".into())),
    };
    let r = families::family_report(p, inst)?;
    m.put("m", r.m);
    m.put("a", r.a);
    m.put("max_zon", r.max_zon());
    m.put("max_t_error", r.max_t_error());
    m.put("max_ten", r.max_ten());
    m.put("lamin_mean", r.lamin_mean);
    m.put("lamin_mean_expected", r.lamin_mean_expected);
    m.put_c("sum_lambda_sq", r.sum_lambda_sq);
    m.put("summ_bound_holds", r.summ_bound_holds());
    m.put("critical_outside_disk_a", r.critical_outside_disk_a);
    m.put("roots_in_disk", r.roots_in_disk);
    m.put_c("mu", r.fine.mu);
    m.put("sigma2", r.fine.sigma2);
    m.put("one_minus_a", r.fine.one_minus_a);
    m.put("u_xi_at_a", r.fine.u_xi_at_a);
    m.put("mu_ratio", r.fine.mu_ratio);
    m.put("one_minus_a_ratio", r.fine.one_minus_a_ratio);
    m.put("u_ratio", r.fine.u_ratio);
    m.put("f_at_a_residual", r.f_at_a_residual);
    m.require("ten_ok", r.max_ten() < 1e-9);
    m.require("f_at_a_ok", r.f_at_a_residual <= families::FAMILY_ZERO_TOL);
    m.require("arc_argument_ok", r.arc_argument_ok);
    plot.dd_curve = Some(r.lamin_thetas.iter().copied().zip(r.lamin_values.iter().copied()).collect());
    Ok(())
}

fn run_fourier(case: &Case, m: &mut Metrics) -> Result<()> {
    let inst = match &case.instance {
        Some(i) => i.clone(),
        None => {
            let f = match case.poly.roots() {
                Some(_) => case.poly.clone(),
                None => {
                    let rs = rootfind::find_roots(&case.poly, rootfind::DEFAULT_TOL)?.require_converged()?;
                    Polynomial::with_roots(case.poly.coeffs().to_vec(), rs.points)?
                }
            };
            crate::poly::normalize_sendov(&f, 0)?
        }
    };
    let r = families::second_moment_test(&inst)?;
    m.put_c("second_moment_direct", r.direct);
    m.put_c("second_moment_fourier", r.fourier);
    m.put("second_moment_discrepancy", r.discrepancy);
    m.put("rexi2_ratio", r.rexi2_ratio);
    m.require("second_moment_agree", r.agree);
    Ok(())
}

fn scatter(case: &Case, tol: f64) -> Result<Vec<(f64, f64, bool)>> {
    let mut pts: Vec<_> = zeros_of(case, tol)?.into_iter().map(|z| (z.re, z.im, false)).collect();
    pts.extend(critical_of(case)?.into_iter().map(|z| (z.re, z.im, true)));
    Ok(pts)
}

fn run_case(cfg: &ExperimentConfig, cmd: Command, case: &Case) -> (CaseResult, PlotData) {
    let mut m = Metrics::new();
    let mut plot = PlotData::default();
    let outcome = (|| -> Result<()> {
        match cmd {
            Command::Check => run_check(cfg, case, &mut m)?,
            Command::Identities => run_identities(cfg, case, &mut m)?,
            Command::Balayage => run_balayage(cfg, case, &mut m, &mut plot)?,
            Command::Winding => run_winding(cfg, case, &mut m)?,
            Command::Family => run_family(case, &mut m, &mut plot)?,
            Command::Fourier => run_fourier(case, &mut m)?,
            Command::Sweep => {
                run_check(cfg, case, &mut m)?;
                if case.params.is_some() {
                    run_family(case, &mut m, &mut plot)?;
                }
                run_fourier(case, &mut m)?;
            }
        }
        if case.poly.degree() >= 2 {
            plot.zero_scatter = Some(scatter(case, cfg.tol)?);
        }
        Ok(())
    })();
    let error = outcome.err().map(|e| e.to_string());
    let res = CaseResult {
        label: case.label.clone(),
        n: case.poly.degree(),
        passed: m.passed && error.is_none(),
        error,
        metrics: m.map,
    };
    (res, plot)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .parse()
            .map_err(|_| LabError::Config(format!("{THREADS_ENV} = `{v}` is not a count")))?;
        b = b.num_threads(k);
    }
    b.build().map_err(|e| LabError::Config(e.to_string()))
}

/// Runs every case; plot data is taken from the first case. Results are in
/// config order.
pub fn run(cfg: &ExperimentConfig, command: Option<Command>) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let cmd = command
        .or(cfg.command)
        .ok_or_else(|| LabError::Config("no command given".into()))?;
    let start = Instant::now();
    let cases = build_cases(cfg)?;
    let pool = thread_pool()?;
    let results: Vec<(CaseResult, PlotData)> =
        pool.install(|| cases.par_iter().map(|c| run_case(cfg, cmd, c)).collect());
    let plot = results.first().map(|r| r.1.clone()).unwrap_or_default();
    let cases: Vec<CaseResult> = results.into_iter().map(|r| r.0).collect();
    let failed = cases.iter().filter(|c| !c.passed).count();
    let mut config = cfg.clone();
    config.command = Some(cmd);
    Ok(ExperimentRecord {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        command: cmd,
        config,
        failed,
        all_passed: failed == 0,
        cases,
        plot,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Full-precision decimal for CSV cells.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => csv_float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One row per case; metric columns in first-seen order.
pub fn write_csv(record: &ExperimentRecord, out: impl Write) -> Result<()> {
    let mut cols: Vec<String> = Vec::new();
    for c in &record.cases {
        for k in c.metrics.keys() {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_owned(), "n".into(), "passed".into(), "error".into()];
    header.extend(cols.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for c in &record.cases {
        let mut row = vec![c.label.clone(), c.n.to_string(), c.passed.to_string(), c.error.clone().unwrap_or_default()];
        row.extend(cols.iter().map(|k| c.metrics.get(k).map(csv_cell).unwrap_or_default()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> LabError {
    LabError::Io(e.to_string())
}

pub fn write_record(record: &ExperimentRecord, format: Format, mut out: impl Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, record).map_err(|e| LabError::Io(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => write_csv(record, out)?,
    }
    Ok(())
}

/// Columns: `re,im,is_critical`; `theta,value`; `theta,lhs`.
pub fn emit_plot_data(record: &ExperimentRecord, kind: PlotKind, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match kind {
        PlotKind::ZeroScatter => {
            let pts = record.plot.zero_scatter.as_ref().ok_or(LabError::MissingPlotData("zero_scatter"))?;
            w.write_record(["re", "im", "is_critical"]).map_err(csv_err)?;
            for (re, im, c) in pts {
                w.write_record([csv_float(*re), csv_float(*im), c.to_string()]).map_err(csv_err)?;
            }
        }
        PlotKind::BalayageDensity => {
            let d = record.plot.balayage_density.as_ref().ok_or(LabError::MissingPlotData("balayage_density"))?;
            w.write_record(["theta", "value"]).map_err(csv_err)?;
            for (t, v) in d.angles().iter().zip(&d.samples) {
                w.write_record([csv_float(*t), csv_float(*v)]).map_err(csv_err)?;
            }
        }
        PlotKind::DdCurve => {
            let d = record.plot.dd_curve.as_ref().ok_or(LabError::MissingPlotData("dd_curve"))?;
            w.write_record(["theta", "lhs"]).map_err(csv_err)?;
            for (t, v) in d {
                w.write_record([csv_float(*t), csv_float(*v)]).map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs `cfg`, writes the record to `cfg.out` (or `stdout`) and the requested
/// plot file.
pub fn run_and_write(cfg: &ExperimentConfig, command: Option<Command>) -> Result<ExperimentRecord> {
    let record = run(cfg, command)?;
    match &cfg.out {
        Some(path) => write_record(&record, cfg.format, std::io::BufWriter::new(std::fs::File::create(path)?))?,
        None => write_record(&record, cfg.format, std::io::stdout().lock())?,
    }
    if let Some(req) = &cfg.plot {
        emit_plot_data(&record, req.kind, std::io::BufWriter::new(std::fs::File::create(&req.out)?))?;
    }
    Ok(record)
}
