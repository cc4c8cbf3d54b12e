//! Example polynomials and the perturbed-power near-counterexample family
//! `(z + c2/n)^(n-m) P(z) - (a + c2/n)^(n-m) P(a)`, `a = 1 - c1/n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

use crate::error::{LabError, Result};
use crate::measures::{self, EmpiricalMeasure};
use crate::numeric::{self, NeumaierSum};
use crate::poly::{Polynomial, SendovInstance};
use crate::potential;
use crate::rootfind;
use crate::sendov;

/// Backward error accepted for `f(a) = 0` on construction.
pub const FAMILY_ZERO_TOL: f64 = 1e-10;
/// Band for "on the arc" and for the argument window.
pub const ARC_TOL: f64 = 1e-9;
/// Agreement required between the two second-moment routes.
pub const SECOND_MOMENT_TOL: f64 = 1e-8;
pub const DD_GRID: usize = 720;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub lambdas: Vec<Complex64>,
}

impl FamilyParams {
    pub fn new(n: usize, c1: f64, c2: f64, lambdas: Vec<Complex64>) -> Result<Self> {
        let p = Self { n, c1, c2, lambdas };
        p.validate()?;
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    pub fn a(&self) -> f64 {
        1.0 - self.c1 / self.n as f64
    }

    pub fn shift(&self) -> f64 {
        self.c2 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(LabError::InvalidParameter(s));
        if self.n < 2 {
            return Err(LabError::DegreeTooLow {
                required: 2,
                actual: self.n,
            });
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c1.is_finite() && self.c2.is_finite()) {
            return bad(format!("c1 = {}, c2 = {} must be positive", self.c1, self.c2));
        }
        if self.c2 < self.c1 {
            return bad(format!("c2 = {} < c1 = {}", self.c2, self.c1));
        }
        if self.c1 > self.n as f64 {
            return bad(format!("c1 = {} exceeds n", self.c1));
        }
        if self.m() >= self.n {
            return bad(format!("m = {} must be below n = {}", self.m(), self.n));
        }
        for (i, l) in self.lambdas.iter().enumerate() {
            if !(l.re.is_finite() && l.im.is_finite()) {
                return Err(LabError::NonFinite("lambdas"));
            }
            if l.norm() > 1.0 + ARC_TOL || (l - 1.0).norm() < 1.0 - ARC_TOL {
                return bad(format!("lambda {l} outside closed_D(0,1) minus D(1,1)"));
            }
            if self.lambdas[..i].contains(l) {
                return bad(format!("lambda {l} repeated"));
            }
        }
        Ok(())
    }
}

/// `f = z^n - 1` with the roots of unity and `a = 1`.
pub fn example_circle(n: usize) -> Result<SendovInstance> {
    if n < 2 {
        return Err(LabError::DegreeTooLow { required: 2, actual: n });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[0] = Complex64::new(-1.0, 0.0);
    coeffs[n] = Complex64::new(1.0, 0.0);
    let roots = (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
    SendovInstance::new(Polynomial::with_roots(coeffs, roots)?, 1.0)
}

/// `f = z^n - z` with zeros `0` and the `(n-1)`-th roots of unity, `a = 0`.
pub fn example_origin(n: usize) -> Result<SendovInstance> {
    if n < 2 {
        return Err(LabError::DegreeTooLow { required: 2, actual: n });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[1] = Complex64::new(-1.0, 0.0);
    coeffs[n] = Complex64::new(1.0, 0.0);
    let k = n - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0)];
    roots.extend((0..k).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / k as f64)));
    SendovInstance::new(Polynomial::with_roots(coeffs, roots)?, 0.0)
}

/// Coefficients of `(z + s)^k`, built from log-binomials.
fn shifted_power(s: f64, k: usize) -> Vec<f64> {
    let ls = s.ln();
    let mut lc = NeumaierSum::new();
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            lc.add(((k - j + 1) as f64).ln());
            lc.add(-(j as f64).ln());
        }
        out.push((lc.value() + (k - j) as f64 * ls).exp());
    }
    out
}

fn poly_from(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        c.push(Complex64::new(0.0, 0.0));
        for k in (1..c.len()).rev() {
            c[k] = c[k - 1] - r * c[k];
        }
        c[0] = -r * c[0];
    }
    c
}

/// Coefficients of the family polynomial.
pub fn family_coeffs(p: &FamilyParams) -> Result<Vec<Complex64>> {
    p.validate()?;
    let (n, m) = (p.n, p.m());
    let k = n - m;
    let a = p.a();
    let pa = p.lambdas.iter().fold(Complex64::new(1.0, 0.0), |acc, l| acc * (a - l));
    if pa.norm() == 0.0 {
        return Err(LabError::InvalidParameter("P(a) = 0".into()));
    }
    let b = shifted_power(p.shift(), k);
    let pc = poly_from(&p.lambdas);
    let mut coeffs: Vec<Complex64> = (0..=n)
        .map(|i| {
            let lo = i.saturating_sub(k);
            let hi = i.min(m);
            numeric::csum((lo..=hi).map(|j| pc[j] * b[i - j]))
        })
        .collect();
    // (a + c2/n)^(n-m) = exp((n-m) log1p((c2 - c1)/n)).
    let lead = (k as f64 * ((p.c2 - p.c1) / n as f64).ln_1p()).exp();
    coeffs[0] -= pa * lead;
    coeffs[n] = Complex64::new(1.0, 0.0);
    Ok(coeffs)
}

/// Critical points: `-c2/n` repeated `n-m-1` times and the zeros of
/// `P(z) + (z + c2/n) P'(z) / (n-m)`.
pub fn family_critical_points(p: &FamilyParams) -> Result<Vec<Complex64>> {
    p.validate()?;
    let (n, m) = (p.n, p.m());
    let s = p.shift();
    let mut xi = vec![Complex64::new(-s, 0.0); n - m - 1];
    if m > 0 {
        let pc = poly_from(&p.lambdas);
        let inv = 1.0 / (n - m) as f64;
        // (z + s) P'(z) = sum_j j c_j z^j + s sum_j j c_j z^(j-1).
        let q: Vec<Complex64> = (0..=m)
            .map(|j| {
                let mut v = pc[j] + pc[j] * (j as f64 * inv);
                if j < m {
                    v += pc[j + 1] * ((j + 1) as f64 * s * inv);
                }
                v
            })
            .collect();
        let qp = Polynomial::from_coeffs(q)?;
        let rs = rootfind::find_roots(&qp, rootfind::DEFAULT_TOL)?.require_converged()?;
        xi.extend(rs.points);
    }
    Ok(xi)
}

/// Family member as an instance with its closed-form critical points. The
/// zero nearest `a` is pinned to `a` exactly.
pub fn miller_family(p: &FamilyParams) -> Result<SendovInstance> {
    let coeffs = family_coeffs(p)?;
    let a = p.a();
    let ac = Complex64::new(a, 0.0);
    let f = Polynomial::from_coeffs(coeffs.clone())?;
    let res = f.backward_error(ac);
    if res > FAMILY_ZERO_TOL {
        return Err(LabError::NotAZero(res));
    }
    let mut roots = rootfind::find_roots(&f, rootfind::DEFAULT_TOL)?.require_converged()?.points;
    let i0 = roots
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - ac).norm().total_cmp(&(y.1 - ac).norm()))
        .map(|(i, _)| i)
        .expect("degree >= 2");
    roots[i0] = ac;
    let f = Polynomial::with_roots(coeffs, roots)?;
    SendovInstance::new(f, a)?.with_known_critical(family_critical_points(p)?)
}

/// `t(theta) = c2 - c1 + sum_j log|(1 - l_j)/(e^{i theta} - l_j)|`.
pub fn predicted_zero_shift(p: &FamilyParams, theta: f64) -> Result<f64> {
    let e = Complex64::from_polar(1.0, theta);
    let mut acc = NeumaierSum::new();
    acc.add(p.c2 - p.c1);
    for l in &p.lambdas {
        let d = (e - l).norm();
        if d == 0.0 {
            return Err(LabError::AtomCollision(format!("{l}")));
        }
        acc.add((1.0 - l).norm().ln());
        acc.add(-d.ln());
    }
    Ok(acc.value())
}

/// Left side of the non-strict inequality `t(theta) - c2 cos(theta) <= 0`.
pub fn dd_lhs(p: &FamilyParams, theta: f64) -> Result<f64> {
    Ok(predicted_zero_shift(p, theta)? - p.c2 * theta.cos())
}

/// Trapezoid mean of `t` over `nodes` equispaced angles.
pub fn t_mean_trapezoid(p: &FamilyParams, nodes: usize) -> Result<f64> {
    let vals = numeric::circle_angles(nodes)
        .map(|t| predicted_zero_shift(p, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(numeric::periodic_mean(&vals))
}

/// `c2 - c1 + sum_j log|1 - l_j|`, the mean of `t` and of the `dd` left side.
pub fn t_mean_closed_form(p: &FamilyParams) -> f64 {
    let mut acc = NeumaierSum::new();
    acc.add(p.c2 - p.c1);
    for l in &p.lambdas {
        acc.add((1.0 - l).norm().ln());
    }
    acc.value()
}

/// `(k + 1/2) 2 pi / DD_GRID`.
pub fn dd_grid() -> Vec<f64> {
    let h = TAU / DD_GRID as f64;
    (0..DD_GRID).map(|k| (k as f64 + 0.5) * h).collect()
}

/// Mean over `theta` of the `dd` left side. The `log|e^{i theta} - l_j|`
/// means come from the circle potential of the `l_j`, closed form near the
/// circle; the cosine term has mean zero.
pub fn dd_mean(p: &FamilyParams) -> Result<f64> {
    let base = t_mean_closed_form(p);
    if p.lambdas.is_empty() {
        return Ok(base);
    }
    let lam = EmpiricalMeasure::uniform(p.lambdas.clone())?;
    let u0 = potential::circle_fourier_coeff(&lam, 1.0, 0, potential::default_nodes(p.m()))?;
    Ok(base + p.m() as f64 * u0.value.re)
}

/// Points `w = 1 + e^{i phi}`, `phi` in `[2pi/3, 4pi/3]`, of the arc
/// `closed_D(0,1) cap dD(1,1)`, and the check that nonzero ones have
/// `|arg w|` in `[pi/3, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcCheck {
    pub points: usize,
    pub nonzero: usize,
    pub max_violation: f64,
    pub ok: bool,
}

fn arg_window_violation(w: Complex64) -> f64 {
    let t = w.arg().abs();
    (FRAC_PI_3 - t).max(t - FRAC_PI_2).max(0.0)
}

pub fn arc_argument_check(points: usize) -> ArcCheck {
    let mut nonzero = 0;
    let mut worst: f64 = 0.0;
    for k in 0..points {
        let phi = 2.0 * PI / 3.0 + (2.0 * PI / 3.0) * k as f64 / (points.max(2) - 1) as f64;
        let w = 1.0 + Complex64::from_polar(1.0, phi);
        if w.norm() <= 1e-12 {
            continue;
        }
        nonzero += 1;
        worst = worst.max(arg_window_violation(w));
    }
    ArcCheck {
        points,
        nonzero,
        max_violation: worst,
        ok: worst <= ARC_TOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineControl {
    pub mu: Complex64,
    pub sigma2: f64,
    pub one_minus_a: f64,
    /// `U_xi(a) = E log(1/|a - xi|)`.
    pub u_xi_at_a: f64,
    /// `|mu| / sigma^2`. Ratios are absent when `sigma^2` is at rounding level.
    pub mu_ratio: Option<f64>,
    /// `(1 - a) / sigma^2`.
    pub one_minus_a_ratio: Option<f64>,
    /// `|U_xi(a)| / sigma^2`.
    pub u_ratio: Option<f64>,
}

/// `sigma^2` distinguishable from rounding in `E|xi|^2`.
fn resolved_variance(s: &measures::MomentSummary) -> Option<f64> {
    (s.sigma2 > 64.0 * f64::EPSILON * s.abs_second_moment).then_some(s.sigma2)
}

pub fn fine_control(inst: &SendovInstance) -> Result<FineControl> {
    let xi = EmpiricalMeasure::uniform(sendov::instance_critical_points(inst)?)?;
    let s = measures::summary(&xi);
    let a = inst.a();
    let u = potential::log_potential(&xi, Complex64::new(a, 0.0))?;
    let v = resolved_variance(&s);
    Ok(FineControl {
        mu: s.mu,
        sigma2: s.sigma2,
        one_minus_a: 1.0 - a,
        u_xi_at_a: u,
        mu_ratio: v.map(|v| s.mu.norm() / v),
        one_minus_a_ratio: v.map(|v| (1.0 - a) / v),
        u_ratio: v.map(|v| u.abs() / v),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub n: usize,
    pub m: usize,
    pub a: f64,
    /// `n ||zeta + c2/n| - 1|` per zero.
    pub zero_radius_residuals: Vec<f64>,
    /// `|n (|zeta + c2/n| - 1) - t(arg(zeta + c2/n))|` per zero.
    pub t_prediction_errors: Vec<f64>,
    /// `log|w/(a + c2/n)| - (1/(n-m)) sum_j log|(a - l_j)/(zeta - l_j)|` per zero.
    pub ten_residuals: Vec<f64>,
    /// Half-step offset grid, so that no angle meets an arc endpoint.
    pub lamin_thetas: Vec<f64>,
    /// `dd` left side on `lamin_thetas`.
    pub lamin_values: Vec<f64>,
    /// Mean of the `dd` left side, with near-circle `l_j` in closed form.
    pub lamin_mean: f64,
    pub lamin_mean_expected: f64,
    pub sum_lambda_sq: Complex64,
    /// `-1/2 sum |l_j|^2`.
    pub half_sum_abs_sq: f64,
    pub arc_argument_ok: bool,
    pub f_at_a_residual: f64,
    pub critical_outside_disk_a: bool,
    pub roots_in_disk: bool,
    pub fine: FineControl,
}

impl FamilyReport {
    pub fn max_zon(&self) -> f64 {
        self.zero_radius_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_t_error(&self) -> f64 {
        self.t_prediction_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_ten(&self) -> f64 {
        self.ten_residuals.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `Re sum l_j^2 <= -1/2 sum |l_j|^2`.
    pub fn summ_bound_holds(&self) -> bool {
        self.sum_lambda_sq.re <= -self.half_sum_abs_sq + 1e-12
    }
}

pub fn verify_family(p: &FamilyParams) -> Result<FamilyReport> {
    let inst = miller_family(p)?;
    family_report(p, &inst)
}

/// Diagnostics for an instance already built from `p`.
pub fn family_report(p: &FamilyParams, inst: &SendovInstance) -> Result<FamilyReport> {
    let (n, m) = (p.n, p.m());
    let nf = n as f64;
    let s = p.shift();
    let a = p.a();
    let k = (n - m) as f64;
    let mut zon = Vec::with_capacity(n);
    let mut terr = Vec::with_capacity(n);
    let mut ten = Vec::with_capacity(n);
    for &z in inst.roots() {
        let w = z + s;
        let r = w.norm();
        zon.push(nf * (r - 1.0).abs());
        terr.push((nf * (r - 1.0) - predicted_zero_shift(p, w.arg())?).abs());
        let rhs = numeric::sum(p.lambdas.iter().map(|l| ((a - l) / (z - l)).norm().ln())) / k;
        ten.push((r / (a + s)).ln() - rhs);
    }
    let lamin_thetas = dd_grid();
    let lamin_values = lamin_thetas.iter().map(|&t| dd_lhs(p, t)).collect::<Result<Vec<_>>>()?;
    let lamin_mean_expected = t_mean_closed_form(p);
    let lamin_mean = dd_mean(p)?;
    let sum_lambda_sq = numeric::csum(p.lambdas.iter().map(|l| l * l));
    let half_sum_abs_sq = 0.5 * numeric::sum(p.lambdas.iter().map(|l| l.norm_sqr()));
    let arc_argument_ok = p
        .lambdas
        .iter()
        .filter(|l| l.norm() > 1e-12 && ((*l - 1.0).norm() - 1.0).abs() <= ARC_TOL)
        .all(|l| arg_window_violation(*l) <= ARC_TOL);
    let xi = sendov::instance_critical_points(inst)?;
    Ok(FamilyReport {
        n,
        m,
        a,
        zero_radius_residuals: zon,
        t_prediction_errors: terr,
        ten_residuals: ten,
        lamin_thetas,
        lamin_values,
        lamin_mean,
        lamin_mean_expected,
        sum_lambda_sq,
        half_sum_abs_sq,
        arc_argument_ok,
        f_at_a_residual: inst.f().backward_error(Complex64::new(a, 0.0)),
        critical_outside_disk_a: xi.iter().all(|x| (x - a).norm() > 1.0 + crate::sendov::REGION_TOL),
        roots_in_disk: inst.roots_in_disk(),
        fine: fine_control(inst)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentReport {
    /// `E xi^2` from the critical points.
    pub direct: Complex64,
    /// `4 int e^{2 i theta} U_xi(e^{i theta}) d theta / 2 pi`.
    pub fourier: Complex64,
    pub discrepancy: f64,
    pub agree: bool,
    /// `E Re(xi^2) / sigma^2`; absent when `sigma^2` is at rounding level.
    pub rexi2_ratio: Option<f64>,
    /// Critical points within `0.05` of the unit circle.
    pub near_circle: usize,
}

pub fn second_moment_test(inst: &SendovInstance) -> Result<SecondMomentReport> {
    let xi = EmpiricalMeasure::uniform(sendov::instance_critical_points(inst)?)?;
    let s = measures::summary(&xi);
    let direct = s.second_moment;
    let fc = potential::circle_fourier_coeff(&xi, 1.0, 2, potential::default_nodes(xi.len()))?;
    let fourier = fc.value * 4.0;
    let discrepancy = (direct - fourier).norm();
    Ok(SecondMomentReport {
        direct,
        fourier,
        discrepancy,
        agree: discrepancy <= SECOND_MOMENT_TOL,
        rexi2_ratio: resolved_variance(&s).map(|v| direct.re / v),
        near_circle: fc.closed_form_atoms,
    })
}
