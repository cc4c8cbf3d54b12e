//! Empirical laws of zeros and critical points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric;
use crate::poly::{Polynomial, SendovInstance};
use crate::rootfind::{self, RootSet};
use crate::sendov::{self, Region};

/// Tolerance on the total mass of a measure.
pub const MASS_TOL: f64 = 1e-12;
/// Tolerance on `E|x|^2 = |mu|^2 + sigma^2`, relative to `max(1, E|x|^2)`.
pub const VAR_IDENT_TOL: f64 = 1e-12;

/// Finitely supported probability measure; repeated points carry multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct EmpiricalMeasure {
    points: Vec<Complex64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    points: Vec<Complex64>,
    weights: Vec<f64>,
}

impl TryFrom<MeasureRepr> for EmpiricalMeasure {
    type Error = LabError;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        EmpiricalMeasure::new(r.points, r.weights)
    }
}

impl From<EmpiricalMeasure> for MeasureRepr {
    fn from(m: EmpiricalMeasure) -> Self {
        MeasureRepr {
            points: m.points,
            weights: m.weights,
        }
    }
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(LabError::EmptyRoots);
        }
        if points.len() != weights.len() {
            return Err(LabError::InvalidParameter(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(LabError::NonFinite("measure points"));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(LabError::InvalidParameter("negative or non-finite weight".into()));
        }
        let mass = numeric::sum(weights.iter().copied());
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(LabError::InvalidParameter(format!("total mass {mass}")));
        }
        Ok(Self { points, weights })
    }

    /// Weights `1/k` on `k` points.
    pub fn uniform(points: Vec<Complex64>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Self::new(points, weights)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Compensated `sum w_i g(x_i)`.
    pub fn expect(&self, g: impl Fn(Complex64) -> f64) -> f64 {
        numeric::sum(self.points.iter().zip(&self.weights).map(|(z, w)| w * g(*z)))
    }

    /// Compensated `sum w_i g(x_i)` for complex `g`.
    pub fn expect_complex(&self, g: impl Fn(Complex64) -> Complex64) -> Complex64 {
        numeric::csum(self.points.iter().zip(&self.weights).map(|(z, w)| g(*z) * w))
    }
}

pub fn empirical_measure(rs: &RootSet) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::uniform(rs.points.clone())
}

/// `E x^k`; `k` must be nonnegative.
pub fn moment(m: &EmpiricalMeasure, k: i64) -> Result<Complex64> {
    if k < 0 {
        return Err(LabError::InvalidParameter(format!("moment order {k}")));
    }
    let k = i32::try_from(k).map_err(|_| LabError::InvalidParameter(format!("moment order {k}")))?;
    Ok(m.expect_complex(|z| z.powi(k)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mu: Complex64,
    /// `E|x - mu|^2`.
    pub sigma2: f64,
    /// `E x^2`.
    pub second_moment: Complex64,
    /// `E|x|^2`.
    pub abs_second_moment: f64,
    /// `|E|x|^2 - |mu|^2 - sigma^2|`.
    pub var_ident_residual: f64,
}

pub fn summary(m: &EmpiricalMeasure) -> MomentSummary {
    let mu = m.expect_complex(|z| z);
    let sigma2 = m.expect(|z| (z - mu).norm_sqr());
    let second_moment = m.expect_complex(|z| z * z);
    let abs_second_moment = m.expect(|z| z.norm_sqr());
    let var_ident_residual = (abs_second_moment - mu.norm_sqr() - sigma2).abs();
    debug_assert!(var_ident_residual <= VAR_IDENT_TOL * abs_second_moment.max(1.0));
    MomentSummary {
        mu,
        sigma2,
        second_moment,
        abs_second_moment,
        var_ident_residual,
    }
}

/// `|E zeta - E xi|` for the zeros and critical points of `f`.
pub fn check_matching_mean(f: &Polynomial) -> Result<f64> {
    let zeros = match f.roots() {
        Some(r) => r.to_vec(),
        None => rootfind::find_roots(f, rootfind::DEFAULT_TOL)?
            .require_converged()?
            .points,
    };
    let xi = sendov::critical_points(f)?;
    let mz = numeric::csum(zeros.iter().copied()) / zeros.len() as f64;
    let mx = numeric::csum(xi.points.iter().copied()) / xi.len() as f64;
    Ok((mz - mx).norm())
}

/// `E log|z - x|`.
pub fn expect_log_distance(m: &EmpiricalMeasure, z: Complex64) -> Result<f64> {
    if m.points.iter().zip(&m.weights).any(|(p, w)| *p == z && *w > 0.0) {
        return Err(LabError::AtomCollision(format!("{z}")));
    }
    Ok(m.expect(|p| (z - p).norm().ln()))
}

pub fn prob_in_region(m: &EmpiricalMeasure, r: &Region) -> Result<f64> {
    r.validate()?;
    Ok(numeric::sum(
        m.points
            .iter()
            .zip(&m.weights)
            .filter(|(p, _)| r.contains(**p))
            .map(|(_, w)| *w),
    ))
}

/// Log-expectations that vanish at rate `1/n` when zeros crowd the unit
/// circle and critical points crowd `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaReport {
    pub n: usize,
    /// `E log(1/|zeta|)`; `None` when a zero sits at the origin.
    pub log_inv_zeta: Option<f64>,
    pub scaled_log_inv_zeta: Option<f64>,
    /// `E log|xi - a|`; `None` when a critical point equals `a`.
    pub log_xi_minus_a: Option<f64>,
    pub scaled_log_xi_minus_a: Option<f64>,
    pub zero_at_origin: bool,
}

pub fn quantitative_zetas(inst: &SendovInstance) -> Result<ZetaReport> {
    let n = inst.degree();
    let zeros = EmpiricalMeasure::uniform(inst.roots().to_vec())?;
    let xi = EmpiricalMeasure::uniform(sendov::instance_critical_points(inst)?)?;
    let zero_at_origin = zeros.points.iter().any(|z| z.norm() == 0.0);
    let log_inv_zeta = (!zero_at_origin).then(|| -zeros.expect(|z| z.norm().ln()));
    let a = Complex64::new(inst.a(), 0.0);
    let log_xi_minus_a = expect_log_distance(&xi, a).ok();
    let nf = n as f64;
    Ok(ZetaReport {
        n,
        log_inv_zeta,
        scaled_log_inv_zeta: log_inv_zeta.map(|v| nf * v),
        log_xi_minus_a,
        scaled_log_xi_minus_a: log_xi_minus_a.map(|v| nf * v),
        zero_at_origin,
    })
}

/// Right-hand scale `a + log n / n^(1/3)` of the region-probability bound.
pub fn pzeta_scale(a: f64, n: usize) -> f64 {
    let nf = n as f64;
    a + nf.ln() / nf.cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::from_roots;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unity_points(n: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect()
    }

    #[test]
    fn measure_of_two_roots() {
        let rs = RootSet {
            points: vec![c(1.0, 0.0), c(-1.0, 0.0)],
            residuals: vec![0.0; 2],
            converged: true,
        };
        let m = empirical_measure(&rs).unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let s = summary(&m);
        assert_eq!(s.mu, c(0.0, 0.0));
        assert_eq!(s.sigma2, 1.0);
        assert_eq!(s.second_moment, c(1.0, 0.0));
    }

    #[test]
    fn uniform_weights_sum_to_one() {
        for k in 1..200 {
            let m = EmpiricalMeasure::uniform(vec![c(0.0, 0.0); k]).unwrap();
            let mass = numeric::sum(m.weights().iter().copied());
            assert!((mass - 1.0).abs() <= f64::EPSILON, "k = {k}");
        }
    }

    #[test]
    fn rejects_bad_measures() {
        assert!(EmpiricalMeasure::uniform(vec![]).is_err());
        assert!(EmpiricalMeasure::new(vec![c(0.0, 0.0)], vec![0.5]).is_err());
        assert!(EmpiricalMeasure::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn point_mass_summary() {
        let z = c(0.3, -0.4);
        let s = summary(&EmpiricalMeasure::uniform(vec![z]).unwrap());
        assert_eq!(s.mu, z);
        assert_eq!(s.sigma2, 0.0);
        assert_eq!(s.second_moment, z * z);
    }

    #[test]
    fn moments_of_roots_of_unity() {
        let n = 12;
        let m = EmpiricalMeasure::uniform(unity_points(n)).unwrap();
        assert!(moment(&m, 1).unwrap().norm() < 1e-15);
        assert!((moment(&m, n as i64).unwrap() - 1.0).norm() < 1e-13);
        assert_eq!(moment(&m, 0).unwrap(), c(1.0, 0.0));
        assert!(moment(&m, -1).is_err());
        let pm = EmpiricalMeasure::uniform(vec![c(0.0, 0.0)]).unwrap();
        assert_eq!(moment(&pm, 3).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn matching_mean_examples() {
        let n = 10;
        let mut coeffs = vec![c(0.0, 0.0); n + 1];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[n] = c(1.0, 0.0);
        let p = Polynomial::with_roots(coeffs, unity_points(n)).unwrap();
        assert!(check_matching_mean(&p).unwrap() < 1e-15);
        let q = from_roots(&[c(0.9, 0.0), c(0.1, 0.0), c(-0.5, 0.0)], c(1.0, 0.0)).unwrap();
        assert!(check_matching_mean(&q).unwrap() < 1e-10);
    }

    #[test]
    fn log_distance_examples() {
        let pm = EmpiricalMeasure::uniform(vec![c(0.0, 0.0)]).unwrap();
        assert_eq!(expect_log_distance(&pm, c(2.0, 0.0)).unwrap(), 2f64.ln());
        assert!(expect_log_distance(&pm, c(0.0, 0.0)).is_err());

        let n = 40;
        let m = EmpiricalMeasure::uniform(unity_points(n)).unwrap();
        assert!(expect_log_distance(&m, c(0.0, 0.0)).unwrap().abs() < 1e-15);
        let expected = (2f64.powi(n as i32) - 1.0).ln() / n as f64;
        assert!((expect_log_distance(&m, c(2.0, 0.0)).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn region_probabilities() {
        let disk = Region::ClosedDisk {
            center: c(0.0, 0.0),
            radius: 0.5,
        };
        let m = EmpiricalMeasure::uniform(unity_points(16)).unwrap();
        assert_eq!(prob_in_region(&m, &disk).unwrap(), 0.0);

        let mut pts = vec![c(0.0, 0.0)];
        pts.extend((0..9).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 9.0)));
        let m = EmpiricalMeasure::uniform(pts).unwrap();
        assert!((prob_in_region(&m, &disk).unwrap() - 0.1).abs() < 1e-15);

        let pm = EmpiricalMeasure::uniform(vec![c(0.0, 0.0)]).unwrap();
        assert_eq!(prob_in_region(&pm, &Region::Lune { a: 0.5 }).unwrap(), 0.0);
    }

    #[test]
    fn log_distance_monotone_outside_disk() {
        let m = EmpiricalMeasure::uniform(vec![c(0.5, 0.2), c(-0.9, 0.1), c(0.0, -1.0)]).unwrap();
        let dir = Complex64::from_polar(1.0, 0.7);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..50 {
            let v = expect_log_distance(&m, dir * (1.0 + 0.1 * k as f64)).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn measure_json_round_trip() {
        let m = EmpiricalMeasure::uniform(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"points":[[1.0,0.0],[0.0,1.0]],"weights":[0.5,0.5]}"#);
        let back: EmpiricalMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
