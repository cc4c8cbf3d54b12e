//! Complex polynomials held in a dual coefficient/root representation.
//!
//! The coefficient list drives Horner evaluation and differentiation; the root
//! list, when present, is the source of truth for anything evaluated in the
//! log domain, where `z^n` would overflow binary64 long before the product of
//! root distances does.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric;

/// Relative tolerance for the root/coefficient consistency check.
pub const ROOT_CONSISTENCY_TOL: f64 = 1e-9;
/// Degree up to which the consistency check is performed on construction.
pub const ROOT_CONSISTENCY_MAX_DEGREE: usize = 64;
/// `|leading - 1|` below which a polynomial counts as monic.
pub const MONIC_TOL: f64 = 1e-12;
/// Degree above which [`Precision::for_degree`] selects compensated evaluation.
pub const COMPENSATED_DEGREE: usize = 512;

/// Arithmetic used for Horner evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    Binary64,
    /// Horner recurrence carried in double-double arithmetic.
    Compensated,
}

impl Precision {
    pub fn for_degree(n: usize) -> Self {
        if n > COMPENSATED_DEGREE {
            Precision::Compensated
        } else {
            Precision::Binary64
        }
    }
}

/// Polynomial with coefficients ascending by power and an optional root list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialRepr", into = "PolynomialRepr")]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
    roots: Option<Vec<Complex64>>,
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    coeffs: Vec<Complex64>,
    roots: Option<Vec<Complex64>>,
    leading: Complex64,
}

impl TryFrom<PolynomialRepr> for Polynomial {
    type Error = LabError;

    fn try_from(r: PolynomialRepr) -> Result<Self> {
        if r.coeffs.last() != Some(&r.leading) {
            return Err(LabError::InvalidParameter(
                "leading must equal the last coefficient".into(),
            ));
        }
        match r.roots {
            Some(roots) => Polynomial::with_roots(r.coeffs, roots),
            None => Polynomial::from_coeffs(r.coeffs),
        }
    }
}

impl From<Polynomial> for PolynomialRepr {
    fn from(p: Polynomial) -> Self {
        let leading = p.leading();
        PolynomialRepr {
            coeffs: p.coeffs,
            roots: p.roots,
            leading,
        }
    }
}

fn check_finite(values: &[Complex64], what: &'static str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(LabError::NonFinite(what))
    }
}

/// Leja order: start from the largest modulus, then repeatedly take the root
/// maximising the product of distances to those already chosen. Keeps the
/// partial products of [`expand`] well scaled.
fn leja_order(roots: &[Complex64]) -> Vec<Complex64> {
    let mut rest = roots.to_vec();
    let mut out = Vec::with_capacity(roots.len());
    let mut score: Vec<f64> = vec![0.0; rest.len()];
    let first = (0..rest.len())
        .max_by(|&i, &j| rest[i].norm().total_cmp(&rest[j].norm()).then(j.cmp(&i)))
        .expect("nonempty");
    let mut last = rest.swap_remove(first);
    score.swap_remove(first);
    out.push(last);
    while !rest.is_empty() {
        let mut best = 0;
        for i in 0..rest.len() {
            let d = (rest[i] - last).norm();
            score[i] += if d > 0.0 { d.ln() } else { f64::NEG_INFINITY };
            if score[i] > score[best] {
                best = i;
            }
        }
        last = rest.swap_remove(best);
        score.swap_remove(best);
        out.push(last);
    }
    out
}

/// Expand `leading * prod (z - r)` by incremental convolution in Leja order.
fn expand(roots: &[Complex64], leading: Complex64) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(roots.len() + 1);
    c.push(Complex64::new(1.0, 0.0));
    for &r in &leja_order(roots) {
        c.push(Complex64::new(0.0, 0.0));
        for k in (1..c.len()).rev() {
            c[k] = c[k - 1] - r * c[k];
        }
        c[0] = -r * c[0];
    }
    c.iter_mut().for_each(|x| *x *= leading);
    c
}

impl Polynomial {
    /// Build `leading * prod (z - r_i)`; the roots are stored verbatim.
    pub fn from_roots(roots: &[Complex64], leading: Complex64) -> Result<Self> {
        if roots.is_empty() {
            return Err(LabError::EmptyRoots);
        }
        if leading == Complex64::new(0.0, 0.0) {
            return Err(LabError::ZeroLeading);
        }
        check_finite(roots, "roots")?;
        check_finite(&[leading], "leading coefficient")?;
        Ok(Self {
            coeffs: expand(roots, leading),
            roots: Some(roots.to_vec()),
        })
    }

    /// Polynomial from ascending coefficients; the last one must be nonzero.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        check_finite(&coeffs, "coefficients")?;
        match coeffs.last() {
            None => Err(LabError::DegreeTooLow {
                required: 1,
                actual: 0,
            }),
            Some(c) if *c == Complex64::new(0.0, 0.0) => Err(LabError::ZeroLeading),
            Some(_) if coeffs.len() < 2 => Err(LabError::DegreeTooLow {
                required: 1,
                actual: 0,
            }),
            Some(_) => Ok(Self {
                coeffs,
                roots: None,
            }),
        }
    }

    /// Polynomial with both representations supplied. For degrees up to
    /// [`ROOT_CONSISTENCY_MAX_DEGREE`] the roots must reproduce the
    /// coefficients to [`ROOT_CONSISTENCY_TOL`] relative error.
    pub fn with_roots(coeffs: Vec<Complex64>, roots: Vec<Complex64>) -> Result<Self> {
        let mut p = Self::from_coeffs(coeffs)?;
        check_finite(&roots, "roots")?;
        if roots.len() != p.degree() {
            return Err(LabError::InvalidParameter(format!(
                "{} roots supplied for degree {}",
                roots.len(),
                p.degree()
            )));
        }
        if p.degree() <= ROOT_CONSISTENCY_MAX_DEGREE {
            let err = relative_coeff_distance(&expand(&roots, p.leading()), &p.coeffs);
            if err > ROOT_CONSISTENCY_TOL {
                return Err(LabError::InconsistentRoots(err));
            }
        }
        p.roots = Some(roots);
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn roots(&self) -> Option<&[Complex64]> {
        self.roots.as_deref()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    pub fn is_monic(&self) -> bool {
        (self.leading() - 1.0).norm() <= MONIC_TOL
    }

    /// Horner evaluation in binary64.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn evaluate_with(&self, z: Complex64, precision: Precision) -> Complex64 {
        match precision {
            Precision::Binary64 => self.evaluate(z),
            Precision::Compensated => numeric::compensated_horner(&self.coeffs, z),
        }
    }

    /// `(p(z), p'(z))` by a single Horner sweep.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum_j |c_j| |z|^j`, the natural scale of Horner rounding at `z`.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Backward error `|p(z)| / sum_j |c_j||z|^j`.
    pub fn backward_error(&self, z: Complex64) -> f64 {
        let scale = self.abs_scale(z);
        if scale == 0.0 {
            return 0.0;
        }
        self.evaluate(z).norm() / scale
    }

    /// `log|p(z)|` as `log|leading| + sum log|z - r_i|`.
    pub fn eval_log_abs(&self, z: Complex64) -> Result<f64> {
        let roots = self.roots.as_ref().ok_or(LabError::RootsRequired)?;
        let mut acc = numeric::NeumaierSum::new();
        acc.add(self.leading().norm().ln());
        for &r in roots {
            let d = (z - r).norm();
            if d == 0.0 {
                return Err(LabError::AtomCollision(format!("{z}")));
            }
            acc.add(d.ln());
        }
        Ok(acc.value())
    }

    /// Coefficient-rule derivative; the root list is left unset.
    pub fn derivative(&self) -> Polynomial {
        let coeffs: Vec<Complex64> = if self.degree() == 0 {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect()
        };
        Polynomial {
            coeffs,
            roots: None,
        }
    }

    /// `c * p(z)`.
    pub fn scaled(&self, c: Complex64) -> Result<Polynomial> {
        if c == Complex64::new(0.0, 0.0) {
            return Err(LabError::ZeroLeading);
        }
        Ok(Polynomial {
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
            roots: self.roots.clone(),
        })
    }

    /// `p(e^{i phi} z)`; roots rotate by `e^{-i phi}`.
    pub fn rotated(&self, phi: f64) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * Complex64::from_polar(1.0, phi * k as f64))
            .collect();
        let rot = Complex64::from_polar(1.0, -phi);
        Polynomial {
            coeffs,
            roots: self
                .roots
                .as_ref()
                .map(|r| r.iter().map(|&z| z * rot).collect()),
        }
    }

    pub(crate) fn set_roots_unchecked(&mut self, roots: Vec<Complex64>) {
        debug_assert_eq!(roots.len(), self.degree());
        self.roots = Some(roots);
    }
}

fn relative_coeff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    diff / scale
}

/// Free-function form of [`Polynomial::from_roots`].
pub fn from_roots(roots: &[Complex64], leading: Complex64) -> Result<Polynomial> {
    Polynomial::from_roots(roots, leading)
}

pub fn evaluate(p: &Polynomial, z: Complex64) -> Complex64 {
    p.evaluate(z)
}

pub fn eval_log_abs(p: &Polynomial, z: Complex64) -> Result<f64> {
    p.eval_log_abs(z)
}

pub fn derivative(p: &Polynomial) -> Polynomial {
    p.derivative()
}

/// Tolerance on `|zeta|` for "inside the closed unit disk".
pub const DISK_TOL: f64 = 1e-10;
/// Distance from `a` to the nearest listed root accepted as `f(a) = 0`.
pub const ZERO_RESIDUAL_TOL: f64 = 1e-9;

/// A monic polynomial together with a distinguished real zero `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SendovInstance {
    f: Polynomial,
    a: f64,
    /// Critical points known in closed form, as a multiset. When absent they
    /// are computed numerically from `f'`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    known_critical: Option<Vec<Complex64>>,
}

impl SendovInstance {
    /// Checks monicity, `a` in `[0, 1]`, the presence of roots and `f(a) = 0`.
    /// Roots are allowed to leave the closed unit disk; see [`Self::roots_in_disk`].
    pub fn new(f: Polynomial, a: f64) -> Result<Self> {
        if !f.is_monic() {
            return Err(LabError::InvalidParameter("polynomial is not monic".into()));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(LabError::InvalidParameter(format!("a = {a} not in [0, 1]")));
        }
        if f.roots().is_none() {
            return Err(LabError::RootsRequired);
        }
        let res = f
            .roots()
            .expect("checked above")
            .iter()
            .map(|z| (z - a).norm())
            .fold(f64::INFINITY, f64::min);
        if res > ZERO_RESIDUAL_TOL {
            return Err(LabError::NotAZero(res));
        }
        Ok(Self {
            f,
            a,
            known_critical: None,
        })
    }

    /// Attach critical points known from the structure of `f`.
    pub fn with_known_critical(mut self, critical: Vec<Complex64>) -> Result<Self> {
        if critical.len() + 1 != self.f.degree() {
            return Err(LabError::InvalidParameter(format!(
                "{} critical points for degree {}",
                critical.len(),
                self.f.degree()
            )));
        }
        self.known_critical = Some(critical);
        Ok(self)
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    pub fn roots(&self) -> &[Complex64] {
        self.f.roots().expect("instance always carries roots")
    }

    pub fn known_critical(&self) -> Option<&[Complex64]> {
        self.known_critical.as_deref()
    }

    pub fn roots_in_disk(&self) -> bool {
        self.roots().iter().all(|z| z.norm() <= 1.0 + DISK_TOL)
    }
}

/// Make `p` monic and rotate so that root `zero_index` lands on `a = |zeta_0|`.
pub fn normalize_sendov(p: &Polynomial, zero_index: usize) -> Result<SendovInstance> {
    let roots = p.roots().ok_or(LabError::RootsRequired)?;
    let z0 = *roots.get(zero_index).ok_or(LabError::IndexOutOfRange {
        index: zero_index,
        len: roots.len(),
    })?;
    if let Some(z) = roots.iter().find(|z| z.norm() > 1.0 + DISK_TOL) {
        return Err(LabError::OutsideUnitDisk(format!("{z}")));
    }
    let a = z0.norm().min(1.0);
    let phi = if a == 0.0 { 0.0 } else { z0.arg() };
    let monic = p.scaled(1.0 / p.leading())?;
    let mut rotated = monic.rotated(phi);
    // p(e^{i phi} z) has leading e^{i n phi}; undo it.
    let lead = rotated.leading();
    rotated = rotated.scaled(1.0 / lead)?;
    let mut new_roots = rotated.roots().expect("roots preserved").to_vec();
    new_roots[zero_index] = Complex64::new(a, 0.0);
    *rotated.coeffs.last_mut().expect("nonempty") = Complex64::new(1.0, 0.0);
    rotated.set_roots_unchecked(new_roots);
    SendovInstance::new(rotated, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unity_roots(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64))
            .collect()
    }

    #[test]
    fn from_roots_difference_of_squares() {
        let p = from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0)).unwrap();
        assert_eq!(p.coeffs(), &[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn from_roots_of_unity_gives_z_n_minus_one() {
        let n = 12;
        let p = from_roots(&unity_roots(n), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.coeffs()[0].re, -1.0, epsilon = 1e-12);
        for k in 1..n {
            assert!(p.coeffs()[k].norm() < 1e-12, "k={k}");
        }
        assert_eq!(p.leading(), c(1.0, 0.0));
    }

    #[test]
    fn from_roots_rejects_bad_input() {
        assert_eq!(from_roots(&[], c(1.0, 0.0)), Err(LabError::EmptyRoots));
        assert_eq!(
            from_roots(&[c(1.0, 0.0)], c(0.0, 0.0)),
            Err(LabError::ZeroLeading)
        );
    }

    #[test]
    fn evaluate_examples() {
        let p = from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0)).unwrap();
        assert_eq!(evaluate(&p, c(2.0, 0.0)), c(3.0, 0.0));
        let q = from_roots(&unity_roots(9), c(1.0, 0.0)).unwrap();
        assert!(evaluate(&q, c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn log_abs_of_monomial() {
        let n = 7;
        let p = from_roots(&vec![c(0.0, 0.0); n], c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(
            eval_log_abs(&p, c(2.0, 0.0)).unwrap(),
            n as f64 * 2f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn log_abs_of_z100_minus_one_at_two() {
        // log(2^100 - 1) = 100 log 2 + log1p(-2^-100)
        let p = from_roots(&unity_roots(100), c(1.0, 0.0)).unwrap();
        let expected = 100.0 * 2f64.ln() + (-(2f64.powi(-100))).ln_1p();
        assert_abs_diff_eq!(p.eval_log_abs(c(2.0, 0.0)).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn log_abs_requires_roots_and_rejects_collision() {
        let p = Polynomial::from_coeffs(vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(p.eval_log_abs(c(0.0, 0.0)), Err(LabError::RootsRequired));
        let q = from_roots(&[c(0.5, 0.0)], c(1.0, 0.0)).unwrap();
        assert!(matches!(
            q.eval_log_abs(c(0.5, 0.0)),
            Err(LabError::AtomCollision(_))
        ));
    }

    #[test]
    fn derivative_examples() {
        let n = 6;
        let mut coeffs = vec![c(0.0, 0.0); n + 1];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[n] = c(1.0, 0.0);
        let d = Polynomial::from_coeffs(coeffs.clone()).unwrap().derivative();
        let mut expected = vec![c(0.0, 0.0); n];
        expected[n - 1] = c(n as f64, 0.0);
        assert_eq!(d.coeffs(), expected.as_slice());
        assert!(d.roots().is_none());

        // z^n - z -> n z^{n-1} - 1
        coeffs[0] = c(0.0, 0.0);
        coeffs[1] = c(-1.0, 0.0);
        let d = Polynomial::from_coeffs(coeffs).unwrap().derivative();
        expected[0] = c(-1.0, 0.0);
        assert_eq!(d.coeffs(), expected.as_slice());

        let p = from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0)).unwrap();
        assert_eq!(p.derivative().coeffs(), &[c(0.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn compensated_horner_beats_cancellation() {
        // (z - 1)^12 near z = 1 suffers heavy cancellation in binary64.
        let p = from_roots(&vec![c(1.0, 0.0); 12], c(1.0, 0.0)).unwrap();
        let z = c(1.1, 0.0);
        // 1.1 - 1 is exact in binary64.
        let exact = (z.re - 1.0).powi(12);
        let plain = (p.evaluate(z).re - exact).abs() / exact;
        let comp = (p.evaluate_with(z, Precision::Compensated).re - exact).abs() / exact;
        assert!(comp < 1e-12, "compensated rel err {comp}");
        assert!(comp < plain);
    }

    #[test]
    fn normalize_rotated_difference_of_squares() {
        let p = from_roots(&[c(0.0, 1.0), c(0.0, -1.0)], c(1.0, 0.0)).unwrap();
        let inst = normalize_sendov(&p, 0).unwrap();
        assert_abs_diff_eq!(inst.a(), 1.0, epsilon = 1e-15);
        let r = inst.roots();
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((r[1] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(inst.f().is_monic());
    }

    #[test]
    fn normalize_roots_of_unity_is_identity() {
        let p = from_roots(&unity_roots(8), c(1.0, 0.0)).unwrap();
        let inst = normalize_sendov(&p, 0).unwrap();
        assert_eq!(inst.a(), 1.0);
        for (x, y) in inst.roots().iter().zip(unity_roots(8)) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn normalize_rejects_outside_roots_and_bad_index() {
        let p = from_roots(&[c(2.0, 0.0), c(0.1, 0.0)], c(1.0, 0.0)).unwrap();
        assert!(matches!(
            normalize_sendov(&p, 1),
            Err(LabError::OutsideUnitDisk(_))
        ));
        let q = from_roots(&[c(0.2, 0.0)], c(1.0, 0.0)).unwrap();
        assert!(matches!(
            normalize_sendov(&q, 3),
            Err(LabError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn json_schema_round_trip() {
        let p = from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0)).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"coeffs":[[-1.0,0.0],[0.0,0.0],[1.0,0.0]],"roots":[[1.0,0.0],[-1.0,0.0]],"leading":[1.0,0.0]}"#
        );
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"coeffs":[[-1.0,0.0],[1.0,0.0]],"roots":[[3.0,0.0]],"leading":[1.0,0.0]}"#;
        assert!(serde_json::from_str::<Polynomial>(bad).is_err());
        let no_roots = r#"{"coeffs":[[-1.0,0.0],[1.0,0.0]],"roots":null,"leading":[1.0,0.0]}"#;
        assert!(serde_json::from_str::<Polynomial>(no_roots)
            .unwrap()
            .roots()
            .is_none());
    }
}
