//! Argument-principle winding of `(1/n) f'/f` on circles, and radius selection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{LabError, Result};
use crate::numeric;
use crate::poly::{Polynomial, SendovInstance};
use crate::rootfind;
use crate::sendov;

pub const INITIAL_SAMPLES: usize = 1024;
/// Cap on the total number of contour evaluations.
pub const SAMPLE_BUDGET: usize = 1 << 20;
/// Zeros of `f` or `f'` closer than this to the circle are rejected.
pub const CONTOUR_CLEARANCE: f64 = 1e-8;
/// Accumulated argument must be within this of `2 pi` times an integer.
pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const DEFAULT_R1: f64 = 0.2;
pub const DEFAULT_R2: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub winding: i64,
    /// `min |g|` over the evaluated contour points.
    pub min_modulus: f64,
    pub radius: f64,
    pub samples_used: usize,
}

/// `(1/n) f'(z)/f(z)` with compensated Horner; for `|z| > 1` the reversed
/// polynomials are used so that large degrees do not overflow.
pub fn log_derivative(f: &Polynomial, fp: &Polynomial, z: Complex64) -> Complex64 {
    let n = f.degree() as f64;
    if z.norm() <= 1.0 {
        numeric::compensated_horner(fp.coeffs(), z) / numeric::compensated_horner(f.coeffs(), z) / n
    } else {
        let y = 1.0 / z;
        let big_f = numeric::compensated_horner_reversed(f.coeffs(), y);
        let big_fp = numeric::compensated_horner_reversed(fp.coeffs(), y);
        big_fp * y / big_f / n
    }
}

/// Winding number of `g` around the origin along `|z| = r`, by accumulated
/// principal arguments. Intervals whose argument jump reaches `pi/2` are
/// bisected.
pub fn winding_of(g: impl Fn(Complex64) -> Complex64, r: f64) -> Result<WindingResult> {
    struct State<'a> {
        g: &'a dyn Fn(Complex64) -> Complex64,
        r: f64,
        used: usize,
        min_modulus: f64,
    }
    impl State<'_> {
        fn eval(&mut self, t: f64) -> Result<Complex64> {
            self.used += 1;
            if self.used > SAMPLE_BUDGET {
                return Err(LabError::RefinementBudget);
            }
            let v = (self.g)(Complex64::from_polar(self.r, t));
            let m = v.norm();
            if !(m > 0.0 && m.is_finite()) {
                return Err(LabError::ContourTooClose { distance: 0.0 });
            }
            self.min_modulus = self.min_modulus.min(m);
            Ok(v)
        }

        fn sweep(&mut self, t0: f64, g0: Complex64, t1: f64, g1: Complex64) -> Result<f64> {
            let d = (g1 * g0.conj()).arg();
            if d.abs() < FRAC_PI_2 {
                return Ok(d);
            }
            let tm = 0.5 * (t0 + t1);
            if tm <= t0 || tm >= t1 {
                return Err(LabError::RefinementBudget);
            }
            let gm = self.eval(tm)?;
            Ok(self.sweep(t0, g0, tm, gm)? + self.sweep(tm, gm, t1, g1)?)
        }
    }

    if !(r > 0.0 && r.is_finite()) {
        return Err(LabError::InvalidParameter(format!("radius {r}")));
    }
    let mut st = State {
        g: &g,
        r,
        used: 0,
        min_modulus: f64::INFINITY,
    };
    let angles: Vec<f64> = numeric::circle_angles(INITIAL_SAMPLES).chain([TAU]).collect();
    let mut values = Vec::with_capacity(angles.len());
    for &t in &angles[..INITIAL_SAMPLES] {
        values.push(st.eval(t)?);
    }
    values.push(values[0]);
    let mut total = numeric::NeumaierSum::new();
    for i in 0..INITIAL_SAMPLES {
        total.add(st.sweep(angles[i], values[i], angles[i + 1], values[i + 1])?);
    }
    let turns = total.value() / TAU;
    let winding = turns.round();
    let off = (total.value() - winding * TAU).abs();
    if off > INTEGRALITY_TOL {
        return Err(LabError::NonIntegralWinding(off));
    }
    Ok(WindingResult {
        winding: winding as i64,
        min_modulus: st.min_modulus,
        radius: r,
        samples_used: st.used,
    })
}

fn zeros_and_critical(f: &Polynomial) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let zeros = match f.roots() {
        Some(r) => r.to_vec(),
        None => rootfind::find_roots(f, rootfind::DEFAULT_TOL)?
            .require_converged()?
            .points,
    };
    let crit = sendov::critical_points(f)?.points;
    Ok((zeros, crit))
}

fn clearance(points: &[Complex64], r: f64) -> f64 {
    points.iter().map(|p| (p.norm() - r).abs()).fold(f64::INFINITY, f64::min)
}

/// Winding of `(1/n) f'/f` on `|z| = r`, which counts zeros of `f'` minus
/// zeros of `f` inside.
pub fn winding_number(f: &Polynomial, r: f64) -> Result<WindingResult> {
    if f.degree() < 2 {
        return Err(LabError::DegreeTooLow {
            required: 2,
            actual: f.degree(),
        });
    }
    let (zeros, crit) = zeros_and_critical(f)?;
    let d = clearance(&zeros, r).min(clearance(&crit, r));
    if d < CONTOUR_CLEARANCE {
        return Err(LabError::ContourTooClose { distance: d });
    }
    let fp = f.derivative();
    winding_of(|z| log_derivative(f, &fp, z), r)
}

/// `#{xi : |xi| < r} - #{zeta : |zeta| < r}`.
pub fn count_inside(zeros: &[Complex64], critical: &[Complex64], r: f64) -> Result<i64> {
    let d = clearance(zeros, r).min(clearance(critical, r));
    if d < CONTOUR_CLEARANCE {
        return Err(LabError::ContourTooClose { distance: d });
    }
    let inside = |v: &[Complex64]| v.iter().filter(|p| p.norm() < r).count() as i64;
    Ok(inside(critical) - inside(zeros))
}

pub fn zero_pole_count(f: &Polynomial, r: f64) -> Result<i64> {
    let (zeros, crit) = zeros_and_critical(f)?;
    count_inside(&zeros, &crit, r)
}

/// Count using the instance's closed-form critical points when attached.
pub fn instance_zero_pole_count(inst: &SendovInstance, r: f64) -> Result<i64> {
    let crit = sendov::instance_critical_points(inst)?;
    count_inside(inst.roots(), &crit, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusChoice {
    pub radius: f64,
    /// `E[1_{|zeta| <= 1/2} / max(|r - |zeta||, n^-10)]` at the chosen radius.
    pub objective: f64,
    pub candidates: usize,
}

/// Grid minimisation over `10 n` equispaced radii in `[r1, r2]`. Candidates
/// within `n^-10` of a zero or critical point modulus are inadmissible; ties
/// keep the smallest radius.
pub fn select_radius_from(zeros: &[Complex64], critical: &[Complex64], r1: f64, r2: f64) -> Result<RadiusChoice> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(LabError::InvalidParameter(format!("need 0 < r1 < r2, got {r1}, {r2}")));
    }
    let n = zeros.len();
    let floor = (n as f64).powi(-10);
    let candidates = 10 * n;
    let inner: Vec<f64> = zeros.iter().map(|z| z.norm()).filter(|m| *m <= 0.5).collect();
    let moduli: Vec<f64> = zeros.iter().chain(critical).map(|z| z.norm()).collect();
    let mut best: Option<RadiusChoice> = None;
    for k in 0..candidates {
        let r = if candidates == 1 {
            r1
        } else {
            r1 + (r2 - r1) * k as f64 / (candidates - 1) as f64
        };
        if moduli.iter().any(|m| (r - m).abs() < floor) {
            continue;
        }
        let objective = numeric::sum(inner.iter().map(|m| 1.0 / (r - m).abs().max(floor))) / n as f64;
        if best.is_none_or(|b| objective < b.objective) {
            best = Some(RadiusChoice {
                radius: r,
                objective,
                candidates,
            });
        }
    }
    best.ok_or(LabError::NoAdmissibleRadius { r1, r2 })
}

pub fn select_radius(f: &Polynomial, r1: f64, r2: f64) -> Result<RadiusChoice> {
    let (zeros, crit) = zeros_and_critical(f)?;
    select_radius_from(&zeros, &crit, r1, r2)
}

pub fn select_radius_instance(inst: &SendovInstance, r1: f64, r2: f64) -> Result<RadiusChoice> {
    let crit = sendov::instance_critical_points(inst)?;
    select_radius_from(inst.roots(), &crit, r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::from_roots;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn monomial_plus(n: usize, low: &[(usize, f64)]) -> Polynomial {
        let mut coeffs = vec![c(0.0, 0.0); n + 1];
        coeffs[n] = c(1.0, 0.0);
        for &(k, v) in low {
            coeffs[k] = c(v, 0.0);
        }
        Polynomial::from_coeffs(coeffs).unwrap()
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_number(&monomial_plus(16, &[(0, -1.0)]), 0.5).unwrap().winding, 15);
        assert_eq!(winding_number(&monomial_plus(10, &[(1, -1.0)]), 0.5).unwrap().winding, -1);
        assert_eq!(winding_number(&monomial_plus(2, &[(0, -1.0)]), 0.5).unwrap().winding, 1);
    }

    #[test]
    fn winding_outside_all_zeros() {
        // Outside everything: (n - 1) - n.
        let f = monomial_plus(40, &[(0, -1.0), (3, 0.5)]);
        let w = winding_number(&f, 3.0).unwrap();
        assert_eq!(w.winding, -1);
        assert!(w.min_modulus > 0.0);
        assert!(w.samples_used >= INITIAL_SAMPLES);
    }

    #[test]
    fn winding_rejects_contour_through_zero() {
        let f = monomial_plus(4, &[(0, -1.0)]);
        assert!(matches!(winding_number(&f, 1.0), Err(LabError::ContourTooClose { .. })));
    }

    #[test]
    fn zero_pole_examples() {
        assert_eq!(zero_pole_count(&monomial_plus(12, &[(0, -1.0)]), 0.5).unwrap(), 11);
        assert_eq!(zero_pole_count(&monomial_plus(10, &[(1, -1.0)]), 0.9).unwrap(), 8);
        assert_eq!(zero_pole_count(&monomial_plus(2, &[(0, -1.0)]), 2.0).unwrap(), -1);
        assert!(zero_pole_count(&monomial_plus(2, &[(0, -1.0)]), 1.0).is_err());
    }

    #[test]
    fn winding_invariant_under_scaling_and_rotation() {
        let f = from_roots(&[c(0.2, 0.1), c(-0.6, 0.3), c(0.5, -0.7), c(0.1, 0.9)], c(1.0, 0.0)).unwrap();
        let r = 0.45;
        let w = winding_number(&f, r).unwrap().winding;
        assert_eq!(w, zero_pole_count(&f, r).unwrap());
        assert_eq!(winding_number(&f.scaled(c(-2.0, 3.0)).unwrap(), r).unwrap().winding, w);
        assert_eq!(winding_number(&f.rotated(1.1), r).unwrap().winding, w);
    }

    #[test]
    fn select_radius_on_unity_has_zero_objective() {
        let f = monomial_plus(8, &[(0, -1.0)]);
        let ch = select_radius(&f, 0.2, 0.4).unwrap();
        assert_eq!(ch.objective, 0.0);
        assert_eq!(ch.radius, 0.2);
        assert_eq!(ch.candidates, 80);
    }

    #[test]
    fn select_radius_avoids_single_modulus() {
        let zeros = [c(0.3, 0.0), c(0.9, 0.1), c(-0.2, 0.95)];
        let crit = [c(0.8, 0.8)];
        let ch = select_radius_from(&zeros, &crit, 0.25, 0.35).unwrap();
        let grid: Vec<f64> = (0..30).map(|k| 0.25 + 0.1 * k as f64 / 29.0).collect();
        let best = grid.iter().map(|r| (r - 0.3f64).abs()).fold(0.0, f64::max);
        assert!(((ch.radius - 0.3).abs() - best).abs() < 1e-15);
        assert!((ch.objective - 1.0 / (3.0 * best)).abs() < 1e-12);
    }

    #[test]
    fn select_radius_bad_interval() {
        assert!(select_radius_from(&[c(0.0, 0.0)], &[], 0.4, 0.2).is_err());
    }
}
