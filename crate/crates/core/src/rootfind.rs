//! Simultaneous root finding (Aberth–Ehrlich) with multiplicity clustering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric;
use crate::poly::Polynomial;

/// Default backward-error tolerance for [`find_roots`].
pub const DEFAULT_TOL: f64 = 1e-12;
/// Iteration cap for the Aberth sweep.
pub const MAX_ITERATIONS: usize = 200;

/// Zeros of a polynomial, with multiplicity, and their backward errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub points: Vec<Complex64>,
    /// `|p(z)| / sum_j |c_j||z|^j` at each point.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Points paired with residuals computed against `p`.
    pub fn from_points(p: &Polynomial, points: Vec<Complex64>, tol: f64) -> Self {
        let residuals: Vec<f64> = points
            .iter()
            .map(|&z| backward_error(p.coeffs(), z))
            .collect();
        let converged = residuals.iter().all(|&r| r <= tol);
        Self {
            points,
            residuals,
            converged,
        }
    }

    /// Turn a non-converged set into an error.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(LabError::NoConvergence(self.max_residual()))
        }
    }
}

/// Backward error evaluated through the reversed polynomial when `|z| > 1`,
/// so that large degrees never overflow.
pub fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    if r <= 1.0 {
        let (mut p, mut s) = (Complex64::new(0.0, 0.0), 0.0);
        for c in coeffs.iter().rev() {
            p = p * z + c;
            s = s * r + c.norm();
        }
        if s == 0.0 {
            0.0
        } else {
            p.norm() / s
        }
    } else {
        let y = 1.0 / z;
        let ry = y.norm();
        let (mut q, mut s) = (Complex64::new(0.0, 0.0), 0.0);
        for c in coeffs {
            q = q * y + c;
            s = s * ry + c.norm();
        }
        q.norm() / s
    }
}

/// Newton quotient `p(z)/p'(z)` and backward error at `z`. Returns `None` for
/// the quotient when `p'(z)` vanishes.
fn newton_quotient(coeffs: &[Complex64], z: Complex64) -> (Option<Complex64>, f64) {
    let n = coeffs.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    let r = z.norm();
    if r <= 1.0 {
        let (mut p, mut dp, mut s) = (zero, zero, 0.0);
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            s = s * r + c.norm();
        }
        let be = if s == 0.0 { 0.0 } else { p.norm() / s };
        if p == zero {
            return (Some(zero), 0.0);
        }
        if dp == zero {
            return (None, be);
        }
        (Some(p / dp), be)
    } else {
        // p(z) = z^n q(1/z) with q(y) = sum c_j y^{n-j}.
        let y = 1.0 / z;
        let ry = y.norm();
        let (mut q, mut dq, mut s) = (zero, zero, 0.0);
        for c in coeffs {
            dq = dq * y + q;
            q = q * y + c;
            s = s * ry + c.norm();
        }
        let be = q.norm() / s;
        if q == zero {
            return (Some(zero), 0.0);
        }
        let denom = y * (n as f64 - y * dq / q);
        if denom == zero {
            return (None, be);
        }
        (Some(1.0 / denom), be)
    }
}

/// Initial guesses from the upper convex hull of `(j, log|c_j|)`.
fn newton_polygon_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(j, c)| (j, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let sigma = 0.7;
    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i0, l0) = w[0];
        let (i1, l1) = w[1];
        let count = i1 - i0;
        let radius = ((l0 - l1) / count as f64).exp();
        for k in 0..count {
            let angle = std::f64::consts::TAU * (k as f64 / count as f64 + i0 as f64 / n as f64) + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// All roots of `p` by Aberth–Ehrlich iteration. Exact zero roots (trailing
/// zero coefficients) are split off first. The result reports
/// `converged = false` with the best iterate if some backward error stays
/// above `tol`.
pub fn find_roots(p: &Polynomial, tol: f64) -> Result<RootSet> {
    if !(tol > 0.0) {
        return Err(LabError::InvalidParameter(format!("tol = {tol}")));
    }
    let coeffs = p.coeffs();
    let zero = Complex64::new(0.0, 0.0);
    let shift = coeffs.iter().take_while(|c| **c == zero).count();
    let reduced = &coeffs[shift..];
    let mut points = vec![zero; shift];
    let d = reduced.len() - 1;
    if d == 1 {
        points.push(-reduced[0] / reduced[1]);
    } else if d > 1 {
        let mut z = aberth(reduced, MAX_ITERATIONS);
        polish(reduced, &mut z);
        points.extend(z);
    }
    Ok(RootSet::from_points(p, points, tol))
}

fn aberth(coeffs: &[Complex64], max_iter: usize) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let mut z = newton_polygon_guesses(coeffs);
    debug_assert_eq!(z.len(), d);
    let floor = 2.0 * (d as f64 + 1.0) * f64::EPSILON;
    let mut frozen = vec![false; d];
    for _ in 0..max_iter {
        let mut active = 0;
        for i in 0..d {
            if frozen[i] {
                continue;
            }
            let (quot, be) = newton_quotient(coeffs, z[i]);
            if be <= floor {
                frozen[i] = true;
                continue;
            }
            active += 1;
            let zi = z[i];
            let s = numeric::csum(
                z.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &zj)| 1.0 / (zi - zj)),
            );
            let w = match quot {
                Some(nq) => nq / (1.0 - nq * s),
                None => -1.0 / s,
            };
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[i] = zi - w;
            if w.norm() <= f64::EPSILON * zi.norm() {
                frozen[i] = true;
            }
        }
        if active == 0 {
            break;
        }
    }
    z
}

/// Newton quotient and `log|p|` from compensated evaluation.
fn compensated_quotient(coeffs: &[Complex64], z: Complex64) -> Option<(Complex64, f64)> {
    let n = (coeffs.len() - 1) as f64;
    let quot = if z.norm() <= 1.0 {
        let (p, dp) = numeric::compensated_horner_with_derivative(coeffs, z);
        (p.norm().ln(), p / dp)
    } else {
        let y = 1.0 / z;
        let rev: Vec<Complex64> = coeffs.iter().rev().copied().collect();
        let (q, dq) = numeric::compensated_horner_with_derivative(&rev, y);
        (q.norm().ln() + n * z.norm().ln(), 1.0 / (y * (n - y * dq / q)))
    };
    let (log_abs, nq) = quot;
    (nq.re.is_finite() && nq.im.is_finite()).then_some((nq, log_abs))
}

/// Two Aberth sweeps with compensated evaluation. A correction is kept only
/// if the compensated `|p|` does not grow.
fn polish(coeffs: &[Complex64], z: &mut [Complex64]) {
    for _ in 0..2 {
        for i in 0..z.len() {
            let zi = z[i];
            let Some((nq, before)) = compensated_quotient(coeffs, zi) else {
                continue;
            };
            if before == f64::NEG_INFINITY {
                continue;
            }
            let s = numeric::csum(
                z.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &zj)| 1.0 / (zi - zj)),
            );
            let cand = zi - nq / (1.0 - nq * s);
            if !(cand.re.is_finite() && cand.im.is_finite()) {
                continue;
            }
            match compensated_quotient(coeffs, cand) {
                Some((_, after)) if after <= before => z[i] = cand,
                _ => {}
            }
        }
    }
}

/// Damped Newton polish. Steps that would increase `|p|` are halved up to ten
/// times; if none helps the current iterate is returned.
pub fn refine_root(p: &Polynomial, z0: Complex64, steps: usize) -> Result<Complex64> {
    let d = p.derivative();
    let mut z = z0;
    let mut val = p.evaluate(z);
    for _ in 0..steps {
        if val.norm() == 0.0 {
            break;
        }
        let dv = d.evaluate(z);
        if dv.norm() <= f64::EPSILON * d.abs_scale(z) {
            return Err(LabError::DerivativeVanishes(format!("{z}")));
        }
        let mut step = val / dv;
        let mut accepted = false;
        for _ in 0..=10 {
            let trial = z - step;
            let tv = p.evaluate(trial);
            if tv.norm() < val.norm() {
                z = trial;
                val = tv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(z)
}

/// Default single-linkage radius, `1e-6 (1 + degree)`.
pub fn default_cluster_eps(degree: usize) -> f64 {
    1e-6 * (1.0 + degree as f64)
}

/// Single-linkage clustering at radius `eps`; returns `(centroid, count)`
/// sorted by real then imaginary part. Counts sum to the number of points.
pub fn cluster_multiplicities(rs: &RootSet, eps: f64) -> Vec<(Complex64, usize)> {
    let n = rs.points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (rs.points[i] - rs.points[j]).norm() <= eps {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(rs.points[i]);
    }
    let mut out: Vec<(Complex64, usize)> = groups
        .into_values()
        .map(|g| (numeric::csum(g.iter().copied()) / g.len() as f64, g.len()))
        .collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    out
}
