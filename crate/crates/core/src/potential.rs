//! Logarithmic potentials, Stieltjes transforms, Poisson kernels, balayage and
//! circle Fourier coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measures::{self, EmpiricalMeasure};
use crate::numeric;
use crate::poly::{Polynomial, Precision};
use crate::rootfind;
use crate::sendov;

/// Minimum distance from a sample point to any zero or critical point.
pub const MIN_SAMPLE_DISTANCE: f64 = 0.05;
/// Tolerance of the balayage route cross-check.
pub const BALAYAGE_CROSS_TOL: f64 = 1e-10;
/// Series truncation threshold `rho^M < 1e-14`.
pub const SERIES_CUTOFF: f64 = 1e-14;
/// Atoms closer than this to the circle get closed-form Fourier coefficients.
pub const NEAR_CIRCLE: f64 = 0.05;
/// Minimum number of angles for balayage.
pub const MIN_BALAYAGE_NODES: usize = 64;

fn check_atom(m: &EmpiricalMeasure, z: Complex64) -> Result<()> {
    if m.points().iter().zip(m.weights()).any(|(p, w)| *p == z && *w > 0.0) {
        Err(LabError::AtomCollision(format!("{z}")))
    } else {
        Ok(())
    }
}

/// `U(z) = E log(1/|z - x|)`.
pub fn log_potential(m: &EmpiricalMeasure, z: Complex64) -> Result<f64> {
    measures::expect_log_distance(m, z).map(|v| -v)
}

/// `s(z) = E 1/(z - x)`.
pub fn stieltjes(m: &EmpiricalMeasure, z: Complex64) -> Result<Complex64> {
    check_atom(m, z)?;
    Ok(m.expect_complex(|p| 1.0 / (z - p)))
}

/// `s'(z) = -E 1/(z - x)^2`.
pub fn stieltjes_derivative(m: &EmpiricalMeasure, z: Complex64) -> Result<Complex64> {
    check_atom(m, z)?;
    Ok(-m.expect_complex(|p| {
        let d = z - p;
        1.0 / (d * d)
    }))
}

/// Disk `(center, radius)` containing `s(z)` for any law on the closed unit
/// disk, `|z| > 1`: the image of `D(z, 1)` under inversion.
pub fn stieltjes_disk(z: Complex64) -> Result<(Complex64, f64)> {
    let r2 = z.norm_sqr();
    if !(r2 > 1.0) {
        return Err(LabError::InvalidParameter(format!("|z| = {} must exceed 1", z.norm())));
    }
    Ok((z.conj() / (r2 - 1.0), 1.0 / (r2 - 1.0)))
}

pub fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs())
}

pub fn relative_residual_complex(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / 1f64.max(lhs.norm()).max(rhs.norm())
}

/// Relative residuals of the six basic relations at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub z: Complex64,
    /// `U_zeta = -(1/n) log|f|`.
    pub lf: f64,
    /// `U_xi = log n/(n-1) - log|f'|/(n-1)`.
    pub lfp: f64,
    /// `s_zeta = f'/(n f)`.
    pub logderiv_f: f64,
    /// `s_xi = f''/((n-1) f')`.
    pub logderiv_fp: f64,
    /// `U_zeta - (n-1)/n U_xi = (1/n) log|s_zeta|`.
    pub uzs: f64,
    /// `s_zeta - (n-1)/n s_xi = -(1/n) s'_zeta / s_zeta`.
    pub sz_mod: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [self.lf, self.lfp, self.logderiv_f, self.logderiv_fp, self.uzs, self.sz_mod]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub samples: Vec<IdentityResiduals>,
    /// Points closer than [`MIN_SAMPLE_DISTANCE`] to a zero or critical point.
    pub skipped: Vec<Complex64>,
    /// `|E zeta - E xi|`.
    pub mean_residual: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(IdentityResiduals::max).fold(0.0, f64::max)
    }
}

/// Evaluate the six basic relations at each point of `zs`. Measure sides use
/// the zeros and critical points; polynomial sides use compensated Horner on
/// the coefficients of `f / leading`.
pub fn verify_basic_identities(f: &Polynomial, zs: &[Complex64]) -> Result<IdentityReport> {
    let n = f.degree();
    if n < 2 {
        return Err(LabError::DegreeTooLow { required: 2, actual: n });
    }
    let f = f.scaled(1.0 / f.leading())?;
    let zeros = match f.roots() {
        Some(r) => r.to_vec(),
        None => rootfind::find_roots(&f, rootfind::DEFAULT_TOL)?
            .require_converged()?
            .points,
    };
    let xi = sendov::critical_points(&f)?.points;
    let mz = EmpiricalMeasure::uniform(zeros.clone())?;
    let mx = EmpiricalMeasure::uniform(xi.clone())?;
    let fp = f.derivative();
    let fpp = fp.derivative();
    let nf = n as f64;
    let n1 = nf - 1.0;

    let mut samples = Vec::with_capacity(zs.len());
    let mut skipped = Vec::new();
    for &z in zs {
        let dmin = zeros
            .iter()
            .chain(&xi)
            .map(|p| (z - p).norm())
            .fold(f64::INFINITY, f64::min);
        if dmin < MIN_SAMPLE_DISTANCE {
            skipped.push(z);
            continue;
        }
        let fz = f.evaluate_with(z, Precision::Compensated);
        let fpz = fp.evaluate_with(z, Precision::Compensated);
        let fppz = fpp.evaluate_with(z, Precision::Compensated);
        let uz = log_potential(&mz, z)?;
        let ux = log_potential(&mx, z)?;
        let sz = stieltjes(&mz, z)?;
        let sx = stieltjes(&mx, z)?;
        let dsz = stieltjes_derivative(&mz, z)?;
        samples.push(IdentityResiduals {
            z,
            lf: relative_residual(uz, -fz.norm().ln() / nf),
            lfp: relative_residual(ux, nf.ln() / n1 - fpz.norm().ln() / n1),
            logderiv_f: relative_residual_complex(sz, fpz / fz / nf),
            logderiv_fp: relative_residual_complex(sx, fppz / fpz / n1),
            uzs: relative_residual(uz - n1 / nf * ux, sz.norm().ln() / nf),
            sz_mod: relative_residual_complex(sz - n1 / nf * sx, -dsz / sz / nf),
        });
    }
    let mean_residual = (mz.expect_complex(|p| p) - mx.expect_complex(|p| p)).norm();
    Ok(IdentityReport {
        n,
        samples,
        skipped,
        mean_residual,
    })
}

/// `(lower, middle, upper)` with `middle = U_zeta - (n-1)/n U_xi` and the
/// bounds `-log(|z| +- 1)/n` valid for laws on the closed unit disk, `|z| > 1`.
pub fn umu_sandwich(zeros: &EmpiricalMeasure, critical: &EmpiricalMeasure, z: Complex64) -> Result<(f64, f64, f64)> {
    let n = zeros.len() as f64;
    let r = z.norm();
    if !(r > 1.0) {
        return Err(LabError::InvalidParameter(format!("|z| = {r} must exceed 1")));
    }
    let mid = log_potential(zeros, z)? - (n - 1.0) / n * log_potential(critical, z)?;
    Ok((-(r + 1.0).ln() / n, mid, -(r - 1.0).ln() / n))
}

const GL_ORDER: usize = 16;
const QUAD_TOL: f64 = 1e-15;
const QUAD_MAX_DEPTH: u32 = 40;

/// Adaptive Gauss–Legendre integral of `g` along the segment `[a, b]`.
fn segment_integral(
    g: &dyn Fn(Complex64) -> Complex64,
    a: Complex64,
    b: Complex64,
    rule: &(Vec<f64>, Vec<f64>),
) -> Complex64 {
    fn gl(g: &dyn Fn(Complex64) -> Complex64, a: Complex64, b: Complex64, rule: &(Vec<f64>, Vec<f64>)) -> Complex64 {
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        numeric::csum(rule.0.iter().zip(&rule.1).map(|(x, w)| g(mid + half * *x) * *w)) * half
    }
    fn rec(
        g: &dyn Fn(Complex64) -> Complex64,
        a: Complex64,
        b: Complex64,
        whole: Complex64,
        depth: u32,
        rule: &(Vec<f64>, Vec<f64>),
    ) -> Complex64 {
        let m = (a + b) * 0.5;
        let left = gl(g, a, m, rule);
        let right = gl(g, m, b, rule);
        let both = left + right;
        if depth >= QUAD_MAX_DEPTH || (both - whole).norm() <= QUAD_TOL * 1f64.max(both.norm()) {
            both
        } else {
            rec(g, a, m, left, depth + 1, rule) + rec(g, m, b, right, depth + 1, rule)
        }
    }
    let whole = gl(g, a, b, rule);
    rec(g, a, b, whole, 0, rule)
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// `start * exp(sum_j int_gamma dz/(z - p_j))` along a polyline.
fn integrate_along(points: &[Complex64], start: Complex64, contour: &[Complex64]) -> Result<Complex64> {
    if contour.len() < 2 {
        return Err(LabError::InvalidParameter("contour needs at least two vertices".into()));
    }
    let dmin = contour
        .windows(2)
        .flat_map(|s| points.iter().map(move |p| point_segment_distance(*p, s[0], s[1])))
        .fold(f64::INFINITY, f64::min);
    if dmin < MIN_SAMPLE_DISTANCE {
        return Err(LabError::ContourTooClose { distance: dmin });
    }
    let rule = numeric::gauss_legendre(GL_ORDER);
    let g = |z: Complex64| numeric::csum(points.iter().map(|p| 1.0 / (z - p)));
    let total = numeric::csum(contour.windows(2).map(|s| segment_integral(&g, s[0], s[1], &rule)));
    Ok(start * total.exp())
}

/// `f(gamma(0)) exp(n int_gamma s_zeta dz)` along a polyline, which reproduces
/// `f(gamma(1))`.
pub fn integrated_log_derivative(f: &Polynomial, contour: &[Complex64]) -> Result<Complex64> {
    let zeros = f.roots().ok_or(LabError::RootsRequired)?;
    let start = f.evaluate_with(*contour.first().ok_or(LabError::EmptyRoots)?, Precision::Compensated);
    integrate_along(zeros, start, contour)
}

/// `f'(gamma(0)) exp((n-1) int_gamma s_xi dz)` along a polyline.
pub fn integrated_log_derivative_prime(f: &Polynomial, contour: &[Complex64]) -> Result<Complex64> {
    let xi = sendov::critical_points(f)?.points;
    let fp = f.derivative();
    let start = fp.evaluate_with(*contour.first().ok_or(LabError::EmptyRoots)?, Precision::Compensated);
    integrate_along(&xi, start, contour)
}

/// Polyline with `segments` chords on the arc `center + r e^{it}`, `t` from
/// `t0` to `t1`.
pub fn arc_polyline(center: Complex64, r: f64, t0: f64, t1: f64, segments: usize) -> Vec<Complex64> {
    (0..=segments)
        .map(|k| center + Complex64::from_polar(r, t0 + (t1 - t0) * k as f64 / segments as f64))
        .collect()
}

fn poisson_args(r_big: f64, w: Complex64) -> Result<(f64, f64)> {
    if !(r_big > 0.0) {
        return Err(LabError::InvalidParameter(format!("R = {r_big}")));
    }
    let q = w.norm() / r_big;
    if !(q < 1.0) {
        return Err(LabError::AtomOnCircle {
            modulus: w.norm(),
            radius: r_big,
        });
    }
    Ok((q, w.arg()))
}

/// `(1 - q^2) / (1 - 2 q cos(theta - alpha) + q^2)` with `w = r e^{i alpha}`, `q = r/R`.
pub fn poisson_kernel(r_big: f64, w: Complex64, theta: f64) -> Result<f64> {
    let (q, alpha) = poisson_args(r_big, w)?;
    Ok((1.0 - q * q) / (1.0 - 2.0 * q * (theta - alpha).cos() + q * q))
}

/// `Re((1 + q e^{i phi}) / (1 - q e^{i phi}))`.
pub fn poisson_kernel_re(r_big: f64, w: Complex64, theta: f64) -> Result<f64> {
    let (q, alpha) = poisson_args(r_big, w)?;
    let e = Complex64::from_polar(q, theta - alpha);
    Ok(((1.0 + e) / (1.0 - e)).re)
}

/// Number of series terms with `q^M < 1e-14`.
pub fn series_terms(q: f64) -> usize {
    if q <= 0.0 {
        0
    } else {
        (SERIES_CUTOFF.ln() / q.ln()).ceil().max(1.0) as usize
    }
}

/// `sum_m q^{|m|} e^{i m phi}` truncated at `q^M < 1e-14`.
pub fn poisson_kernel_series(r_big: f64, w: Complex64, theta: f64) -> Result<f64> {
    let (q, alpha) = poisson_args(r_big, w)?;
    let phi = theta - alpha;
    let tail = numeric::sum((1..=series_terms(q)).map(|m| q.powi(m as i32) * (m as f64 * phi).cos()));
    Ok(1.0 + 2.0 * tail)
}

/// Density on the circle of radius `R`, sampled at `theta_k = 2 pi k / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleDensity {
    #[serde(rename = "R")]
    pub radius: f64,
    pub samples: Vec<f64>,
}

impl CircleDensity {
    pub fn angles(&self) -> Vec<f64> {
        numeric::circle_angles(self.samples.len()).collect()
    }

    pub fn mean(&self) -> f64 {
        numeric::periodic_mean(&self.samples)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_k |a_k - b_k|`; both must share the grid.
    pub fn sup_gap(&self, other: &CircleDensity) -> Result<f64> {
        if self.samples.len() != other.samples.len() || self.radius != other.radius {
            return Err(LabError::InvalidParameter("densities on different grids".into()));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn check_inside(m: &EmpiricalMeasure, r_big: f64) -> Result<f64> {
    if !(r_big > 0.0) {
        return Err(LabError::InvalidParameter(format!("R = {r_big}")));
    }
    let rmax = m.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
    if rmax >= r_big {
        return Err(LabError::AtomOnCircle {
            modulus: rmax,
            radius: r_big,
        });
    }
    Ok(rmax)
}

/// `E P^R_x(R e^{i theta})` evaluated atom by atom.
pub fn balayage_direct(m: &EmpiricalMeasure, r_big: f64, nodes: usize) -> Result<CircleDensity> {
    check_inside(m, r_big)?;
    let samples = numeric::circle_angles(nodes)
        .map(|t| m.expect(|p| poisson_kernel(r_big, p, t).expect("atoms checked")))
        .collect();
    Ok(CircleDensity { radius: r_big, samples })
}

/// `1 + 2 Re sum_{m>=1} R^{-m} e^{-i m theta} E x^m`, truncated where
/// `(max|x|/R)^M < 1e-14`.
pub fn balayage_series(m: &EmpiricalMeasure, r_big: f64, nodes: usize) -> Result<CircleDensity> {
    let rmax = check_inside(m, r_big)?;
    let terms = series_terms(rmax / r_big);
    // c_k = E (x/R)^k, accumulated by running powers.
    let mut powers: Vec<Complex64> = m.points().iter().map(|_| Complex64::new(1.0, 0.0)).collect();
    let mut coeffs = Vec::with_capacity(terms);
    for _ in 0..terms {
        for (pw, p) in powers.iter_mut().zip(m.points()) {
            *pw *= p / r_big;
        }
        coeffs.push(numeric::csum(powers.iter().zip(m.weights()).map(|(pw, w)| pw * w)));
    }
    let samples = numeric::circle_angles(nodes)
        .map(|t| {
            let s = numeric::csum(
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * Complex64::from_polar(1.0, -((k + 1) as f64) * t)),
            );
            1.0 + 2.0 * s.re
        })
        .collect();
    Ok(CircleDensity { radius: r_big, samples })
}

/// `2 Re(z s(z)) - 1` on `z = R e^{i theta}`.
pub fn balayage_stieltjes(m: &EmpiricalMeasure, r_big: f64, nodes: usize) -> Result<CircleDensity> {
    check_inside(m, r_big)?;
    let samples = numeric::circle_angles(nodes)
        .map(|t| {
            let z = Complex64::from_polar(r_big, t);
            let zs = m.expect_complex(|p| z / (z - p));
            2.0 * zs.re - 1.0
        })
        .collect();
    Ok(CircleDensity { radius: r_big, samples })
}

/// Balayage onto the circle of radius `R`. The Poisson route is returned
/// after agreeing with the moment series to `1e-10`.
pub fn balayage(m: &EmpiricalMeasure, r_big: f64, nodes: usize) -> Result<CircleDensity> {
    if nodes < MIN_BALAYAGE_NODES {
        return Err(LabError::InvalidParameter(format!("N = {nodes} < {MIN_BALAYAGE_NODES}")));
    }
    let direct = balayage_direct(m, r_big, nodes)?;
    let series = balayage_series(m, r_big, nodes)?;
    let gap = direct.sup_gap(&series)?;
    if gap > BALAYAGE_CROSS_TOL {
        return Err(LabError::CrossCheck {
            what: "balayage series",
            discrepancy: gap,
        });
    }
    Ok(direct)
}

/// `sup-gap n (R-1)^2 / log(1/(R-1))`.
pub fn balk_scaled_gap(gap: f64, n: usize, r_big: f64) -> f64 {
    let h = r_big - 1.0;
    gap * n as f64 * h * h / (1.0 / h).ln()
}

/// Default trapezoid size `max(4096, 64 k)` for `k` atoms.
pub fn default_nodes(atoms: usize) -> usize {
    4096usize.max(64 * atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeff {
    pub value: Complex64,
    /// Atoms within [`NEAR_CIRCLE`] of the circle, handled in closed form.
    pub closed_form_atoms: usize,
}

/// `int e^{i k theta} U(R e^{i theta}) d theta / 2 pi`, the coefficient of the
/// `e^{-i k theta}` mode; equals `E x^k / (2 k R^k)` for `k >= 1` and `-log R`
/// for `k = 0`. Atoms within `0.05` of the circle use that closed form; the
/// rest are integrated with the `N`-node trapezoid rule.
pub fn circle_fourier_coeff(m: &EmpiricalMeasure, r_big: f64, k: i64, nodes: usize) -> Result<FourierCoeff> {
    if !(r_big >= 1.0) {
        return Err(LabError::InvalidParameter(format!("R = {r_big} < 1")));
    }
    if k < 0 {
        return Err(LabError::InvalidParameter(format!("k = {k}")));
    }
    if nodes == 0 {
        return Err(LabError::InvalidParameter("N = 0".into()));
    }
    if let Some(p) = m.points().iter().find(|p| p.norm() > 1.0 + crate::poly::DISK_TOL) {
        return Err(LabError::OutsideUnitDisk(format!("{p}")));
    }
    let closed = |p: Complex64| -> Complex64 {
        if k == 0 {
            Complex64::new(-r_big.ln(), 0.0)
        } else {
            (p / r_big).powi(k as i32) / (2.0 * k as f64)
        }
    };
    let mut near = Vec::new();
    let mut far_pts = Vec::new();
    let mut far_w = Vec::new();
    for (p, w) in m.points().iter().zip(m.weights()) {
        if r_big - p.norm() < NEAR_CIRCLE {
            near.push(closed(*p) * *w);
        } else {
            far_pts.push(*p);
            far_w.push(*w);
        }
    }
    let mut value = numeric::csum(near.iter().copied());
    if !far_pts.is_empty() {
        let kf = k as f64;
        let quad = numeric::csum(numeric::circle_angles(nodes).map(|t| {
            let z = Complex64::from_polar(r_big, t);
            let u = numeric::sum(far_pts.iter().zip(&far_w).map(|(p, w)| -w * (z - p).norm().ln()));
            Complex64::from_polar(u, kf * t)
        }));
        value += quad / nodes as f64;
    }
    Ok(FourierCoeff {
        value,
        closed_form_atoms: near.len(),
    })
}
