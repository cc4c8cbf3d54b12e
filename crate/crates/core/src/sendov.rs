//! Sendov margins, lune geometry, Gauss–Lucas hulls and the Dégot inequalities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric;
use crate::poly::{Polynomial, SendovInstance};
use crate::rootfind::{self, RootSet};

/// Band for "in the closed disk" decisions on margins.
pub const SENDOV_TOL: f64 = 1e-9;
/// Band used by region membership.
pub const REGION_TOL: f64 = 1e-10;
/// Maximum hull distance accepted by [`gauss_lucas_check`].
pub const HULL_TOL: f64 = 1e-8;
/// Cross products below this are treated as collinear.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Planar regions used for membership and probability queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Open disk `|z - center| < radius`.
    Disk { center: Complex64, radius: f64 },
    ClosedDisk { center: Complex64, radius: f64 },
    /// Closed annulus `inner <= |z - center| <= outer`.
    Annulus { center: Complex64, inner: f64, outer: f64 },
    /// `closed_D(0,1) \ closed_D(a,1)`.
    Lune { a: f64 },
    /// Closed annulus restricted to `arg(z - center)` in `[theta_min, theta_max]`.
    ArcBand {
        center: Complex64,
        inner: f64,
        outer: f64,
        theta_min: f64,
        theta_max: f64,
    },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidParameter(msg));
        match *self {
            Region::Disk { radius, .. } | Region::ClosedDisk { radius, .. } if !(radius > 0.0) => {
                bad(format!("radius {radius}"))
            }
            Region::Annulus { inner, outer, .. } | Region::ArcBand { inner, outer, .. }
                if !(inner > 0.0 && outer >= inner) =>
            {
                bad(format!("radii {inner}, {outer}"))
            }
            Region::ArcBand { theta_min, theta_max, .. } if !(theta_max >= theta_min) => {
                bad(format!("angles {theta_min}, {theta_max}"))
            }
            Region::Lune { a } if !(0.0..=1.0).contains(&a) => bad(format!("a = {a}")),
            _ => Ok(()),
        }
    }

    /// Membership with a `1e-10` band: closed boundaries are widened, open
    /// boundaries are narrowed.
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - center).norm() < radius - REGION_TOL,
            Region::ClosedDisk { center, radius } => (z - center).norm() <= radius + REGION_TOL,
            Region::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                r >= inner - REGION_TOL && r <= outer + REGION_TOL
            }
            Region::Lune { a } => lune_membership(z, a),
            Region::ArcBand {
                center,
                inner,
                outer,
                theta_min,
                theta_max,
            } => {
                let w = z - center;
                let r = w.norm();
                if r < inner - REGION_TOL || r > outer + REGION_TOL {
                    return false;
                }
                let tau = std::f64::consts::TAU;
                let mut t = w.arg();
                while t < theta_min - REGION_TOL {
                    t += tau;
                }
                while t > theta_max + REGION_TOL && t - tau >= theta_min - REGION_TOL {
                    t -= tau;
                }
                t >= theta_min - REGION_TOL && t <= theta_max + REGION_TOL
            }
        }
    }
}

/// Margins `1 - min_xi |xi - zeta_i|` for each zero of `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SendovReport {
    #[serde(rename = "margins")]
    pub per_zero_margin: Vec<f64>,
    pub min_margin: f64,
    pub worst_zero: Complex64,
    pub holds: bool,
}

/// Roots of `p'`.
pub fn critical_points(p: &Polynomial) -> Result<RootSet> {
    if p.degree() < 2 {
        return Err(LabError::DegreeTooLow {
            required: 2,
            actual: p.degree(),
        });
    }
    rootfind::find_roots(&p.derivative(), rootfind::DEFAULT_TOL)?.require_converged()
}

/// Critical points of the instance, using closed-form values when attached.
pub fn instance_critical_points(inst: &SendovInstance) -> Result<Vec<Complex64>> {
    match inst.known_critical() {
        Some(xi) => Ok(xi.to_vec()),
        None => Ok(critical_points(inst.f())?.points),
    }
}

/// Sendov report for arbitrary zero and critical point multisets.
pub fn margins_from(zeros: &[Complex64], critical: &[Complex64]) -> Result<SendovReport> {
    if zeros.len() < 2 || critical.is_empty() {
        return Err(LabError::DegreeTooLow {
            required: 2,
            actual: zeros.len(),
        });
    }
    let per_zero_margin: Vec<f64> = zeros
        .iter()
        .map(|z| 1.0 - critical.iter().map(|x| (x - z).norm()).fold(f64::INFINITY, f64::min))
        .collect();
    let (worst, min_margin) = per_zero_margin
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, m)| if m < acc.1 { (i, m) } else { acc });
    Ok(SendovReport {
        holds: min_margin >= -SENDOV_TOL,
        worst_zero: zeros[worst],
        min_margin,
        per_zero_margin,
    })
}

pub fn sendov_margin(inst: &SendovInstance) -> Result<SendovReport> {
    let xi = instance_critical_points(inst)?;
    margins_from(inst.roots(), &xi)
}

/// Margins for any polynomial, finding zeros when no root list is attached.
pub fn polynomial_margin(p: &Polynomial) -> Result<SendovReport> {
    let zeros = match p.roots() {
        Some(r) => r.to_vec(),
        None => rootfind::find_roots(p, rootfind::DEFAULT_TOL)?
            .require_converged()?
            .points,
    };
    let xi = critical_points(p)?.points;
    margins_from(&zeros, &xi)
}

/// Closed unit disk minus the closed disk `D(a, 1)`; points on `|xi - a| = 1`
/// are excluded.
pub fn lune_membership(xi: Complex64, a: f64) -> bool {
    xi.norm() <= 1.0 + REGION_TOL && (xi - a).norm() > 1.0 + REGION_TOL
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Counter-clockwise convex hull (monotone chain) without collinear vertices.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_TOL {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Euclidean distance from `p` to a counter-clockwise convex polygon
/// (zero inside). Degenerate hulls are points or segments.
pub fn hull_distance(hull: &[Complex64], p: Complex64) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => (p - hull[0]).norm(),
        2 => segment_distance(p, hull[0], hull[1]),
        k => {
            let inside = (0..k).all(|i| cross(hull[i], hull[(i + 1) % k], p) >= -COLLINEAR_TOL);
            if inside {
                0.0
            } else {
                (0..k)
                    .map(|i| segment_distance(p, hull[i], hull[(i + 1) % k]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Every critical point lies within `1e-8` of the convex hull of the zeros.
pub fn gauss_lucas_check(p: &Polynomial) -> Result<bool> {
    let zeros = match p.roots() {
        Some(r) => r.to_vec(),
        None => rootfind::find_roots(p, rootfind::DEFAULT_TOL)?
            .require_converged()?
            .points,
    };
    let hull = convex_hull(&zeros);
    let xi = critical_points(p)?;
    Ok(xi.points.iter().all(|&x| hull_distance(&hull, x) <= HULL_TOL))
}

/// Whether `f'` avoids the closed disk `D(a, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Holds,
    /// Closest critical point within `1e-9` of the circle `|z - a| = 1`.
    Boundary,
    Violated,
}

/// Slacks are log ratios `log(lhs / rhs)` oriented so that positive means
/// satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegotRow {
    pub delta: f64,
    /// `|f(delta)| >= (1 - sqrt(1 + delta^2 - delta a)) / n * |f'(a)|`.
    pub lower_bound_slack: f64,
    /// `|f(delta)| <= sqrt(1 + delta^2 - 2 delta Re mu)^n`.
    pub lemma_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegotReport {
    pub n: usize,
    pub a: f64,
    pub hypothesis: Hypothesis,
    pub min_critical_distance: f64,
    /// `log(|f'(a)| / n)`; absent when the hypothesis is violated.
    pub fan_slack: Option<f64>,
    /// Diagnostic `|f'(a)| / n`.
    pub fprime_ratio: f64,
    /// Diagnostic `|f(0)|`.
    pub f_at_zero: f64,
    pub rows: Vec<DegotRow>,
}

impl DegotReport {
    pub fn all_positive(&self) -> bool {
        self.fan_slack.is_some_and(|s| s > 0.0)
            && self
                .rows
                .iter()
                .all(|r| r.lower_bound_slack > 0.0 && r.lemma_slack > 0.0)
    }
}

/// Index of the zero of `inst` equal (closest) to `a`.
fn distinguished_index(inst: &SendovInstance) -> usize {
    let a = Complex64::new(inst.a(), 0.0);
    inst.roots()
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - a).norm().total_cmp(&(y.1 - a).norm()))
        .map(|(i, _)| i)
        .expect("instance has roots")
}

pub fn degot_suite(inst: &SendovInstance, deltas: &[f64]) -> Result<DegotReport> {
    let a = inst.a();
    let n = inst.degree();
    if let Some(&d) = deltas.iter().find(|&&d| !(d > 0.0 && d < a)) {
        return Err(LabError::InvalidParameter(format!("delta = {d} not in (0, {a})")));
    }
    let roots = inst.roots();
    let ac = Complex64::new(a, 0.0);
    let i0 = distinguished_index(inst);
    let log_fp_a = numeric::sum(
        roots
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != i0)
            .map(|(_, z)| (ac - z).norm().ln()),
    );
    let log_n = (n as f64).ln();

    let xi = instance_critical_points(inst)?;
    let dmin = xi.iter().map(|x| (x - ac).norm()).fold(f64::INFINITY, f64::min);
    let hypothesis = if dmin > 1.0 + SENDOV_TOL {
        Hypothesis::Holds
    } else if dmin >= 1.0 - SENDOV_TOL {
        Hypothesis::Boundary
    } else {
        Hypothesis::Violated
    };
    let fan_slack = (hypothesis != Hypothesis::Violated).then_some(log_fp_a - log_n);

    let mu = numeric::csum(roots.iter().copied()) / n as f64;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let log_f = log_abs_at(roots, Complex64::new(delta, 0.0));
        let factor = 1.0 - (1.0 + delta * delta - delta * a).sqrt();
        let lower_bound_slack = log_f - (factor.ln() - log_n + log_fp_a);
        let lemma_rhs = 0.5 * n as f64 * (1.0 + delta * delta - 2.0 * delta * mu.re).ln();
        rows.push(DegotRow {
            delta,
            lower_bound_slack,
            lemma_slack: lemma_rhs - log_f,
        });
    }
    Ok(DegotReport {
        n,
        a,
        hypothesis,
        min_critical_distance: dmin,
        fan_slack,
        fprime_ratio: (log_fp_a - log_n).exp(),
        f_at_zero: log_abs_at(roots, Complex64::new(0.0, 0.0)).exp(),
        rows,
    })
}

/// `log|prod (z - zeta)|`, `-inf` on a zero.
fn log_abs_at(roots: &[Complex64], z: Complex64) -> f64 {
    numeric::sum(roots.iter().map(|r| (z - r).norm().ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{from_roots, normalize_sendov};
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unity(n: usize) -> Polynomial {
        let roots: Vec<_> = (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
        let mut coeffs = vec![c(0.0, 0.0); n + 1];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[n] = c(1.0, 0.0);
        Polynomial::with_roots(coeffs, roots).unwrap()
    }

    fn z_n_minus_z(n: usize) -> Polynomial {
        let r = 1.0 / ((n - 1) as f64);
        let mut roots = vec![c(0.0, 0.0)];
        roots.extend((0..n - 1).map(|k| Complex64::from_polar(1.0, TAU * k as f64 * r)));
        from_roots(&roots, c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn critical_points_examples() {
        let xi = critical_points(&unity(12)).unwrap();
        assert_eq!(xi.len(), 11);
        assert!(xi.points.iter().all(|z| z.norm() < 1e-12));

        let xi = critical_points(&from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0)).unwrap()).unwrap();
        assert_eq!(xi.points, vec![c(0.0, 0.0)]);

        let xi = critical_points(&z_n_minus_z(10)).unwrap();
        for z in &xi.points {
            assert!((z.norm() - 10f64.powf(-1.0 / 9.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_margins_vanish() {
        let inst = normalize_sendov(&unity(20), 3).unwrap();
        let rep = sendov_margin(&inst).unwrap();
        assert!(rep.per_zero_margin.iter().all(|m| m.abs() < 1e-12));
        assert!(rep.holds);
    }

    #[test]
    fn origin_margin() {
        let inst = normalize_sendov(&z_n_minus_z(10), 0).unwrap();
        let rep = sendov_margin(&inst).unwrap();
        assert_eq!(inst.a(), 0.0);
        let expected = 1.0 - 10f64.powf(-1.0 / 9.0);
        assert!((rep.per_zero_margin[0] - expected).abs() < 1e-12);
        assert!((rep.per_zero_margin[0] - 0.226).abs() < 1e-3);
    }

    #[test]
    fn report_json_fields() {
        let rep = margins_from(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert!(v.get("margins").is_some());
        assert!(v.get("min_margin").is_some());
        assert_eq!(v["holds"], serde_json::Value::Bool(true));
    }

    #[test]
    fn lune_examples() {
        assert!(lune_membership(c(0.0, 1.0), 1.0));
        assert!(!lune_membership(c(0.0, 0.0), 1.0));
        assert!(!lune_membership(c(1.5, 0.0), 0.0));
    }

    #[test]
    fn gauss_lucas_examples() {
        assert!(gauss_lucas_check(&unity(9)).unwrap());
        let p = from_roots(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)], c(1.0, 0.0)).unwrap();
        assert!(gauss_lucas_check(&p).unwrap());
    }

    #[test]
    fn hull_distance_cases() {
        let sq = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.5, 0.5), c(0.5, 0.0)]);
        assert_eq!(sq.len(), 4);
        assert_eq!(hull_distance(&sq, c(0.5, 0.5)), 0.0);
        assert!((hull_distance(&sq, c(2.0, 0.5)) - 1.0).abs() < 1e-15);
        let seg = convex_hull(&[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(seg.len(), 2);
        assert_eq!(hull_distance(&seg, c(0.25, 0.0)), 0.0);
        assert!((hull_distance(&seg, c(0.0, 0.5)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn region_membership() {
        let d = Region::Disk { center: c(0.0, 0.0), radius: 1.0 };
        let cd = Region::ClosedDisk { center: c(0.0, 0.0), radius: 1.0 };
        assert!(!d.contains(c(1.0, 0.0)));
        assert!(cd.contains(c(1.0, 0.0)));
        let band = Region::ArcBand {
            center: c(0.0, 0.0),
            inner: 0.5,
            outer: 1.0,
            theta_min: -0.1,
            theta_max: 0.1,
        };
        assert!(band.contains(c(0.75, 0.0)));
        assert!(!band.contains(c(0.0, 0.75)));
        assert!(Region::Lune { a: 2.0 }.validate().is_err());
        assert!(Region::Disk { center: c(0.0, 0.0), radius: 0.0 }.validate().is_err());
    }

    #[test]
    fn degot_on_circle_is_boundary() {
        let inst = normalize_sendov(&unity(50), 0).unwrap();
        let rep = degot_suite(&inst, &[0.5]).unwrap();
        assert_eq!(rep.hypothesis, Hypothesis::Boundary);
        assert!(rep.fan_slack.unwrap().abs() < 1e-12);
        assert!(rep.rows[0].lower_bound_slack > 0.0);
        assert!(rep.rows[0].lemma_slack > 0.0);
    }

    #[test]
    fn degot_delta_near_a_lower_bound_trivial() {
        let inst = normalize_sendov(&unity(8), 0).unwrap();
        let rep = degot_suite(&inst, &[1.0 - 1e-9]).unwrap();
        assert!(rep.rows[0].lower_bound_slack > 0.0);
        assert!(degot_suite(&inst, &[1.0]).is_err());
        assert!(degot_suite(&inst, &[0.0]).is_err());
    }
}
