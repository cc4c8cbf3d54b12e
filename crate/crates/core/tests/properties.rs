use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

use sendov_lab::contour;
use sendov_lab::families::{self, FamilyParams};
use sendov_lab::measures::{self, EmpiricalMeasure};
use sendov_lab::poly::{self, Polynomial};
use sendov_lab::potential;
use sendov_lab::rootfind;
use sendov_lab::sendov;

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0f64..=1.0, 0.0f64..TAU).prop_map(|(u, t)| Complex64::from_polar(u.sqrt(), t))
}

fn disk_roots(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(disk_point(), n)
}

fn monic(roots: &[Complex64]) -> Polynomial {
    Polynomial::from_roots(roots, Complex64::new(1.0, 0.0)).unwrap()
}

fn min_gap(roots: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..roots.len() {
        for j in 0..i {
            g = g.min((roots[i] - roots[j]).norm());
        }
    }
    g
}

/// Point of the lune `closed_D(0,1) minus D(1,1)`.
fn lune_point() -> impl Strategy<Value = Complex64> {
    disk_point().prop_filter("outside D(1,1)", |z| (z - 1.0).norm() >= 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn roots_recovered_from_coefficients(roots in disk_roots(2..=20)) {
        prop_assume!(min_gap(&roots) >= 0.05);
        let f = Polynomial::from_coeffs(monic(&roots).coeffs().to_vec()).unwrap();
        let rs = rootfind::find_roots(&f, rootfind::DEFAULT_TOL).unwrap();
        prop_assert!(rs.converged);
        prop_assert!(rs.max_residual() <= 1e-10);
        for r in &roots {
            let d = rs.points.iter().map(|p| (p - r).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-8, "root {} missed by {:e}", r, d);
        }
    }

    #[test]
    fn winding_equals_count_on_three_radii(roots in disk_roots(2..=32)) {
        let f = monic(&roots);
        let xi = sendov::critical_points(&f).unwrap().points;
        for (r1, r2) in [(0.15, 0.35), (0.4, 0.6), (0.65, 0.9)] {
            let choice = contour::select_radius_from(&roots, &xi, r1, r2).unwrap();
            let w = contour::winding_number(&f, choice.radius).unwrap();
            prop_assert_eq!(w.winding, contour::count_inside(&roots, &xi, choice.radius).unwrap());
        }
    }

    #[test]
    fn winding_invariant_under_scaling_and_rotation(roots in disk_roots(2..=16), phi in 0.0f64..TAU, k in 0.1f64..10.0) {
        let f = monic(&roots);
        let xi = sendov::critical_points(&f).unwrap().points;
        let r = contour::select_radius_from(&roots, &xi, 0.3, 0.7).unwrap().radius;
        let base = contour::winding_number(&f, r).unwrap().winding;
        let scaled = f.scaled(Complex64::from_polar(k, 1.0)).unwrap();
        prop_assert_eq!(contour::winding_number(&scaled, r).unwrap().winding, base);
        let rotated = f.rotated(phi);
        prop_assert_eq!(contour::winding_number(&rotated, r).unwrap().winding, base);
    }

    #[test]
    fn margins_invariant_under_normalisation(roots in disk_roots(3..=12), pick in 0usize..12) {
        let f = monic(&roots);
        let idx = pick % roots.len();
        let inst = poly::normalize_sendov(&f, idx).unwrap();
        let mut before = sendov::polynomial_margin(&f).unwrap().per_zero_margin;
        let mut after = sendov::sendov_margin(&inst).unwrap().per_zero_margin;
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-10, "{} vs {}", x, y);
        }
    }

    #[test]
    fn normalisation_is_an_isometry(roots in disk_roots(3..=12)) {
        let f = monic(&roots);
        let inst = poly::normalize_sendov(&f, 0).unwrap();
        let new = inst.roots();
        for i in 0..roots.len() {
            for j in 0..i {
                let d0 = (roots[i] - roots[j]).norm();
                let d1 = (new[i] - new[j]).norm();
                prop_assert!((d0 - d1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn family_vanishes_at_a_and_is_monic(n in 8usize..=64, c1 in 0.5f64..2.0, extra in 0.0f64..2.0, lambdas in prop::collection::vec(lune_point(), 0..3)) {
        let mut ls = lambdas;
        ls.dedup();
        let p = FamilyParams::new(n, c1, c1 + extra, ls).unwrap();
        let inst = families::miller_family(&p).unwrap();
        prop_assert!(inst.f().backward_error(Complex64::new(p.a(), 0.0)) < 1e-9);
        prop_assert_eq!(*inst.f().coeffs().last().unwrap(), Complex64::new(1.0, 0.0));
        let rep = families::family_report(&p, &inst).unwrap();
        prop_assert!(rep.max_ten() < 1e-9, "ten {:e}", rep.max_ten());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn degot_lemma_slack_nonnegative(roots in disk_roots(2..=16), t in 0.05f64..0.95) {
        let f = monic(&roots);
        let top = (0..roots.len()).max_by(|&i, &j| roots[i].norm().total_cmp(&roots[j].norm())).unwrap();
        let inst = poly::normalize_sendov(&f, top).unwrap();
        prop_assume!(inst.a() > 1e-3);
        let rep = sendov::degot_suite(&inst, &[t * inst.a()]).unwrap();
        prop_assert!(rep.rows[0].lemma_slack >= -1e-12, "{:?}", rep.rows[0]);
    }

    #[test]
    fn gauss_lucas_containment(roots in disk_roots(2..=32)) {
        prop_assert!(sendov::gauss_lucas_check(&monic(&roots)).unwrap());
    }

    #[test]
    fn diameter_bound_on_margins(roots in disk_roots(2..=16)) {
        let rep = sendov::polynomial_margin(&monic(&roots)).unwrap();
        prop_assert!(rep.per_zero_margin.iter().all(|m| *m >= -1.0));
    }

    #[test]
    fn balayage_positive_with_unit_mean(points in disk_roots(1..=12), r_big in 1.05f64..2.0) {
        let m = EmpiricalMeasure::uniform(points).unwrap();
        let d = potential::balayage(&m, r_big, 1024).unwrap();
        prop_assert!(d.min() > 0.0);
        prop_assert!((d.mean() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn stieltjes_in_mobius_disk(points in disk_roots(1..=12), r in 1.01f64..3.0, t in 0.0f64..TAU) {
        let z = Complex64::from_polar(r, t);
        let m = EmpiricalMeasure::uniform(points).unwrap();
        let s = potential::stieltjes(&m, z).unwrap();
        let (center, radius) = potential::stieltjes_disk(z).unwrap();
        prop_assert!((s - center).norm() <= radius * (1.0 + 1e-12));
    }

    #[test]
    fn sandwich_outside_disk(roots in disk_roots(2..=12), r in 1.01f64..2.0, t in 0.0f64..TAU) {
        let f = monic(&roots);
        let zeros = EmpiricalMeasure::uniform(roots).unwrap();
        let xi = EmpiricalMeasure::uniform(sendov::critical_points(&f).unwrap().points).unwrap();
        let (lo, mid, hi) = potential::umu_sandwich(&zeros, &xi, Complex64::from_polar(r, t)).unwrap();
        prop_assert!(lo <= mid + 1e-12 && mid <= hi + 1e-12);
    }

    #[test]
    fn fourier_quadrature_converged(points in prop::collection::vec(disk_point().prop_map(|z| z * 0.95), 1..=8), k in 0i64..6) {
        let m = EmpiricalMeasure::uniform(points).unwrap();
        let a = potential::circle_fourier_coeff(&m, 1.0, k, 2048).unwrap().value;
        let b = potential::circle_fourier_coeff(&m, 1.0, k, 4096).unwrap().value;
        prop_assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn variance_identity_and_unit_mass(points in disk_roots(1..=32)) {
        let m = EmpiricalMeasure::uniform(points).unwrap();
        prop_assert!(measures::summary(&m).var_ident_residual < 1e-12);
        prop_assert_eq!(measures::moment(&m, 0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn log_distance_monotone_on_rays(points in disk_roots(1..=12), t in 0.0f64..TAU) {
        let m = EmpiricalMeasure::uniform(points).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=20 {
            let z = Complex64::from_polar(1.0 + 0.1 * k as f64, t);
            let v = measures::expect_log_distance(&m, z).unwrap();
            prop_assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn log_evaluation_matches_direct(roots in disk_roots(2..=24), z in disk_point().prop_map(|z| z * 1.5)) {
        let f = monic(&roots);
        let direct = f.evaluate(z).norm();
        prop_assume!(direct > 1e-200 && direct.is_finite());
        let l = f.eval_log_abs(z).unwrap();
        prop_assert!((l - direct.ln()).abs() < 1e-9 * 1f64.max(l.abs()));
    }

    #[test]
    fn cluster_multiplicities_sum_to_degree(roots in disk_roots(1..=24)) {
        let rs = rootfind::find_roots(&monic(&roots), rootfind::DEFAULT_TOL).unwrap();
        let total: usize = rootfind::cluster_multiplicities(&rs, 1e-3).iter().map(|c| c.1).sum();
        prop_assert_eq!(total, roots.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn no_sendov_counterexample(roots in disk_roots(2..=10)) {
        let rep = sendov::polynomial_margin(&monic(&roots)).unwrap();
        prop_assert!(rep.min_margin >= -1e-9, "margin {:e} for {:?}", rep.min_margin, roots);
    }
}
