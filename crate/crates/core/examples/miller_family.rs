//! Predicted zero shift `t(theta)` against computed zeros, and the `dd`
//! left side with its mean.

use num_complex::Complex64;
use sendov_lab::families::{self, FamilyParams};

fn main() -> sendov_lab::Result<()> {
    let arc: Vec<Complex64> = [2.3, 3.6].iter().map(|phi: &f64| 1.0 + Complex64::from_polar(1.0, *phi)).collect();
    let p = FamilyParams::new(200, 1.0, 1.0, arc)?;
    let rep = families::verify_family(&p)?;
    println!("a = {}, m = {}", rep.a, rep.m);
    println!("max |n(|w| - 1) - t| = {:.3e}", rep.max_t_error());
    println!("dd mean {:.3e} (expected {:.3e})", rep.lamin_mean, rep.lamin_mean_expected);
    let worst = rep.lamin_values.iter().copied().fold(f64::MIN, f64::max);
    println!("max dd left side on grid: {worst:.4}");
    println!(
        "Re sum l^2 = {:.4}, -1/2 sum |l|^2 = {:.4}, bound holds: {}",
        rep.sum_lambda_sq.re,
        -rep.half_sum_abs_sq,
        rep.summ_bound_holds()
    );
    let chk = families::arc_argument_check(10_000);
    println!("arc argument window: {} (max violation {:.1e})", chk.ok, chk.max_violation);
    Ok(())
}
