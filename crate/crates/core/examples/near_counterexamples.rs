//! The perturbed power family: zeros hug the circle `|z + c2/n| = 1`, critical
//! points avoid `D(a, 1)`, and every zero obeys the exact logarithmic relation.
//! Zeros sit slightly outside the unit disk, so negative margins are expected.

use num_complex::Complex64;
use sendov_lab::families::{self, FamilyParams};
use sendov_lab::sendov;

fn main() -> sendov_lab::Result<()> {
    let lambdas = vec![Complex64::new(0.3, 0.8), Complex64::new(-0.4, -0.5)];
    println!("{:>5} {:>10} {:>10} {:>12} {:>10} {:>11} {:>8}", "n", "max n|w|-1|", "n t-err", "ten", "margin", "|mu|/s2", "in lune");
    for n in [32usize, 64, 128, 256] {
        let p = FamilyParams::new(n, 1.0, 2.0, lambdas.clone())?;
        let inst = families::miller_family(&p)?;
        let rep = families::family_report(&p, &inst)?;
        let margin = sendov::sendov_margin(&inst)?;
        println!(
            "{n:>5} {:>10.4} {:>10.4} {:>12.2e} {:>10.2e} {:>11.4} {:>8}",
            rep.max_zon(),
            n as f64 * rep.max_t_error(),
            rep.max_ten(),
            margin.min_margin,
            rep.fine.mu_ratio.unwrap_or(f64::NAN),
            rep.critical_outside_disk_a
        );
    }
    Ok(())
}
