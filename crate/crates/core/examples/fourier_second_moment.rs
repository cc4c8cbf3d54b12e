//! `E xi^2` directly and as four times the second Fourier coefficient of the
//! critical-point potential on the unit circle.

use num_complex::Complex64;
use sendov_lab::families::{self, FamilyParams};

fn main() -> sendov_lab::Result<()> {
    for n in [50usize, 100, 200] {
        let lambdas = vec![Complex64::new(0.3, 0.8), Complex64::new(-0.4, -0.5)];
        let inst = families::miller_family(&FamilyParams::new(n, 1.0, 2.0, lambdas)?)?;
        let r = families::second_moment_test(&inst)?;
        println!(
            "n = {n:>4}: direct {:.6e}, fourier {:.6e}, |diff| {:.1e}, E Re xi^2 / sigma^2 = {:?}",
            r.direct, r.fourier, r.discrepancy, r.rexi2_ratio
        );
    }
    Ok(())
}
