//! Six basic relations between zeros, critical points, potentials and
//! Stieltjes transforms, checked on a random polynomial.

use sendov_lab::experiment::{case_rng, random_disk_polynomial, sample_points};
use sendov_lab::{potential, sendov};

fn main() -> sendov_lab::Result<()> {
    let mut rng = case_rng(1, 0);
    let f = random_disk_polynomial(&mut rng, 24)?;
    let mut avoid = f.roots().expect("built from roots").to_vec();
    avoid.extend(sendov::critical_points(&f)?.points);
    let zs = sample_points(&mut rng, &avoid, 8, potential::MIN_SAMPLE_DISTANCE, 1.5);

    let rep = potential::verify_basic_identities(&f, &zs)?;
    println!("{:>24} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}", "z", "lf", "lfp", "s_f", "s_fp", "uzs", "sz_mod");
    for s in &rep.samples {
        println!(
            "{:>24} {:9.1e} {:9.1e} {:9.1e} {:9.1e} {:9.1e} {:9.1e}",
            format!("{:.3}", s.z),
            s.lf,
            s.lfp,
            s.logderiv_f,
            s.logderiv_fp,
            s.uzs,
            s.sz_mod
        );
    }
    println!("|E zeta - E xi| = {:.2e}", rep.mean_residual);
    Ok(())
}
