//! Balayage of zeros and critical points of `z^n - z` onto `|z| = 1.1`.

use sendov_lab::families;
use sendov_lab::measures::EmpiricalMeasure;
use sendov_lab::{potential, sendov};

fn main() -> sendov_lab::Result<()> {
    let r_big = 1.1;
    for n in [16usize, 32, 64, 128] {
        let inst = families::example_origin(n)?;
        let zeros = EmpiricalMeasure::uniform(inst.roots().to_vec())?;
        let xi = EmpiricalMeasure::uniform(sendov::instance_critical_points(&inst)?)?;
        let bz = potential::balayage(&zeros, r_big, 4096)?;
        let bx = potential::balayage(&xi, r_big, 4096)?;
        let gap = bz.sup_gap(&bx)?;
        println!(
            "n = {n:>4}: mean {:.12}, min {:.4}, sup gap {:.3e}, scaled {:.3e}",
            bz.mean(),
            bz.min(),
            gap,
            potential::balk_scaled_gap(gap, n, r_big)
        );
    }
    Ok(())
}
