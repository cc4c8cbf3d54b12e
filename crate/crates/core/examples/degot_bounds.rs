//! Lower bound, fan bound and the elementary inequality at several `delta`,
//! on a random instance normalised so that its largest zero sits at `a > 0`.

use sendov_lab::experiment::{case_rng, random_disk_polynomial};
use sendov_lab::{poly, sendov};

fn main() -> sendov_lab::Result<()> {
    let mut rng = case_rng(3, 0);
    let f = random_disk_polynomial(&mut rng, 12)?;
    let roots = f.roots().expect("built from roots");
    let top = (0..roots.len())
        .max_by(|&i, &j| roots[i].norm().total_cmp(&roots[j].norm()))
        .expect("nonempty");
    let inst = poly::normalize_sendov(&f, top)?;
    let deltas: Vec<f64> = [0.1, 0.3, 0.5, 0.9].iter().map(|t| t * inst.a()).collect();
    let rep = sendov::degot_suite(&inst, &deltas)?;
    println!("a = {:.6}, hypothesis {:?}, min |a - xi| = {:.6}", rep.a, rep.hypothesis, rep.min_critical_distance);
    println!("fan slack {:?}, |f'(a)|/n = {:.4}", rep.fan_slack, rep.fprime_ratio);
    for row in &rep.rows {
        println!("delta {:.3}: lower {:+.4}, lemma {:+.4}", row.delta, row.lower_bound_slack, row.lemma_slack);
    }
    Ok(())
}
