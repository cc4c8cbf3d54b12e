//! Argument-principle counts on a selected radius against the direct count
//! of critical points minus zeros.

use sendov_lab::{contour, families};

fn main() -> sendov_lab::Result<()> {
    for (name, inst) in [
        ("z^16 - 1", families::example_circle(16)?),
        ("z^10 - z", families::example_origin(10)?),
        ("z^100 - z", families::example_origin(100)?),
    ] {
        let choice = contour::select_radius_instance(&inst, contour::DEFAULT_R1, contour::DEFAULT_R2)?;
        let w = contour::winding_number(inst.f(), choice.radius)?;
        let oracle = contour::instance_zero_pole_count(&inst, choice.radius)?;
        println!(
            "{name:>10}: r = {:.4}, winding {:>3}, oracle {:>3}, {} samples",
            choice.radius, w.winding, oracle, w.samples_used
        );
    }
    Ok(())
}
