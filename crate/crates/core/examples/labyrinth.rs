//! A two-arc labyrinth in the unit disc, its target function, and the
//! completeness check for two candidate functions.
//!
//! ```text
//! cargo run --release --example labyrinth
//! ```

use weierstrass_lab::complex::{build_mesh, Domain, HolomorphicFn};
use weierstrass_lab::scenario::{build_labyrinth, labyrinth_completeness_check, LabyrinthSchedule};

fn main() -> weierstrass_lab::Result<()> {
    let schedule = LabyrinthSchedule::Explicit { radii: vec![0.5, 0.8], widths: vec![0.05, 0.03] };
    let lab = build_labyrinth(2, &schedule)?;
    let (integral, need) = lab.gap_integral(0)?;
    println!("gap (0.55, 0.77): integral of f = {integral:.3} > {need:.3}");
    for (t, f) in lab.target_table(20) {
        println!("  f({t:.4}) = {f:.6}");
    }

    let mesh = build_mesh(&Domain::disc(1.0)?, 0.015)?;
    for src in ["1", "exp(70/(1.05 - z))", "exp(10/(1.05 - z))"] {
        let report = labyrinth_completeness_check(&lab, &HolomorphicFn::parse(src)?, &mesh)?;
        println!("g = {src}: {:?}", report.verdict);
        for b in &report.bands {
            println!(
                "  arc {}: min(|g|+1/|g|) = {:.3e}, crossing >= {:.3e}, margin {:.2}, avoiding path {:?}",
                b.arc, b.min_weight, b.crossing_cost, b.margin, b.avoiding_cost
            );
        }
    }
    Ok(())
}
