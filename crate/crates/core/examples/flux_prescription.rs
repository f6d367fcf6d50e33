//! Changes the flux of the catenoid by multiplying its null form with a
//! spray `exp(sum zeta_i z^k_i)` and solving for `zeta` by Newton's method.
//!
//! ```text
//! cargo run --release --example flux_prescription
//! ```

use std::f64::consts::TAU;

use weierstrass_lab::complex::{Domain, HomologyBasis};
use weierstrass_lab::period::{prescribe_flux, GeneratorFamily, SolveOptions};
use weierstrass_lab::weierstrass::{assemble_null_form, flux, validate_null, WeierstrassPair};

fn main() -> weierstrass_lab::Result<()> {
    let domain = Domain::annulus(0.5, 2.0)?;
    let form = assemble_null_form(&WeierstrassPair::parse("z", "1/z")?, &domain)?;
    let basis = HomologyBasis::standard(&domain)?;
    println!("initial flux {:?}", flux(&form, &basis)?.values[0]);

    for target in [[0.0, 0.0, TAU + 1.0], [0.5, -0.25, TAU], [0.0, 0.0, 3.0]] {
        let res = prescribe_flux(&form, &basis, &[target.to_vec()], &GeneratorFamily::default(), SolveOptions::default())?;
        let h = res.multiplier();
        let modified = form.multiply(&h);
        println!(
            "target {target:?}: rank {}/{}, {} iterations, flux error {:.1e}, nullity {:.1e}",
            res.report.rank,
            res.report.required,
            res.outcome.iterations,
            res.max_flux_error,
            validate_null(&modified, 2000).max_residual
        );
        for row in &res.outcome.trace {
            println!("    it {:>2}  residual {:.3e}  step {:.3e}", row.iteration, row.residual, row.step_norm);
        }
    }
    Ok(())
}
