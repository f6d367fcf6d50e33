//! Divisor multipliers that move a zero of multiplicity `m` at the origin
//! to nearby points, with their deviation from 1 on the unit circle.
//!
//! ```text
//! cargo run --example divisor_multiplier
//! ```

use num_complex::Complex64;
use weierstrass_lab::complex::HolomorphicFn;
use weierstrass_lab::projective::{divisor_multiplier, CompactL, Divisor};

fn main() -> weierstrass_lab::Result<()> {
    let origin = Complex64::new(0.0, 0.0);
    let l = CompactL::disc(origin, 1.0)?;
    let chart = [HolomorphicFn::identity()];
    for m in [1u32, 2, 3] {
        let e0 = Divisor::from_points(&[(origin, m)])?;
        for rho in [1e-1, 1e-2, 1e-3] {
            // m points spread evenly on the circle of radius rho
            let pts: Vec<(Complex64, u32)> =
                (0..m).map(|k| (Complex64::from_polar(rho, std::f64::consts::TAU * f64::from(k) / f64::from(m)), 1)).collect();
            let e = Divisor::from_points(&pts)?;
            let psi = divisor_multiplier(&e0, &e, &l, &chart, &[0.5])?;
            println!(
                "m = {m}, rho = {rho:.0e}: |Psi - 1| on bL = {:.3e} (m rho + m rho^2 = {:.3e}), verified {}",
                psi.boundary_deviation,
                f64::from(m) * (rho + rho * rho),
                psi.verified
            );
        }
    }
    Ok(())
}
