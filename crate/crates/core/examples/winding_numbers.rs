//! Zero counting with the argument principle and zero location by power
//! sums.
//!
//! ```text
//! cargo run --example winding_numbers
//! ```

use num_complex::Complex64;
use weierstrass_lab::complex::{argument_winding, winding_number, HolomorphicFn, PathPolyline};
use weierstrass_lab::projective::zeros_in_disc;

fn main() -> weierstrass_lab::Result<()> {
    let unit = PathPolyline::circle(Complex64::new(0.0, 0.0), 1.0, 512);
    for src in ["z^3 - 0.125", "(z - 0.5)^2/(z + 0.25)", "exp(z)*(z - 2)", "z^4 + 2"] {
        let f = HolomorphicFn::parse(src)?;
        let by_integral = winding_number(&f, &unit)?;
        let by_argument = argument_winding(&|z| f.eval(z), &unit)?;
        println!("{src:>24}: zeros - poles in the unit disc = {by_integral} (argument tracking {by_argument})");
    }

    let f = HolomorphicFn::parse("(z - 0.3)*(z + 0.2)^2*(z - 0.1*i)")?;
    for (z, m) in zeros_in_disc(&f, Complex64::new(0.0, 0.0), 0.5)? {
        println!("zero at {z:.10} with multiplicity {m}");
    }

    match winding_number(&HolomorphicFn::parse("z - 1")?, &unit) {
        Err(e) => println!("zero on the loop: {e}"),
        Ok(n) => println!("unexpected count {n}"),
    }
    Ok(())
}
