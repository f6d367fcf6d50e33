//! Catenoid from the pair `g = z`, `phi3 = dz/z` on the annulus
//! `1/2 < |z| < 2`: null form, flux, and the immersion compared with the
//! closed form.
//!
//! ```text
//! cargo run --release --example catenoid
//! ```

use num_complex::Complex64;
use weierstrass_lab::complex::{build_mesh, Domain, HomologyBasis};
use weierstrass_lab::weierstrass::{assemble_null_form, flux, integrate_immersion, validate_null, WeierstrassPair};

fn closed_form(z: Complex64) -> [f64; 3] {
    let w = z.inv();
    [-(z + w).re / 2.0, -(z - w).im / 2.0, z.norm().ln()]
}

fn main() -> weierstrass_lab::Result<()> {
    let domain = Domain::annulus(0.5, 2.0)?;
    let pair = WeierstrassPair::parse("z", "1/z")?;
    let form = assemble_null_form(&pair, &domain)?;
    for (k, c) in form.coefficients().iter().enumerate() {
        println!("f{} = {}", k + 1, c.label());
    }

    let report = validate_null(&form, 10_000);
    println!("nullity residual {:.2e} over {} samples", report.max_residual, report.samples);

    let basis = HomologyBasis::standard(&domain)?;
    let fm = flux(&form, &basis)?;
    println!("flux on |z| = 1: {:?}  (2 pi = {})", fm.values[0], std::f64::consts::TAU);

    let p0 = Complex64::new(1.0, 0.0);
    let mesh = build_mesh(&domain, 0.05)?;
    let imm = integrate_immersion(&form, p0, &closed_form(p0), &mesh, &basis)?;
    println!("{:>22} {:>40} {:>10}", "z", "u(z)", "error");
    for z in [Complex64::new(-1.0, 0.0), Complex64::new(0.3, 1.2), Complex64::new(-0.6, -0.4), Complex64::new(1.7, 0.2)] {
        let u = imm.eval(z)?;
        let exact = closed_form(z);
        let err = u.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{z:>22.4} {:>40} {err:>10.2e}", format!("({:.6}, {:.6}, {:.6})", u[0], u[1], u[2]));
    }
    Ok(())
}
