//! Helicoid piece on the wedge `Im z > |Re z|`: curvature and intrinsic
//! distance to the boundary rays along the imaginary axis.
//!
//! ```text
//! cargo run --release --example helicoid_wedge
//! ```

use num_complex::Complex64;
use weierstrass_lab::complex::{build_mesh_level, Domain};
use weierstrass_lab::geometry::{conformal_metric, gauss_curvature, geodesic_distance};
use weierstrass_lab::weierstrass::{assemble_null_form, WeierstrassPair};

fn main() -> weierstrass_lab::Result<()> {
    // the arc at radius 6 is a truncation, not part of the surface's boundary
    let domain = Domain::right_wedge(6.0)?;
    let pair = WeierstrassPair::parse("-exp(z)", "i")?;
    let form = assemble_null_form(&pair, &domain)?;
    let metric = conformal_metric(&form);
    let meshes = (0..3).map(|k| build_mesh_level(&domain, 0.08, k)).collect::<Result<Vec<_>, _>>()?;

    println!("{:>5} {:>10} {:>8} {:>22} {:>10}", "t", "K", "lambda^2", "d per level", "d extrap");
    for t in [0.5, 1.0, 2.0, 4.0] {
        let z = Complex64::new(0.0, t);
        let k = gauss_curvature(&pair, z, Some(&domain))?;
        let d = geodesic_distance(&metric, z, &meshes)?;
        let levels: Vec<String> = d.levels.iter().map(|l| format!("{:.3}", l.1)).collect();
        println!("{t:>5} {k:>10.6} {:>8.4} {:>22} {:>10.4}", metric.lambda(z).powi(2), levels.join(" "), d.extrapolated);
    }
    Ok(())
}
