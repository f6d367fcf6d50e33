//! Aligns a perturbed null curve with a reference one up to a holomorphic
//! gauge factor, with and without zeros of the reference component.
//!
//! ```text
//! cargo run --example gauge_alignment
//! ```

use num_complex::Complex64;
use weierstrass_lab::complex::HolomorphicFn;
use weierstrass_lab::projective::{gauge_align, projective_proximity, CompactL, GaugeOptions};

fn parse_all(src: &[&str]) -> weierstrass_lab::Result<Vec<HolomorphicFn>> {
    src.iter().map(|s| HolomorphicFn::parse(s)).collect()
}

fn main() -> weierstrass_lab::Result<()> {
    let origin = Complex64::new(0.0, 0.0);

    let f = parse_all(&["(1/z^2 - 1)/2", "i*(1/z^2 + 1)/2", "1/z"])?;
    let g = parse_all(&["exp(0.01*z)*(1/z^2 - 1)/2", "exp(0.01*z)*i*(1/z^2 + 1)/2", "exp(0.01*z)/z"])?;
    let l = CompactL::annulus(origin, 0.8, 1.25)?;
    println!("projective proximity {:.3e}", projective_proximity(&f, &g, &l, 512));
    let r = gauge_align(&f, &g, &l, 1e-6, &GaugeOptions::default())?;
    println!("{:?}: reference f{}, deviation {:.2e}, success {}", r.case, r.reference_component + 1, r.deviation, r.success);

    // the reference component z^2 has a double zero that g splits into two
    let f = parse_all(&["z^2", "1 + z", "2 - z"])?;
    let g = parse_all(&["(1 + 0.001*z)*(z^2 - 0.0001)", "1 + z", "2 - z"])?;
    let l = CompactL::disc(origin, 0.5)?;
    let opts = GaugeOptions { reference: Some(0), discs: vec![(origin, 0.25)], samples: None };
    let r = gauge_align(&f, &g, &l, 0.1, &opts)?;
    println!(
        "{:?}: deviation {:.3e} <= bound {:.3e}, windings {:?}",
        r.case,
        r.deviation,
        r.bound.unwrap_or(f64::NAN),
        r.windings.iter().map(|w| (w.zeros_f, w.zeros_g)).collect::<Vec<_>>()
    );
    Ok(())
}
