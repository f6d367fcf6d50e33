//! The family `g = exp(-z^2)`, `phi3 = z^-j dz` on `1/2 < |z| < 2`: the
//! curvature at `z = 1` stays fixed while the distance to the inner circle
//! grows, so `|K| d^2` diverges with `j`.
//!
//! ```text
//! cargo run --release --example annulus_family
//! ```

use num_complex::Complex64;
use weierstrass_lab::complex::{build_mesh_level, Domain, HolomorphicFn, HomologyBasis};
use weierstrass_lab::geometry::{osserman_profile, FamilyMember};
use weierstrass_lab::period::period_map;
use weierstrass_lab::weierstrass::{assemble_null_form, WeierstrassPair};

fn main() -> weierstrass_lab::Result<()> {
    let domain = Domain::annulus(0.5, 2.0)?;
    let basis = HomologyBasis::standard(&domain)?;
    let one = HolomorphicFn::parse("1")?;

    let mut family = Vec::new();
    for j in 2..=9 {
        let pair = WeierstrassPair::parse("exp(-z^2)", &format!("z^-{j}"))?;
        let form = assemble_null_form(&pair, &domain)?;
        let period = period_map(&one, &form, &basis)?.iter().map(|p| p.norm()).fold(0.0, f64::max);
        if period > 1e-8 {
            println!("j = {j}: period {period:.3e}, not exact, skipped");
            continue;
        }
        family.push(FamilyMember { label: format!("j={j}"), pair, form });
    }

    let mut meshes = (0..3).map(|k| build_mesh_level(&domain, 0.08, k)).collect::<Result<Vec<_>, _>>()?;
    for m in &mut meshes {
        m.mark_artificial(1);
    }
    let profile = osserman_profile(&family, Complex64::new(1.0, 0.0), &meshes, &[10.0, 100.0])?;
    for r in &profile.records {
        println!("{:>5}  K = {:.6}  d in [{:.3}, {:.3}]  |K| d^2 = {:.2}", r.label, r.k, r.d_lower, r.d_upper, r.product);
    }
    for (t, first) in &profile.entries {
        println!("first member above {t}: {:?}", first.map(|i| &profile.records[i].label));
    }
    Ok(())
}
