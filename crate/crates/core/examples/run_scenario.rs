//! Runs a scenario document from `configs/` and prints its checks. Output
//! files go to a directory under the system temp dir.
//!
//! ```text
//! cargo run --release --example run_scenario -- configs/annulus_family.json
//! ```

use std::path::PathBuf;

use weierstrass_lab::scenario::{run_scenario, ScenarioConfig};

fn main() -> weierstrass_lab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/catenoid.json").into());
    let config = ScenarioConfig::from_json(&std::fs::read_to_string(&path)?)?;
    let out = std::env::temp_dir().join(format!("weierstrass-lab-{}", config.name()));
    let report = run_scenario(&config, &out)?;
    for c in &report.checks {
        println!("{:<4} {:<28} {:>12.4e} {} {:.4e}", if c.pass { "ok" } else { "FAIL" }, c.name, c.value, c.relation, c.tolerance);
    }
    for f in &report.flags {
        println!("note: {f}");
    }
    println!("wrote {}", PathBuf::from(&out).display());
    Ok(())
}
