//! Config-driven scenarios. Each scenario is one JSON document; running it
//! produces a [`ScenarioReport`] with acceptance checks and tables, written
//! as `summary.json`, CSV and `.dat` files.

pub mod labyrinth;
pub mod report;
mod runners;

use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{Domain, FnSpec, HolomorphicFn};
use crate::error::{Error, Result};
use crate::period::GeneratorFamily;
use crate::projective::{CompactL, GaugeOptions};
use crate::weierstrass::{assemble_null_form, NullForm, WeierstrassPair};

pub use labyrinth::{build_labyrinth, labyrinth_completeness_check, CrossingReport, Labyrinth, LabyrinthSchedule, LabyrinthVerdict};
pub use report::{Check, ScenarioReport, Summary, Table};

fn text(s: &str) -> FnSpec {
    FnSpec::Text(s.into())
}

/// Finest edge length and number of halving levels; level `k` of `levels`
/// uses `h 2^{levels-1-k}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub h: f64,
    pub levels: u32,
}

impl MeshSpec {
    pub fn base(&self) -> f64 {
        self.h * f64::from(1u32 << (self.levels - 1))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedPoint {
    pub z: [f64; 2],
    pub u: Vec<f64>,
}

/// Discrete curvature comparison on an annular patch.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureCheck {
    pub inner: f64,
    pub outer: f64,
    /// Edge length of the patch mesh carrying the immersion.
    pub mesh_h: f64,
    /// Radius of the hexagonal fan.
    pub fan_h: f64,
    pub probes: Vec<[f64; 2]>,
    pub rel_tol: f64,
}

impl Default for CurvatureCheck {
    fn default() -> Self {
        let probes = [0.9, 1.0, 1.1]
            .iter()
            .flat_map(|&r| (0..3).map(move |k| Complex64::from_polar(r, 0.3 + TAU * k as f64 / 3.0)))
            .map(|z| [z.re, z.im])
            .collect();
        CurvatureCheck { inner: 0.8, outer: 1.25, mesh_h: 0.02, fan_h: 0.01, probes, rel_tol: 0.02 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatenoidConfig {
    pub domain: Domain,
    pub g: FnSpec,
    pub phi3: FnSpec,
    pub base_point: [f64; 2],
    pub x0: Vec<f64>,
    pub mesh_h: f64,
    pub expected_flux: Option<Vec<Vec<f64>>>,
    pub flux_tol: f64,
    pub expected_points: Vec<ExpectedPoint>,
    pub point_tol: f64,
    pub nullity_samples: usize,
    pub curvature: Option<CurvatureCheck>,
}

impl Default for CatenoidConfig {
    fn default() -> Self {
        CatenoidConfig {
            domain: Domain::Annulus { inner: 0.5, outer: 2.0 },
            g: text("z"),
            phi3: text("1/z"),
            base_point: [1.0, 0.0],
            x0: vec![-1.0, 0.0, 0.0],
            mesh_h: 0.05,
            expected_flux: Some(vec![vec![0.0, 0.0, TAU]]),
            flux_tol: 1e-8,
            expected_points: vec![ExpectedPoint { z: [-1.0, 0.0], u: vec![1.0, 0.0, 0.0] }],
            point_tol: 1e-6,
            nullity_samples: 10_000,
            curvature: Some(CurvatureCheck::default()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HelicoidConfig {
    pub truncation_radius: f64,
    pub g: FnSpec,
    pub phi3: FnSpec,
    pub heights: Vec<f64>,
    pub mesh: MeshSpec,
    pub k_tol: f64,
    /// Required ratio `d(it) / t`.
    pub distance_factor: f64,
    pub nullity_samples: usize,
}

impl Default for HelicoidConfig {
    fn default() -> Self {
        HelicoidConfig {
            truncation_radius: 6.0,
            g: text("-exp(z)"),
            phi3: text("i"),
            heights: vec![0.5, 1.0, 2.0, 4.0],
            mesh: MeshSpec { h: 0.02, levels: 3 },
            k_tol: 1e-6,
            distance_factor: 0.95,
            nullity_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    /// Outer radius; the annulus is `1/R < |z| < R`.
    pub radius: f64,
    pub g0: FnSpec,
    pub zeta0: [f64; 2],
    pub j: Vec<i32>,
    pub mesh: MeshSpec,
    pub period_tol: f64,
    pub k_rel_tol: f64,
    /// Allowed shortfall of `d` below the flat lower bound, relative.
    pub distance_slack: f64,
    /// The product at the last even member must exceed this.
    pub final_product: f64,
    pub thresholds: Vec<f64>,
    /// Treat the outer circle as an artificial boundary.
    pub outer_artificial: bool,
    pub nullity_samples: usize,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            radius: 2.0,
            g0: text("exp(z^2)"),
            zeta0: [1.0, 0.0],
            j: (2..=12).collect(),
            mesh: MeshSpec { h: 0.02, levels: 3 },
            period_tol: 1e-8,
            k_rel_tol: 1e-6,
            distance_slack: 0.05,
            final_product: 1e3,
            thresholds: vec![10.0, 100.0, 1000.0],
            outer_artificial: true,
            nullity_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxConfig {
    pub domain: Domain,
    pub g: FnSpec,
    pub phi3: FnSpec,
    pub target_flux: Vec<Vec<f64>>,
    pub family: GeneratorFamily,
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub flux_tol: f64,
    /// Largest spray coordinate allowed when the target is the current flux.
    pub identity_tol: f64,
}

impl Default for FluxConfig {
    fn default() -> Self {
        FluxConfig {
            domain: Domain::Annulus { inner: 0.5, outer: 2.0 },
            g: text("z"),
            phi3: text("1/z"),
            target_flux: vec![vec![0.0, 0.0, TAU + 1.0]],
            family: GeneratorFamily::default(),
            newton_tol: 1e-10,
            max_iterations: 20,
            flux_tol: 1e-8,
            identity_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeConfig {
    pub f: Vec<FnSpec>,
    pub g: Vec<FnSpec>,
    pub compact: CompactL,
    pub epsilon: f64,
    pub max_delta: f64,
    pub options: GaugeOptions,
}

const CATENOID_COEFFS: [&str; 3] = ["(1/z^2 - 1)/2", "i*(1/z^2 + 1)/2", "1/z"];

impl Default for GaugeConfig {
    fn default() -> Self {
        GaugeConfig {
            f: CATENOID_COEFFS.iter().map(|s| text(s)).collect(),
            g: CATENOID_COEFFS.iter().map(|s| text(&format!("exp(0.01*z)*({s})"))).collect(),
            compact: CompactL::Annulus { center: Complex64::new(0.0, 0.0), inner: 0.8, outer: 1.25 },
            epsilon: 1e-6,
            max_delta: 0.02,
            options: GaugeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabyrinthConfig {
    /// Number of arcs; defaults to the length of an explicit schedule.
    pub count: Option<usize>,
    pub schedule: LabyrinthSchedule,
    pub table_samples: usize,
    /// Candidate `g` for the completeness check.
    pub candidate: Option<FnSpec>,
    /// Disc mesh edge length; defaults to half the smallest width.
    pub mesh_h: Option<f64>,
    /// Make the completeness verdict an acceptance check.
    pub require_complete: bool,
}

impl Default for LabyrinthConfig {
    fn default() -> Self {
        LabyrinthConfig {
            count: None,
            schedule: LabyrinthSchedule::Explicit { radii: vec![0.5, 0.8], widths: vec![0.05, 0.01] },
            table_samples: 1000,
            candidate: None,
            mesh_h: None,
            require_complete: false,
        }
    }
}

/// A parsed scenario document. The `scenario` key selects the variant and
/// every other key belongs to that variant; unknown keys are rejected.
#[derive(Debug, Clone)]
pub enum ScenarioConfig {
    Catenoid(CatenoidConfig),
    HelicoidWedge(HelicoidConfig),
    AnnulusFamily(FamilyConfig),
    FluxPrescription(FluxConfig),
    GaugeAlignment(GaugeConfig),
    Labyrinth(LabyrinthConfig),
}

pub const SCENARIOS: [&str; 6] = ["catenoid", "helicoid_wedge", "annulus_family", "flux_prescription", "gauge_alignment", "labyrinth"];

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::ConfigInvalid(e.to_string())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(invalid)?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let serde_json::Value::Object(mut map) = value else {
            return Err(invalid("scenario document must be a JSON object"));
        };
        let name = match map.remove("scenario") {
            Some(serde_json::Value::String(s)) => s,
            _ => return Err(invalid("missing string key \"scenario\"")),
        };
        let rest = serde_json::Value::Object(map);
        let config = match name.as_str() {
            "catenoid" => ScenarioConfig::Catenoid(serde_json::from_value(rest).map_err(invalid)?),
            "helicoid_wedge" => ScenarioConfig::HelicoidWedge(serde_json::from_value(rest).map_err(invalid)?),
            "annulus_family" => ScenarioConfig::AnnulusFamily(serde_json::from_value(rest).map_err(invalid)?),
            "flux_prescription" => ScenarioConfig::FluxPrescription(serde_json::from_value(rest).map_err(invalid)?),
            "gauge_alignment" => ScenarioConfig::GaugeAlignment(serde_json::from_value(rest).map_err(invalid)?),
            "labyrinth" => ScenarioConfig::Labyrinth(serde_json::from_value(rest).map_err(invalid)?),
            other => return Err(invalid(format!("unknown scenario {other:?}; expected one of {SCENARIOS:?}"))),
        };
        config.validate()
    }

    /// Default configuration of a named scenario.
    pub fn default_for(name: &str) -> Result<Self> {
        Self::from_value(serde_json::json!({ "scenario": name }))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Catenoid(_) => "catenoid",
            ScenarioConfig::HelicoidWedge(_) => "helicoid_wedge",
            ScenarioConfig::AnnulusFamily(_) => "annulus_family",
            ScenarioConfig::FluxPrescription(_) => "flux_prescription",
            ScenarioConfig::GaugeAlignment(_) => "gauge_alignment",
            ScenarioConfig::Labyrinth(_) => "labyrinth",
        }
    }

    /// The full configuration, defaults included, as JSON.
    pub fn to_value(&self) -> serde_json::Value {
        let inner = match self {
            ScenarioConfig::Catenoid(c) => serde_json::to_value(c),
            ScenarioConfig::HelicoidWedge(c) => serde_json::to_value(c),
            ScenarioConfig::AnnulusFamily(c) => serde_json::to_value(c),
            ScenarioConfig::FluxPrescription(c) => serde_json::to_value(c),
            ScenarioConfig::GaugeAlignment(c) => serde_json::to_value(c),
            ScenarioConfig::Labyrinth(c) => serde_json::to_value(c),
        };
        let mut v = inner.unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("scenario".into(), self.name().into());
        }
        v
    }

    fn validate(self) -> Result<Self> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {x}")))
            }
        };
        let mesh = |m: &MeshSpec| {
            positive("mesh.h", m.h)?;
            if !(1..=8).contains(&m.levels) {
                return Err(invalid(format!("mesh.levels must be in 1..=8, got {}", m.levels)));
            }
            Ok(())
        };
        match &self {
            ScenarioConfig::Catenoid(c) => {
                positive("mesh_h", c.mesh_h)?;
                positive("flux_tol", c.flux_tol)?;
                positive("point_tol", c.point_tol)?;
                if let Some(k) = &c.curvature {
                    positive("curvature.mesh_h", k.mesh_h)?;
                    positive("curvature.fan_h", k.fan_h)?;
                    positive("curvature.rel_tol", k.rel_tol)?;
                    Domain::annulus(k.inner, k.outer).map_err(invalid)?;
                }
                build_fn(&c.g, "g")?;
                build_fn(&c.phi3, "phi3")?;
            }
            ScenarioConfig::HelicoidWedge(c) => {
                positive("truncation_radius", c.truncation_radius)?;
                mesh(&c.mesh)?;
                positive("k_tol", c.k_tol)?;
                for &t in &c.heights {
                    positive("heights", t)?;
                }
                build_fn(&c.g, "g")?;
                build_fn(&c.phi3, "phi3")?;
            }
            ScenarioConfig::AnnulusFamily(c) => {
                if !(c.radius.is_finite() && c.radius > 1.0) {
                    return Err(invalid(format!("radius must exceed 1, got {}", c.radius)));
                }
                mesh(&c.mesh)?;
                positive("period_tol", c.period_tol)?;
                positive("k_rel_tol", c.k_rel_tol)?;
                if c.j.is_empty() || c.j.iter().any(|&j| j < 2) {
                    return Err(invalid("j values must be at least 2"));
                }
                build_fn(&c.g0, "g0")?;
            }
            ScenarioConfig::FluxPrescription(c) => {
                positive("flux_tol", c.flux_tol)?;
                positive("newton_tol", c.newton_tol)?;
                build_fn(&c.g, "g")?;
                build_fn(&c.phi3, "phi3")?;
            }
            ScenarioConfig::GaugeAlignment(c) => {
                positive("epsilon", c.epsilon)?;
                positive("max_delta", c.max_delta)?;
                c.compact.validate().map_err(invalid)?;
                build_fns(&c.f, "f")?;
                build_fns(&c.g, "g")?;
            }
            ScenarioConfig::Labyrinth(c) => {
                if let Some(h) = c.mesh_h {
                    positive("mesh_h", h)?;
                }
                if let Some(g) = &c.candidate {
                    build_fn(g, "candidate")?;
                }
            }
        }
        Ok(self)
    }
}

pub(crate) fn build_fn(spec: &FnSpec, field: &str) -> Result<HolomorphicFn> {
    spec.build().map_err(|e| invalid(format!("{field}: {e}")))
}

pub(crate) fn build_fns(specs: &[FnSpec], field: &str) -> Result<Vec<HolomorphicFn>> {
    specs.iter().enumerate().map(|(k, s)| build_fn(s, &format!("{field}[{k}]"))).collect()
}

/// Runs a scenario without touching the filesystem.
pub fn evaluate(config: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.name(), config.to_value());
    match config {
        ScenarioConfig::Catenoid(c) => runners::catenoid(c, &mut report)?,
        ScenarioConfig::HelicoidWedge(c) => runners::helicoid(c, &mut report)?,
        ScenarioConfig::AnnulusFamily(c) => runners::annulus_family(c, &mut report)?,
        ScenarioConfig::FluxPrescription(c) => runners::flux_prescription(c, &mut report)?,
        ScenarioConfig::GaugeAlignment(c) => runners::gauge(c, &mut report)?,
        ScenarioConfig::Labyrinth(c) => runners::labyrinth(c, &mut report)?,
    }
    Ok(report)
}

/// Runs a scenario and writes its outputs to `out`. A failing module call
/// still leaves a `summary.json` recording the error.
pub fn run_scenario(config: &ScenarioConfig, out: &Path) -> Result<ScenarioReport> {
    match evaluate(config) {
        Ok(report) => {
            report.write(out)?;
            Ok(report)
        }
        Err(e) => {
            write_failure(out, config.name(), config.to_value(), &e)?;
            Err(e)
        }
    }
}

/// Parses and runs a config file. Returns whether every check passed.
pub fn run_config_file(path: &Path, out: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(path)?;
    let config = match ScenarioConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            let raw = serde_json::from_str(&text).unwrap_or(serde_json::Value::Null);
            write_failure(out, "unknown", raw, &e)?;
            return Err(e);
        }
    };
    Ok(run_scenario(&config, out)?.passed())
}

fn write_failure(out: &Path, scenario: &str, config: serde_json::Value, e: &Error) -> Result<()> {
    let summary = Summary {
        schema_version: report::SCHEMA_VERSION,
        scenario: scenario.into(),
        passed: false,
        error: Some(e.to_string()),
        config,
        checks: Vec::new(),
        tables: Vec::new(),
        flags: Vec::new(),
        results: serde_json::Value::Null,
    };
    report::write_summary(out, &summary)
}

/// The null forms used by the default scenarios, labelled.
pub fn builtin_forms() -> Result<Vec<(String, NullForm)>> {
    let mut out = Vec::new();
    let cat = CatenoidConfig::default();
    let pair = WeierstrassPair::new(build_fn(&cat.g, "g")?, build_fn(&cat.phi3, "phi3")?);
    out.push(("catenoid".to_string(), assemble_null_form(&pair, &cat.domain)?));
    let hel = HelicoidConfig::default();
    let pair = WeierstrassPair::new(build_fn(&hel.g, "g")?, build_fn(&hel.phi3, "phi3")?);
    out.push(("helicoid_wedge".to_string(), assemble_null_form(&pair, &Domain::wedge(PI / 4.0, hel.truncation_radius)?)?));
    let fam = FamilyConfig::default();
    let g0 = build_fn(&fam.g0, "g0")?;
    for &j in &fam.j {
        let (pair, domain) = runners::family_member(&g0, fam.radius, j)?;
        out.push((format!("annulus_family_j{j}"), assemble_null_form(&pair, &domain)?));
    }
    let gauge = GaugeConfig::default();
    let domain = Domain::annulus(0.5, 2.0)?;
    out.push(("gauge_alignment_f".to_string(), NullForm::new(build_fns(&gauge.f, "f")?, domain.clone())?));
    out.push(("gauge_alignment_g".to_string(), NullForm::new(build_fns(&gauge.g, "g")?, domain)?));
    Ok(out)
}
