//! Labyrinths of concentric arc neighbourhoods in the unit disc and the
//! checks that make a metric `(|g| + 1/|g|)^2 |dz|^2` complete on them.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::ControlFlow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::quadrature::{integrate_real, QuadOptions};
use crate::complex::{HolomorphicFn, Mesh};
use crate::error::{Error, Result};

/// Radii and widths of the arcs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LabyrinthSchedule {
    Explicit { radii: Vec<f64>, widths: Vec<f64> },
    /// `r_j = 1 - (1 - r_1) q^{j-1}` and `eps_j = eps_1 q^{j-1}`.
    Geometric { first_radius: f64, first_width: f64, ratio: f64 },
}

impl LabyrinthSchedule {
    fn realize(&self, count: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            LabyrinthSchedule::Explicit { radii, widths } => (radii.clone(), widths.clone()),
            LabyrinthSchedule::Geometric { first_radius, first_width, ratio } => (0..count)
                .map(|j| {
                    let q = ratio.powi(j as i32);
                    (1.0 - (1.0 - first_radius) * q, first_width * q)
                })
                .unzip(),
        }
    }
}

/// Circle arc `|z| = radius`, `|arg z - center_angle| <= span / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub radius: f64,
    pub center_angle: f64,
    pub span: f64,
}

impl Arc {
    pub fn endpoints(&self) -> [Complex64; 2] {
        [
            Complex64::from_polar(self.radius, self.center_angle - self.span / 2.0),
            Complex64::from_polar(self.radius, self.center_angle + self.span / 2.0),
        ]
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        angle_offset(theta, self.center_angle).abs() <= self.span / 2.0
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        if z.norm() > 0.0 && self.contains_angle(z.arg()) {
            (z.norm() - self.radius).abs()
        } else {
            let [a, b] = self.endpoints();
            (z - a).norm().min((z - b).norm())
        }
    }

    pub fn point(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.radius, self.center_angle + self.span * (t - 0.5))
    }
}

fn angle_offset(theta: f64, reference: f64) -> f64 {
    (theta - reference + PI).rem_euclid(TAU) - PI
}

/// Arcs `c_j`, their `eps_j` neighbourhoods `C_j`, and the radial segment
/// `[0, 1)` which together form the closed set `F`.
#[derive(Debug, Clone, Serialize)]
pub struct Labyrinth {
    pub radii: Vec<f64>,
    pub widths: Vec<f64>,
    pub arcs: Vec<Arc>,
    /// Plateau of the target function on each gap interval.
    pub plateaus: Vec<f64>,
}

/// Clearance between the end caps of consecutive `C_j`, in units of `eps_j`.
pub const GAP_CLEARANCE: f64 = 2.0;

/// Builds and validates a labyrinth with `count` arcs. Gaps alternate
/// between angle `pi/2` and `-pi/2`, so every arc crosses the positive real
/// axis and consecutive gaps sit on opposite sides.
pub fn build_labyrinth(count: usize, schedule: &LabyrinthSchedule) -> Result<Labyrinth> {
    let bad = |m: String| Err(Error::ScheduleInvalid(m));
    if count < 2 {
        return bad(format!("need at least two arcs, got {count}"));
    }
    let (radii, widths) = schedule.realize(count);
    if radii.len() != count || widths.len() != count {
        return bad(format!("schedule gives {} radii and {} widths for {count} arcs", radii.len(), widths.len()));
    }
    if radii.iter().chain(&widths).any(|x| !x.is_finite()) {
        return bad("radii and widths must be finite".into());
    }
    if widths.iter().any(|&e| e <= 0.0) {
        return bad("widths must be positive".into());
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return bad("radii must increase strictly".into());
    }
    if widths.windows(2).any(|w| w[1] >= w[0]) {
        return bad("widths must decrease strictly".into());
    }
    if radii[0] - widths[0] <= 0.0 {
        return bad("the first neighbourhood reaches the origin".into());
    }
    if radii[count - 1] + widths[count - 1] >= 1.0 {
        return bad("the last neighbourhood leaves the unit disc".into());
    }
    for j in 0..count - 1 {
        if radii[j] + widths[j] >= radii[j + 1] - widths[j + 1] {
            return bad(format!("neighbourhoods {} and {} overlap", j + 1, j + 2));
        }
    }
    let mut arcs = Vec::with_capacity(count);
    for j in 0..count {
        let chord = (2.0 + GAP_CLEARANCE) * widths[j];
        if chord >= 2.0 * radii[j] {
            return bad(format!("arc {} is too short for its gap", j + 1));
        }
        let gap = 2.0 * (chord / (2.0 * radii[j])).asin();
        let gap_angle = if j % 2 == 0 { FRAC_PI_2 } else { -FRAC_PI_2 };
        arcs.push(Arc { radius: radii[j], center_angle: gap_angle + PI, span: TAU - gap });
    }
    if let Some(j) = arcs.iter().position(|a| !a.contains_angle(0.0)) {
        return bad(format!("arc {} misses the positive real axis", j + 1));
    }
    let plateaus = (0..count - 1)
        .map(|j| {
            let len = radii[j + 1] - widths[j + 1] - radii[j] - widths[j];
            1.25 / (0.9 * len * widths[j + 1])
        })
        .collect();
    let lab = Labyrinth { radii, widths, arcs, plateaus };
    for j in 0..count - 1 {
        let (integral, need) = lab.gap_integral(j)?;
        if !(integral > need) {
            return bad(format!("gap integral {integral} does not exceed {need} after arc {}", j + 1));
        }
    }
    Ok(lab)
}

impl Labyrinth {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// `eps_j^j` with `j` counted from one.
    pub fn level(&self, j: usize) -> f64 {
        self.widths[j].powi(j as i32 + 1)
    }

    /// Index of the neighbourhood `C_j` containing `z`.
    pub fn neighbourhood_of(&self, z: Complex64) -> Option<usize> {
        self.arcs.iter().zip(&self.widths).position(|(a, &e)| a.distance(z) <= e)
    }

    /// The gap interval `(r_j + eps_j, r_{j+1} - eps_{j+1})` on `[0, 1)`.
    pub fn gap(&self, j: usize) -> (f64, f64) {
        (self.radii[j] + self.widths[j], self.radii[j + 1] - self.widths[j + 1])
    }

    /// Target function on `[0, 1)`: `eps_j^j` across `C_j`, a trapezoid
    /// with 10% ramps and plateau `plateaus[j]` on each gap, and the
    /// neighbouring constant level before the first and after the last arc.
    pub fn target_radial(&self, t: f64) -> f64 {
        let n = self.len();
        if t < self.radii[0] - self.widths[0] {
            return self.level(0);
        }
        for j in 0..n {
            if (t - self.radii[j]).abs() <= self.widths[j] {
                return self.level(j);
            }
            if j + 1 < n {
                let (a, b) = self.gap(j);
                if t > a && t < b {
                    let s = (t - a) / (b - a);
                    let c = self.plateaus[j];
                    return if s < 0.1 {
                        self.level(j) + (c - self.level(j)) * s / 0.1
                    } else if s > 0.9 {
                        self.level(j + 1) + (c - self.level(j + 1)) * (1.0 - s) / 0.1
                    } else {
                        c
                    };
                }
            }
        }
        self.level(n - 1)
    }

    /// Target function on `F`, `None` off `F`.
    pub fn target(&self, z: Complex64) -> Option<f64> {
        if let Some(j) = self.neighbourhood_of(z) {
            return Some(self.level(j));
        }
        (z.im == 0.0 && z.re >= 0.0 && z.re < 1.0).then(|| self.target_radial(z.re))
    }

    /// Quadrature of the target over gap `j` and the bound `1/eps_{j+1}` it
    /// must exceed.
    pub fn gap_integral(&self, j: usize) -> Result<(f64, f64)> {
        let (a, b) = self.gap(j);
        let w = b - a;
        let mut total = 0.0;
        for (s0, s1) in [(0.0, 0.1), (0.1, 0.9), (0.9, 1.0)] {
            total += integrate_real(|t| self.target_radial(t), a + s0 * w, a + s1 * w, QuadOptions::default())?.0;
        }
        Ok((total, 1.0 / self.widths[j + 1]))
    }

    /// `(radius, f)` on a uniform grid of `samples` points in `[0, 1)`
    /// together with every breakpoint of the piecewise definition.
    pub fn target_table(&self, samples: usize) -> Vec<(f64, f64)> {
        let mut ts: Vec<f64> = (0..samples).map(|k| k as f64 / samples as f64).collect();
        for j in 0..self.len() {
            ts.push(self.radii[j] - self.widths[j]);
            ts.push(self.radii[j] + self.widths[j]);
            if j + 1 < self.len() {
                let (a, b) = self.gap(j);
                ts.extend([0.1, 0.9].map(|s| a + s * (b - a)));
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.into_iter().map(|t| (t, self.target_radial(t))).collect()
    }

    /// Points of `C_j`: offsets across the arc at `across` levels and the
    /// two end caps.
    pub fn neighbourhood_samples(&self, j: usize, along: usize, across: usize) -> Vec<Complex64> {
        let (arc, eps) = (self.arcs[j], self.widths[j]);
        let mut out = Vec::with_capacity(along * across + 2 * across * across);
        for a in 0..along {
            let t = a as f64 / (along - 1) as f64;
            let dir = arc.point(t) / arc.radius;
            for k in 0..across {
                let off = -eps + 2.0 * eps * k as f64 / (across - 1) as f64;
                out.push(dir * (arc.radius + off));
            }
        }
        for end in arc.endpoints() {
            for k in 1..across {
                let rho = eps * k as f64 / (across - 1) as f64;
                for m in 0..2 * across {
                    out.push(end + Complex64::from_polar(rho, TAU * m as f64 / (2 * across) as f64));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandReport {
    /// Arc index counted from one.
    pub arc: usize,
    pub radius: f64,
    pub width: f64,
    /// `min (|g| + 1/|g|)` over samples of `C_j`.
    pub min_weight: f64,
    /// `2 eps_j min_weight`, a lower bound for crossing `C_j`.
    pub crossing_cost: f64,
    /// `min log|g| - 1/eps_j`; positive iff `|g| > e^{1/eps_j}` on `C_j`.
    pub margin: f64,
    pub meets_threshold: bool,
    /// Euclidean length of the shortest path from inside `C_j` to outside
    /// `C_{j+1}` that avoids every neighbourhood; `None` for the last arc.
    pub avoiding_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LabyrinthVerdict {
    CompletenessConsistent,
    ThresholdsNotMet { arcs: Vec<usize> },
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingReport {
    pub bands: Vec<BandReport>,
    pub verdict: LabyrinthVerdict,
}

/// Evaluates a candidate `g` on the labyrinth. The mesh should cover the
/// unit disc finely enough to resolve the gaps.
pub fn labyrinth_completeness_check(lab: &Labyrinth, g: &HolomorphicFn, mesh: &Mesh) -> Result<CrossingReport> {
    for &z in mesh.vertices() {
        if z.norm() < 1.0 {
            let m = g.eval(z).norm();
            if m == 0.0 {
                return Err(Error::InvalidInput(format!("candidate g vanishes at {z}")));
            }
        }
    }
    let n = lab.len();
    let mut bands = Vec::with_capacity(n);
    for j in 0..n {
        let along = ((lab.arcs[j].span * lab.radii[j] / (0.25 * lab.widths[j])).ceil() as usize).clamp(64, 20_000);
        let (mut min_weight, mut min_log) = (f64::INFINITY, f64::INFINITY);
        for z in lab.neighbourhood_samples(j, along, 9) {
            let m = g.eval(z).norm();
            let log = m.ln();
            let weight = if m.is_finite() { m + 1.0 / m } else { f64::INFINITY };
            if !(weight >= min_weight) {
                min_weight = weight;
            }
            if !(log >= min_log) {
                min_log = log;
            }
        }
        let margin = min_log - 1.0 / lab.widths[j];
        bands.push(BandReport {
            arc: j + 1,
            radius: lab.radii[j],
            width: lab.widths[j],
            min_weight,
            crossing_cost: 2.0 * lab.widths[j] * min_weight,
            margin,
            meets_threshold: margin > 0.0,
            avoiding_cost: (j + 1 < n).then(|| avoiding_cost(lab, mesh, j)),
        });
    }
    let failing: Vec<usize> = bands.iter().filter(|b| !b.meets_threshold).map(|b| b.arc).collect();
    let verdict = if failing.is_empty() {
        LabyrinthVerdict::CompletenessConsistent
    } else {
        LabyrinthVerdict::ThresholdsNotMet { arcs: failing }
    };
    Ok(CrossingReport { bands, verdict })
}

fn avoiding_cost(lab: &Labyrinth, mesh: &Mesh, j: usize) -> f64 {
    let inner = lab.radii[j] - lab.widths[j];
    let outer = lab.radii[j + 1] + lab.widths[j + 1];
    let verts = mesh.vertices();
    let blocked: Vec<bool> = verts.iter().map(|&z| lab.neighbourhood_of(z).is_some()).collect();
    let sources: Vec<(usize, f64)> = (0..verts.len()).filter(|&v| verts[v].norm() < inner && !blocked[v]).map(|v| (v, 0.0)).collect();
    let mut hit = f64::INFINITY;
    mesh.dijkstra(
        &sources,
        |e| {
            let edge = mesh.edges()[e];
            let (a, b) = (edge.a as usize, edge.b as usize);
            if blocked[a] || blocked[b] || lab.neighbourhood_of((verts[a] + verts[b]) * 0.5).is_some() {
                f64::INFINITY
            } else {
                edge.length
            }
        },
        |v, d| {
            if verts[v].norm() > outer {
                hit = d;
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    hit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_mesh, Domain};

    fn example() -> Labyrinth {
        build_labyrinth(2, &LabyrinthSchedule::Explicit { radii: vec![0.5, 0.8], widths: vec![0.05, 0.01] }).unwrap()
    }

    #[test]
    fn two_arc_example_is_valid_and_reads_back_levels() {
        let lab = example();
        assert_eq!(lab.target(Complex64::new(0.5, 0.0)), Some(0.05));
        assert_eq!(lab.target(Complex64::new(-0.5, 0.0)), Some(0.05));
        assert_eq!(lab.target(Complex64::new(0.0, 0.5)), None, "gap of the first arc");
        assert_eq!(lab.target(Complex64::new(0.8, 0.0)), Some(1e-4));
        let (a, b) = lab.gap(0);
        assert!((a - 0.55).abs() < 1e-15 && (b - 0.79).abs() < 1e-15);
        assert!(lab.plateaus[0] > (1.0 / 0.01) / 0.24);
        let (integral, need) = lab.gap_integral(0).unwrap();
        assert!(integral > need && need == 100.0);
    }

    #[test]
    fn overlapping_neighbourhoods_are_rejected() {
        let s = LabyrinthSchedule::Explicit { radii: vec![0.5, 0.6], widths: vec![0.08, 0.05] };
        assert!(matches!(build_labyrinth(2, &s), Err(Error::ScheduleInvalid(_))));
        let s = LabyrinthSchedule::Explicit { radii: vec![0.5, 0.8], widths: vec![0.05, 0.06] };
        assert!(matches!(build_labyrinth(2, &s), Err(Error::ScheduleInvalid(_))));
        assert!(matches!(build_labyrinth(1, &s), Err(Error::ScheduleInvalid(_))));
    }

    #[test]
    fn geometric_schedule_builds() {
        let s = LabyrinthSchedule::Geometric { first_radius: 0.4, first_width: 0.05, ratio: 0.5 };
        let lab = build_labyrinth(5, &s).unwrap();
        assert_eq!(lab.len(), 5);
        assert!(lab.arcs.iter().all(|a| a.contains_angle(0.0)));
    }

    #[test]
    fn constant_candidate_fails_every_threshold() {
        let s = LabyrinthSchedule::Explicit { radii: vec![0.5, 0.8], widths: vec![0.06, 0.04] };
        let lab = build_labyrinth(2, &s).unwrap();
        let mesh = build_mesh(&Domain::disc(1.0).unwrap(), 0.02).unwrap();
        let r = labyrinth_completeness_check(&lab, &HolomorphicFn::parse("1").unwrap(), &mesh).unwrap();
        assert_eq!(r.verdict, LabyrinthVerdict::ThresholdsNotMet { arcs: vec![1, 2] });
        assert!((r.bands[0].min_weight - 2.0).abs() < 1e-12);
        assert!((r.bands[0].crossing_cost - 0.24).abs() < 1e-12);
        // gaps on opposite sides: at least the half turn between them
        let cost = r.bands[0].avoiding_cost.unwrap();
        assert!(cost > PI * 0.5 && cost.is_finite(), "{cost}");
        assert!(r.bands[1].avoiding_cost.is_none());
    }

    #[test]
    fn large_pole_factor_meets_thresholds() {
        let s = LabyrinthSchedule::Explicit { radii: vec![0.5, 0.8], widths: vec![0.05, 0.03] };
        let lab = build_labyrinth(2, &s).unwrap();
        let mesh = build_mesh(&Domain::disc(1.0).unwrap(), 0.02).unwrap();
        let g = HolomorphicFn::parse("exp(70/(1.05-z))").unwrap();
        let r = labyrinth_completeness_check(&lab, &g, &mesh).unwrap();
        assert_eq!(r.verdict, LabyrinthVerdict::CompletenessConsistent);
        // min of Re 1/(1.05 - z) on C_j is attained near z = -(r_j + eps_j)
        let expect = 70.0 / (1.05 + 0.55) - 20.0;
        assert!((r.bands[0].margin - expect).abs() < 0.05, "{}", r.bands[0].margin);
    }
}
