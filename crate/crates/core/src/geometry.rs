//! Conformal metrics, Gauss curvature, mesh geodesic distances to the ideal
//! boundary and the Osserman quantity `|K| d^2`.

use std::fmt;
use std::io::Write;
use std::ops::ControlFlow;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{derivative_at, Domain, Mesh};
use crate::error::{Error, Result};
use crate::weierstrass::{Immersion, NullForm, WeierstrassPair};

/// `|phi3|` below this makes the curvature formula degenerate.
pub const PHI3_FLOOR: f64 = 1e-12;

/// A metric `lambda(z)^2 |dz|^2` on a planar domain.
#[derive(Clone)]
pub struct ConformalMetric {
    label: String,
    lambda: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ConformalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConformalMetric({})", self.label)
    }
}

impl ConformalMetric {
    pub fn from_fn<F>(label: impl Into<String>, lambda: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        ConformalMetric { label: label.into(), lambda: Arc::new(lambda) }
    }

    pub fn flat() -> Self {
        Self::from_fn("flat", |_| 1.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn lambda(&self, z: Complex64) -> f64 {
        (self.lambda)(z)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.lambda.clone();
        Self::from_fn(format!("{c} * {}", self.label), move |z| c * inner(z))
    }
}

/// `lambda^2 = sum_k |f_k|^2`.
pub fn conformal_metric(form: &NullForm) -> ConformalMetric {
    let f = form.clone();
    ConformalMetric::from_fn("|f|", move |z| f.coefficients().iter().map(|c| c.eval(z).norm()).fold(0.0, f64::hypot))
}

/// `(1 + |g|^2)^2 |phi3|^2 / (2 |g|^2)`, the same quantity from spinor data.
pub fn spinor_lambda_sq(pair: &WeierstrassPair, z: Complex64) -> f64 {
    let g = pair.g.eval(z).norm_sqr();
    let p = pair.phi3.eval(z).norm_sqr();
    (1.0 + g).powi(2) * p / (2.0 * g)
}

/// `K = -16 |g|^2 |g'|^2 / (|phi3|^2 (1 + |g|^2)^4)`.
pub fn gauss_curvature(pair: &WeierstrassPair, p: Complex64, domain: Option<&Domain>) -> Result<f64> {
    let phi3 = pair.phi3.eval(p);
    if !(phi3.norm() >= PHI3_FLOOR) {
        return Err(Error::MetricDegenerate(p));
    }
    let g = pair.g.eval(p);
    let dg = derivative_at(&pair.g, p, domain)?;
    let g2 = g.norm_sqr();
    let k = if g2 <= 1.0 {
        -16.0 * g2 * dg.norm_sqr() / (phi3.norm_sqr() * (1.0 + g2).powi(4))
    } else {
        // same expression in 1/g, stable for large |g|
        let h2 = 1.0 / g2;
        -16.0 * h2.powi(3) * dg.norm_sqr() / (phi3.norm_sqr() * (1.0 + h2).powi(4))
    };
    if !k.is_finite() {
        return Err(Error::NonFinite(p));
    }
    Ok(k)
}

/// Weighted graph distance from `p` to the nearest ideal-boundary vertex,
/// with edge cost `lambda(midpoint) * length`.
pub fn mesh_distance(metric: &ConformalMetric, p: Complex64, mesh: &Mesh) -> Result<f64> {
    let sources = source_vertices(metric, p, mesh)?;
    let mut hit = None;
    mesh.dijkstra(
        &sources,
        |e| edge_cost(metric, mesh, e),
        |v, d| {
            if mesh.flags()[v].is_ideal() {
                hit = Some(d);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    hit.ok_or(Error::UnreachableBoundary)
}

fn edge_cost(metric: &ConformalMetric, mesh: &Mesh, e: usize) -> f64 {
    let edge = mesh.edges()[e];
    let (a, b) = (mesh.vertices()[edge.a as usize], mesh.vertices()[edge.b as usize]);
    let w = metric.lambda((a + b) * 0.5) * edge.length;
    if w.is_nan() {
        f64::INFINITY
    } else {
        w
    }
}

fn source_vertices(metric: &ConformalMetric, p: Complex64, mesh: &Mesh) -> Result<Vec<(usize, f64)>> {
    let near = mesh.vertices_within(p, mesh.target());
    let sources: Vec<(usize, f64)> = near
        .into_iter()
        .filter(|&v| mesh.flags()[v].boundary.is_none())
        .map(|v| {
            let q = mesh.vertices()[v];
            (v, metric.lambda((p + q) * 0.5) * (q - p).norm())
        })
        .filter(|(_, d)| d.is_finite())
        .collect();
    if sources.is_empty() {
        return Err(Error::PathNotFound { from: p, to: p });
    }
    Ok(sources)
}

/// Mesh distances at successive refinement levels with an extrapolated limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceEstimate {
    /// `(target edge length, distance)` per level, coarse to fine.
    pub levels: Vec<(f64, f64)>,
    /// Finest-level distance.
    pub value: f64,
    /// Richardson extrapolation to zero edge length.
    pub extrapolated: f64,
    /// Observed convergence order used for the extrapolation.
    pub order: f64,
    /// `min(extrapolated, value)`.
    pub lower: f64,
    /// Smallest distance over all levels.
    pub upper: f64,
}

pub fn geodesic_distance(metric: &ConformalMetric, p: Complex64, meshes: &[Mesh]) -> Result<DistanceEstimate> {
    if meshes.is_empty() {
        return Err(Error::InvalidInput("at least one mesh level required".into()));
    }
    let values = meshes.par_iter().map(|m| mesh_distance(metric, p, m)).collect::<Result<Vec<f64>>>()?;
    let levels: Vec<(f64, f64)> = meshes.iter().map(|m| m.target()).zip(values.iter().copied()).collect();
    Ok(estimate_from_levels(levels))
}

/// Richardson extrapolation from a coarse-to-fine sequence of halving
/// refinements. The order is estimated from the last three levels and
/// falls back to 1 when the differences do not contract.
pub fn estimate_from_levels(levels: Vec<(f64, f64)>) -> DistanceEstimate {
    let d: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let value = *d.last().expect("nonempty");
    let upper = d.iter().copied().fold(f64::INFINITY, f64::min);
    let (extrapolated, order) = match d.len() {
        0 | 1 => (value, f64::NAN),
        2 => (2.0 * d[1] - d[0], 1.0),
        k => {
            let (a, b, c) = (d[k - 3], d[k - 2], d[k - 1]);
            let ratio = (a - b) / (b - c);
            let p = if ratio.is_finite() && ratio > 1.0 { ratio.log2().clamp(0.5, 4.0) } else { 1.0 };
            if b == c {
                (c, p)
            } else {
                (c - (b - c) / (2f64.powf(p) - 1.0), p)
            }
        }
    };
    DistanceEstimate { levels, value, extrapolated, order, lower: extrapolated.min(value), upper }
}

/// `|K| d^2` at a probe point, with `d` bracketed across mesh levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OssermanRecord {
    pub label: String,
    pub k: f64,
    pub d: f64,
    pub d_lower: f64,
    pub d_upper: f64,
    pub d_levels: Vec<(f64, f64)>,
    pub product: f64,
    pub product_lower: f64,
}

impl OssermanRecord {
    pub fn new(label: impl Into<String>, k: f64, d: &DistanceEstimate) -> Self {
        let kk = k.abs();
        OssermanRecord {
            label: label.into(),
            k,
            d: d.value,
            d_lower: d.lower,
            d_upper: d.upper,
            d_levels: d.levels.clone(),
            product: kk * d.value * d.value,
            product_lower: kk * d.lower * d.lower,
        }
    }
}

pub fn osserman_quantity(
    label: &str,
    pair: &WeierstrassPair,
    form: &NullForm,
    p: Complex64,
    meshes: &[Mesh],
) -> Result<OssermanRecord> {
    let k = gauss_curvature(pair, p, Some(form.domain()))?;
    let d = geodesic_distance(&conformal_metric(form), p, meshes)?;
    Ok(OssermanRecord::new(label, k, &d))
}

/// Family member for [`osserman_profile`].
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub label: String,
    pub pair: WeierstrassPair,
    pub form: NullForm,
}

#[derive(Debug, Clone, Serialize)]
pub struct OssermanProfile {
    pub records: Vec<OssermanRecord>,
    /// `(threshold, index of the first record whose product exceeds it)`.
    pub entries: Vec<(f64, Option<usize>)>,
}

pub fn osserman_profile(family: &[FamilyMember], p0: Complex64, meshes: &[Mesh], thresholds: &[f64]) -> Result<OssermanProfile> {
    let records = family
        .par_iter()
        .map(|m| osserman_quantity(&m.label, &m.pair, &m.form, p0, meshes))
        .collect::<Result<Vec<_>>>()?;
    let entries = thresholds.iter().map(|&t| (t, records.iter().position(|r| r.product > t))).collect();
    Ok(OssermanProfile { records, entries })
}

impl OssermanProfile {
    /// CSV columns `label, K, d_lower, d_upper, product`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "K", "d_lower", "d_upper", "product"])?;
        for r in &self.records {
            w.write_record([r.label.clone(), r.k.to_string(), r.d_lower.to_string(), r.d_upper.to_string(), r.product.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    CompletenessConsistent,
    Bounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    /// Metric distance from the probe point to `|z - center| = r_j`.
    pub distances: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub verdict: GrowthVerdict,
}

/// Distances from `p` to the boundaries of the exhaustion discs
/// `|z - center| <= r_j`. Consistent with completeness iff the distances
/// exceed every threshold; this never certifies completeness itself.
pub fn completeness_probe(
    metric: &ConformalMetric,
    p: Complex64,
    center: Complex64,
    mesh: &Mesh,
    radii: &[f64],
    thresholds: &[f64],
) -> Result<GrowthReport> {
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.is_empty() {
        return Err(Error::InvalidInput("exhaustion radii must increase".into()));
    }
    let sources = source_vertices(metric, p, mesh)?;
    let tree = mesh.dijkstra(&sources, |e| edge_cost(metric, mesh, e), |_, _| ControlFlow::Continue(()));
    let rad = |v: u32| (mesh.vertices()[v as usize] - center).norm();
    let distances = radii
        .iter()
        .map(|&r| {
            let mut best = f64::INFINITY;
            for (k, e) in mesh.edges().iter().enumerate() {
                let (ra, rb) = (rad(e.a), rad(e.b));
                let (inner, ri, ro) = if ra <= rb { (e.a, ra, rb) } else { (e.b, rb, ra) };
                if ri < r && ro >= r {
                    let t = (r - ri) / (ro - ri);
                    best = best.min(tree.dist[inner as usize] + t * edge_cost(metric, mesh, k));
                }
            }
            best
        })
        .collect::<Vec<_>>();
    let top = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let verdict = if thresholds.iter().all(|&t| top > t) {
        GrowthVerdict::CompletenessConsistent
    } else {
        GrowthVerdict::Bounded
    };
    Ok(GrowthReport { radii: radii.to_vec(), distances, thresholds: thresholds.to_vec(), verdict })
}

/// Discrete Gauss curvature of the image at `p`: the angle defect of the
/// fan of six triangles spanned by `u` at `p` and at the vertices of the
/// hexagon `p + h e^{i k pi/3}`, divided by a third of the fan's area.
/// Conformality makes the image fan nearly equilateral.
pub fn angle_defect_curvature(imm: &Immersion, p: Complex64, h: f64) -> Result<f64> {
    let center = imm.eval(p)?;
    let ring = (0..6)
        .map(|k| imm.eval(p + Complex64::from_polar(h, k as f64 * std::f64::consts::FRAC_PI_3)))
        .collect::<Result<Vec<_>>>()?;
    let mut angle = 0.0;
    let mut area = 0.0;
    for k in 0..6 {
        let e1: Vec<f64> = ring[k].iter().zip(&center).map(|(a, b)| a - b).collect();
        let e2: Vec<f64> = ring[(k + 1) % 6].iter().zip(&center).map(|(a, b)| a - b).collect();
        let dot: f64 = e1.iter().zip(&e2).map(|(a, b)| a * b).sum();
        let n1: f64 = e1.iter().map(|a| a * a).sum();
        let n2: f64 = e2.iter().map(|a| a * a).sum();
        let cross = (n1 * n2 - dot * dot).max(0.0).sqrt();
        angle += cross.atan2(dot);
        area += 0.5 * cross;
    }
    Ok((std::f64::consts::TAU - angle) / (area / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_mesh, build_mesh_level, HomologyBasis};
    use crate::weierstrass::{assemble_null_form, integrate_immersion};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn levels(domain: &Domain, base: f64, n: u32) -> Vec<Mesh> {
        (0..n).map(|k| build_mesh_level(domain, base, k).unwrap()).collect()
    }

    #[test]
    fn metric_examples() {
        let plane = NullForm::parse(&["0", "i", "1"], Domain::disc(1.0).unwrap()).unwrap();
        assert!((conformal_metric(&plane).lambda(c(0.3, 0.1)).powi(2) - 2.0).abs() < 1e-14);
        let pair = WeierstrassPair::parse("z", "1/z").unwrap();
        let cat = assemble_null_form(&pair, &Domain::annulus(0.5, 2.0).unwrap()).unwrap();
        let m = conformal_metric(&cat);
        for z in [c(1.0, 0.0), c(0.6, 0.8), c(1.5, -0.3)] {
            let l2 = m.lambda(z).powi(2);
            assert!((l2 - spinor_lambda_sq(&pair, z)).abs() <= 1e-10 * l2);
        }
        assert!((m.lambda(c(0.6, 0.8)).powi(2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn curvature_examples() {
        let cat = WeierstrassPair::parse("z", "1/z").unwrap();
        for z in [c(1.0, 0.0), c(0.0, 1.0), c(-0.6, 0.8)] {
            assert!((gauss_curvature(&cat, z, None).unwrap() + 1.0).abs() < 1e-14);
        }
        let plane = WeierstrassPair::parse("1", "1").unwrap();
        assert_eq!(gauss_curvature(&plane, c(0.2, 0.2), None).unwrap(), 0.0);
        let degenerate = WeierstrassPair::parse("z", "z - 0.5").unwrap();
        assert!(matches!(gauss_curvature(&degenerate, c(0.5, 0.0), None), Err(Error::MetricDegenerate(_))));
    }

    #[test]
    fn flat_disc_distance() {
        let disc = Domain::disc(1.0).unwrap();
        let meshes = levels(&disc, 0.04, 3);
        let d = geodesic_distance(&ConformalMetric::flat(), c(0.0, 0.0), &meshes).unwrap();
        assert!((d.value - 1.0).abs() < 0.02, "{d:?}");
        let d2 = geodesic_distance(&ConformalMetric::from_fn("2", |_| 2.0), c(0.0, 0.0), &meshes).unwrap();
        assert!((d2.value - 2.0).abs() < 0.04);
        for w in d.levels.windows(2) {
            assert!(w[1].1 <= w[0].1 * (1.0 + 1e-3));
        }
    }

    #[test]
    fn unreachable_boundary_is_reported() {
        let disc = Domain::disc(1.0).unwrap();
        let mut mesh = build_mesh(&disc, 0.1).unwrap();
        mesh.mark_artificial(0);
        assert!(matches!(mesh_distance(&ConformalMetric::flat(), c(0.0, 0.0), &mesh), Err(Error::UnreachableBoundary)));
    }

    #[test]
    fn completeness_probe_examples() {
        let disc = Domain::disc(1.0).unwrap();
        let mesh = build_mesh(&disc, 0.005).unwrap();
        let radii = [0.5, 0.8, 0.9, 0.95, 0.98];
        let flat = completeness_probe(&ConformalMetric::flat(), c(0.0, 0.0), c(0.0, 0.0), &mesh, &radii, &[2.0]).unwrap();
        assert_eq!(flat.verdict, GrowthVerdict::Bounded);
        let hyp = ConformalMetric::from_fn("1/(1-|z|)", |z: Complex64| 1.0 / (1.0 - z.norm()));
        let grow = completeness_probe(&hyp, c(0.0, 0.0), c(0.0, 0.0), &mesh, &radii, &[2.0, 3.0]).unwrap();
        assert_eq!(grow.verdict, GrowthVerdict::CompletenessConsistent);
        for (r, d) in radii.iter().zip(&grow.distances) {
            // oracle: radial integral of 1/(1-t) from 0 to r
            let exact = -(1.0 - r).ln();
            assert!((d - exact).abs() < 0.02 * exact, "{r}: {d} vs {exact}");
        }
    }

    #[test]
    fn angle_defect_matches_formula_on_catenoid() {
        let domain = Domain::annulus(0.8, 1.25).unwrap();
        let pair = WeierstrassPair::parse("z", "1/z").unwrap();
        let form = assemble_null_form(&pair, &domain).unwrap();
        let mesh = build_mesh(&domain, 0.02).unwrap();
        let basis = HomologyBasis::standard(&domain).unwrap();
        let imm = integrate_immersion(&form, c(1.0, 0.0), &[0.0; 3], &mesh, &basis).unwrap();
        for z in domain.sample_interior(40, 0.05) {
            let kd = angle_defect_curvature(&imm, z, 0.01).unwrap();
            let k = gauss_curvature(&pair, z, None).unwrap();
            assert!((kd - k).abs() < 0.02 * k.abs(), "{z}: {kd} vs {k}");
        }
    }
}
