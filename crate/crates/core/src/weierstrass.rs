//! Null holomorphic forms, the immersions they integrate to, Gauss maps and
//! flux.
//!
//! A stored form is `Phi = f dz` with `Phi = 2 du`, so the immersion is
//! `u = x0 + Re \int Phi` and the flux over a cycle `C` is `-i \oint_C Phi`.

use std::io::Write;
use std::ops::ControlFlow;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::path::PathPolyline;
use crate::complex::quadrature::{contour_integrate, QuadOptions, VectorForm};
use crate::complex::winding::argument_winding;
use crate::complex::{Domain, Expr, HolomorphicFn, HomologyBasis, Mesh};
use crate::error::{Error, Result};

/// Nullity tolerance relative to `(sum |f_k|)^2`.
pub const NULLITY_TOL: f64 = 1e-10;
/// Largest admissible real period before an immersion is refused.
pub const REAL_PERIOD_TOL: f64 = 1e-8;
/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Spinor data `(g, phi3)` of a null curve in `C^3`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeierstrassPair {
    pub g: HolomorphicFn,
    pub phi3: HolomorphicFn,
}

impl WeierstrassPair {
    pub fn new(g: HolomorphicFn, phi3: HolomorphicFn) -> Self {
        WeierstrassPair { g, phi3 }
    }

    pub fn parse(g: &str, phi3: &str) -> Result<Self> {
        Ok(WeierstrassPair { g: HolomorphicFn::parse(g)?, phi3: HolomorphicFn::parse(phi3)? })
    }

    /// `phi1 - i phi2 = phi3 / g`.
    fn minus_part(&self) -> HolomorphicFn {
        match (self.g.expr(), self.phi3.expr()) {
            (Some(g), Some(p)) => HolomorphicFn::from_expr(Expr::div(p.clone(), g.clone())),
            _ => {
                let (g, p) = (self.g.clone(), self.phi3.clone());
                HolomorphicFn::opaque("phi3/g", move |z| p.eval(z) / g.eval(z))
            }
        }
    }

    /// `-(phi1 + i phi2) = g phi3`.
    fn plus_part(&self) -> HolomorphicFn {
        self.g.mul(&self.phi3)
    }
}

/// Coefficients `f = Phi / dz` of a holomorphic 1-form with values in `C^n`
/// on a planar domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawNullForm")]
pub struct NullForm {
    coefficients: Vec<HolomorphicFn>,
    domain: Domain,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNullForm {
    coefficients: Vec<HolomorphicFn>,
    domain: Domain,
}

impl TryFrom<RawNullForm> for NullForm {
    type Error = Error;

    fn try_from(r: RawNullForm) -> Result<Self> {
        NullForm::new(r.coefficients, r.domain)
    }
}

impl NullForm {
    pub fn new(coefficients: Vec<HolomorphicFn>, domain: Domain) -> Result<Self> {
        if coefficients.len() < 3 {
            return Err(Error::InvalidInput(format!("null forms need n >= 3 components, got {}", coefficients.len())));
        }
        Ok(NullForm { coefficients, domain })
    }

    pub fn parse(coefficients: &[&str], domain: Domain) -> Result<Self> {
        let c = coefficients.iter().map(|s| HolomorphicFn::parse(s)).collect::<Result<Vec<_>>>()?;
        Self::new(c, domain)
    }

    pub fn coefficients(&self) -> &[HolomorphicFn] {
        &self.coefficients
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.coefficients.iter().map(|c| c.eval(z)).collect()
    }

    /// `h * Phi`, kept symbolic when both sides are expression trees.
    pub fn multiply(&self, h: &HolomorphicFn) -> NullForm {
        NullForm { coefficients: self.coefficients.iter().map(|c| h.mul(c)).collect(), domain: self.domain.clone() }
    }

    pub fn scale(&self, c: Complex64) -> NullForm {
        self.multiply(&HolomorphicFn::constant(c))
    }

    pub fn with_domain(&self, domain: Domain) -> NullForm {
        NullForm { coefficients: self.coefficients.clone(), domain }
    }

    /// `(|sum f_k^2| / (sum |f_k|)^2, sum |f_k|)` at `z`.
    pub fn nullity_at(&self, z: Complex64) -> (f64, f64) {
        let f = self.eval(z);
        let q: Complex64 = f.iter().map(|c| c * c).sum();
        let m: f64 = f.iter().map(|c| c.norm()).sum();
        (q.norm() / (m * m), m)
    }
}

impl VectorForm for NullForm {
    fn dim(&self) -> usize {
        self.coefficients.len()
    }

    fn eval_into(&self, z: Complex64, out: &mut [Complex64]) {
        for (o, c) in out.iter_mut().zip(&self.coefficients) {
            *o = c.eval(z);
        }
    }

    fn domain(&self) -> Option<&Domain> {
        Some(&self.domain)
    }
}

/// `Phi = (1/2 (1/g - g), i/2 (1/g + g), 1) phi3` on `domain`, after
/// checking that the zeros of `phi3` exactly absorb the zeros and poles of
/// `g` (no poles and no common zeros of `phi3/g` and `g phi3`).
pub fn assemble_null_form(pair: &WeierstrassPair, domain: &Domain) -> Result<NullForm> {
    domain.validate()?;
    let minus = pair.minus_part();
    let plus = pair.plus_part();
    check_divisors(&minus, &plus, domain)?;
    let half = Complex64::new(0.5, 0.0);
    let ihalf = Complex64::new(0.0, 0.5);
    let coefficients = match (minus.expr(), plus.expr()) {
        (Some(m), Some(p)) => {
            let c1 = Expr::mul(Expr::constant(half), Expr::sub(m.clone(), p.clone()));
            let c2 = Expr::mul(Expr::constant(ihalf), Expr::add(m.clone(), p.clone()));
            vec![HolomorphicFn::from_expr(c1), HolomorphicFn::from_expr(c2), pair.phi3.clone()]
        }
        _ => {
            let (m1, p1) = (minus.clone(), plus.clone());
            let (m2, p2) = (minus, plus);
            vec![
                HolomorphicFn::opaque("(phi3/g - g phi3)/2", move |z| half * (m1.eval(z) - p1.eval(z))),
                HolomorphicFn::opaque("i(phi3/g + g phi3)/2", move |z| ihalf * (m2.eval(z) + p2.eval(z))),
                pair.phi3.clone(),
            ]
        }
    };
    NullForm::new(coefficients, domain.clone())
}

fn check_divisors(minus: &HolomorphicFn, plus: &HolomorphicFn, domain: &Domain) -> Result<()> {
    let mut last = None;
    for shift in [0.137, 0.291, 0.583] {
        match check_cells(minus, plus, domain, shift) {
            Err(Error::ZeroOnContour(z)) => last = Some(z),
            other => return other,
        }
    }
    Err(Error::PoleMismatch {
        point: last.unwrap_or_default(),
        detail: "divisor check could not place cell walls away from zeros".into(),
    })
}

fn check_cells(minus: &HolomorphicFn, plus: &HolomorphicFn, domain: &Domain, shift: f64) -> Result<()> {
    let (lo, hi) = domain.bounding_box();
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let cell = (domain.thickness() / 4.0).min(extent / 24.0);
    let half_diag = cell * std::f64::consts::FRAC_1_SQRT_2;
    let nx = ((hi[0] - lo[0]) / cell).ceil() as i64 + 1;
    let ny = ((hi[1] - lo[1]) / cell).ceil() as i64 + 1;
    for j in 0..ny {
        for i in 0..nx {
            let x = lo[0] + (i as f64 - shift) * cell;
            let y = lo[1] + (j as f64 - shift) * cell;
            let center = Complex64::new(x + 0.5 * cell, y + 0.5 * cell);
            if !domain.region_contains(center) || domain.distance_to_region_boundary(center) <= half_diag {
                continue;
            }
            let corners = [
                Complex64::new(x, y),
                Complex64::new(x + cell, y),
                Complex64::new(x + cell, y + cell),
                Complex64::new(x, y + cell),
                Complex64::new(x, y),
            ];
            let square = PathPolyline::new(corners.to_vec(), true)?;
            let a = argument_winding(&|z| minus.eval(z), &square)?;
            let b = argument_winding(&|z| plus.eval(z), &square)?;
            if a < 0 || b < 0 {
                return Err(Error::PoleMismatch {
                    point: center,
                    detail: format!("phi3 does not cancel a zero or pole of g (net orders {a}, {b})"),
                });
            }
            if a > 0 && b > 0 {
                return Err(Error::PoleMismatch {
                    point: center,
                    detail: format!("phi3 vanishes beyond the order of g (orders {a}, {b}); the form has a zero"),
                });
            }
        }
    }
    Ok(())
}

/// Outcome of sampling the null-form invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullityReport {
    pub samples: usize,
    /// Largest `|sum f_k^2| / (sum |f_k|)^2`.
    pub max_residual: f64,
    /// Smallest `sum |f_k|`.
    pub min_modulus: f64,
    pub pass: bool,
}

/// Checks nullity and nonvanishing at quasi-random interior points.
pub fn validate_null(form: &NullForm, samples: usize) -> NullityReport {
    let margin = 1e-3 * form.domain.thickness();
    let points = form.domain.sample_interior(samples.max(1), margin);
    let (max_residual, min_modulus) = points
        .par_iter()
        .map(|&z| form.nullity_at(z))
        .fold(|| (0.0f64, f64::INFINITY), |(r, m), (ri, mi)| (r.max(nan_high(ri)), m.min(mi)))
        .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));
    let pass = max_residual <= NULLITY_TOL && min_modulus > 0.0 && min_modulus.is_finite();
    NullityReport { samples: points.len(), max_residual, min_modulus, pass }
}

fn nan_high(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

/// `x0 + Re \int_{p0} Phi`, tabulated on the interior vertices of a mesh by
/// integrating along a Euclidean shortest-path tree rooted near `p0`.
#[derive(Debug, Clone)]
pub struct Immersion {
    form: NullForm,
    p0: Complex64,
    x0: Vec<f64>,
    mesh: Mesh,
    values: Vec<Option<Vec<f64>>>,
    periods: Vec<Vec<Complex64>>,
    conformality_defect: f64,
}

/// Builds the immersion after checking that `Re Phi` has no periods over
/// `basis`.
pub fn integrate_immersion(form: &NullForm, p0: Complex64, x0: &[f64], mesh: &Mesh, basis: &HomologyBasis) -> Result<Immersion> {
    let n = form.dim();
    if x0.len() != n {
        return Err(Error::InvalidInput(format!("x0 has {} entries, form has {n}", x0.len())));
    }
    if !form.domain.contains(p0) {
        return Err(Error::EvaluationOutsideDomain(p0));
    }
    let opts = QuadOptions::default();
    let mut periods = Vec::with_capacity(basis.len());
    for (k, cycle) in basis.cycles().iter().enumerate() {
        let p = contour_integrate(form, cycle, opts)?;
        let residual = p.value.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        if residual > REAL_PERIOD_TOL {
            return Err(Error::RealPeriodsNonzero { cycle: k, residual });
        }
        periods.push(p.value);
    }

    let interior = |v: usize| mesh.flags()[v].boundary.is_none();
    let root = (0..mesh.len())
        .filter(|&v| interior(v))
        .min_by(|&a, &b| (mesh.vertices()[a] - p0).norm().total_cmp(&(mesh.vertices()[b] - p0).norm()))
        .ok_or_else(|| Error::DegenerateDomain("mesh has no interior vertices".into()))?;
    let mut order = Vec::with_capacity(mesh.len());
    let tree = mesh.dijkstra(
        &[(root, 0.0)],
        |e| {
            let edge = mesh.edges()[e];
            if interior(edge.a as usize) && interior(edge.b as usize) {
                edge.length
            } else {
                f64::INFINITY
            }
        },
        |v, d| {
            if d.is_finite() {
                order.push(v);
            }
            ControlFlow::Continue(())
        },
    );

    let segment = |a: Complex64, b: Complex64| -> Result<Vec<Complex64>> {
        if a == b {
            return Ok(vec![C0; n]);
        }
        Ok(contour_integrate(form, &PathPolyline::segment(a, b), opts)?.value)
    };
    let increments: Vec<Vec<Complex64>> = order
        .par_iter()
        .map(|&v| {
            if v == root {
                segment(p0, mesh.vertices()[root])
            } else {
                let e = mesh.edges()[tree.pred[v] as usize];
                let parent = if e.a as usize == v { e.b } else { e.a } as usize;
                segment(mesh.vertices()[parent], mesh.vertices()[v])
            }
        })
        .collect::<Result<_>>()?;

    let mut acc: Vec<Option<Vec<Complex64>>> = vec![None; mesh.len()];
    for (&v, inc) in order.iter().zip(increments) {
        let base = if v == root {
            vec![C0; n]
        } else {
            let e = mesh.edges()[tree.pred[v] as usize];
            let parent = if e.a as usize == v { e.b } else { e.a } as usize;
            acc[parent].clone().expect("parent settled first")
        };
        acc[v] = Some(base.iter().zip(&inc).map(|(a, b)| a + b).collect());
    }
    let values = acc
        .into_iter()
        .map(|a| a.map(|a| a.iter().zip(x0).map(|(c, x)| x + c.re).collect()))
        .collect();
    let mut imm = Immersion {
        form: form.clone(),
        p0,
        x0: x0.to_vec(),
        mesh: mesh.clone(),
        values,
        periods,
        conformality_defect: 0.0,
    };
    imm.conformality_defect = imm.spot_check_conformality();
    Ok(imm)
}

impl Immersion {
    pub fn form(&self) -> &NullForm {
        &self.form
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn base_point(&self) -> Complex64 {
        self.p0
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    /// Complex periods of the form over the basis used at construction.
    pub fn periods(&self) -> &[Vec<Complex64>] {
        &self.periods
    }

    /// Worst relative deviation from orthogonal, equal-length tangent images
    /// over the spot-check vertices.
    pub fn conformality_defect(&self) -> f64 {
        self.conformality_defect
    }

    /// Cached value at a mesh vertex; `None` for boundary vertices.
    pub fn at_vertex(&self, v: usize) -> Option<&[f64]> {
        self.values.get(v).and_then(|x| x.as_deref())
    }

    /// `u(p)`: the cached value at the nearest interior vertex plus the
    /// straight-segment integral from there.
    pub fn eval(&self, p: Complex64) -> Result<Vec<f64>> {
        if !self.form.domain.contains(p) {
            return Err(Error::EvaluationOutsideDomain(p));
        }
        if p == self.p0 {
            return Ok(self.x0.clone());
        }
        let v = self.nearest_interior(p).ok_or(Error::EvaluationOutsideDomain(p))?;
        let q = self.mesh.vertices()[v];
        let base = self.values[v].as_ref().expect("interior vertices are tabulated");
        if q == p {
            return Ok(base.clone());
        }
        let inc = contour_integrate(&self.form, &PathPolyline::segment(q, p), QuadOptions::default())?;
        Ok(base.iter().zip(&inc.value).map(|(x, c)| x + c.re).collect())
    }

    /// `u(p)` integrated afresh from `p0` along the shortest mesh route
    /// through `via`; agrees with [`Immersion::eval`] when `Re Phi` is exact.
    pub fn eval_via(&self, p: Complex64, via: Complex64) -> Result<Vec<f64>> {
        let inc = crate::complex::path_integrate(&self.form, self.p0, p, Some(via), &self.mesh, QuadOptions::default())?;
        Ok(self.x0.iter().zip(&inc.value).map(|(x, c)| x + c.re).collect())
    }

    fn nearest_interior(&self, p: Complex64) -> Option<usize> {
        let mut r = self.mesh.target();
        for _ in 0..8 {
            let best = self
                .mesh
                .vertices_within(p, r)
                .into_iter()
                .filter(|&v| self.values[v].is_some())
                .min_by(|&a, &b| (self.mesh.vertices()[a] - p).norm().total_cmp(&(self.mesh.vertices()[b] - p).norm()));
            if best.is_some() {
                return best;
            }
            r *= 2.0;
        }
        None
    }

    fn spot_check_conformality(&self) -> f64 {
        let s = self.mesh.target() * std::f64::consts::FRAC_1_SQRT_2;
        let verts = self.mesh.vertices();
        let candidates: Vec<usize> = (0..self.mesh.len())
            .filter(|&v| {
                self.values[v].is_some() && self.form.domain.distance_to_region_boundary(verts[v]) >= 4.0 * self.mesh.target()
            })
            .collect();
        let stride = (candidates.len() / 16).max(1);
        let mut worst: f64 = 0.0;
        for &v in candidates.iter().step_by(stride) {
            let find = |d: Complex64| {
                self.mesh.neighbours(v).iter().map(|&(w, _)| w as usize).find(|&w| (verts[w] - verts[v] - d).norm() < 1e-9 * s)
            };
            let dirs = [Complex64::new(s, 0.0), Complex64::new(-s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, -s)];
            let Some(nb) = dirs.iter().map(|&d| find(d).and_then(|w| self.values[w].as_ref())).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let ux: Vec<f64> = nb[0].iter().zip(nb[1]).map(|(a, b)| (a - b) / (2.0 * s)).collect();
            let uy: Vec<f64> = nb[2].iter().zip(nb[3]).map(|(a, b)| (a - b) / (2.0 * s)).collect();
            let dot: f64 = ux.iter().zip(&uy).map(|(a, b)| a * b).sum();
            let (lx, ly) = (ux.iter().map(|a| a * a).sum::<f64>().sqrt(), uy.iter().map(|a| a * a).sum::<f64>().sqrt());
            let scale = lx.max(ly);
            if scale > 0.0 {
                worst = worst.max(dot.abs() / (lx * ly).max(f64::MIN_POSITIVE)).max((lx - ly).abs() / scale);
            }
        }
        worst
    }

    /// Tabulated samples as CSV: `re_z, im_z, u1, ..., un` per interior vertex.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["re_z".to_string(), "im_z".to_string()];
        header.extend((1..=self.x0.len()).map(|k| format!("u{k}")));
        w.write_record(&header)?;
        for (z, val) in self.mesh.vertices().iter().zip(&self.values) {
            if let Some(u) = val {
                let mut row = vec![z.re.to_string(), z.im.to_string()];
                row.extend(u.iter().map(|x| x.to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// A point of `CP^{n-1}` with a canonical representative: unit norm and
/// first non-negligible coordinate real positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    pub fn new(v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|c| c.norm()).fold(0.0, f64::hypot);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("projective point needs a finite nonzero vector".into()));
        }
        let lead = v.iter().find(|c| c.norm() > 1e-12 * norm).copied().unwrap_or(v[0]);
        let phase = lead.conj() / lead.norm();
        Ok(ProjectivePoint { coords: v.iter().map(|c| c * phase / norm).collect() })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// `|sum z_k^2|` of the representative.
    pub fn quadric_residual(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<Complex64>().norm()
    }

    pub fn max_difference(&self, other: &ProjectivePoint) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

pub fn gauss_map(form: &NullForm, p: Complex64) -> Result<ProjectivePoint> {
    if !form.domain.contains(p) {
        return Err(Error::EvaluationOutsideDomain(p));
    }
    ProjectivePoint::new(&form.eval(p))
}

/// Real flux vectors `-i \oint_C Phi`, one per basis cycle, with the size of
/// the discarded imaginary part.
#[derive(Debug, Clone, Serialize)]
pub struct FluxMap {
    pub basis: HomologyBasis,
    pub values: Vec<Vec<f64>>,
    pub imaginary_residuals: Vec<f64>,
}

impl FluxMap {
    pub fn is_real(&self) -> bool {
        self.imaginary_residuals.iter().all(|&r| r <= REAL_PERIOD_TOL)
    }
}

pub fn flux(form: &NullForm, basis: &HomologyBasis) -> Result<FluxMap> {
    flux_with(form, basis, QuadOptions::default())
}

pub fn flux_with(form: &NullForm, basis: &HomologyBasis, opts: QuadOptions) -> Result<FluxMap> {
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    for cycle in basis.cycles() {
        let p = contour_integrate(form, cycle, opts)?;
        let minus_i: Vec<Complex64> = p.value.iter().map(|c| Complex64::new(c.im, -c.re)).collect();
        values.push(minus_i.iter().map(|c| c.re).collect());
        residuals.push(minus_i.iter().map(|c| c.im.abs()).fold(0.0, f64::max));
    }
    Ok(FluxMap { basis: basis.clone(), values, imaginary_residuals: residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fullness {
    pub full: bool,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Rank of the span of coefficient vectors at quasi-random points.
pub fn fullness_test(form: &NullForm, samples: usize) -> Result<Fullness> {
    let n = form.dim();
    if samples < n {
        return Err(Error::InvalidInput(format!("need at least {n} samples")));
    }
    let points = form.domain.sample_interior(samples, 1e-3 * form.domain.thickness());
    let m = DMatrix::from_fn(n, points.len(), |i, j| form.coefficients[i].eval(points[j]));
    Ok(rank_report(&m, n))
}

pub(crate) fn rank_report(m: &DMatrix<Complex64>, n: usize) -> Fullness {
    let sv = m.clone().svd(false, false).singular_values;
    let mut singular_values: Vec<f64> = sv.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| top > 0.0 && s > RANK_TOL * top).count();
    Fullness { full: rank == n, rank, singular_values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_mesh;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn catenoid() -> NullForm {
        let pair = WeierstrassPair::parse("z", "1/z").unwrap();
        assemble_null_form(&pair, &Domain::annulus(0.5, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn catenoid_coefficients_match_expansion() {
        let f = catenoid();
        for z in [c(0.7, 0.2), c(-1.3, 0.9), c(0.1, -1.1)] {
            let v = f.eval(z);
            let zi = 1.0 / z;
            let want = [(zi * zi - 1.0) / 2.0, c(0.0, 0.5) * (zi * zi + 1.0), zi];
            for (a, b) in v.iter().zip(want) {
                assert!((a - b).norm() < 1e-14 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn unmatched_zero_of_g_is_a_pole_mismatch() {
        // g vanishes at 0.3 but phi3 does not
        let pair = WeierstrassPair::parse("z - 0.3", "1").unwrap();
        let err = assemble_null_form(&pair, &Domain::disc(1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::PoleMismatch { .. }), "{err:?}");
        // matched: phi3 carries the zero with the same order
        let ok = WeierstrassPair::parse("z - 0.3", "z - 0.3").unwrap();
        assert!(assemble_null_form(&ok, &Domain::disc(1.0).unwrap()).is_ok());
        // over-matched: the form would vanish
        let over = WeierstrassPair::parse("z - 0.3", "(z - 0.3)^2").unwrap();
        assert!(assemble_null_form(&over, &Domain::disc(1.0).unwrap()).is_err());
    }

    #[test]
    fn pole_of_g_is_absorbed() {
        let pair = WeierstrassPair::parse("1/(z-0.2)", "z-0.2").unwrap();
        let f = assemble_null_form(&pair, &Domain::disc(1.0).unwrap()).unwrap();
        let v = f.eval(c(0.2, 0.0));
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(validate_null(&f, 500).pass);
    }

    #[test]
    fn nullity_reports() {
        assert!(validate_null(&catenoid(), 2000).pass);
        let plane = NullForm::parse(&["1", "i", "0"], Domain::disc(1.0).unwrap()).unwrap();
        let r = validate_null(&plane, 10);
        assert!(r.pass && r.max_residual == 0.0);
        let broken = NullForm::parse(&["(z^-2 - 1)/2", "i*(z^-2 + 1)/2", "1/z + 0.1"], Domain::annulus(0.5, 2.0).unwrap()).unwrap();
        let r = validate_null(&broken, 500);
        assert!(!r.pass && r.max_residual > 1e-3, "{r:?}");
    }

    #[test]
    fn catenoid_flux_and_immersion() {
        let f = catenoid();
        let basis = HomologyBasis::standard(f.domain()).unwrap();
        let fl = flux(&f, &basis).unwrap();
        let want = [0.0, 0.0, std::f64::consts::TAU];
        for (a, b) in fl.values[0].iter().zip(want) {
            assert!((a - b).abs() < 1e-8, "{:?}", fl.values);
        }
        assert!(fl.is_real());
        let mesh = build_mesh(f.domain(), 0.1).unwrap();
        let imm = integrate_immersion(&f, c(1.0, 0.0), &[0.0; 3], &mesh, &basis).unwrap();
        let u = imm.eval(c(-1.0, 0.0)).unwrap();
        // oracle: u = (Re(-(1/z + z)/2) + 1, Re(i(z - 1/z)/2), log|z|)
        let z = c(-1.0, 0.0);
        let exact = [(-(1.0 / z + z) / 2.0).re + 1.0, (c(0.0, 0.5) * (z - 1.0 / z)).re, z.norm().ln()];
        for (a, b) in u.iter().zip(exact) {
            assert!((a - b).abs() < 1e-8, "{u:?}");
        }
        assert!(imm.conformality_defect() < 0.01, "{}", imm.conformality_defect());
        let upper = imm.eval_via(c(-1.0, 0.0), c(0.0, 1.2)).unwrap();
        let lower = imm.eval_via(c(-1.0, 0.0), c(0.0, -1.2)).unwrap();
        for k in 0..3 {
            assert!((upper[k] - lower[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn real_periods_block_construction() {
        let f = NullForm::parse(&["(z^-2 - 1)/2", "i*(z^-2 + 1)/2", "i/z"], Domain::annulus(0.5, 2.0).unwrap()).unwrap();
        let basis = HomologyBasis::standard(f.domain()).unwrap();
        let mesh = build_mesh(f.domain(), 0.2).unwrap();
        let err = integrate_immersion(&f, c(1.0, 0.0), &[0.0; 3], &mesh, &basis).unwrap_err();
        assert!(matches!(err, Error::RealPeriodsNonzero { cycle: 0, .. }));
    }

    #[test]
    fn gauss_map_examples() {
        let f = catenoid();
        let g = gauss_map(&f, c(1.0, 0.0)).unwrap();
        let want = ProjectivePoint::new(&[c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        assert!(g.max_difference(&want) < 1e-15);
        assert!(g.quadric_residual() < 1e-10);
        let scaled = gauss_map(&f.scale(c(-2.5, 0.7)), c(0.3, 0.9)).unwrap();
        assert!(scaled.max_difference(&gauss_map(&f, c(0.3, 0.9)).unwrap()) < 1e-15);
    }

    #[test]
    fn fullness_examples() {
        let plane = NullForm::parse(&["0", "i", "1"], Domain::disc(1.0).unwrap()).unwrap();
        let r = fullness_test(&plane, 20).unwrap();
        assert_eq!((r.rank, r.full), (1, false));
        let r = fullness_test(&catenoid(), 20).unwrap();
        assert_eq!((r.rank, r.full), (3, true));
    }

    #[test]
    fn forms_round_trip_through_json() {
        let f = catenoid();
        let json = serde_json::to_string(&f).unwrap();
        let back: NullForm = serde_json::from_str(&json).unwrap();
        let z = c(0.9, -0.4);
        assert_eq!(back.eval(z), f.eval(z));
        assert!(serde_json::from_str::<NullForm>(r#"{"coefficients": ["z", "1"], "domain": {"kind": "disc", "radius": 1}}"#).is_err());
    }
}
