//! Projective proximity of null curves: Fubini–Study distances, divisor
//! multipliers and gauge alignment of one holomorphic tuple onto another.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::quadrature::{integrate_scalar, QuadOptions};
use crate::complex::sampling::halton;
use crate::complex::{Domain, Expr, HolomorphicFn, PathPolyline};
use crate::error::{Error, Result};
use crate::weierstrass::ProjectivePoint;

pub use crate::complex::winding::winding_number;

const C0: Complex64 = Complex64::new(0.0, 0.0);
/// Vertices per boundary component of a [`CompactL`].
pub const BOUNDARY_VERTICES: usize = 1024;

/// Fubini–Study distance `arccos(|<z, w>| / (|z| |w|))`, evaluated as
/// `atan2(sqrt(sum_{i<j} |z_i w_j - z_j w_i|^2), |<z, w>|)` to stay accurate
/// near zero.
pub fn fs_distance(z: &ProjectivePoint, w: &ProjectivePoint) -> f64 {
    fs_distance_raw(z.coords(), w.coords())
}

/// [`fs_distance`] for arbitrary nonzero representatives.
pub fn fs_distance_raw(z: &[Complex64], w: &[Complex64]) -> f64 {
    let mut gram = 0.0;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            gram += (z[i] * w[j] - z[j] * w[i]).norm_sqr();
        }
    }
    let inner: Complex64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    gram.sqrt().atan2(inner.norm())
}

/// A point of an integral divisor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorPoint {
    pub point: Complex64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DivisorPoint>", into = "Vec<DivisorPoint>")]
pub struct Divisor {
    points: Vec<DivisorPoint>,
}

impl TryFrom<Vec<DivisorPoint>> for Divisor {
    type Error = Error;

    fn try_from(points: Vec<DivisorPoint>) -> Result<Self> {
        Divisor::new(points)
    }
}

impl From<Divisor> for Vec<DivisorPoint> {
    fn from(d: Divisor) -> Self {
        d.points
    }
}

impl Divisor {
    pub fn new(points: Vec<DivisorPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if p.multiplicity == 0 {
                return Err(Error::InvalidInput("divisor multiplicities must be at least 1".into()));
            }
            if !p.point.is_finite() {
                return Err(Error::InvalidInput("divisor points must be finite".into()));
            }
            if points[..i].iter().any(|q| q.point == p.point) {
                return Err(Error::InvalidInput(format!("repeated divisor point {}", p.point)));
            }
        }
        Ok(Divisor { points })
    }

    pub fn from_points(points: &[(Complex64, u32)]) -> Result<Self> {
        Self::new(points.iter().map(|&(point, multiplicity)| DivisorPoint { point, multiplicity }).collect())
    }

    pub fn points(&self) -> &[DivisorPoint] {
        &self.points
    }

    pub fn order(&self) -> u32 {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    pub fn multiplicity_at(&self, z: Complex64) -> u32 {
        self.points.iter().find(|p| p.point == z).map_or(0, |p| p.multiplicity)
    }
}

/// A smoothly bounded compact region: a closed disc or closed annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompactL {
    Disc { center: Complex64, radius: f64 },
    Annulus { center: Complex64, inner: f64, outer: f64 },
}

impl CompactL {
    pub fn disc(center: Complex64, radius: f64) -> Result<Self> {
        let l = CompactL::Disc { center, radius };
        l.validate()?;
        Ok(l)
    }

    pub fn annulus(center: Complex64, inner: f64, outer: f64) -> Result<Self> {
        let l = CompactL::Annulus { center, inner, outer };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CompactL::Disc { center, radius } => center.is_finite() && radius > 0.0 && radius.is_finite(),
            CompactL::Annulus { center, inner, outer } => center.is_finite() && inner > 0.0 && outer > inner && outer.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid compact region {self:?}")))
        }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            CompactL::Disc { center, .. } | CompactL::Annulus { center, .. } => center,
        }
    }

    fn radii(&self) -> Vec<(f64, bool)> {
        match *self {
            CompactL::Disc { radius, .. } => vec![(radius, true)],
            CompactL::Annulus { inner, outer, .. } => vec![(outer, true), (inner, false)],
        }
    }

    /// Boundary components, oriented with `L` on the left.
    pub fn boundary(&self, vertices: usize) -> Vec<PathPolyline> {
        self.radii()
            .into_iter()
            .map(|(r, ccw)| {
                let c = PathPolyline::circle(self.center(), r, vertices);
                if ccw {
                    c
                } else {
                    c.reversed()
                }
            })
            .collect()
    }

    /// `n` boundary points per component at van der Corput angles, so that
    /// a longer request extends a shorter one.
    pub fn boundary_samples(&self, n: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n * 2);
        for (r, _) in self.radii() {
            out.extend((0..n).map(|k| self.center() + Complex64::from_polar(r, TAU * halton(k as u64, 2))));
        }
        out
    }

    /// Closed-region membership up to `margin` inside.
    pub fn contains_with_margin(&self, z: Complex64, margin: f64) -> bool {
        let d = (z - self.center()).norm();
        match *self {
            CompactL::Disc { radius, .. } => d <= radius - margin,
            CompactL::Annulus { inner, outer, .. } => d >= inner + margin && d <= outer - margin,
        }
    }

    /// Verifies the region (with its boundary) lies inside the host domain.
    pub fn check_in(&self, domain: &Domain) -> Result<()> {
        for b in self.boundary(256) {
            b.check_in(domain)?;
        }
        if let CompactL::Disc { .. } = self {
            if !domain.contains(self.center()) {
                return Err(Error::EvaluationOutsideDomain(self.center()));
            }
        }
        Ok(())
    }

    fn sup_on_boundary(&self, f: impl Fn(Complex64) -> f64, n: usize) -> f64 {
        self.boundary_samples(n).into_iter().map(f).fold(0.0, f64::max)
    }
}

/// Winding-number certificate at one point of `E` or `E0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingCheck {
    pub point: Complex64,
    pub radius: f64,
    pub expected: i64,
    pub measured: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivisorMultiplier {
    #[serde(skip)]
    pub psi: HolomorphicFn,
    pub label: String,
    pub boundary_deviation: f64,
    pub checks: Vec<WindingCheck>,
    pub verified: bool,
}

/// `Psi_E = prod_j prod_{q in E near p_j} ((h_j - h_j(q)) / h_j)^{mult q}`,
/// whose divisor is `E - E0`. `charts[j]` vanishes simply at the `j`-th
/// point of `E0`, and every point of `E` must lie within `radii[j]` of one
/// of them with per-disc multiplicities matching `E0`.
pub fn divisor_multiplier(e0: &Divisor, e: &Divisor, l: &CompactL, charts: &[HolomorphicFn], radii: &[f64]) -> Result<DivisorMultiplier> {
    if e0.order() != e.order() {
        return Err(Error::OrderMismatch(format!("E0 has order {}, E has order {}", e0.order(), e.order())));
    }
    if charts.len() != e0.points().len() || radii.len() != e0.points().len() {
        return Err(Error::InvalidInput("one chart and one disc radius per point of E0".into()));
    }
    for p in e0.points().iter().chain(e.points()) {
        if !l.contains_with_margin(p.point, 1e-9) {
            return Err(Error::InvalidInput(format!("divisor point {} is not interior to L", p.point)));
        }
    }
    let mut assigned: Vec<Vec<DivisorPoint>> = vec![Vec::new(); e0.points().len()];
    for q in e.points() {
        let j = e0
            .points()
            .iter()
            .zip(radii)
            .position(|(p, &r)| (q.point - p.point).norm() < r)
            .ok_or(Error::PointOutsideNeighborhood(q.point))?;
        assigned[j].push(*q);
    }
    for (j, p) in e0.points().iter().enumerate() {
        let count: u32 = assigned[j].iter().map(|q| q.multiplicity).sum();
        if count != p.multiplicity {
            return Err(Error::OrderMismatch(format!(
                "disc around {} holds {count} points of E, E0 has multiplicity {}",
                p.point, p.multiplicity
            )));
        }
    }

    let mut factors: Vec<HolomorphicFn> = Vec::new();
    for (j, chart) in charts.iter().enumerate() {
        for q in &assigned[j] {
            let hq = chart.eval(q.point);
            let factor = match chart.expr() {
                Some(h) => HolomorphicFn::from_expr(Expr::powi(
                    Expr::div(Expr::sub(h.clone(), Expr::constant(hq)), h.clone()),
                    q.multiplicity as i32,
                )),
                None => {
                    let (h, m) = (chart.clone(), q.multiplicity as i32);
                    HolomorphicFn::opaque(format!("(h - h(q))/h at {}", q.point), move |z| {
                        let v = h.eval(z);
                        ((v - hq) / v).powi(m)
                    })
                }
            };
            factors.push(factor);
        }
    }
    let psi = factors.iter().fold(HolomorphicFn::constant(Complex64::new(1.0, 0.0)), |acc, f| acc.mul(f));
    let boundary_deviation = l.sup_on_boundary(|z| (psi.eval(z) - 1.0).norm(), BOUNDARY_VERTICES);

    let mut support: Vec<Complex64> = e0.points().iter().chain(e.points()).map(|p| p.point).collect();
    support.dedup();
    support.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    support.dedup();
    let mut checks = Vec::new();
    for &x in &support {
        let expected = i64::from(e.multiplicity_at(x)) - i64::from(e0.multiplicity_at(x));
        let sep = support.iter().filter(|&&y| y != x).map(|&y| (y - x).norm()).fold(f64::INFINITY, f64::min);
        let radius = (0.3 * sep).min(0.5 * radii.iter().copied().fold(f64::INFINITY, f64::min));
        let measured = winding_number(&psi, &PathPolyline::circle(x, radius, 256))?;
        checks.push(WindingCheck { point: x, radius, expected, measured });
    }
    let verified = checks.iter().all(|c| c.expected == c.measured);
    Ok(DivisorMultiplier { label: psi.label(), psi, boundary_deviation, checks, verified })
}

/// Zeros of `f` inside the disc `|z - center| < radius`, with
/// multiplicities, from contour moments of `f'/f` and the Newton identities.
pub fn zeros_in_disc(f: &HolomorphicFn, center: Complex64, radius: f64) -> Result<Vec<(Complex64, u32)>> {
    let circle = PathPolyline::circle(center, radius, 512);
    let m = winding_number(f, &circle)?;
    if m < 0 {
        return Err(Error::InvalidInput(format!("f has poles in the disc around {center}")));
    }
    let m = m as usize;
    if m == 0 {
        return Ok(Vec::new());
    }
    let df = f.derivative_fn();
    let mut sums = vec![C0; m + 1];
    for (k, s) in sums.iter_mut().enumerate().skip(1) {
        let (v, _) = integrate_scalar(
            |z| ((z - center) / radius).powi(k as i32) * df.eval(z) / f.eval(z),
            &circle,
            QuadOptions::with_tol(1e-13),
        )?;
        *s = v / Complex64::new(0.0, TAU);
    }
    // elementary symmetric functions e_k from the power sums
    let mut e = vec![Complex64::new(1.0, 0.0); m + 1];
    for k in 1..=m {
        let mut acc = C0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * sums[i];
        }
        e[k] = acc / k as f64;
    }
    // monic polynomial in w = (z - center)/radius, leading coefficient first
    let coeffs: Vec<Complex64> = (0..=m).map(|k| if k % 2 == 0 { e[k] } else { -e[k] }).collect();
    let roots = durand_kerner(&coeffs);
    let mut clusters: Vec<(Complex64, u32)> = Vec::new();
    for w in roots {
        match clusters.iter_mut().find(|(c, n)| (*c / *n as f64 - w).norm() < 1e-4) {
            Some((c, n)) => {
                *c += w;
                *n += 1;
            }
            None => clusters.push((w, 1)),
        }
    }
    Ok(clusters.into_iter().map(|(c, n)| (center + radius * c / n as f64, n)).collect())
}

fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = coeffs.len() - 1;
    let eval = |x: Complex64| coeffs.iter().fold(C0, |acc, &c| acc * x + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..m).map(|k| seed.powi(k as i32)).collect();
    for _ in 0..2000 {
        let mut change: f64 = 0.0;
        for i in 0..m {
            let xi = roots[i];
            let denom = roots.iter().enumerate().filter(|&(j, _)| j != i).fold(Complex64::new(1.0, 0.0), |acc, (_, &xj)| acc * (xi - xj));
            if denom == C0 {
                roots[i] += Complex64::new(1e-8, 1e-8);
                change = f64::INFINITY;
                continue;
            }
            let step = eval(xi) / denom;
            roots[i] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 {
            break;
        }
    }
    roots
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeCase {
    /// The reference component has no zeros on `L`: `phi = f_c / g_c`.
    ZeroFree,
    /// Zeros present: `phi = Psi f_c / g_c` with a divisor multiplier.
    WithZeros,
}

/// Options for [`gauge_align`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeOptions {
    /// Override of the reference component.
    #[serde(default)]
    pub reference: Option<usize>,
    /// Discs `(center, radius)` isolating the zeros of the reference
    /// component of `f`.
    #[serde(default)]
    pub discs: Vec<(Complex64, f64)>,
    /// Boundary samples per component for sup-norm estimates.
    #[serde(default)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscWinding {
    pub center: Complex64,
    pub radius: f64,
    pub zeros_f: i64,
    pub zeros_g: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeReport {
    pub case: GaugeCase,
    pub reference_component: usize,
    /// Whether the reference differs from the first component.
    pub reindexed: bool,
    pub delta: f64,
    pub epsilon: f64,
    pub deviation: f64,
    /// Case-1 a priori bound on the deviation.
    pub bound: Option<f64>,
    pub psi_boundary_deviation: Option<f64>,
    pub windings: Vec<DiscWinding>,
    pub success: bool,
    #[serde(skip)]
    pub multiplier: HolomorphicFn,
}

fn tuple_at(f: &[HolomorphicFn], z: Complex64) -> Vec<Complex64> {
    f.iter().map(|c| c.eval(z)).collect()
}

fn tuple_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::hypot)
}

/// Finds a nowhere-vanishing `phi` on `L` with `phi g` close to `f`, and
/// reports `sup_bL |phi g - f|` against `epsilon`.
pub fn gauge_align(f: &[HolomorphicFn], g: &[HolomorphicFn], l: &CompactL, epsilon: f64, opts: &GaugeOptions) -> Result<GaugeReport> {
    if f.len() != g.len() || f.is_empty() {
        return Err(Error::InvalidInput("f and g must be tuples of equal positive length".into()));
    }
    let samples = opts.samples.unwrap_or(BOUNDARY_VERTICES);
    let pts = l.boundary_samples(samples);
    let min_on_boundary = |h: &HolomorphicFn| pts.iter().map(|&z| h.eval(z).norm()).fold(f64::INFINITY, f64::min);
    let reference = match opts.reference {
        Some(c) if c < f.len() => c,
        Some(c) => return Err(Error::InvalidInput(format!("reference component {c} out of range"))),
        None => (0..f.len())
            .max_by(|&a, &b| min_on_boundary(&f[a]).total_cmp(&min_on_boundary(&f[b])))
            .expect("nonempty"),
    };
    let (fc, gc) = (&f[reference], &g[reference]);
    if !(min_on_boundary(fc) > 1e-10) {
        return Err(Error::ReferenceComponentDegenerate(format!("component {reference} vanishes on the boundary of L")));
    }
    if !(min_on_boundary(gc) > 1e-10) {
        return Err(Error::ProximityTooLarge(format!("component {reference} of g vanishes on the boundary of L")));
    }
    let boundary = l.boundary(BOUNDARY_VERTICES);
    let count = |h: &HolomorphicFn| -> Result<i64> { boundary.iter().map(|b| winding_number(h, b)).sum() };
    let (zf, zg) = (count(fc)?, count(gc)?);
    if zf != zg {
        return Err(Error::ProximityTooLarge(format!("reference component has {zf} zeros in f but {zg} in g")));
    }
    let ratio = ratio_fn(fc, gc);
    let delta = projective_proximity(f, g, l, samples);

    let (case, multiplier, bound, psi_dev, windings) = if zf == 0 {
        (GaugeCase::ZeroFree, ratio.clone(), None, None, Vec::new())
    } else {
        let mut windings = Vec::new();
        let mut e0 = Vec::new();
        let mut e = Vec::new();
        for &(center, radius) in &opts.discs {
            let circle = PathPolyline::circle(center, radius, 512);
            let (wf, wg) = (winding_number(fc, &circle)?, winding_number(gc, &circle)?);
            windings.push(DiscWinding { center, radius, zeros_f: wf, zeros_g: wg });
            if wf != wg {
                return Err(Error::ProximityTooLarge(format!("disc around {center}: {wf} zeros of f, {wg} of g")));
            }
            e0.extend(zeros_in_disc(fc, center, radius)?.into_iter().map(|z| (z, radius)));
            e.extend(zeros_in_disc(gc, center, radius)?);
        }
        let located: u32 = e0.iter().map(|((_, m), _)| m).sum();
        if i64::from(located) != zf {
            return Err(Error::InvalidInput(format!("discs isolate {located} of the {zf} zeros of the reference component")));
        }
        let e0_div = Divisor::from_points(&e0.iter().map(|(p, _)| *p).collect::<Vec<_>>())?;
        let e_div = Divisor::from_points(&e)?;
        let charts: Vec<HolomorphicFn> = e0
            .iter()
            .map(|((p, _), _)| HolomorphicFn::from_expr(Expr::sub(Expr::Var, Expr::constant(*p))))
            .collect();
        // each zero of f gets the disc it was found in, shrunk to exclude other zeros of f
        let radii: Vec<f64> = e0
            .iter()
            .map(|((p, _), r)| {
                let sep = e0.iter().map(|((q, _), _)| (q - p).norm()).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
                r.min(0.5 * sep)
            })
            .collect();
        let dm = divisor_multiplier(&e0_div, &e_div, l, &charts, &radii)?;
        let phi = dm.psi.mul(&ratio);
        let base_dev = l.sup_on_boundary(|z| tuple_distance(&scale_tuple(ratio.eval(z), &tuple_at(g, z)), &tuple_at(f, z)), samples);
        let f_norm = l.sup_on_boundary(|z| tuple_at(f, z).iter().map(|c| c.norm()).fold(0.0, f64::hypot), samples);
        let bound = dm.boundary_deviation * (base_dev + f_norm) + base_dev;
        (GaugeCase::WithZeros, phi, Some(bound), Some(dm.boundary_deviation), windings)
    };
    let deviation = l.sup_on_boundary(|z| tuple_distance(&scale_tuple(multiplier.eval(z), &tuple_at(g, z)), &tuple_at(f, z)), samples);
    Ok(GaugeReport {
        case,
        reference_component: reference,
        reindexed: reference != 0,
        delta,
        epsilon,
        deviation,
        bound,
        psi_boundary_deviation: psi_dev,
        windings,
        success: deviation < epsilon,
        multiplier,
    })
}

fn scale_tuple(c: Complex64, v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|x| c * x).collect()
}

fn ratio_fn(f: &HolomorphicFn, g: &HolomorphicFn) -> HolomorphicFn {
    match (f.expr(), g.expr()) {
        (Some(a), Some(b)) => HolomorphicFn::from_expr(Expr::div(a.clone(), b.clone())),
        _ => {
            let (a, b) = (f.clone(), g.clone());
            HolomorphicFn::opaque(format!("({})/({})", a.label(), b.label()), move |z| a.eval(z) / b.eval(z))
        }
    }
}

/// `sup fs_distance(f(z), g(z))` over `samples` van der Corput points per
/// boundary component of `L`; nested samples make it monotone in `samples`.
pub fn projective_proximity(f: &[HolomorphicFn], g: &[HolomorphicFn], l: &CompactL, samples: usize) -> f64 {
    l.sup_on_boundary(|z| fs_distance_raw(&tuple_at(f, z), &tuple_at(g, z)), samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pp(v: &[Complex64]) -> ProjectivePoint {
        ProjectivePoint::new(v).unwrap()
    }

    #[test]
    fn fs_examples() {
        let e1 = pp(&[c(1.0, 0.0), C0, C0]);
        let e2 = pp(&[C0, c(1.0, 0.0), C0]);
        assert_eq!(fs_distance(&e1, &e2), std::f64::consts::FRAC_PI_2);
        let z = [c(0.3, -1.0), c(2.0, 0.5), c(-0.7, 0.1)];
        assert_eq!(fs_distance_raw(&z, &z), 0.0);
        let lz: Vec<Complex64> = z.iter().map(|x| x * c(-3.0, 2.0)).collect();
        assert!(fs_distance_raw(&z, &lz) < 1e-15);
    }

    #[test]
    fn winding_examples() {
        let unit = PathPolyline::circle(C0, 1.0, 256);
        assert_eq!(winding_number(&HolomorphicFn::parse("z^3").unwrap(), &unit).unwrap(), 3);
    }

    #[test]
    fn divisor_multiplier_examples() {
        let l = CompactL::disc(C0, 1.0).unwrap();
        let e0 = Divisor::from_points(&[(C0, 1)]).unwrap();
        let h = [HolomorphicFn::identity()];
        let same = divisor_multiplier(&e0, &e0, &l, &h, &[0.5]).unwrap();
        assert_eq!(same.boundary_deviation, 0.0);
        let e = Divisor::from_points(&[(c(0.01, 0.0), 1)]).unwrap();
        let m = divisor_multiplier(&e0, &e, &l, &h, &[0.5]).unwrap();
        assert!((m.boundary_deviation - 0.01).abs() < 1e-12);
        assert!(m.verified, "{:?}", m.checks);
        let e0 = Divisor::from_points(&[(C0, 2)]).unwrap();
        let e = Divisor::from_points(&[(c(0.01, 0.0), 1), (c(-0.01, 0.0), 1)]).unwrap();
        let m = divisor_multiplier(&e0, &e, &l, &h, &[0.5]).unwrap();
        assert!((m.boundary_deviation - 1e-4).abs() < 1e-12);
        assert!(m.verified);
        let far = Divisor::from_points(&[(c(0.6, 0.0), 2)]).unwrap();
        assert!(matches!(divisor_multiplier(&e0, &far, &l, &h, &[0.5]), Err(Error::PointOutsideNeighborhood(_))));
        let wrong = Divisor::from_points(&[(c(0.1, 0.0), 1)]).unwrap();
        assert!(matches!(divisor_multiplier(&e0, &wrong, &l, &h, &[0.5]), Err(Error::OrderMismatch(_))));
    }

    #[test]
    fn zeros_are_located() {
        let f = HolomorphicFn::parse("(z - 0.01)*(z + 0.01)*(z - 0.2)").unwrap();
        let mut z = zeros_in_disc(&f, C0, 0.5).unwrap();
        z.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        assert_eq!(z.len(), 3);
        for (got, want) in z.iter().zip([-0.01, 0.01, 0.2]) {
            assert!((got.0 - want).norm() < 1e-10 && got.1 == 1);
        }
        let d = zeros_in_disc(&HolomorphicFn::parse("z^2").unwrap(), C0, 0.5).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].1, 2);
        assert!(d[0].0.norm() < 1e-10);
    }

    #[test]
    fn gauge_catenoid_zero_free() {
        let f: Vec<HolomorphicFn> = ["(z^-2 - 1)/2", "i*(z^-2 + 1)/2", "1/z"].iter().map(|s| HolomorphicFn::parse(s).unwrap()).collect();
        let w = HolomorphicFn::parse("exp(0.01*z)").unwrap();
        let g: Vec<HolomorphicFn> = f.iter().map(|x| w.mul(x)).collect();
        let l = CompactL::annulus(C0, 0.8, 1.25).unwrap();
        let r = gauge_align(&f, &g, &l, 1e-3, &GaugeOptions::default()).unwrap();
        assert_eq!(r.case, GaugeCase::ZeroFree);
        assert_eq!(r.reference_component, 2);
        assert!(r.success && r.deviation < 1e-6);
        let z = c(0.9, 0.3);
        assert!((r.multiplier.eval(z) - (-0.01 * z).exp()).norm() < 1e-14);
        assert!(r.delta < 1e-7);
        let same = gauge_align(&f, &f, &l, 1e-3, &GaugeOptions::default()).unwrap();
        assert_eq!(same.deviation, 0.0);
    }

    #[test]
    fn gauge_with_zeros() {
        let rho = 0.01;
        let f: Vec<HolomorphicFn> = ["z^2", "1 + z", "2 - z"].iter().map(|s| HolomorphicFn::parse(s).unwrap()).collect();
        let g: Vec<HolomorphicFn> = ["(1 + 0.001*z)*(z^2 - 0.0001)", "1 + z", "2 - z"].iter().map(|s| HolomorphicFn::parse(s).unwrap()).collect();
        let l = CompactL::disc(C0, 0.5).unwrap();
        let opts = GaugeOptions { reference: Some(0), discs: vec![(C0, 0.25)], samples: None };
        let r = gauge_align(&f, &g, &l, 0.1, &opts).unwrap();
        assert_eq!(r.case, GaugeCase::WithZeros);
        // oracle: phi = Psi z^2 / g_1 = 1/(1 + 0.001 z)
        let z = c(0.3, 0.2);
        assert!((r.multiplier.eval(z) - 1.0 / (1.0 + 0.001 * z)).norm() < 1e-7);
        assert!((r.psi_boundary_deviation.unwrap() - rho * rho / 0.25).abs() < 1e-9);
        assert!(r.deviation <= r.bound.unwrap() + 1e-12);
        assert!(r.success);
    }
}
