use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::path::PathPolyline;
use super::sampling::halton;
use crate::error::{Error, Result};

/// Planar domains with the global coordinate `z` as chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields, try_from = "RawDomain")]
pub enum Domain {
    /// `|z| < radius`.
    Disc { radius: f64 },
    /// `inner < |z| < outer`.
    Annulus { inner: f64, outer: f64 },
    /// Points whose angle from the positive imaginary axis is below
    /// `half_angle`; `half_angle = pi/4` gives `Im z > |Re z|`. Unbounded;
    /// `truncation_radius` only bounds meshing and sampling, and the arc it
    /// introduces is an artificial boundary.
    Wedge { half_angle: f64, truncation_radius: f64 },
    /// Open axis-parallel rectangle.
    Rectangle { min: [f64; 2], max: [f64; 2] },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawDomain {
    Disc { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Wedge { half_angle: f64, truncation_radius: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
}

impl TryFrom<RawDomain> for Domain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Domain> {
        let d = match raw {
            RawDomain::Disc { radius } => Domain::Disc { radius },
            RawDomain::Annulus { inner, outer } => Domain::Annulus { inner, outer },
            RawDomain::Wedge { half_angle, truncation_radius } => Domain::Wedge { half_angle, truncation_radius },
            RawDomain::Rectangle { min, max } => Domain::Rectangle { min, max },
        };
        d.validate()?;
        Ok(d)
    }
}

/// Whether a boundary piece belongs to the ideal boundary of the surface or
/// only bounds a computational truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Ideal,
    Artificial,
}

/// One boundary component as a parametrized curve on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub id: usize,
    pub kind: BoundaryKind,
    pub length: f64,
    pub closed: bool,
    param: Param,
}

#[derive(Debug, Clone)]
enum Param {
    Arc { center: Complex64, radius: f64, start: f64, sweep: f64 },
    Segment { a: Complex64, b: Complex64 },
}

impl BoundaryCurve {
    pub fn point(&self, t: f64) -> Complex64 {
        match self.param {
            Param::Arc { center, radius, start, sweep } => center + Complex64::from_polar(radius, start + sweep * t),
            Param::Segment { a, b } => a + (b - a) * t,
        }
    }
}

impl Domain {
    pub fn disc(radius: f64) -> Result<Self> {
        let d = Domain::Disc { radius };
        d.validate()?;
        Ok(d)
    }

    pub fn annulus(inner: f64, outer: f64) -> Result<Self> {
        let d = Domain::Annulus { inner, outer };
        d.validate()?;
        Ok(d)
    }

    /// The quarter-plane wedge `Im z > |Re z|`, truncated at `truncation_radius`
    /// for meshing.
    pub fn right_wedge(truncation_radius: f64) -> Result<Self> {
        Self::wedge(PI / 4.0, truncation_radius)
    }

    pub fn wedge(half_angle: f64, truncation_radius: f64) -> Result<Self> {
        let d = Domain::Wedge { half_angle, truncation_radius };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        let d = Domain::Rectangle { min, max };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            Domain::Disc { radius } => {
                if !finite(&[radius]) || radius <= 0.0 {
                    return Err(Error::DegenerateDomain(format!("disc radius must be positive, got {radius}")));
                }
            }
            Domain::Annulus { inner, outer } => {
                if !finite(&[inner, outer]) || !(0.0 < inner && inner < outer) {
                    return Err(Error::DegenerateDomain(format!("annulus needs 0 < inner < outer, got {inner}, {outer}")));
                }
            }
            Domain::Wedge { half_angle, truncation_radius } => {
                if !finite(&[half_angle, truncation_radius])
                    || !(0.0 < half_angle && half_angle < FRAC_PI_2)
                    || truncation_radius <= 0.0
                {
                    return Err(Error::DegenerateDomain(format!(
                        "wedge needs 0 < half_angle < pi/2 and a positive truncation radius, got {half_angle}, {truncation_radius}"
                    )));
                }
            }
            Domain::Rectangle { min, max } => {
                if !finite(&[min[0], min[1], max[0], max[1]]) || min[0] >= max[0] || min[1] >= max[1] {
                    return Err(Error::DegenerateDomain("rectangle corners must satisfy min < max".into()));
                }
            }
        }
        Ok(())
    }

    /// The defining strict inequality of the (untruncated) domain.
    pub fn contains(&self, p: Complex64) -> bool {
        if !(p.re.is_finite() && p.im.is_finite()) {
            return false;
        }
        match *self {
            Domain::Disc { radius } => p.norm() < radius,
            Domain::Annulus { inner, outer } => {
                let r = p.norm();
                inner < r && r < outer
            }
            Domain::Wedge { half_angle, .. } => p.norm() > 0.0 && p.re.abs().atan2(p.im) < half_angle,
            Domain::Rectangle { min, max } => min[0] < p.re && p.re < max[0] && min[1] < p.im && p.im < max[1],
        }
    }

    /// Containment with a strict margin from the true boundary.
    pub fn contains_with_margin(&self, p: Complex64, margin: f64) -> bool {
        self.contains(p) && self.distance_to_boundary(p) >= margin
    }

    /// Containment in the computational region (the wedge cut at its
    /// truncation radius; all other kinds unchanged).
    pub fn region_contains(&self, p: Complex64) -> bool {
        match *self {
            Domain::Wedge { truncation_radius, .. } => self.contains(p) && p.norm() < truncation_radius,
            _ => self.contains(p),
        }
    }

    /// Euclidean distance to the true boundary (truncation ignored). Negative
    /// values are never returned; points outside give 0.
    pub fn distance_to_boundary(&self, p: Complex64) -> f64 {
        if !self.contains(p) {
            return 0.0;
        }
        match *self {
            Domain::Disc { radius } => radius - p.norm(),
            Domain::Annulus { inner, outer } => {
                let r = p.norm();
                (r - inner).min(outer - r)
            }
            Domain::Wedge { half_angle, .. } => {
                let d1 = distance_to_ray(p, Complex64::from_polar(1.0, FRAC_PI_2 - half_angle));
                let d2 = distance_to_ray(p, Complex64::from_polar(1.0, FRAC_PI_2 + half_angle));
                d1.min(d2)
            }
            Domain::Rectangle { min, max } => (p.re - min[0]).min(max[0] - p.re).min(p.im - min[1]).min(max[1] - p.im),
        }
    }

    /// Distance to the boundary of the computational region.
    pub fn distance_to_region_boundary(&self, p: Complex64) -> f64 {
        match *self {
            Domain::Wedge { truncation_radius, .. } => {
                if !self.region_contains(p) {
                    0.0
                } else {
                    self.distance_to_boundary(p).min(truncation_radius - p.norm())
                }
            }
            _ => self.distance_to_boundary(p),
        }
    }

    /// Smallest width of the computational region.
    pub fn thickness(&self) -> f64 {
        match *self {
            Domain::Disc { radius } => radius,
            Domain::Annulus { inner, outer } => outer - inner,
            Domain::Wedge { half_angle, truncation_radius } => truncation_radius * half_angle.sin(),
            Domain::Rectangle { min, max } => (max[0] - min[0]).min(max[1] - min[1]),
        }
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Domain::Disc { radius } => ([-radius, -radius], [radius, radius]),
            Domain::Annulus { outer, .. } => ([-outer, -outer], [outer, outer]),
            Domain::Wedge { half_angle, truncation_radius } => {
                let x = truncation_radius * half_angle.sin();
                ([-x, 0.0], [x, truncation_radius])
            }
            Domain::Rectangle { min, max } => (min, max),
        }
    }

    /// First Betti number.
    pub fn betti_number(&self) -> usize {
        match self {
            Domain::Annulus { .. } => 1,
            _ => 0,
        }
    }

    /// Points around which the homology classes wind (the holes).
    pub fn holes(&self) -> Vec<Complex64> {
        match self {
            Domain::Annulus { .. } => vec![Complex64::new(0.0, 0.0)],
            _ => Vec::new(),
        }
    }

    /// Boundary components of the computational region, positively oriented
    /// with respect to the region.
    pub fn boundary_curves(&self) -> Vec<BoundaryCurve> {
        let origin = Complex64::new(0.0, 0.0);
        match *self {
            Domain::Disc { radius } => vec![BoundaryCurve {
                id: 0,
                kind: BoundaryKind::Ideal,
                length: TAU * radius,
                closed: true,
                param: Param::Arc { center: origin, radius, start: 0.0, sweep: TAU },
            }],
            Domain::Annulus { inner, outer } => vec![
                BoundaryCurve {
                    id: 0,
                    kind: BoundaryKind::Ideal,
                    length: TAU * inner,
                    closed: true,
                    param: Param::Arc { center: origin, radius: inner, start: 0.0, sweep: -TAU },
                },
                BoundaryCurve {
                    id: 1,
                    kind: BoundaryKind::Ideal,
                    length: TAU * outer,
                    closed: true,
                    param: Param::Arc { center: origin, radius: outer, start: 0.0, sweep: TAU },
                },
            ],
            Domain::Wedge { half_angle, truncation_radius: t } => {
                let right = FRAC_PI_2 - half_angle;
                let left = FRAC_PI_2 + half_angle;
                vec![
                    BoundaryCurve {
                        id: 0,
                        kind: BoundaryKind::Ideal,
                        length: t,
                        closed: false,
                        param: Param::Segment { a: origin, b: Complex64::from_polar(t, right) },
                    },
                    BoundaryCurve {
                        id: 1,
                        kind: BoundaryKind::Ideal,
                        length: t,
                        closed: false,
                        param: Param::Segment { a: Complex64::from_polar(t, left), b: origin },
                    },
                    BoundaryCurve {
                        id: 2,
                        kind: BoundaryKind::Artificial,
                        length: t * 2.0 * half_angle,
                        closed: false,
                        param: Param::Arc { center: origin, radius: t, start: right, sweep: 2.0 * half_angle },
                    },
                ]
            }
            Domain::Rectangle { min, max } => {
                let c = [
                    Complex64::new(min[0], min[1]),
                    Complex64::new(max[0], min[1]),
                    Complex64::new(max[0], max[1]),
                    Complex64::new(min[0], max[1]),
                ];
                (0..4)
                    .map(|k| BoundaryCurve {
                        id: k,
                        kind: BoundaryKind::Ideal,
                        length: (c[(k + 1) % 4] - c[k]).norm(),
                        closed: false,
                        param: Param::Segment { a: c[k], b: c[(k + 1) % 4] },
                    })
                    .collect()
            }
        }
    }

    /// A homology basis of closed polylines with `segments` vertices each:
    /// for the annulus, the circle of radius `sqrt(inner * outer)`.
    pub fn default_cycles(&self, segments: usize) -> Vec<PathPolyline> {
        match *self {
            Domain::Annulus { inner, outer } => {
                vec![PathPolyline::circle(Complex64::new(0.0, 0.0), (inner * outer).sqrt(), segments)]
            }
            _ => Vec::new(),
        }
    }

    /// Quasi-random interior points of the computational region (Halton
    /// sequence, bases 2 and 3), each at distance at least `margin` from the
    /// region boundary. Deterministic, and the first `n` points of a longer
    /// request coincide with a shorter one.
    pub fn sample_interior(&self, n: usize, margin: f64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n);
        let mut index = 1u64;
        let mut misses = 0usize;
        while out.len() < n && misses < 100 * n + 1000 {
            let (u, v) = (halton(index, 2), halton(index, 3));
            index += 1;
            let p = self.map_unit_square(u, v);
            if self.region_contains(p) && self.distance_to_region_boundary(p) >= margin {
                out.push(p);
            } else {
                misses += 1;
            }
        }
        out
    }

    fn map_unit_square(&self, u: f64, v: f64) -> Complex64 {
        match *self {
            Domain::Disc { radius } => Complex64::from_polar(radius * u.sqrt(), TAU * v),
            Domain::Annulus { inner, outer } => {
                let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
                Complex64::from_polar(r, TAU * v)
            }
            Domain::Wedge { half_angle, truncation_radius } => {
                Complex64::from_polar(truncation_radius * u.sqrt(), FRAC_PI_2 - half_angle + 2.0 * half_angle * v)
            }
            Domain::Rectangle { min, max } => {
                Complex64::new(min[0] + u * (max[0] - min[0]), min[1] + v * (max[1] - min[1]))
            }
        }
    }
}

fn distance_to_ray(p: Complex64, dir: Complex64) -> f64 {
    let along = p.re * dir.re + p.im * dir.im;
    if along <= 0.0 {
        p.norm()
    } else {
        (p - dir * along).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(Domain::disc(0.0).is_err());
        assert!(Domain::annulus(2.0, 0.5).is_err());
        assert!(Domain::annulus(0.0, 1.0).is_err());
        assert!(Domain::wedge(2.0, 5.0).is_err());
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"annulus","inner":1.0,"outer":0.5}"#).is_err());
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"disc","radius":1.0,"extra":2}"#).is_err());
    }

    #[test]
    fn right_wedge_is_the_quarter_plane() {
        let w = Domain::right_wedge(10.0).unwrap();
        assert!(w.contains(c(0.0, 1.0)));
        assert!(w.contains(c(0.49, 0.5)));
        assert!(!w.contains(c(0.51, 0.5)));
        assert!(!w.contains(c(0.0, 0.0)));
        assert!(w.contains(c(0.0, 50.0)));
        assert!(!w.region_contains(c(0.0, 50.0)));
        // distance from it to the rays is t / sqrt 2
        assert!((w.distance_to_boundary(c(0.0, 3.0)) - 3.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn samples_respect_margin_and_nest() {
        let a = Domain::annulus(0.5, 2.0).unwrap();
        let s = a.sample_interior(200, 1e-3);
        assert_eq!(s.len(), 200);
        assert!(s.iter().all(|&p| a.contains_with_margin(p, 1e-3)));
        let longer = a.sample_interior(300, 1e-3);
        assert_eq!(&longer[..200], &s[..]);
    }

    #[test]
    fn json_schema_round_trip() {
        let d = Domain::right_wedge(8.0).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"kind\":\"wedge\""));
        assert_eq!(serde_json::from_str::<Domain>(&json).unwrap(), d);
    }

    #[test]
    fn boundary_curves_close_up() {
        let w = Domain::right_wedge(4.0).unwrap();
        let curves = w.boundary_curves();
        assert_eq!(curves.len(), 3);
        assert_eq!(curves[2].kind, BoundaryKind::Artificial);
        assert!((curves[0].point(1.0) - curves[2].point(0.0)).norm() < 1e-12);
        assert!((curves[2].point(1.0) - curves[1].point(0.0)).norm() < 1e-12);
    }
}
