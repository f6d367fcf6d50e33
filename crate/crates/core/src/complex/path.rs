use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::sampling::ExactSum;
use crate::error::{Error, Result};

/// Closing tolerance between the first and last vertex of a closed path.
pub const CLOSE_TOL: f64 = 1e-14;

/// A piecewise-linear path in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawPath")]
pub struct PathPolyline {
    vertices: Vec<Complex64>,
    closed: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    vertices: Vec<Complex64>,
    closed: bool,
}

impl TryFrom<RawPath> for PathPolyline {
    type Error = Error;

    fn try_from(raw: RawPath) -> Result<Self> {
        PathPolyline::new(raw.vertices, raw.closed)
    }
}

impl PathPolyline {
    pub fn new(vertices: Vec<Complex64>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two vertices".into()));
        }
        if vertices.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("path vertices must be finite".into()));
        }
        if closed && (vertices[0] - vertices[vertices.len() - 1]).norm() > CLOSE_TOL {
            return Err(Error::InvalidInput("closed path must end where it starts".into()));
        }
        Ok(PathPolyline { vertices, closed })
    }

    pub fn segment(a: Complex64, b: Complex64) -> Self {
        PathPolyline { vertices: vec![a, b], closed: false }
    }

    /// Counter-clockwise inscribed polygon with `n` sides. The last vertex is
    /// a copy of the first.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Self {
        let n = n.max(3);
        let mut vertices: Vec<Complex64> = (0..n)
            .map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / n as f64))
            .collect();
        vertices.push(vertices[0]);
        PathPolyline { vertices, closed: true }
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Euclidean length; order-independent so a path and its reverse agree.
    pub fn length(&self) -> f64 {
        let mut acc = ExactSum::new();
        self.segments().for_each(|(a, b)| acc.add((b - a).norm()));
        acc.value()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        PathPolyline { vertices: v, closed: self.closed }
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, other: &PathPolyline) -> Result<Self> {
        if (self.end() - other.start()).norm() > CLOSE_TOL {
            return Err(Error::InvalidInput("paths do not join".into()));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        let closed = (v[0] - v[v.len() - 1]).norm() <= CLOSE_TOL;
        PathPolyline::new(v, closed)
    }

    /// Checks every vertex against the domain.
    pub fn check_in(&self, domain: &Domain) -> Result<()> {
        match self.vertices.iter().find(|&&z| !domain.contains(z)) {
            Some(&z) => Err(Error::EvaluationOutsideDomain(z)),
            None => Ok(()),
        }
    }

    /// Geometric winding number about `p`, from summed angle increments.
    /// Only meaningful for closed paths that avoid `p`.
    pub fn winding_about(&self, p: Complex64) -> i64 {
        let total: f64 = self.segments().map(|(a, b)| ((b - p) / (a - p)).arg()).sum();
        (total / TAU).round() as i64
    }
}
