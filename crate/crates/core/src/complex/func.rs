use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::expr::Expr;
use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Number of trapezoid nodes on the Cauchy circle used for derivative
/// estimates of opaque functions.
const CAUCHY_NODES: usize = 64;
/// Upper cap on the Cauchy probe radius.
pub const MAX_PROBE_RADIUS: f64 = 0.1;
/// Probe radii below this are refused as too close to the boundary.
pub const MIN_PROBE_RADIUS: f64 = 1e-6;

/// A holomorphic (or meromorphic) function of the coordinate `z`.
///
/// Either a closed-form expression tree, whose derivative is symbolic, or an
/// opaque evaluator with an optional closed-form derivative.
#[derive(Clone)]
pub struct HolomorphicFn {
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    Expr { expr: Expr, derivative: Arc<Expr> },
    Opaque { label: String, eval: Evaluator, derivative: Option<Evaluator> },
}

impl HolomorphicFn {
    pub fn from_expr(expr: Expr) -> Self {
        let derivative = Arc::new(expr.derivative());
        HolomorphicFn { repr: Repr::Expr { expr, derivative } }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::from_expr(Expr::parse(src)?))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_expr(Expr::constant(c))
    }

    pub fn identity() -> Self {
        Self::from_expr(Expr::Var)
    }

    pub fn opaque<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        HolomorphicFn { repr: Repr::Opaque { label: label.into(), eval: Arc::new(f), derivative: None } }
    }

    pub fn opaque_with_derivative<F, D>(label: impl Into<String>, f: F, df: D) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        D: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        HolomorphicFn {
            repr: Repr::Opaque { label: label.into(), eval: Arc::new(f), derivative: Some(Arc::new(df)) },
        }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.repr {
            Repr::Expr { expr, .. } => expr.eval(z),
            Repr::Opaque { eval, .. } => eval(z),
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.repr {
            Repr::Expr { expr, .. } => Some(expr),
            Repr::Opaque { .. } => None,
        }
    }

    pub fn has_closed_derivative(&self) -> bool {
        match &self.repr {
            Repr::Expr { .. } => true,
            Repr::Opaque { derivative, .. } => derivative.is_some(),
        }
    }

    /// Closed-form derivative value, if one is available.
    pub fn closed_derivative(&self, z: Complex64) -> Option<Complex64> {
        match &self.repr {
            Repr::Expr { derivative, .. } => Some(derivative.eval(z)),
            Repr::Opaque { derivative, .. } => derivative.as_ref().map(|d| d(z)),
        }
    }

    /// The derivative as a function in its own right. Opaque functions
    /// without a closed derivative fall back to Cauchy estimates with a fixed
    /// probe radius.
    pub fn derivative_fn(&self) -> HolomorphicFn {
        match &self.repr {
            Repr::Expr { derivative, .. } => HolomorphicFn::from_expr((**derivative).clone()),
            Repr::Opaque { label, eval, derivative } => match derivative {
                Some(d) => {
                    let d = d.clone();
                    HolomorphicFn::opaque(format!("d/dz {label}"), move |z| d(z))
                }
                None => {
                    let f = eval.clone();
                    HolomorphicFn::opaque(format!("d/dz {label}"), move |z| {
                        cauchy_derivative(&*f, z, MAX_PROBE_RADIUS)
                    })
                }
            },
        }
    }

    pub fn label(&self) -> String {
        match &self.repr {
            Repr::Expr { expr, .. } => expr.to_string(),
            Repr::Opaque { label, .. } => label.clone(),
        }
    }

    /// Pointwise product; expression trees stay symbolic and cancel factors.
    pub fn mul(&self, other: &HolomorphicFn) -> HolomorphicFn {
        match (self.expr(), other.expr()) {
            (Some(a), Some(b)) => HolomorphicFn::from_expr(Expr::mul(a.clone(), b.clone())),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                HolomorphicFn::opaque(format!("({})*({})", a.label(), b.label()), move |z| a.eval(z) * b.eval(z))
            }
        }
    }

    pub fn scale(&self, c: Complex64) -> HolomorphicFn {
        self.mul(&HolomorphicFn::constant(c))
    }

    /// Cauchy–Riemann residual from complex-step probes: the difference of the
    /// real-direction and imaginary-direction difference quotients, relative
    /// to the local magnitude.
    pub fn cauchy_riemann_residual(&self, z: Complex64, step: f64) -> f64 {
        let dx = (self.eval(z + step) - self.eval(z - step)) / (2.0 * step);
        let dy = (self.eval(z + Complex64::new(0.0, step)) - self.eval(z - Complex64::new(0.0, step)))
            / Complex64::new(0.0, 2.0 * step);
        let scale = self.eval(z).norm().max(dx.norm()).max(f64::MIN_POSITIVE);
        (dx - dy).norm() / scale
    }
}

impl fmt::Debug for HolomorphicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HolomorphicFn({})", self.label())
    }
}

impl Serialize for HolomorphicFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.expr() {
            Some(e) => e.serialize(s),
            None => Err(serde::ser::Error::custom(format!("opaque function `{}` has no expression tree", self.label()))),
        }
    }
}

impl<'de> Deserialize<'de> for HolomorphicFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        FnSpec::deserialize(d)?.build().map_err(serde::de::Error::custom)
    }
}

impl From<Expr> for HolomorphicFn {
    fn from(e: Expr) -> Self {
        HolomorphicFn::from_expr(e)
    }
}

/// Serialized form: either infix text or a JSON expression tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FnSpec {
    Text(String),
    Tree(Expr),
    Table(TableSpec),
}

/// Tabulated Taylor coefficients `a_k` of `sum a_k z^k`, optionally
/// exponentiated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub coefficients: Vec<[f64; 2]>,
    #[serde(default)]
    pub exponentiate: bool,
}

impl FnSpec {
    pub fn build(&self) -> Result<HolomorphicFn> {
        match self {
            FnSpec::Text(s) => HolomorphicFn::parse(s),
            FnSpec::Tree(e) => {
                if !e.is_finite() {
                    return Err(Error::InvalidInput("non-finite constant in expression".into()));
                }
                Ok(HolomorphicFn::from_expr(e.clone()))
            }
            FnSpec::Table(t) => {
                if t.coefficients.is_empty() || t.coefficients.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("table coefficients must be finite and non-empty".into()));
                }
                let poly = t
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, c)| Expr::mul(Expr::constant(Complex64::new(c[0], c[1])), Expr::powi(Expr::Var, k as i32)))
                    .fold(Expr::real(0.0), Expr::add);
                Ok(HolomorphicFn::from_expr(if t.exponentiate { Expr::exp(poly) } else { poly }))
            }
        }
    }
}

/// Derivative by the Cauchy integral formula on a circle of radius `r`,
/// discretized with the periodic trapezoid rule.
pub fn cauchy_derivative(f: &dyn Fn(Complex64) -> Complex64, z: Complex64, r: f64) -> Complex64 {
    let n = CAUCHY_NODES;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
        acc += f(z + r * w) * w.conj();
    }
    acc / (n as f64 * r)
}

/// Derivative of `f` at `p`: the closed form when available, otherwise a
/// Cauchy-integral estimate with probe radius half the distance to the
/// boundary, capped at [`MAX_PROBE_RADIUS`].
pub fn derivative_at(f: &HolomorphicFn, p: Complex64, domain: Option<&Domain>) -> Result<Complex64> {
    if let Some(d) = domain {
        if !d.contains(p) {
            return Err(Error::EvaluationOutsideDomain(p));
        }
    }
    if let Some(v) = f.closed_derivative(p) {
        return Ok(v);
    }
    let dist = domain.map_or(f64::INFINITY, |d| d.distance_to_boundary(p));
    let r = (0.5 * dist).min(MAX_PROBE_RADIUS);
    if r < MIN_PROBE_RADIUS {
        return Err(Error::TooCloseToBoundary { point: p, distance: dist });
    }
    Ok(cauchy_derivative(&|z| f.eval(z), p, r))
}
