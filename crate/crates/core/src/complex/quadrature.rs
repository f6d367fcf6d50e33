//! Adaptive Gauss–Kronrod (7/15) quadrature of vector-valued holomorphic
//! one-forms `f(z) dz` along polylines.
//!
//! Each segment is bisected recursively until the Kronrod/Gauss difference
//! falls below the tolerance share proportional to the sub-segment length.
//! Node placement is symmetric about segment midpoints and partial sums are
//! combined order-independently, so reversing a path negates the result
//! bit for bit.

use num_complex::Complex64;

use super::domain::Domain;
use super::path::PathPolyline;
use super::sampling::ExactSum;
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Default absolute tolerance per component.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Maximum bisection depth per polyline segment.
pub const DEFAULT_MAX_DEPTH: u32 = 48;
/// Default evaluation budget per integral.
pub const DEFAULT_MAX_EVALS: usize = 2_000_000;

/// A vector of holomorphic coefficients against `dz`.
pub trait VectorForm: Sync {
    fn dim(&self) -> usize;

    fn eval_into(&self, z: Complex64, out: &mut [Complex64]);

    /// Domain on which the coefficients may be evaluated, if restricted.
    fn domain(&self) -> Option<&Domain> {
        None
    }
}

/// Adapter turning a closure into a [`VectorForm`].
pub struct FnForm<F> {
    dim: usize,
    f: F,
    domain: Option<Domain>,
}

impl<F> FnForm<F>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnForm { dim, f, domain: None }
    }

    pub fn on(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }
}

impl<F> VectorForm for FnForm<F>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, z: Complex64, out: &mut [Complex64]) {
        (self.f)(z, out)
    }

    fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }
}

/// Scalar form `f(z) dz` from a plain closure.
pub fn scalar_form<F>(f: F) -> FnForm<impl Fn(Complex64, &mut [Complex64]) + Sync>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    FnForm::new(1, move |z, out: &mut [Complex64]| out[0] = f(z))
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_depth: u32,
    /// Total form evaluations allowed for one integral.
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tol: DEFAULT_TOL, max_depth: DEFAULT_MAX_DEPTH, max_evals: DEFAULT_MAX_EVALS }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { tol, ..Default::default() }
    }
}

/// Integral value with its estimated absolute error (largest over
/// components) and the number of form evaluations spent.
#[derive(Debug, Clone)]
pub struct Integral {
    pub value: Vec<Complex64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    value: Vec<Complex64>,
    error: Vec<f64>,
}

struct Ctx<'a, F: VectorForm + ?Sized> {
    form: &'a F,
    domain: Option<&'a Domain>,
    /// Tolerance per unit path length.
    density: f64,
    max_depth: u32,
    max_evals: usize,
    evals: usize,
    scratch: Vec<Complex64>,
}

impl<F: VectorForm + ?Sized> Ctx<'_, F> {
    fn eval(&mut self, z: Complex64, out: &mut [Complex64]) -> Result<()> {
        if let Some(d) = self.domain {
            if !d.contains(z) {
                return Err(Error::EvaluationOutsideDomain(z));
            }
        }
        self.form.eval_into(z, out);
        self.evals += 1;
        if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(z));
        }
        Ok(())
    }

    /// One Kronrod panel on the segment with midpoint `mid` and half-vector `half`.
    fn panel(&mut self, mid: Complex64, half: Complex64) -> Result<(Piece, f64)> {
        let n = self.form.dim();
        let mut kron = vec![Complex64::new(0.0, 0.0); n];
        let mut gauss = vec![Complex64::new(0.0, 0.0); n];
        let mut abs_sum = vec![0.0; n];
        let mut fp = vec![Complex64::new(0.0, 0.0); n];
        let mut fm = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.resize(n, Complex64::new(0.0, 0.0));
        for k in 0..7 {
            let dz = half * XGK[k];
            self.eval(mid + dz, &mut fp)?;
            self.eval(mid - dz, &mut fm)?;
            for c in 0..n {
                let pair = fp[c] + fm[c];
                kron[c] += pair * WGK[k];
                abs_sum[c] += WGK[k] * (fp[c].norm() + fm[c].norm());
                if k % 2 == 1 {
                    gauss[c] += pair * WG[k / 2];
                }
            }
        }
        self.eval(mid, &mut scratch)?;
        for c in 0..n {
            kron[c] += scratch[c] * WGK[7];
            gauss[c] += scratch[c] * WG[3];
            abs_sum[c] += WGK[7] * scratch[c].norm();
        }
        self.scratch = scratch;
        let mut error = vec![0.0; n];
        let mut floor: f64 = 0.0;
        for c in 0..n {
            kron[c] *= half;
            gauss[c] *= half;
            error[c] = (kron[c] - gauss[c]).norm();
            floor = floor.max(50.0 * f64::EPSILON * abs_sum[c] * half.norm());
        }
        Ok((Piece { value: kron, error }, floor))
    }

    fn adapt(&mut self, a: Complex64, b: Complex64, depth: u32) -> Result<Piece> {
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        let (piece, floor) = self.panel(mid, half)?;
        let allowed = (self.density * 2.0 * half.norm()).max(floor);
        let worst = piece.error.iter().cloned().fold(0.0, f64::max);
        if worst <= allowed {
            return Ok(piece);
        }
        if depth >= self.max_depth || self.evals >= self.max_evals {
            return Err(Error::NonConvergent { estimate: worst, tol: allowed });
        }
        let left = self.adapt(a, mid, depth + 1)?;
        let right = self.adapt(mid, b, depth + 1)?;
        Ok(Piece {
            value: left.value.iter().zip(&right.value).map(|(l, r)| l + r).collect(),
            error: left.error.iter().zip(&right.error).map(|(l, r)| l + r).collect(),
        })
    }
}

/// Integral of `form` along `path` with estimated absolute error at most
/// `opts.tol` per component.
pub fn contour_integrate<F: VectorForm + ?Sized>(form: &F, path: &PathPolyline, opts: QuadOptions) -> Result<Integral> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
    }
    let n = form.dim();
    let total = path.length();
    let mut ctx = Ctx {
        form,
        domain: form.domain(),
        density: if total > 0.0 { opts.tol / total } else { opts.tol },
        max_depth: opts.max_depth,
        max_evals: opts.max_evals,
        evals: 0,
        scratch: Vec::new(),
    };
    let mut re: Vec<ExactSum> = vec![ExactSum::new(); n];
    let mut im: Vec<ExactSum> = vec![ExactSum::new(); n];
    let mut err = vec![ExactSum::new(); n];
    for (a, b) in path.segments() {
        if a == b {
            continue;
        }
        let piece = ctx.adapt(a, b, 0)?;
        for c in 0..n {
            re[c].add(piece.value[c].re);
            im[c].add(piece.value[c].im);
            err[c].add(piece.error[c]);
        }
    }
    let value = (0..n).map(|c| Complex64::new(re[c].value(), im[c].value())).collect();
    let error = err.iter().map(ExactSum::value).fold(0.0, f64::max);
    Ok(Integral { value, error, evaluations: ctx.evals })
}

/// Integral of a scalar function along a polyline.
pub fn integrate_scalar(f: impl Fn(Complex64) -> Complex64 + Sync, path: &PathPolyline, opts: QuadOptions) -> Result<(Complex64, f64)> {
    let form = scalar_form(f);
    let r = contour_integrate(&form, path, opts)?;
    Ok((r.value[0], r.error))
}

/// Integral of a real function over `[a, b]`.
pub fn integrate_real(f: impl Fn(f64) -> f64 + Sync, a: f64, b: f64, opts: QuadOptions) -> Result<(f64, f64)> {
    let path = PathPolyline::segment(Complex64::new(a, 0.0), Complex64::new(b, 0.0));
    let (v, e) = integrate_scalar(|z| Complex64::new(f(z.re), 0.0), &path, opts)?;
    Ok((v.re, e))
}
