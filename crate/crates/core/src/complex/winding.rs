//! Zero counting by the argument principle.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::func::HolomorphicFn;
use super::path::PathPolyline;
use super::quadrature::{integrate_scalar, QuadOptions};
use crate::error::{Error, Result};

/// Smallest admissible `|f|` on a loop.
pub const MIN_LOOP_MODULUS: f64 = 1e-10;
/// Largest admissible distance of the pre-rounding value from an integer.
pub const INTEGER_TOL: f64 = 1e-3;

fn min_modulus_on(f: &dyn Fn(Complex64) -> Complex64, lp: &PathPolyline, per_segment: usize) -> (f64, Complex64) {
    let mut best = (f64::INFINITY, lp.start());
    for (a, b) in lp.segments() {
        for k in 0..per_segment {
            let z = a + (b - a) * (k as f64 / per_segment as f64);
            let m = f(z).norm();
            if !(m >= best.0) {
                best = (m, z);
            }
        }
    }
    best
}

/// `(1/2 pi i) \oint f'/f` over a closed loop, rounded to the nearest integer.
pub fn winding_number(f: &HolomorphicFn, lp: &PathPolyline) -> Result<i64> {
    if !lp.is_closed() {
        return Err(Error::InvalidInput("winding number needs a closed loop".into()));
    }
    let (m, at) = min_modulus_on(&|z| f.eval(z), lp, 8);
    if !(m >= MIN_LOOP_MODULUS) {
        return Err(Error::ZeroOnContour(at));
    }
    let df = f.derivative_fn();
    let (value, _) = match integrate_scalar(|z| df.eval(z) / f.eval(z), lp, QuadOptions::with_tol(1e-10)) {
        Ok(v) => v,
        Err(Error::NonFinite(z)) => return Err(Error::ZeroOnContour(z)),
        Err(e) => return Err(e),
    };
    let w = value / Complex64::new(0.0, TAU);
    let rounded = w.re.round();
    if (w.re - rounded).abs() > INTEGER_TOL || w.im.abs() > INTEGER_TOL {
        return Err(Error::NonIntegerResult(w.re));
    }
    Ok(rounded as i64)
}

/// Winding of `f(loop)` about the origin by continuous argument tracking,
/// refining any step whose argument jump exceeds `pi/4`. Needs only
/// function values, so it also serves opaque evaluators.
pub fn argument_winding(f: &dyn Fn(Complex64) -> Complex64, lp: &PathPolyline) -> Result<i64> {
    if !lp.is_closed() {
        return Err(Error::InvalidInput("winding number needs a closed loop".into()));
    }
    let mut total = 0.0;
    for (a, b) in lp.segments() {
        total += arg_change(f, a, b, 0)?;
    }
    let w = total / TAU;
    let rounded = w.round();
    if (w - rounded).abs() > INTEGER_TOL {
        return Err(Error::NonIntegerResult(w));
    }
    Ok(rounded as i64)
}

fn arg_change(f: &dyn Fn(Complex64) -> Complex64, a: Complex64, b: Complex64, depth: u32) -> Result<f64> {
    let (fa, fb) = (f(a), f(b));
    for (z, v) in [(a, fa), (b, fb)] {
        if !(v.norm() >= MIN_LOOP_MODULUS) || !v.is_finite() {
            return Err(Error::ZeroOnContour(z));
        }
    }
    let step = (fb / fa).arg();
    if step.abs() <= PI / 4.0 {
        return Ok(step);
    }
    if depth >= 40 {
        return Err(Error::ZeroOnContour((a + b) * 0.5));
    }
    let m = (a + b) * 0.5;
    Ok(arg_change(f, a, m, depth + 1)? + arg_change(f, m, b, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PathPolyline {
        PathPolyline::circle(Complex64::new(0.0, 0.0), 1.0, 256)
    }

    #[test]
    fn argument_principle_examples() {
        for (src, n) in [("z^3", 3), ("(z-0.2)*(z+0.3)", 2), ("exp(z)", 0), ("1/(z-0.5)", -1)] {
            let f = HolomorphicFn::parse(src).unwrap();
            assert_eq!(winding_number(&f, &unit()).unwrap(), n, "{src}");
            assert_eq!(argument_winding(&|z| f.eval(z), &unit()).unwrap(), n, "{src}");
        }
    }

    #[test]
    fn zero_on_loop_is_reported() {
        let f = HolomorphicFn::parse("z-1").unwrap();
        assert!(matches!(winding_number(&f, &unit()), Err(Error::ZeroOnContour(_))));
        assert!(matches!(argument_winding(&|z| f.eval(z), &unit()), Err(Error::ZeroOnContour(_))));
    }

    #[test]
    fn opaque_functions_count_through_cauchy_derivatives() {
        let f = HolomorphicFn::opaque("z^2 - 0.25", |z| z * z - 0.25);
        assert_eq!(winding_number(&f, &unit()).unwrap(), 2);
    }
}
