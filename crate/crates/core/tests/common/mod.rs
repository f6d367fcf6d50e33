//! Property checks shared by the proptest suite and the acceptance runner.
//! Each returns the size of the violation, or an error message.

#![allow(dead_code)]

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use weierstrass_lab::complex::{build_mesh, build_mesh_level, contour_integrate, Domain, Expr, HolomorphicFn, HomologyBasis, Mesh, PathPolyline, QuadOptions};
use weierstrass_lab::geometry::osserman_quantity;
use weierstrass_lab::projective::fs_distance_raw;
use weierstrass_lab::weierstrass::{assemble_null_form, gauss_map, integrate_immersion, NullForm, WeierstrassPair};

pub const FS_TOL: f64 = 1e-12;
pub const HOMOTHETY_TOL: f64 = 1e-10;
/// Gauss maps of `c Phi` and `Phi` agree to rounding of the normalization.
pub const GAUSS_TOL: f64 = 1e-15;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complex_in(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

pub fn triple() -> impl Strategy<Value = [[Complex64; 3]; 3]> {
    prop::array::uniform3(prop::array::uniform3(complex_in(2.0)))
}

/// Largest violation of `d(x,x) = 0`, symmetry, and the triangle
/// inequality in every arrangement.
pub fn fs_axiom_violation(p: &[[Complex64; 3]; 3]) -> f64 {
    let d = |a: usize, b: usize| fs_distance_raw(&p[a], &p[b]);
    let mut worst = 0.0f64;
    for a in 0..3 {
        worst = worst.max(d(a, a));
        for b in 0..3 {
            worst = worst.max((d(a, b) - d(b, a)).abs());
            worst = worst.max(-d(a, b));
            for m in 0..3 {
                worst = worst.max(d(a, b) - d(a, m) - d(m, b));
            }
        }
    }
    worst
}

/// Points with rational coordinates `p/q`, kept away from the unit circle.
pub fn rational_factor() -> impl Strategy<Value = (Complex64, i32)> {
    (-30i32..=30, 1i32..=12, -30i32..=30, 1i32..=12, prop_oneof![-2i32..=-1, 1i32..=2])
        .prop_map(|(a, b, p, q, e)| (c(f64::from(a) / f64::from(b), f64::from(p) / f64::from(q)), e))
        .prop_filter("away from the unit circle", |(z, _)| (z.norm() - 1.0).abs() > 0.05)
}

pub fn rational(factors: &[(Complex64, i32)]) -> HolomorphicFn {
    let e = factors
        .iter()
        .map(|&(a, k)| Expr::powi(Expr::sub(Expr::Var, Expr::constant(a)), k))
        .fold(Expr::real(1.0), Expr::mul);
    HolomorphicFn::from_expr(e)
}

/// Zeros minus poles inside the unit disc, counted from the factors.
pub fn inside_count(factors: &[(Complex64, i32)]) -> i64 {
    factors.iter().filter(|(a, _)| a.norm() < 1.0).map(|&(_, k)| i64::from(k)).sum()
}

/// `(wn f, wn g, wn fg)` on the unit circle, checked against the factor
/// count and additivity.
pub fn winding_additivity(f: &[(Complex64, i32)], g: &[(Complex64, i32)]) -> Result<(), String> {
    let unit = PathPolyline::circle(c(0.0, 0.0), 1.0, 1024);
    let wn = |fs: &[(Complex64, i32)]| weierstrass_lab::complex::winding_number(&rational(fs), &unit).map_err(|e| e.to_string());
    let both: Vec<_> = f.iter().chain(g).copied().collect();
    let (a, b, ab) = (wn(f)?, wn(g)?, wn(&both)?);
    if a != inside_count(f) || b != inside_count(g) || ab != a + b {
        return Err(format!("wn f = {a}, wn g = {b}, wn fg = {ab}; expected {} and {}", inside_count(f), inside_count(g)));
    }
    Ok(())
}

pub struct Catenoid {
    pub domain: Domain,
    pub pair: WeierstrassPair,
    pub form: NullForm,
    pub basis: HomologyBasis,
    pub mesh: Mesh,
    pub levels: Vec<Mesh>,
}

pub fn catenoid() -> &'static Catenoid {
    static CELL: OnceLock<Catenoid> = OnceLock::new();
    CELL.get_or_init(|| {
        let domain = Domain::annulus(0.5, 2.0).unwrap();
        let pair = WeierstrassPair::parse("z", "1/z").unwrap();
        let form = assemble_null_form(&pair, &domain).unwrap();
        let basis = HomologyBasis::standard(&domain).unwrap();
        let mesh = build_mesh(&domain, 0.1).unwrap();
        let levels = (0..2).map(|k| build_mesh_level(&domain, 0.2, k).unwrap()).collect();
        Catenoid { domain, pair, form, basis, mesh, levels }
    })
}

pub fn annulus_point() -> impl Strategy<Value = Complex64> {
    (0.7f64..1.5, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// Distance between the Gauss maps of `s Phi` and `Phi` at `p`.
pub fn gauss_homothety(s: f64, p: Complex64) -> Result<f64, String> {
    let cat = catenoid();
    let a = gauss_map(&cat.form, p).map_err(|e| e.to_string())?;
    let b = gauss_map(&cat.form.scale(c(s, 0.0)), p).map_err(|e| e.to_string())?;
    Ok(a.max_difference(&b))
}

/// Translating `x0` by `v` moves every value of the immersion by `v` and
/// leaves the Gauss map untouched. Returns the largest deviation.
pub fn gauss_translation(v: [f64; 3], p: Complex64) -> Result<f64, String> {
    let cat = catenoid();
    let p0 = c(1.0, 0.0);
    let a = integrate_immersion(&cat.form, p0, &[0.0; 3], &cat.mesh, &cat.basis).map_err(|e| e.to_string())?;
    let b = integrate_immersion(&cat.form, p0, &v, &cat.mesh, &cat.basis).map_err(|e| e.to_string())?;
    let (ua, ub) = (a.eval(p).map_err(|e| e.to_string())?, b.eval(p).map_err(|e| e.to_string())?);
    let shift = ua.iter().zip(&ub).zip(v).map(|((x, y), t)| (y - x - t).abs()).fold(0.0, f64::max);
    let ga = gauss_map(a.form(), p).map_err(|e| e.to_string())?;
    let gb = gauss_map(b.form(), p).map_err(|e| e.to_string())?;
    Ok(shift.max(ga.max_difference(&gb)))
}

/// Relative change of `|K| d^2` under `phi3 -> s phi3`, which scales the
/// surface by `s`.
pub fn osserman_homothety(s: f64, p: Complex64) -> Result<f64, String> {
    let cat = catenoid();
    let scaled = WeierstrassPair::parse("z", &format!("{s}/z")).map_err(|e| e.to_string())?;
    let form = assemble_null_form(&scaled, &cat.domain).map_err(|e| e.to_string())?;
    let a = osserman_quantity("1", &cat.pair, &cat.form, p, &cat.levels).map_err(|e| e.to_string())?;
    let b = osserman_quantity("s", &scaled, &form, p, &cat.levels).map_err(|e| e.to_string())?;
    Ok(((a.product - b.product) / a.product).abs().max(((a.product_lower - b.product_lower) / a.product_lower).abs()))
}

/// A wiggly loop `r(t) = r0 (1 + a sin(k t + phase))` about the origin.
pub fn wiggly_loop(r0: f64, a: f64, k: u32, phase: f64) -> PathPolyline {
    let n = 1024;
    let pts = (0..=n)
        .map(|m| {
            let t = std::f64::consts::TAU * m as f64 / n as f64;
            Complex64::from_polar(r0 * (1.0 + a * (f64::from(k) * t + phase).sin()), t)
        })
        .collect();
    PathPolyline::new(pts, true).unwrap()
}

pub fn loop_params() -> impl Strategy<Value = (f64, f64, u32, f64)> {
    (0.7f64..1.4, 0.0f64..0.2, 1u32..8, 0.0f64..std::f64::consts::TAU)
}

/// Largest difference between `\oint Phi` over a homotopic loop and over
/// the standard cycle, and the quadrature tolerance used.
pub fn flux_homotopy(form: &NullForm, params: (f64, f64, u32, f64)) -> Result<(f64, f64), String> {
    let opts = QuadOptions::default();
    let cat = catenoid();
    let reference = contour_integrate(form, &cat.basis.cycles()[0], opts).map_err(|e| e.to_string())?;
    let (r0, a, k, phase) = params;
    let lp = wiggly_loop(r0, a, k, phase);
    let moved = contour_integrate(form, &lp, opts).map_err(|e| e.to_string())?;
    let diff = reference.value.iter().zip(&moved.value).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok((diff, opts.tol))
}

/// The annulus member `g = exp(-z^2)`, `phi3 = z^-4`, whose periods vanish.
pub fn exact_family_form() -> &'static NullForm {
    static CELL: OnceLock<NullForm> = OnceLock::new();
    CELL.get_or_init(|| {
        let pair = WeierstrassPair::parse("exp(-z^2)", "z^-4").unwrap();
        assemble_null_form(&pair, &Domain::annulus(0.5, 2.0).unwrap()).unwrap()
    })
}
