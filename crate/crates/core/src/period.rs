//! Period maps, period-dominating spray multipliers and a damped Newton
//! solver that prescribes the complex periods (hence the flux) of a form.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::quadrature::{contour_integrate, QuadOptions, VectorForm};
use crate::complex::{Domain, Expr, FnSpec, HolomorphicFn, HomologyBasis};
use crate::error::{Error, Result};
use crate::weierstrass::{flux, FluxMap, NullForm};

/// Relative singular-value threshold for the spray rank.
pub const SPRAY_RANK_TOL: f64 = 1e-10;
/// Maximum step halvings per Newton iteration.
pub const MAX_HALVINGS: u32 = 30;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// `(h f_1, ..., h f_n)` without building the product symbolically.
struct Weighted<'a, H: Fn(Complex64) -> Complex64 + Sync> {
    form: &'a NullForm,
    h: H,
}

impl<H: Fn(Complex64) -> Complex64 + Sync> VectorForm for Weighted<'_, H> {
    fn dim(&self) -> usize {
        self.form.dim()
    }

    fn eval_into(&self, z: Complex64, out: &mut [Complex64]) {
        self.form.eval_into(z, out);
        let h = (self.h)(z);
        for o in out {
            *o *= h;
        }
    }

    fn domain(&self) -> Option<&Domain> {
        Some(self.form.domain())
    }
}

/// Column `j` is `\oint_{C_j} h f dz`.
pub fn period_map(h: &HolomorphicFn, form: &NullForm, basis: &HomologyBasis) -> Result<DMatrix<Complex64>> {
    period_map_with(|z| h.eval(z), form, basis, QuadOptions::default())
}

fn period_map_with(
    h: impl Fn(Complex64) -> Complex64 + Sync,
    form: &NullForm,
    basis: &HomologyBasis,
    opts: QuadOptions,
) -> Result<DMatrix<Complex64>> {
    let weighted = Weighted { form, h };
    let mut m = DMatrix::from_element(form.dim(), basis.len(), C0);
    for (j, cycle) in basis.cycles().iter().enumerate() {
        let p = contour_integrate(&weighted, cycle, opts)?;
        for (i, v) in p.value.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// `Xi(zeta, p) = prod_i exp(zeta_i g_i(p))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SprayMultiplier {
    generators: Vec<HolomorphicFn>,
    coefficients: Vec<Complex64>,
}

impl SprayMultiplier {
    pub fn new(generators: Vec<HolomorphicFn>) -> Self {
        let coefficients = vec![C0; generators.len()];
        SprayMultiplier { generators, coefficients }
    }

    pub fn generators(&self) -> &[HolomorphicFn] {
        &self.generators
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn with_coefficients(&self, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != self.generators.len() {
            return Err(Error::InvalidInput("one coefficient per generator required".into()));
        }
        Ok(SprayMultiplier { generators: self.generators.clone(), coefficients })
    }

    /// `Xi(zeta, p)` at the stored coefficients; exactly 1 when they vanish.
    pub fn eval(&self, p: Complex64) -> Complex64 {
        Self::eval_at(&self.generators, &self.coefficients, p)
    }

    fn eval_at(generators: &[HolomorphicFn], zeta: &[Complex64], p: Complex64) -> Complex64 {
        let mut s = C0;
        for (g, &c) in generators.iter().zip(zeta) {
            if c != C0 {
                s += c * g.eval(p);
            }
        }
        s.exp()
    }

    /// The multiplier as a function; symbolic when every generator is.
    pub fn to_fn(&self) -> HolomorphicFn {
        let exprs: Option<Vec<&Expr>> = self.generators.iter().map(|g| g.expr()).collect();
        match exprs {
            Some(exprs) => {
                let sum = exprs
                    .into_iter()
                    .zip(&self.coefficients)
                    .filter(|(_, c)| **c != C0)
                    .map(|(e, &c)| Expr::mul(Expr::constant(c), e.clone()))
                    .fold(Expr::real(0.0), Expr::add);
                HolomorphicFn::from_expr(Expr::exp(sum))
            }
            None => {
                let s = self.clone();
                HolomorphicFn::opaque("spray multiplier", move |z| s.eval(z))
            }
        }
    }
}

/// Generator families for [`build_spray`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorFamily {
    /// `z^k` for `k = -ceil(N/2) ..= floor(N/2)`; `N` defaults to `2 n l`.
    Monomials {
        #[serde(default)]
        count: Option<usize>,
    },
    /// `z^k` for `k = min ..= max`.
    Laurent { min: i32, max: i32 },
    Explicit { generators: Vec<FnSpec> },
}

impl Default for GeneratorFamily {
    fn default() -> Self {
        GeneratorFamily::Monomials { count: None }
    }
}

fn monomials(min: i32, max: i32) -> Vec<HolomorphicFn> {
    (min..=max).map(|k| HolomorphicFn::from_expr(Expr::powi(Expr::Var, k))).collect()
}

fn centered(count: usize) -> Vec<HolomorphicFn> {
    let half_up = count.div_ceil(2) as i32;
    let half_down = (count / 2) as i32;
    monomials(-half_up, half_down)
}

/// Rank of the period differential at `zeta = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct SprayReport {
    pub generators: usize,
    pub rank: usize,
    pub required: usize,
    pub singular_values: Vec<f64>,
}

/// Spray whose period differential at 0 (columns `P(g_i f)`) has full rank
/// `n l`. The default monomial family doubles its size, up to three times,
/// before giving up.
pub fn build_spray(form: &NullForm, basis: &HomologyBasis, family: &GeneratorFamily) -> Result<(SprayMultiplier, SprayReport)> {
    let required = form.dim() * basis.len();
    let mut candidates: Vec<Vec<HolomorphicFn>> = Vec::new();
    match family {
        GeneratorFamily::Monomials { count } => {
            let n0 = count.unwrap_or(2 * required).max(required);
            for k in 0..4 {
                candidates.push(centered(n0 << k));
            }
        }
        GeneratorFamily::Laurent { min, max } => {
            if max < min {
                return Err(Error::InvalidInput("empty Laurent range".into()));
            }
            candidates.push(monomials(*min, *max));
        }
        GeneratorFamily::Explicit { generators } => {
            candidates.push(generators.iter().map(FnSpec::build).collect::<Result<_>>()?);
        }
    }
    let mut last = None;
    for generators in candidates {
        let spray = SprayMultiplier::new(generators);
        let jac = jacobian(&spray, &spray.coefficients, form, basis, QuadOptions::default())?;
        let singular_values = sorted_singular_values(&jac);
        let top = singular_values.first().copied().unwrap_or(0.0);
        let rank = singular_values.iter().filter(|&&s| top > 0.0 && s > SPRAY_RANK_TOL * top).count();
        let report = SprayReport { generators: spray.len(), rank, required, singular_values };
        if rank >= required {
            return Ok((spray, report));
        }
        last = Some(report);
    }
    let report = last.expect("at least one candidate family");
    Err(Error::ConstructionFailed { rank: report.rank, required })
}

fn sorted_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Periods of `Xi f` flattened column-major (cycle by cycle), together with
/// the derivative matrix whose column `i` holds the periods of `g_i Xi f`.
fn periods_and_jacobian(
    spray: &SprayMultiplier,
    zeta: &[Complex64],
    form: &NullForm,
    basis: &HomologyBasis,
    opts: QuadOptions,
) -> Result<(DVector<Complex64>, DMatrix<Complex64>)> {
    let n = form.dim();
    let nn = spray.len();
    let stacked = Stacked { spray, zeta, form };
    let l = basis.len();
    let per_cycle = basis
        .cycles()
        .par_iter()
        .map(|c| contour_integrate(&stacked, c, opts).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let mut p = DVector::from_element(n * l, C0);
    let mut jac = DMatrix::from_element(n * l, nn, C0);
    for (j, v) in per_cycle.iter().enumerate() {
        for i in 0..n {
            p[j * n + i] = v[i];
            for g in 0..nn {
                jac[(j * n + i, g)] = v[(g + 1) * n + i];
            }
        }
    }
    Ok((p, jac))
}

fn jacobian(
    spray: &SprayMultiplier,
    zeta: &[Complex64],
    form: &NullForm,
    basis: &HomologyBasis,
    opts: QuadOptions,
) -> Result<DMatrix<Complex64>> {
    Ok(periods_and_jacobian(spray, zeta, form, basis, opts)?.1)
}

fn periods_only(
    spray: &SprayMultiplier,
    zeta: &[Complex64],
    form: &NullForm,
    basis: &HomologyBasis,
    opts: QuadOptions,
) -> Result<DVector<Complex64>> {
    let gens = &spray.generators;
    let m = period_map_with(|z| SprayMultiplier::eval_at(gens, zeta, z), form, basis, opts)?;
    Ok(DVector::from_iterator(m.len(), m.iter().copied()))
}

/// `[Xi f, g_1 Xi f, ..., g_N Xi f]` as one vector form.
struct Stacked<'a> {
    spray: &'a SprayMultiplier,
    zeta: &'a [Complex64],
    form: &'a NullForm,
}

impl VectorForm for Stacked<'_> {
    fn dim(&self) -> usize {
        self.form.dim() * (self.spray.len() + 1)
    }

    fn eval_into(&self, z: Complex64, out: &mut [Complex64]) {
        let n = self.form.dim();
        self.form.eval_into(z, &mut out[..n]);
        let xi = SprayMultiplier::eval_at(&self.spray.generators, self.zeta, z);
        for o in &mut out[..n] {
            *o *= xi;
        }
        for (k, g) in self.spray.generators.iter().enumerate() {
            let gv = g.eval(z);
            for i in 0..n {
                out[(k + 1) * n + i] = gv * out[i];
            }
        }
    }

    fn domain(&self) -> Option<&Domain> {
        Some(self.form.domain())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub quadrature: QuadOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iterations: 30, quadrature: QuadOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub residual: f64,
    pub step_norm: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub spray: SprayMultiplier,
    pub iterations: usize,
    pub residual: f64,
    pub trace: Vec<TraceRow>,
}

impl SolveOutcome {
    /// Trace as CSV: `iteration, residual, step_norm, damping`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.trace {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn flatten_target(target: &DMatrix<Complex64>, n: usize, l: usize) -> Result<DVector<Complex64>> {
    if target.nrows() != n || target.ncols() != l {
        return Err(Error::InvalidInput(format!("target must be {n}x{l}, got {}x{}", target.nrows(), target.ncols())));
    }
    Ok(DVector::from_iterator(n * l, target.iter().copied()))
}

/// Damped Newton iteration for `P(Xi(zeta, .) f) = target` with minimal-norm
/// least-squares steps.
pub fn solve_periods(
    spray: &SprayMultiplier,
    form: &NullForm,
    basis: &HomologyBasis,
    target: &DMatrix<Complex64>,
    opts: SolveOptions,
) -> Result<SolveOutcome> {
    let n = form.dim();
    let want = flatten_target(target, n, basis.len())?;
    let mut zeta = spray.coefficients.clone();
    let (mut periods, mut jac) = periods_and_jacobian(spray, &zeta, form, basis, opts.quadrature)?;
    let mut residual = (&periods - &want).norm();
    let mut trace = vec![TraceRow { iteration: 0, residual, step_norm: 0.0, damping: 0.0 }];
    let mut iteration = 0;
    while residual > opts.tol {
        if iteration >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations: iteration, residual });
        }
        iteration += 1;
        let svd = jac.clone().svd(true, true);
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        if !(top > 0.0) {
            return Err(Error::SingularJacobian);
        }
        let rank = svd.singular_values.iter().filter(|&&s| s > SPRAY_RANK_TOL * top).count();
        if rank < n * basis.len() {
            return Err(Error::SingularJacobian);
        }
        let step = svd.solve(&(&want - &periods), SPRAY_RANK_TOL * top).map_err(|_| Error::SingularJacobian)?;
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<Complex64> = zeta.iter().zip(step.iter()).map(|(z, s)| z + damping * s).collect();
            if let Ok(p) = periods_only(spray, &trial, form, basis, opts.quadrature) {
                let r = (&p - &want).norm();
                if r < residual {
                    accepted = Some((trial, r));
                    break;
                }
            }
            damping *= 0.5;
        }
        let Some((trial, r)) = accepted else {
            return Err(Error::NoConvergence { iterations: iteration, residual });
        };
        trace.push(TraceRow { iteration, residual: r, step_norm: damping * step.norm(), damping });
        zeta = trial;
        residual = r;
        if residual > opts.tol {
            (periods, jac) = periods_and_jacobian(spray, &zeta, form, basis, opts.quadrature)?;
            residual = (&periods - &want).norm();
        }
    }
    Ok(SolveOutcome { spray: spray.with_coefficients(zeta)?, iterations: iteration, residual, trace })
}

/// Outcome of [`prescribe_flux`]; `achieved` is re-measured by fresh
/// quadrature of `h f`.
#[derive(Debug, Clone, Serialize)]
pub struct FluxPrescription {
    pub outcome: SolveOutcome,
    pub report: SprayReport,
    pub target: Vec<Vec<f64>>,
    pub achieved: FluxMap,
    pub max_flux_error: f64,
}

impl FluxPrescription {
    pub fn multiplier(&self) -> HolomorphicFn {
        self.outcome.spray.to_fn()
    }
}

/// Finds `h = Xi(zeta, .)` with `\oint_{C_j} h f = i F(C_j)` on every basis
/// cycle, so that `h f` has flux `F` and no real periods.
pub fn prescribe_flux(
    form: &NullForm,
    basis: &HomologyBasis,
    target_flux: &[Vec<f64>],
    family: &GeneratorFamily,
    opts: SolveOptions,
) -> Result<FluxPrescription> {
    let n = form.dim();
    if target_flux.len() != basis.len() || target_flux.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidInput(format!("flux target needs {} vectors of length {n}", basis.len())));
    }
    let target = DMatrix::from_fn(n, basis.len(), |i, j| Complex64::new(0.0, target_flux[j][i]));
    let (spray, report) = build_spray(form, basis, family)?;
    let outcome = solve_periods(&spray, form, basis, &target, opts)?;
    let modified = form.multiply(&outcome.spray.to_fn());
    let achieved = flux(&modified, basis)?;
    let max_flux_error = achieved
        .values
        .iter()
        .zip(target_flux)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    Ok(FluxPrescription { outcome, report, target: target_flux.to_vec(), achieved, max_flux_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_mesh;
    use crate::weierstrass::{assemble_null_form, integrate_immersion, validate_null, WeierstrassPair};
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn catenoid() -> (NullForm, HomologyBasis) {
        let domain = Domain::annulus(0.5, 2.0).unwrap();
        let form = assemble_null_form(&WeierstrassPair::parse("z", "1/z").unwrap(), &domain).unwrap();
        let basis = HomologyBasis::new(&domain, vec![crate::complex::PathPolyline::circle(c(0.0, 0.0), 1.0, 512)]).unwrap();
        (form, basis)
    }

    #[test]
    fn period_map_examples() {
        let (form, basis) = catenoid();
        let p = period_map(&HolomorphicFn::constant(c(1.0, 0.0)), &form, &basis).unwrap();
        for (v, w) in p.column(0).iter().zip([c(0.0, 0.0), c(0.0, 0.0), c(0.0, TAU)]) {
            assert!((v - w).norm() < 1e-10);
        }
        let synthetic = NullForm::parse(&["0", "0", "z^-2"], form.domain().clone()).unwrap();
        let p = period_map(&HolomorphicFn::identity(), &synthetic, &basis).unwrap();
        assert!((p[(2, 0)] - c(0.0, TAU)).norm() < 1e-10);
        let disc = Domain::disc(1.0).unwrap();
        let empty = HomologyBasis::standard(&disc).unwrap();
        let plane = NullForm::parse(&["0", "i", "1"], disc).unwrap();
        assert_eq!(period_map(&HolomorphicFn::identity(), &plane, &empty).unwrap().ncols(), 0);
    }

    #[test]
    fn spray_columns_match_residue_oracle() {
        let (form, basis) = catenoid();
        let family = GeneratorFamily::Laurent { min: -2, max: 3 };
        let (spray, report) = build_spray(&form, &basis, &family).unwrap();
        assert_eq!(report.rank, 3);
        let jac = jacobian(&spray, spray.coefficients(), &form, &basis, QuadOptions::default()).unwrap();
        // oracle: residues of z^k f; k=-1 -> (-pi i, -pi, 0), k=0 -> (0,0,2 pi i), k=1 -> (pi i, -pi, 0)
        let expect = [(1, [c(0.0, -PI), c(-PI, 0.0), c(0.0, 0.0)]), (2, [c(0.0, 0.0), c(0.0, 0.0), c(0.0, TAU)]), (3, [c(0.0, PI), c(-PI, 0.0), c(0.0, 0.0)])];
        for (col, want) in expect {
            for i in 0..3 {
                assert!((jac[(i, col)] - want[i]).norm() < 1e-9, "{col} {i}: {}", jac[(i, col)]);
            }
        }
    }

    #[test]
    fn constant_generators_fail() {
        let (form, basis) = catenoid();
        let family = GeneratorFamily::Explicit { generators: vec![FnSpec::Text("1".into()); 4] };
        assert!(matches!(build_spray(&form, &basis, &family), Err(Error::ConstructionFailed { rank: 1, required: 3 })));
        let disc = Domain::disc(1.0).unwrap();
        let plane = NullForm::parse(&["0", "i", "1"], disc.clone()).unwrap();
        let (_, r) = build_spray(&plane, &HomologyBasis::standard(&disc).unwrap(), &GeneratorFamily::default()).unwrap();
        assert_eq!((r.rank, r.required), (0, 0));
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let (form, basis) = catenoid();
        let (spray, _) = build_spray(&form, &basis, &GeneratorFamily::default()).unwrap();
        let opts = QuadOptions::default();
        let jac = jacobian(&spray, spray.coefficients(), &form, &basis, opts).unwrap();
        let h = 1e-5;
        for i in 0..spray.len() {
            let mut plus = vec![C0; spray.len()];
            let mut minus = plus.clone();
            plus[i] = c(h, 0.0);
            minus[i] = c(-h, 0.0);
            let fd = (periods_only(&spray, &plus, &form, &basis, opts).unwrap() - periods_only(&spray, &minus, &form, &basis, opts).unwrap()) / c(2.0 * h, 0.0);
            let col = jac.column(i);
            assert!((fd - col).norm() <= 1e-6 * col.norm().max(1.0), "generator {i}");
        }
    }

    #[test]
    fn identity_target_needs_no_iterations() {
        let (form, basis) = catenoid();
        let (spray, _) = build_spray(&form, &basis, &GeneratorFamily::default()).unwrap();
        let target = period_map(&HolomorphicFn::constant(c(1.0, 0.0)), &form, &basis).unwrap();
        let out = solve_periods(&spray, &form, &basis, &target, SolveOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.spray.coefficients().iter().all(|z| *z == C0));
        assert_eq!(out.spray.eval(c(0.3, 1.1)), c(1.0, 0.0));
    }

    #[test]
    fn nearby_target_converges() {
        let (form, basis) = catenoid();
        let (spray, _) = build_spray(&form, &basis, &GeneratorFamily::default()).unwrap();
        let target = DMatrix::from_column_slice(3, 1, &[C0, C0, c(0.0, TAU * 1.05)]);
        let out = solve_periods(&spray, &form, &basis, &target, SolveOptions::default()).unwrap();
        let h = out.spray.to_fn();
        let fresh = period_map(&h, &form, &basis).unwrap();
        assert!((fresh - target).norm() < 1e-8);
        let modified = form.multiply(&h);
        assert!(validate_null(&modified, 500).pass);
    }

    #[test]
    fn unreachable_target_reports_no_convergence() {
        let (form, basis) = catenoid();
        let (spray, _) = build_spray(&form, &basis, &GeneratorFamily::default()).unwrap();
        let target = DMatrix::from_column_slice(3, 1, &[c(1e6, 0.0), C0, C0]);
        let quadrature = QuadOptions { max_evals: 100_000, ..Default::default() };
        let opts = SolveOptions { max_iterations: 3, quadrature, ..Default::default() };
        assert!(matches!(solve_periods(&spray, &form, &basis, &target, opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn flux_prescription_end_to_end() {
        let (form, basis) = catenoid();
        let fam = GeneratorFamily::default();
        let same = prescribe_flux(&form, &basis, &[vec![0.0, 0.0, TAU]], &fam, SolveOptions::default()).unwrap();
        assert_eq!(same.outcome.iterations, 0);
        for target in [vec![0.0, 0.0, TAU + 1.0], vec![1.0, 0.0, TAU]] {
            let r = prescribe_flux(&form, &basis, std::slice::from_ref(&target), &fam, SolveOptions::default()).unwrap();
            assert!(r.max_flux_error < 1e-8, "{target:?}: {:?}", r.achieved.values);
            let modified = form.multiply(&r.multiplier());
            let mesh = build_mesh(form.domain(), 0.1).unwrap();
            integrate_immersion(&modified, c(1.0, 0.0), &[0.0; 3], &mesh, &basis).unwrap();
        }
    }
}
