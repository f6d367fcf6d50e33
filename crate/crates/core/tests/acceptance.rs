//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! ```text
//! cargo test --test acceptance
//! ```

mod common;

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use weierstrass_lab::complex::{contour_integrate, Domain, HolomorphicFn, HomologyBasis, QuadOptions};
use weierstrass_lab::period::{prescribe_flux, GeneratorFamily, SolveOptions};
use weierstrass_lab::projective::{divisor_multiplier, gauge_align, CompactL, Divisor, GaugeCase, GaugeOptions};
use weierstrass_lab::scenario::{builtin_forms, evaluate, ScenarioConfig, ScenarioReport};
use weierstrass_lab::weierstrass::{assemble_null_form, validate_null, WeierstrassPair, NULLITY_TOL};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario(name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> Result<ScenarioReport, String> {
    let mut v = ScenarioConfig::default_for(name).map_err(|e| e.to_string())?.to_value();
    edit(&mut v);
    evaluate(&ScenarioConfig::from_value(v).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn require(report: &ScenarioReport, names: &[&str]) -> Result<(), String> {
    for name in names {
        let c = report.check(name).ok_or(format!("check {name} missing"))?;
        if !c.pass {
            return Err(format!("{name}: {:e} {} {:e} fails", c.value, c.relation, c.tolerance));
        }
    }
    Ok(())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, t: Duration) -> Result<(), String> {
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn catenoid_flux() -> Outcome {
    let t = Instant::now();
    let r = scenario("catenoid", |_| {})?;
    within(Duration::from_secs(5), t.elapsed())?;
    require(&r, &["flux", "flux_real"])?;
    // residues of (1/z^2 - 1)/2, i(1/z^2 + 1)/2 and 1/z at the origin
    let oracle = [0.0, 0.0, TAU];
    let table = r.table("flux").ok_or("flux table missing")?;
    let err = (0..3).map(|k| (table.num(0, &format!("F{}", k + 1)).unwrap_or(f64::NAN) - oracle[k]).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-8, || format!("flux error {err:e}"))?;
    Ok(format!("max error {err:.1e}"))
}

fn helicoid() -> Outcome {
    let t = Instant::now();
    let r = scenario("helicoid_wedge", |_| {})?;
    within(Duration::from_secs(60), t.elapsed())?;
    require(&r, &["curvature", "distance_bound", "distance_increasing"])?;
    let probes = r.table("probes").ok_or("probes table missing")?;
    let ts = probes.column_values("t");
    ensure(ts == [0.5, 1.0, 2.0, 4.0], || format!("heights {ts:?}"))?;
    let ks = probes.column_values("K");
    let kerr = ks.iter().map(|k| (k + 1.0).abs()).fold(0.0, f64::max);
    ensure(kerr <= 1e-6, || format!("K error {kerr:e}"))?;
    let ds = probes.column_values("d");
    let ratio = ds.iter().zip(&ts).map(|(d, t)| d / t).fold(f64::INFINITY, f64::min);
    ensure(ratio >= 0.95, || format!("min d/t {ratio}"))?;
    ensure(ds.windows(2).all(|w| w[1] > w[0]), || format!("d not increasing: {ds:?}"))?;
    Ok(format!("|K + 1| <= {kerr:.1e}, min d/t {ratio:.4}"))
}

fn nullity() -> Outcome {
    let forms = builtin_forms().map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (name, form) in &forms {
        let r = validate_null(form, 10_000);
        ensure(r.samples >= 10_000 && r.pass, || format!("{name}: {r:?}"))?;
        worst = worst.max(r.max_residual);
    }
    ensure(worst <= NULLITY_TOL, || format!("residual {worst:e}"))?;
    Ok(format!("{} forms, max residual {worst:.1e}", forms.len()))
}

fn curvature() -> Outcome {
    let r = scenario("catenoid", |v| {
        v["curvature"]["mesh_h"] = 0.01.into();
        v["curvature"]["fan_h"] = 0.01.into();
    })?;
    require(&r, &["angle_defect_curvature"])?;
    let worst = r.table("curvature").ok_or("curvature table missing")?.column_values("rel_error").into_iter().fold(0.0, f64::max);
    ensure(worst <= 0.02, || format!("relative error {worst}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn family() -> Outcome {
    let t = Instant::now();
    let r = scenario("annulus_family", |_| {})?;
    within(Duration::from_secs(300), t.elapsed())?;
    require(&r, &["even_periods", "even_members_exact", "curvature", "distance_bound", "product_increasing", "final_product"])?;
    let profile = r.table("profile").ok_or("profile table missing")?;
    // |K(1)| for g = exp(-z^2) via G = exp(z^2), G' = 2 z G at z = 1
    let e2 = 1f64.exp().powi(2);
    let a = 16.0 * e2 * 4.0 * e2 / (1.0 + e2).powi(4);
    let mut last = 0.0;
    for row in 0..profile.rows.len() {
        let j = profile.num(row, "j").unwrap_or(f64::NAN);
        if j as u32 % 2 == 1 {
            continue;
        }
        let k = profile.num(row, "K").unwrap_or(f64::NAN).abs();
        ensure((k - a).abs() <= 1e-6 * a, || format!("j = {j}: |K| {k} vs {a}"))?;
        let oracle = 2.0 * a * (2f64.powf(j - 1.0) - 1.0).powi(2) / (j - 1.0).powi(2);
        let bound = profile.num(row, "product_bound").unwrap_or(f64::NAN);
        ensure((bound - oracle).abs() <= 1e-9 * oracle, || format!("j = {j}: bound {bound} vs {oracle}"))?;
        let d = profile.num(row, "d_lower").unwrap_or(f64::NAN);
        let db = (2f64.sqrt() * (2f64.powf(j - 1.0) - 1.0)) / (j - 1.0);
        ensure(d >= 0.95 * db, || format!("j = {j}: d {d} below bound {db}"))?;
        let p = profile.num(row, "product").unwrap_or(f64::NAN);
        ensure(p > last, || format!("j = {j}: product {p} not above {last}"))?;
        last = p;
    }
    ensure(last > 1e3, || format!("final product {last}"))?;
    Ok(format!("A = {a:.5}, product at j = 12: {last:.0}, {:.1?}", t.elapsed()))
}

fn period_solver() -> Outcome {
    let r = scenario("flux_prescription", |_| {})?;
    require(&r, &["spray_rank", "iterations", "flux_error", "real_periods", "identity_target"])?;

    // re-measure the prescribed flux on a loop the solver never saw
    let domain = Domain::annulus(0.5, 2.0).map_err(|e| e.to_string())?;
    let form = assemble_null_form(&WeierstrassPair::parse("z", "1/z").map_err(|e| e.to_string())?, &domain).map_err(|e| e.to_string())?;
    let basis = HomologyBasis::standard(&domain).map_err(|e| e.to_string())?;
    let target = [0.0, 0.0, TAU + 1.0];
    let opts = SolveOptions { tol: 1e-10, max_iterations: 20, ..Default::default() };
    let res = prescribe_flux(&form, &basis, &[target.to_vec()], &GeneratorFamily::default(), opts).map_err(|e| e.to_string())?;
    ensure(res.report.rank == 3, || format!("rank {}", res.report.rank))?;
    ensure(res.outcome.iterations <= 20, || format!("{} iterations", res.outcome.iterations))?;
    let modified = form.multiply(&res.multiplier());
    let p = contour_integrate(&modified, &wiggly_loop(1.2, 0.15, 3, 0.4), QuadOptions::default()).map_err(|e| e.to_string())?;
    let err = p.value.iter().zip(target).map(|(v, t)| (Complex64::new(v.im, -v.re) - t).norm()).fold(0.0, f64::max);
    ensure(err <= 1e-8, || format!("re-measured flux error {err:e}"))?;
    Ok(format!("rank 3, {} iterations, flux error {err:.1e}", res.outcome.iterations))
}

fn divisors() -> Outcome {
    let origin = Complex64::new(0.0, 0.0);
    let l = CompactL::disc(origin, 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for m in [1u32, 2] {
        let e0 = Divisor::from_points(&[(origin, m)]).map_err(|e| e.to_string())?;
        for rho in [1e-1, 1e-2, 1e-3] {
            let pts: Vec<_> = (0..m).map(|k| (Complex64::from_polar(rho, PI * f64::from(k) + 0.3), 1)).collect();
            let e = Divisor::from_points(&pts).map_err(|e| e.to_string())?;
            let psi = divisor_multiplier(&e0, &e, &l, &[HolomorphicFn::identity()], &[0.5]).map_err(|e| e.to_string())?;
            let bound = f64::from(m) * (rho + rho * rho);
            ensure(psi.verified, || format!("m = {m}, rho = {rho}: windings {:?}", psi.checks))?;
            ensure(psi.boundary_deviation <= bound, || format!("m = {m}, rho = {rho}: {:e} > {bound:e}", psi.boundary_deviation))?;
            worst = worst.max(psi.boundary_deviation / bound);
        }
    }
    Ok(format!("largest deviation / bound {worst:.3}"))
}

fn gauge() -> Outcome {
    let r = scenario("gauge_alignment", |_| {})?;
    require(&r, &["proximity", "deviation"])?;
    let delta = r.check("proximity").map(|c| c.value).unwrap_or(f64::NAN);
    let dev = r.check("deviation").map(|c| c.value).unwrap_or(f64::NAN);
    ensure(delta < 0.02 && dev < 1e-6, || format!("delta {delta}, deviation {dev}"))?;

    // zeros present: z^2 splits into +-0.01, so Psi = (z^2 - 1e-4)/z^2 and
    // phi = Psi z^2 / ((1 + 0.001 z)(z^2 - 1e-4)) = 1/(1 + 0.001 z)
    let parse = |v: &[&str]| v.iter().map(|s| HolomorphicFn::parse(s)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string());
    let f = parse(&["z^2", "1 + z", "2 - z"])?;
    let g = parse(&["(1 + 0.001*z)*(z^2 - 0.0001)", "1 + z", "2 - z"])?;
    let origin = Complex64::new(0.0, 0.0);
    let l = CompactL::disc(origin, 0.5).map_err(|e| e.to_string())?;
    let opts = GaugeOptions { reference: Some(0), discs: vec![(origin, 0.25)], samples: None };
    let z = gauge_align(&f, &g, &l, 0.1, &opts).map_err(|e| e.to_string())?;
    ensure(z.case == GaugeCase::WithZeros, || format!("case {:?}", z.case))?;
    let bound = z.bound.unwrap_or(f64::NAN);
    ensure(z.deviation <= bound, || format!("deviation {} above bound {bound}", z.deviation))?;
    let oracle_err = (0..64)
        .map(|k| Complex64::from_polar(0.5, TAU * f64::from(k) / 64.0))
        .map(|p| (z.multiplier.eval(p) - 1.0 / (1.0 + 0.001 * p)).norm())
        .fold(0.0, f64::max);
    ensure(oracle_err <= 1e-12, || format!("multiplier differs from the explicit product by {oracle_err:e}"))?;
    Ok(format!("delta {delta:.2e}, deviation {dev:.1e}, product oracle {oracle_err:.1e}"))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run_suite<S: Strategy>(name: &str, cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn at_most(value: Result<f64, String>, tol: f64) -> Result<(), TestCaseError> {
    let v = value.map_err(TestCaseError::fail)?;
    if v <= tol {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{v:e} > {tol:e}")))
    }
}

fn properties() -> Outcome {
    let t = Instant::now();
    run_suite("fs metric", 1000, triple(), |p| at_most(Ok(fs_axiom_violation(&p)), FS_TOL))?;
    let pairs = (prop::collection::vec(rational_factor(), 1..4), prop::collection::vec(rational_factor(), 1..4));
    run_suite("winding additivity", 100, pairs, |(f, g)| winding_additivity(&f, &g).map_err(TestCaseError::fail))?;
    let scales = prop_oneof![-50.0f64..-0.02, 0.02f64..50.0];
    run_suite("gauss homothety", 64, (scales, annulus_point()), |(s, p)| at_most(gauss_homothety(s, p), GAUSS_TOL))?;
    let shifts = prop::array::uniform3(-10.0f64..10.0);
    run_suite("gauss translation", 64, (shifts, annulus_point()), |(v, p)| at_most(gauss_translation(v, p), 1e-12))?;
    run_suite("osserman homothety", 16, (0.1f64..10.0, annulus_point()), |(s, p)| at_most(osserman_homothety(s, p), HOMOTHETY_TOL))?;
    run_suite("flux homotopy", 64, loop_params(), |params| {
        for form in [&catenoid().form, exact_family_form()] {
            let (diff, tol) = flux_homotopy(form, params).map_err(TestCaseError::fail)?;
            at_most(Ok(diff), 2.0 * tol)?;
        }
        Ok(())
    })?;
    within(Duration::from_secs(120), t.elapsed())?;
    Ok(format!("6 suites, {:.1?}", t.elapsed()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("catenoid flux", catenoid_flux),
        ("helicoid wedge", helicoid),
        ("nullity suite", nullity),
        ("curvature oracle", curvature),
        ("annulus family divergence", family),
        ("period solver", period_solver),
        ("divisor multipliers", divisors),
        ("gauge alignment", gauge),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) [{:.2?}]", k + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why} [{:.2?}]", k + 1, t.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
