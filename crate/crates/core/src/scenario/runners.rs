use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::report::{col, Cell, Check, ScenarioReport, Table};
use super::{
    build_fn, build_fns, build_labyrinth, labyrinth_completeness_check, CatenoidConfig, FamilyConfig, FluxConfig, GaugeConfig,
    HelicoidConfig, LabyrinthConfig, LabyrinthSchedule, LabyrinthVerdict, MeshSpec,
};
use crate::complex::{build_mesh, build_mesh_level, derivative_at, winding_number, Domain, Expr, HolomorphicFn, HomologyBasis, Mesh, PathPolyline};
use crate::error::{Error, Result};
use crate::geometry::{angle_defect_curvature, conformal_metric, gauss_curvature, geodesic_distance, DistanceEstimate};
use crate::period::{period_map, prescribe_flux, SolveOptions};
use crate::projective::gauge_align;
use crate::weierstrass::{
    assemble_null_form, flux, fullness_test, integrate_immersion, validate_null, NullForm, WeierstrassPair, NULLITY_TOL, REAL_PERIOD_TOL,
};

fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn meshes(domain: &Domain, spec: &MeshSpec) -> Result<Vec<Mesh>> {
    (0..spec.levels).into_par_iter().map(|k| build_mesh_level(domain, spec.base(), k)).collect()
}

fn pair_from(g: &crate::complex::FnSpec, phi3: &crate::complex::FnSpec) -> Result<WeierstrassPair> {
    Ok(WeierstrassPair::new(build_fn(g, "g")?, build_fn(phi3, "phi3")?))
}

fn form_checks(report: &mut ScenarioReport, form: &NullForm, samples: usize) -> Result<()> {
    let nullity = validate_null(form, samples);
    report.checks.push(Check::at_most("nullity", nullity.max_residual, NULLITY_TOL, "sampled |sum f_k^2| / (sum |f_k|)^2"));
    report.checks.push(Check::at_least("nonvanishing", nullity.min_modulus, f64::MIN_POSITIVE, "sampled min sum |f_k|"));
    let full = fullness_test(form, 64)?;
    report.checks.push(Check::holds("full", full.full, "rank of sampled coefficient vectors"));
    Ok(())
}

pub(super) fn catenoid(cfg: &CatenoidConfig, report: &mut ScenarioReport) -> Result<()> {
    let pair = pair_from(&cfg.g, &cfg.phi3)?;
    let form = assemble_null_form(&pair, &cfg.domain)?;
    let n = form.coefficients().len();
    form_checks(report, &form, cfg.nullity_samples)?;

    let basis = HomologyBasis::standard(&cfg.domain)?;
    let fm = flux(&form, &basis)?;
    let mut columns = vec![col("cycle", None, "index")];
    columns.extend((1..=n).map(|k| col(&format!("F{k}"), Some(cfg.flux_tol), "adaptive contour quadrature")));
    columns.push(col("imag_residual", Some(REAL_PERIOD_TOL), "discarded imaginary part"));
    if cfg.expected_flux.is_some() {
        columns.push(col("max_error", Some(cfg.flux_tol), "against the configured expected flux"));
    }
    let mut table = Table::new("flux", columns);
    let mut worst = 0.0f64;
    for (k, v) in fm.values.iter().enumerate() {
        let mut row: Vec<Cell> = vec![k.into()];
        row.extend(v.iter().map(|&x| Cell::Num(x)));
        row.push(fm.imaginary_residuals[k].into());
        if let Some(exp) = &cfg.expected_flux {
            let e = exp.get(k).ok_or_else(|| Error::ConfigInvalid(format!("expected_flux lacks cycle {k}")))?;
            if e.len() != n {
                return Err(Error::ConfigInvalid(format!("expected_flux[{k}] needs {n} entries")));
            }
            let err = v.iter().zip(e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            row.push(err.into());
        }
        table.push(row);
    }
    report.tables.push(table);
    if cfg.expected_flux.is_some() {
        report.checks.push(Check::at_most("flux", worst, cfg.flux_tol, "residue calculus"));
    }
    report.checks.push(Check::at_most(
        "flux_real",
        fm.imaginary_residuals.iter().copied().fold(0.0, f64::max),
        REAL_PERIOD_TOL,
        "real periods of Phi",
    ));

    let mesh = build_mesh(&cfg.domain, cfg.mesh_h)?;
    let imm = integrate_immersion(&form, c(cfg.base_point), &cfg.x0, &mesh, &basis)?;
    let mut points = Table::new("points", {
        let mut cols = vec![col("re_z", None, "input"), col("im_z", None, "input")];
        cols.extend((1..=n).map(|k| col(&format!("u{k}"), Some(cfg.point_tol), "mesh path integration")));
        cols.push(col("max_error", Some(cfg.point_tol), "against the configured closed form"));
        cols
    });
    let mut point_err = 0.0f64;
    for p in &cfg.expected_points {
        if p.u.len() != n {
            return Err(Error::ConfigInvalid(format!("expected point u needs {n} entries")));
        }
        let u = imm.eval(c(p.z))?;
        let err = u.iter().zip(&p.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        point_err = point_err.max(err);
        let mut row: Vec<Cell> = vec![p.z[0].into(), p.z[1].into()];
        row.extend(u.iter().map(|&x| Cell::Num(x)));
        row.push(err.into());
        points.push(row);
    }
    if !cfg.expected_points.is_empty() {
        report.checks.push(Check::at_most("expected_points", point_err, cfg.point_tol, "closed-form immersion"));
        report.tables.push(points);
    }
    let mut csv = Vec::new();
    imm.write_csv(&mut csv)?;
    report.attachments.push(("immersion.csv".into(), csv));

    let mut results = json!({
        "flux": fm.values,
        "conformality_defect": imm.conformality_defect(),
        "mesh_vertices": mesh.len(),
    });

    if let Some(k) = &cfg.curvature {
        let patch = Domain::annulus(k.inner, k.outer)?;
        let pform = form.with_domain(patch.clone());
        let pmesh = build_mesh(&patch, k.mesh_h)?;
        let pbasis = HomologyBasis::standard(&patch)?;
        let base = Complex64::new(0.5 * (k.inner + k.outer), 0.0);
        let pimm = integrate_immersion(&pform, base, &vec![0.0; n], &pmesh, &pbasis)?;
        let mut table = Table::new(
            "curvature",
            vec![
                col("re_z", None, "input"),
                col("im_z", None, "input"),
                col("K_formula", None, "closed-form spinor curvature"),
                col("K_angle_defect", None, "hexagon-fan angle defect of the immersion"),
                col("rel_error", Some(k.rel_tol), "relative difference"),
            ],
        );
        let rows = k
            .probes
            .par_iter()
            .map(|&p| {
                let z = c(p);
                let exact = gauss_curvature(&pair, z, Some(&patch))?;
                let disc = angle_defect_curvature(&pimm, z, k.fan_h)?;
                Ok((z, exact, disc, ((disc - exact) / exact).abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for (z, exact, disc, rel) in rows {
            worst = worst.max(rel);
            table.push(vec![z.re.into(), z.im.into(), exact.into(), disc.into(), rel.into()]);
        }
        report.tables.push(table);
        report.checks.push(Check::at_most("angle_defect_curvature", worst, k.rel_tol, "closed-form curvature"));
        results["curvature_max_rel_error"] = json!(worst);
    }
    report.results = results;
    Ok(())
}

pub(super) fn helicoid(cfg: &HelicoidConfig, report: &mut ScenarioReport) -> Result<()> {
    let domain = Domain::wedge(PI / 4.0, cfg.truncation_radius)?;
    let pair = pair_from(&cfg.g, &cfg.phi3)?;
    let form = assemble_null_form(&pair, &domain)?;
    form_checks(report, &form, cfg.nullity_samples)?;

    // The printed data repeats e^z in the second slot; compare it with the
    // corrected e^z + e^{-z}.
    let probe = Complex64::new(0.0, 1.0);
    let printed = NullForm::parse(&["i*(exp(z) - exp(-z))", "exp(z) + exp(z)", "2*i"], domain.clone())?;
    let corrected = NullForm::parse(&["i*(exp(z) - exp(-z))", "exp(z) + exp(-z)", "2*i"], domain.clone())?;
    let (printed_residual, _) = printed.nullity_at(probe);
    let (corrected_residual, _) = corrected.nullity_at(probe);
    let scale = form.eval(probe)[2] / corrected.eval(probe)[2];
    let agree = form.eval(probe).iter().zip(corrected.eval(probe)).map(|(a, b)| (a - b * scale).norm()).fold(0.0, f64::max);
    report.flags.push(format!(
        "printed second coefficient e^z + e^z is not null (residual {printed_residual:.3e} at z = i); e^z + e^(-z) is used (residual {corrected_residual:.1e})"
    ));
    let phi = form.eval(probe);
    let g_conv = phi[2] / (phi[0] - Complex64::i() * phi[1]);
    let stated = probe.exp();
    report.flags.push(format!(
        "Gauss map phi3/(phi1 - i phi2) of this form is -e^z (value {g_conv:.6} at z = i); the stated e^z differs by sign ({stated:.6})"
    ));

    let mesh_levels = meshes(&domain, &cfg.mesh)?;
    let metric = conformal_metric(&form);
    let rows = cfg
        .heights
        .par_iter()
        .map(|&t| -> Result<(f64, f64, f64, DistanceEstimate, Complex64)> {
            let z = Complex64::new(0.0, t);
            let k = gauss_curvature(&pair, z, Some(&domain))?;
            let lam = metric.lambda(z);
            let d = geodesic_distance(&metric, z, &mesh_levels)?;
            let phi = form.eval(z);
            Ok((t, k, lam * lam, d, phi[2] / (phi[0] - Complex64::i() * phi[1])))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cols = vec![
        col("t", None, "input"),
        col("K", Some(cfg.k_tol), "closed-form spinor curvature"),
        col("K_error", Some(cfg.k_tol), "distance from -1"),
        col("lambda_sq", None, "sum |f_k|^2"),
    ];
    for k in 0..cfg.mesh.levels {
        let h = cfg.mesh.base() / f64::from(1u32 << k);
        cols.push(col(&format!("d_h{h}"), None, "mesh geodesic distance at this edge length"));
    }
    cols.extend([
        col("d", None, "finest mesh distance"),
        col("d_lower", None, "min of finest and extrapolated"),
        col("d_upper", None, "min over levels"),
        col("d_bound", None, "t, from lambda >= sqrt 2 and Euclidean distance t/sqrt 2"),
        col("product", None, "|K| d^2"),
        col("g_re", None, "phi3/(phi1 - i phi2)"),
        col("g_im", None, "phi3/(phi1 - i phi2)"),
    ]);
    let mut table = Table::new("probes", cols);
    let (mut k_err, mut ratio) = (0.0f64, f64::INFINITY);
    for (t, k, lsq, d, g) in &rows {
        k_err = k_err.max((k + 1.0).abs());
        ratio = ratio.min(d.value / t);
        let mut row: Vec<Cell> = vec![(*t).into(), (*k).into(), (k + 1.0).abs().into(), (*lsq).into()];
        row.extend(d.levels.iter().map(|l| Cell::Num(l.1)));
        row.extend([d.value, d.lower, d.upper, *t, k.abs() * d.value * d.value, g.re, g.im].map(Cell::Num));
        table.push(row);
    }
    let mut order: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.3.value)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let increasing = order.windows(2).all(|w| w[1].1 > w[0].1);
    report.tables.push(table);
    report.checks.push(Check::at_most("curvature", k_err, cfg.k_tol, "K(it) = -1"));
    report.checks.push(Check::at_least("distance_bound", ratio, cfg.distance_factor, "d(it) >= t"));
    report.checks.push(Check::holds("distance_increasing", increasing, "d(it) increases with t"));
    report.results = json!({
        "printed_form_residual": printed_residual,
        "corrected_form_residual": corrected_residual,
        "form_vs_corrected": agree,
        "mesh_vertices": mesh_levels.iter().map(Mesh::len).collect::<Vec<_>>(),
    });
    Ok(())
}

/// Data of family member `j`: `g = 1/g0`, `phi3 = z^{-j}` on the annulus
/// `1/R < |z| < R`.
pub(super) fn family_member(g0: &HolomorphicFn, radius: f64, j: i32) -> Result<(WeierstrassPair, Domain)> {
    let e = g0.expr().ok_or_else(|| Error::ConfigInvalid("g0 must be an expression".into()))?;
    let g = HolomorphicFn::from_expr(Expr::div(Expr::real(1.0), e.clone()));
    let phi3 = HolomorphicFn::from_expr(Expr::powi(Expr::Var, -j));
    Ok((WeierstrassPair::new(g, phi3), Domain::annulus(1.0 / radius, radius)?))
}

struct MemberResult {
    j: i32,
    max_period: f64,
    k: f64,
    d: Option<DistanceEstimate>,
}

pub(super) fn annulus_family(cfg: &FamilyConfig, report: &mut ScenarioReport) -> Result<()> {
    let g0 = build_fn(&cfg.g0, "g0")?;
    let domain = Domain::annulus(1.0 / cfg.radius, cfg.radius)?;
    let zeta0 = c(cfg.zeta0);
    if !domain.contains(zeta0) {
        return Err(Error::EvaluationOutsideDomain(zeta0));
    }
    let e = g0.expr().ok_or_else(|| Error::ConfigInvalid("g0 must be an expression".into()))?;
    let probes = domain.sample_interior(64, 0.0);
    if !e.is_even_on(&probes, 1e-12) {
        return Err(Error::SymmetryViolated("g0(-z) differs from g0(z)".into()));
    }
    let zeros = winding_number(&g0, &PathPolyline::circle(Complex64::new(0.0, 0.0), cfg.radius, 1024))?;
    if zeros != 0 {
        return Err(Error::InvalidInput(format!("g0 has {zeros} zeros in the disc of radius {}", cfg.radius)));
    }
    let big_g = g0.eval(zeta0);
    let big_dg = derivative_at(&g0, zeta0, Some(&domain))?;
    if big_dg.norm() <= 1e-12 * (1.0 + big_g.norm()) {
        return Err(Error::InvalidInput(format!("g0 is critical at {zeta0}")));
    }
    let a = 16.0 * (big_g * big_dg).norm_sqr() / (1.0 + big_g.norm_sqr()).powi(4);
    let r0 = zeta0.norm();

    let mut mesh_levels = meshes(&domain, &cfg.mesh)?;
    if cfg.outer_artificial {
        for m in &mut mesh_levels {
            m.mark_artificial(1);
        }
        report.flags.push("outer circle treated as artificial; distances are measured to the inner circle".into());
    }
    let basis = HomologyBasis::standard(&domain)?;
    let one = HolomorphicFn::constant(Complex64::new(1.0, 0.0));

    let members = cfg
        .j
        .par_iter()
        .map(|&j| -> Result<MemberResult> {
            let (pair, dom) = family_member(&g0, cfg.radius, j)?;
            let form = assemble_null_form(&pair, &dom)?;
            let periods = period_map(&one, &form, &basis)?;
            let max_period = periods.iter().map(|p| p.norm()).fold(0.0, f64::max);
            let exact = max_period < cfg.period_tol;
            let k = gauss_curvature(&pair, zeta0, Some(&dom))?;
            let d = if exact { Some(geodesic_distance(&conformal_metric(&form), zeta0, &mesh_levels)?) } else { None };
            Ok(MemberResult { j, max_period, k, d })
        })
        .collect::<Result<Vec<_>>>()?;

    let bound = |j: i32| SQRT_2 * (cfg.radius.powi(j - 1) - r0.powi(1 - j)) / f64::from(j - 1);
    let mut profile = Table::new(
        "profile",
        vec![
            col("j", None, "input"),
            col("status", None, "exact or skipped"),
            col("max_period", Some(cfg.period_tol), "adaptive contour quadrature"),
            col("K", None, "closed-form spinor curvature"),
            col("A_r2j", None, "16|G G'|^2/(1+|G|^2)^4 |z0|^(2j)"),
            col("K_rel_error", Some(cfg.k_rel_tol), "relative to A|z0|^(2j)"),
            col("d", None, "finest mesh distance to the inner circle"),
            col("d_lower", None, "min of finest and extrapolated"),
            col("d_upper", None, "min over levels"),
            col("d_bound", Some(cfg.distance_slack), "sqrt 2 integral of t^-j from 1/R to |z0|"),
            col("product", None, "|K| d_lower^2"),
            col("product_bound", None, "A|z0|^(2j) d_bound^2"),
        ],
    );
    let mut plot = Table::new(
        "profile_plot",
        vec![col("j", None, "input"), col("product", None, "|K| d_lower^2"), col("product_bound", None, "A|z0|^(2j) d_bound^2")],
    );
    let (mut worst_period, mut worst_k, mut worst_d) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut products = Vec::new();
    let mut skipped = Vec::new();
    let mut uneven_exact = true;
    for m in &members {
        let ak = a * r0.powi(2 * m.j);
        let rel = (m.k.abs() - ak).abs() / ak;
        let even = m.j % 2 == 0;
        if even {
            worst_period = worst_period.max(m.max_period);
        }
        match &m.d {
            Some(d) => {
                if !even {
                    uneven_exact = false;
                }
                let b = bound(m.j);
                let product = m.k.abs() * d.lower * d.lower;
                let product_bound = ak * b * b;
                worst_k = worst_k.max(rel);
                worst_d = worst_d.min(d.lower / b);
                products.push((m.j, product));
                profile.push(vec![
                    Cell::Num(f64::from(m.j)),
                    "exact".into(),
                    m.max_period.into(),
                    m.k.into(),
                    ak.into(),
                    rel.into(),
                    d.value.into(),
                    d.lower.into(),
                    d.upper.into(),
                    b.into(),
                    product.into(),
                    product_bound.into(),
                ]);
                plot.push(vec![Cell::Num(f64::from(m.j)), product.into(), product_bound.into()]);
            }
            None => {
                skipped.push(m.j);
                let nan = Cell::Num(f64::NAN);
                profile.push(vec![
                    Cell::Num(f64::from(m.j)),
                    "skipped".into(),
                    m.max_period.into(),
                    m.k.into(),
                    ak.into(),
                    rel.into(),
                    nan.clone(),
                    nan.clone(),
                    nan.clone(),
                    Cell::Num(bound(m.j)),
                    nan.clone(),
                    nan,
                ]);
            }
        }
    }
    report.tables.push(profile);
    report.tables.push(plot);
    let even_skipped: Vec<i32> = skipped.iter().copied().filter(|j| j % 2 == 0).collect();
    report.checks.push(Check::at_most("even_periods", worst_period, cfg.period_tol, "residue calculus: even j is exact"));
    report.checks.push(Check::holds("even_members_exact", even_skipped.is_empty(), "every even j constructs"));
    report.checks.push(Check::holds("odd_members_skipped", uneven_exact, "odd j leaves a nonzero period"));
    if !products.is_empty() {
        report.checks.push(Check::at_most("curvature", worst_k, cfg.k_rel_tol, "|K(z0)| = A|z0|^(2j)"));
        report.checks.push(Check::at_least("distance_bound", worst_d, 1.0 - cfg.distance_slack, "d >= sqrt 2 integral of t^-j"));
        let increasing = products.windows(2).all(|w| w[1].1 > w[0].1);
        report.checks.push(Check::holds("product_increasing", increasing, "strictly increasing in j"));
        let last = products.last().map(|p| p.1).unwrap_or(0.0);
        report.checks.push(Check::at_least("final_product", last, cfg.final_product, "divergence of |K| d^2"));
    }
    let entries: Vec<_> = cfg
        .thresholds
        .iter()
        .map(|&t| json!({ "threshold": t, "first_j": products.iter().find(|p| p.1 > t).map(|p| p.0) }))
        .collect();
    report.results = json!({
        "A": a,
        "skipped": skipped,
        "entries": entries,
        "mesh_vertices": mesh_levels.iter().map(Mesh::len).collect::<Vec<_>>(),
    });
    Ok(())
}

pub(super) fn flux_prescription(cfg: &FluxConfig, report: &mut ScenarioReport) -> Result<()> {
    let pair = pair_from(&cfg.g, &cfg.phi3)?;
    let form = assemble_null_form(&pair, &cfg.domain)?;
    let basis = HomologyBasis::standard(&cfg.domain)?;
    let n = form.coefficients().len();
    let opts = SolveOptions { tol: cfg.newton_tol, max_iterations: cfg.max_iterations, ..SolveOptions::default() };
    let res = prescribe_flux(&form, &basis, &cfg.target_flux, &cfg.family, opts)?;

    let mut trace = Table::new(
        "trace",
        vec![
            col("iteration", None, "Newton step"),
            col("residual", Some(cfg.newton_tol), "max period mismatch"),
            col("step_norm", None, "Euclidean norm of the step"),
            col("damping", None, "step length factor"),
        ],
    );
    for r in &res.outcome.trace {
        trace.push(vec![r.iteration.into(), r.residual.into(), r.step_norm.into(), r.damping.into()]);
    }
    let mut cols = vec![col("cycle", None, "index")];
    cols.extend((1..=n).map(|k| col(&format!("target{k}"), None, "input")));
    cols.extend((1..=n).map(|k| col(&format!("achieved{k}"), Some(cfg.flux_tol), "fresh quadrature of h f")));
    cols.push(col("imag_residual", Some(REAL_PERIOD_TOL), "real periods of h f"));
    let mut table = Table::new("flux", cols);
    for (k, (t, a)) in cfg.target_flux.iter().zip(&res.achieved.values).enumerate() {
        let mut row: Vec<Cell> = vec![k.into()];
        row.extend(t.iter().chain(a).map(|&x| Cell::Num(x)));
        row.push(res.achieved.imaginary_residuals[k].into());
        table.push(row);
    }
    report.tables.push(trace);
    report.tables.push(table);

    let current = flux(&form, &basis)?;
    let identity = prescribe_flux(&form, &basis, &current.values, &cfg.family, opts)?;
    let zeta_norm = identity.outcome.spray.coefficients().iter().map(|z| z.norm()).fold(0.0, f64::max);

    report.checks.push(Check::at_least("spray_rank", res.report.rank as f64, res.report.required as f64, "SVD of the period differential"));
    report.checks.push(Check::at_most("iterations", res.outcome.iterations as f64, cfg.max_iterations as f64, "Newton budget"));
    report.checks.push(Check::at_most("flux_error", res.max_flux_error, cfg.flux_tol, "re-measured flux of h f"));
    report.checks.push(Check::at_most(
        "real_periods",
        res.achieved.imaginary_residuals.iter().copied().fold(0.0, f64::max),
        REAL_PERIOD_TOL,
        "real periods of h f",
    ));
    report.checks.push(Check::at_most("identity_target", zeta_norm, cfg.identity_tol, "current flux as target gives zeta = 0"));
    report.results = json!({
        "spray": res.report,
        "coefficients": res.outcome.spray.coefficients(),
        "iterations": res.outcome.iterations,
        "residual": res.outcome.residual,
        "achieved": res.achieved.values,
        "max_flux_error": res.max_flux_error,
        "identity_zeta_norm": zeta_norm,
    });
    Ok(())
}

pub(super) fn gauge(cfg: &GaugeConfig, report: &mut ScenarioReport) -> Result<()> {
    let f = build_fns(&cfg.f, "f")?;
    let g = build_fns(&cfg.g, "g")?;
    let r = gauge_align(&f, &g, &cfg.compact, cfg.epsilon, &cfg.options)?;
    let mut table = Table::new(
        "windings",
        vec![
            col("re_center", None, "input"),
            col("im_center", None, "input"),
            col("radius", None, "input"),
            col("zeros_f", None, "argument principle"),
            col("zeros_g", None, "argument principle"),
        ],
    );
    for w in &r.windings {
        table.push(vec![w.center.re.into(), w.center.im.into(), w.radius.into(), Cell::Num(w.zeros_f as f64), Cell::Num(w.zeros_g as f64)]);
    }
    report.tables.push(table);
    report.checks.push(Check::at_most("proximity", r.delta, cfg.max_delta, "sampled Fubini-Study distance"));
    report.checks.push(Check::at_most("deviation", r.deviation, cfg.epsilon, "sup over bL of |phi g - f|"));
    if let Some(b) = r.bound {
        report.checks.push(Check::at_most("deviation_bound", r.deviation, b, "a priori bound with the divisor multiplier"));
    }
    report.results = serde_json::to_value(&r)?;
    Ok(())
}

pub(super) fn labyrinth(cfg: &LabyrinthConfig, report: &mut ScenarioReport) -> Result<()> {
    let count = match (&cfg.schedule, cfg.count) {
        (_, Some(n)) => n,
        (LabyrinthSchedule::Explicit { radii, .. }, None) => radii.len(),
        (LabyrinthSchedule::Geometric { .. }, None) => return Err(Error::ConfigInvalid("a geometric schedule needs count".into())),
    };
    let lab = build_labyrinth(count, &cfg.schedule)?;
    let mut table = Table::new("target", vec![col("radius", None, "grid and breakpoints"), col("f", None, "piecewise target")]);
    for (t, f) in lab.target_table(cfg.table_samples) {
        table.push(vec![t.into(), f.into()]);
    }
    report.tables.push(table);

    let readback = (0..lab.len()).all(|j| lab.target(Complex64::new(lab.radii[j], 0.0)) == Some(lab.widths[j].powi(j as i32 + 1)));
    report.checks.push(Check::holds("levels", readback, "f = eps_j^j on C_j"));
    let mut gaps = Table::new(
        "gaps",
        vec![
            col("after_arc", None, "index from one"),
            col("start", None, "r_j + eps_j"),
            col("end", None, "r_(j+1) - eps_(j+1)"),
            col("integral", None, "adaptive quadrature"),
            col("required", None, "1/eps_(j+1)"),
        ],
    );
    let mut worst = f64::INFINITY;
    for j in 0..lab.len() - 1 {
        let (a, b) = lab.gap(j);
        let (integral, need) = lab.gap_integral(j)?;
        worst = worst.min(integral / need);
        gaps.push(vec![(j + 1).into(), a.into(), b.into(), integral.into(), need.into()]);
    }
    report.tables.push(gaps);
    report.checks.push(Check::at_least("gap_integrals", worst, 1.0, "integral over each gap exceeds 1/eps_(j+1)"));

    let mut results = json!({ "labyrinth": lab });
    if let Some(spec) = &cfg.candidate {
        let g = build_fn(spec, "candidate")?;
        let h = cfg.mesh_h.unwrap_or_else(|| 0.5 * lab.widths.iter().copied().fold(f64::INFINITY, f64::min));
        let mesh = build_mesh(&Domain::disc(1.0)?, h)?;
        let rep = labyrinth_completeness_check(&lab, &g, &mesh)?;
        let mut bands = Table::new(
            "bands",
            vec![
                col("arc", None, "index from one"),
                col("radius", None, "r_j"),
                col("width", None, "eps_j"),
                col("min_weight", None, "min of |g| + 1/|g| on C_j samples"),
                col("crossing_cost", None, "2 eps_j min_weight"),
                col("margin", None, "min log|g| - 1/eps_j"),
                col("meets_threshold", None, "margin > 0"),
                col("avoiding_cost", None, "Euclidean mesh path avoiding every C_k"),
            ],
        );
        for b in &rep.bands {
            bands.push(vec![
                b.arc.into(),
                b.radius.into(),
                b.width.into(),
                b.min_weight.into(),
                b.crossing_cost.into(),
                b.margin.into(),
                Cell::Num(if b.meets_threshold { 1.0 } else { 0.0 }),
                Cell::Num(b.avoiding_cost.unwrap_or(f64::NAN)),
            ]);
        }
        report.tables.push(bands);
        if cfg.require_complete {
            report.checks.push(Check::holds(
                "completeness_consistent",
                rep.verdict == LabyrinthVerdict::CompletenessConsistent,
                "|g| > e^(1/eps_j) on every C_j",
            ));
        }
        results["crossing"] = serde_json::to_value(&rep)?;
        results["mesh_vertices"] = json!(mesh.len());
    }
    report.results = results;
    Ok(())
}
