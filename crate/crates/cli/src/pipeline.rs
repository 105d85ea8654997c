//! One function per experiment. Each computes everything first, then hands
//! tables and plots to the [`Writer`].

use std::path::PathBuf;
use std::time::Instant;

use lipmaps_core::chain::{self, BackwardOptions, StationaryBatch};
use lipmaps_core::cramer::{self, CramerReport, MagnitudeLaw};
use lipmaps_core::stable::{self, Centering, LimitParams, Regime};
use lipmaps_core::stats;
use lipmaps_core::support;
use lipmaps_core::tail;
use lipmaps_core::{DistributionSpec, Family, Point, StreamKey};
use serde_json::json;

use crate::config::{Experiment, RunConfig};
use crate::output::{Cell, StageOutput, Table, Writer};
use crate::svg::{Plot, Scale, Style};
use crate::CliError;

/// Seed offset for the second Birkhoff horizon, which must not share
/// streams with the first.
const COMPARE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn stage<T>(name: &'static str, r: lipmaps_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Stage { stage: name, source })
}

fn key(cfg: &RunConfig, purpose: &str) -> StreamKey {
    StreamKey::new(cfg.seed, 0, purpose)
}

fn cramer_report(cfg: &RunConfig, grid: &[f64], draws: usize, tol: Option<f64>) -> Result<CramerReport, CliError> {
    let law = stage(
        "cramer",
        MagnitudeLaw::linear_scale(&cfg.model, draws, key(cfg, "cramer")),
    )?;
    stage("cramer", cramer::analyze(&law, grid, tol))
}

fn stationary(cfg: &RunConfig, count: usize) -> Result<StationaryBatch, CliError> {
    let opts = BackwardOptions {
        tol: cfg.sampler.tol,
        max_depth: cfg.sampler.max_depth,
        ..BackwardOptions::default()
    };
    stage(
        "sampling",
        chain::stationary_batch(&cfg.model, count, cfg.sampler.x0, &opts, cfg.seed),
    )
}

/// `|M|` has at most two values, so `log|M|` may live on a lattice.
pub fn arithmetic_risk(cfg: &RunConfig) -> bool {
    cfg.model.law("a").is_some_and(DistributionSpec::arithmetic_risk)
}

/// Law of `|M|` when it is a parameter law of the model.
fn scale_law(cfg: &RunConfig) -> Option<DistributionSpec> {
    let a = cfg.model.law("a")?;
    match cfg.model.family() {
        Family::Affine | Family::Extremal | Family::Letac => Some(a.clone()),
        Family::SqrtQuadratic => a.sqrt_law(),
        Family::Arch1 => None,
    }
}

fn require_non_arithmetic(cfg: &RunConfig) -> Result<(), CliError> {
    if arithmetic_risk(cfg) && !cfg.assertions.non_arithmetic {
        return Err(CliError::Assertion(
            "the scale law has at most two atoms, so non-arithmeticity of log|M| cannot be checked; \
             set assertions.non_arithmetic = true to proceed"
                .into(),
        ));
    }
    Ok(())
}

fn point_columns(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

/// Runs the configured experiment and returns the files written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    match &cfg.experiment {
        Experiment::Cramer {
            s_grid,
            draws,
            solver_tol,
        } => {
            let t = Instant::now();
            let report = cramer_report(cfg, s_grid, *draws, *solver_tol)?;
            let mut w = Writer::open(cfg)?;
            w.stage(cramer_output(&report), t)?;
            w.finish()
        }
        Experiment::Simulate { count } => {
            let t = Instant::now();
            let batch = stationary(cfg, *count)?;
            let mut w = Writer::open(cfg)?;
            w.stage(sampling_output(&batch), t)?;
            w.finish()
        }
        Experiment::Tail { count, draws } => {
            require_non_arithmetic(cfg)?;
            let t = Instant::now();
            let report = cramer_report(cfg, &[], *draws, None)?;
            let batch = stationary(cfg, *count)?;
            let tr = stage(
                "tail",
                tail::tail_report(
                    &cfg.model,
                    &batch.samples,
                    key(cfg, "goldie"),
                    report.alpha,
                    report.m_alpha,
                ),
            )?;
            let mut w = Writer::open(cfg)?;
            w.stage(tail_output(&tr, &report), t)?;
            w.finish()
        }
        Experiment::Limit { .. } => limit(cfg),
        Experiment::Support {
            depth,
            dedupe_tol,
            fixpoint_tol,
            count,
            eps,
        } => {
            let t = Instant::now();
            let cloud = stage(
                "support",
                support::enumerate_fixed_points(&cfg.model, *depth, *fixpoint_tol, *dedupe_tol),
            )?;
            let batch = stationary(cfg, *count)?;
            let coverage = stage("support", support::coverage_check(&cloud, &batch.samples, *eps))?;
            let closure = stage(
                "support",
                support::closure_check(&cfg.model, &cloud, (depth / 2).max(1), *eps),
            )?;
            let dim = cfg.model.dimension();
            let mut header = point_columns("x", dim);
            header.push("depth".into());
            let mut points = Table::with_header("support.csv", header);
            for (p, d) in cloud.points.iter().zip(&cloud.depths) {
                points.row(p.as_slice().iter().map(|c| Cell::from(*c)).chain([Cell::from(*d)]));
            }
            let mut cov = Table::new(
                "support_coverage.csv",
                &[
                    "samples",
                    "eps",
                    "fraction_covered",
                    "max_distance",
                    "frontier_fraction",
                ],
            );
            cov.row([
                Cell::from(batch.len()),
                (*eps).into(),
                coverage.fraction_covered.into(),
                coverage.max_distance.into(),
                closure.frontier_fraction.into(),
            ]);
            let mut out = StageOutput::new("support");
            out.result("points", cloud.len());
            out.result("fraction_covered", coverage.fraction_covered);
            out.result("max_distance", coverage.max_distance);
            out.result("frontier_fraction", closure.frontier_fraction);
            out.tables = vec![points, cov];
            let mut w = Writer::open(cfg)?;
            w.stage(out, t)?;
            w.finish()
        }
        Experiment::Check { .. } => check(cfg),
    }
}

fn cramer_output(report: &CramerReport) -> StageOutput {
    let mut grid = Table::new("cramer.csv", &["s", "kappa", "se"]);
    for p in &report.grid {
        grid.row([p.s, p.kappa, p.se]);
    }
    let mut summary = Table::new(
        "cramer_summary.csv",
        &[
            "alpha",
            "m_alpha",
            "m_alpha_se",
            "method",
            "solver_tolerance",
            "s_infinity",
            "convexity_violations",
        ],
    );
    summary.row([
        Cell::from(report.alpha),
        report.m_alpha.into(),
        report.m_alpha_se.into(),
        report.method.name().into(),
        report.solver_tolerance.into(),
        report.s_infinity_probe.into(),
        report.convexity_violations.into(),
    ]);
    let mut out = StageOutput::new("cramer");
    out.result("alpha", report.alpha);
    out.result("m_alpha", report.m_alpha);
    out.result("method", report.method.name());
    out.result("convexity_violations", report.convexity_violations);
    out.tables = vec![grid, summary];
    out
}

fn sampling_output(batch: &StationaryBatch) -> StageOutput {
    let dim = batch.samples.first().map_or(1, Point::dim);
    let mut header = vec!["replica".to_string()];
    header.extend(point_columns("x", dim));
    header.extend(["depth".to_string(), "bound".to_string()]);
    let mut t = Table::with_header("stationary.csv", header);
    for (i, ((p, d), b)) in batch
        .samples
        .iter()
        .zip(&batch.stop_depths)
        .zip(&batch.residual_bounds)
        .enumerate()
    {
        t.row(
            [Cell::from(i)]
                .into_iter()
                .chain(p.as_slice().iter().map(|c| Cell::from(*c)))
                .chain([Cell::from(*d), Cell::from(*b)]),
        );
    }
    let mut out = StageOutput::new("simulate");
    out.result("samples", batch.len());
    out.result("max_depth", batch.stop_depths.iter().copied().max().unwrap_or(0));
    out.tables = vec![t];
    out
}

fn tail_output(tr: &tail::TailReport, cr: &CramerReport) -> StageOutput {
    let mut surv = Table::new("tail_survival.csv", &["t", "p_hat", "t_alpha_p"]);
    for r in &tr.survival_grid {
        surv.row([r.t, r.p_hat, r.t_alpha_p]);
    }
    let mut hill = Table::new("hill.csv", &["k", "alpha_hat"]);
    for (k, a) in &tr.hill_curve {
        hill.row([Cell::from(*k), Cell::from(*a)]);
    }
    let mut goldie = Table::new("goldie.csv", &["C", "se", "alpha", "m_alpha"]);
    goldie.row([tr.goldie.value, tr.goldie.se, tr.goldie.alpha, tr.goldie.m_alpha]);

    let c = tr.goldie.value;
    let survival_plot = Plot::new(
        "Survival of |S| with the tail-constant reference",
        "t",
        "P(|S| > t)",
        Scale::Log,
        Scale::Log,
    )
    .series(
        "empirical",
        Style::Points,
        tr.survival_grid.iter().map(|r| (r.t, r.p_hat)),
    )
    .series(
        "C t^-alpha",
        Style::Dashed,
        tr.survival_grid.iter().map(|r| (r.t, c * r.t.powf(-cr.alpha))),
    );
    let k_max = tr.hill_curve.last().map_or(1, |(k, _)| *k) as f64;
    let hill_plot = Plot::new("Hill estimate", "k", "alpha_hat", Scale::Log, Scale::Linear)
        .series("Hill", Style::Line, tr.hill_curve.iter().map(|(k, a)| (*k as f64, *a)))
        .series("alpha", Style::Dashed, [(1.0, cr.alpha), (k_max, cr.alpha)]);

    let mut out = StageOutput::new("tail");
    out.result("alpha", cr.alpha);
    out.result("m_alpha", cr.m_alpha);
    out.result("hill_k", tr.hill_k);
    out.result("hill_alpha", tr.hill_alpha);
    out.result("goldie_c", tr.goldie.value);
    out.result("goldie_se", tr.goldie.se);
    out.result("goldie_se_unreliable", tr.goldie.se_unreliable);
    out.result("sigma_mass", tr.sigma_mass.value);
    out.result("plateau_window", json!([tr.plateau_window.0, tr.plateau_window.1]));
    out.result("plateau_level", tr.plateau_level);
    out.result("plateau_deviation", tr.plateau_deviation);
    out.tables = vec![surv, hill, goldie];
    out.plots = vec![
        ("tail_survival.svg".into(), survival_plot.render()),
        ("hill.svg".into(), hill_plot.render()),
    ];
    out
}

fn limit(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let Experiment::Limit {
        n,
        replicas,
        compare_n,
        t_grid,
        t_points,
        direction,
        mean_count,
        draws,
    } = &cfg.experiment
    else {
        unreachable!("limit pipeline called for another experiment")
    };
    require_non_arithmetic(cfg)?;
    let t0 = Instant::now();
    let report = cramer_report(cfg, &[], *draws, None)?;
    let regime = stage("limit", Regime::from_alpha(report.alpha))?;
    let nonlinear = matches!(
        cfg.model.family(),
        Family::Letac | Family::SqrtQuadratic | Family::Arch1
    );
    if regime == Regime::AlphaEq2 && nonlinear && !cfg.assertions.linear_limit {
        return Err(CliError::Assertion(
            "the α = 2 limit assumes the limit maps act linearly on the tail support; \
             set assertions.linear_limit = true to proceed"
                .into(),
        ));
    }
    let mut ns = vec![*n];
    ns.extend(compare_n);
    let centering = match regime {
        Regime::AlphaBelow1 => Centering::None,
        Regime::AlphaEq1 => {
            let batch = stationary(cfg, *mean_count)?;
            stage("limit", LimitParams::alpha_one(&batch.samples, &ns))?.centering
        }
        Regime::AlphaIn12 | Regime::AlphaEq2 => {
            let batch = stationary(cfg, *mean_count)?;
            let law = stage(
                "limit",
                MagnitudeLaw::linear_scale(&cfg.model, *draws, key(cfg, "cramer")),
            )?;
            let k1 = cramer::kappa(&law, 1.0).ok().map(|e| e.value);
            let mean = stage(
                "limit",
                stable::stationary_mean(&cfg.model, &batch.samples, k1, key(cfg, "mean")),
            )?;
            Centering::Mean(mean.value)
        }
    };
    let params = stage("limit", LimitParams::new(report.alpha, centering))?;

    let horizon = |n: usize, seed: u64| -> Result<Vec<Point>, CliError> {
        let sums = stage(
            "limit",
            chain::birkhoff_sums(&cfg.model, cfg.sampler.x0, n, *replicas, seed),
        )?;
        stage("limit", stable::normalize_birkhoff(&sums, n, &params))
    };
    let normalized = horizon(*n, cfg.seed)?;
    let ts = match t_grid {
        Some(ts) => ts.clone(),
        None => stage("limit", stable::cf_window(&normalized, direction, 0.1, 0.9, *t_points))?,
    };
    let fit = stage("limit", stable::stable_index_fit(&normalized, direction, &ts))?;
    let re_c = -fit.regression.intercept.exp();
    let cf = stable::empirical_cf(&normalized, &ts, std::slice::from_ref(direction));

    let mut out = StageOutput::new("limit");
    let cf_table = |name: &str, points: &[stable::CfPoint]| {
        let mut t = Table::new(name, &["t", "v_index", "re", "im", "se"]);
        for p in points {
            t.row([
                Cell::from(p.t),
                p.v_index.into(),
                p.value.re.into(),
                p.value.im.into(),
                p.se.into(),
            ]);
        }
        t
    };
    out.tables.push(cf_table("cf.csv", &cf));
    let projected = stable::project(&normalized, direction);
    let mut samples = Table::new("limit_samples.csv", &["replica", "value"]);
    for (i, v) in projected.iter().enumerate() {
        samples.row([Cell::from(i), Cell::from(*v)]);
    }
    out.tables.push(samples);

    out.result("alpha", report.alpha);
    out.result("regime", regime.name());
    out.result("alpha_hat", fit.alpha_hat);
    out.result("re_c", re_c);
    out.result("fit_r2", fit.regression.r2);
    out.result("t_grid", ts.clone());

    if let Some(cn) = compare_n {
        let other = horizon(*cn, cfg.seed ^ COMPARE_SEED_SALT)?;
        let cf2 = stable::empirical_cf(&other, &ts, std::slice::from_ref(direction));
        let worst = cf
            .iter()
            .zip(&cf2)
            .map(|(a, b)| (a.value - b.value).norm() / (a.se * a.se + b.se * b.se).sqrt())
            .fold(0.0, f64::max);
        out.tables.push(cf_table("cf_compare.csv", &cf2));
        out.result("compare_n", *cn);
        out.result("cf_max_z", worst);
        out.result("cf_agree", worst <= 3.0);
    }

    let t_hi = ts.last().copied().unwrap_or(1.0);
    let overlay = (0..=100).map(|i| {
        let t = t_hi * 1.2 * i as f64 / 100.0;
        (t, (re_c * t.powf(fit.alpha_hat)).exp())
    });
    let cf_plot = Plot::new("Modulus of the empirical CF", "t", "|CF|", Scale::Linear, Scale::Linear)
        .series("empirical", Style::Points, cf.iter().map(|p| (p.t, p.value.norm())))
        .series("exp(Re C t^alpha)", Style::Dashed, overlay);
    out.plots.push(("cf.svg".into(), cf_plot.render()));

    if regime == Regime::AlphaEq2 {
        let g = stage("limit", stable::gaussian_check(&projected))?;
        out.result("gaussian_ks", g.ks);
        out.result("gaussian_critical", g.critical);
        out.result("gaussian_pass", g.pass);
        out.result("skewness", g.skewness);
        out.result("excess_kurtosis", g.excess_kurtosis);
        let mut sorted = projected.clone();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let qq: Vec<(f64, f64)> = (1..200)
            .map(|i| {
                let p = i as f64 / 200.0;
                let idx = ((p * m as f64) as usize).min(m - 1);
                (normal_quantile(p), (sorted[idx] - g.mean) / g.sd)
            })
            .collect();
        let qq_plot = Plot::new(
            "Normal QQ of the normalized sums",
            "normal quantile",
            "sample quantile",
            Scale::Linear,
            Scale::Linear,
        )
        .series("sample", Style::Points, qq)
        .series("y = x", Style::Dashed, [(-3.0, -3.0), (3.0, 3.0)]);
        out.plots.push(("qq.svg".into(), qq_plot.render()));
    }

    let mut w = Writer::open(cfg)?;
    w.stage(out, t0)?;
    w.finish()
}

/// Standard normal quantile by bisection on the CDF.
fn normal_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if stats::normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let Experiment::Check {
        count,
        theta_draws,
        draws,
        s_grid,
    } = &cfg.experiment
    else {
        unreachable!("check pipeline called for another experiment")
    };
    let t0 = Instant::now();
    let mut table = Table::new("checks.csv", &["check", "value", "se", "pass"]);
    let mut out = StageOutput::new("check");
    let mut record = |name: &str, value: f64, se: f64, pass: bool| {
        table.row([Cell::from(name), value.into(), se.into(), pass.into()]);
        out.result(name, json!({"value": value, "se": se, "pass": pass}));
    };

    let contraction = stage(
        "check",
        cramer::check_contraction(&cfg.model, *draws, key(cfg, "contraction")),
    )?;
    record(
        "contraction_e_log_l",
        contraction.e_log_l.value,
        contraction.e_log_l.se,
        contraction.pass,
    );

    let m_law = stage(
        "check",
        MagnitudeLaw::linear_scale(&cfg.model, *draws, key(cfg, "cramer")),
    )?;
    let report = stage("check", cramer::analyze(&m_law, s_grid, None))?;
    record("cramer_alpha", report.alpha, 0.0, true);
    record("m_alpha", report.m_alpha, report.m_alpha_se, report.m_alpha > 0.0);
    record(
        "kappa_convexity_violations",
        report.convexity_violations as f64,
        0.0,
        report.convexity_violations == 0,
    );

    let batch = stationary(cfg, *count)?;
    let canc = stage(
        "check",
        cramer::check_cancellation(&cfg.model, &batch.samples, *theta_draws, key(cfg, "cancellation")),
    )?;
    record(
        "cancellation_fraction_violating",
        canc.fraction_violating,
        0.0,
        canc.fraction_violating == 0.0,
    );

    let x_grid: Vec<Point> = batch.samples.iter().take(64).copied().collect();
    let smooth = stage(
        "check",
        cramer::check_smoothness(
            &cfg.model,
            &x_grid,
            &[1e-3, 1e-2, 0.1, 0.5, 1.0],
            *theta_draws,
            key(cfg, "smoothness"),
        ),
    )?;
    record("smoothness_max_excess", smooth.max_excess, 0.0, smooth.pass);

    let n_law = stage(
        "check",
        MagnitudeLaw::cancellation(&cfg.model, *draws, key(cfg, "cancellation-law")),
    )?;
    let probe = stage("check", cramer::nontriviality_probe(&n_law, &m_law, s_grid))?;
    record(
        "nontriviality_last_ratio",
        probe.ratio.last().copied().unwrap_or(f64::NAN),
        0.0,
        probe.decreasing_tail,
    );

    if let Some(law) = scale_law(cfg) {
        let stab = cramer::log_moment_stability(&law, report.alpha, draws / 10, *draws, key(cfg, "log-moment"));
        record("log_moment_large", stab.large.value, stab.large.se, stab.stable);
    }

    let beta = 0.5 * report.alpha;
    let kappa_beta = stage("check", cramer::kappa(&m_law, beta))?.value;
    let bound = stage(
        "check",
        chain::moment_bound(
            &cfg.model,
            &batch.samples,
            beta,
            kappa_beta,
            *theta_draws,
            key(cfg, "moment-bound"),
        ),
    )?;
    record("moment_bound_lhs", bound.lhs, bound.lhs_se, bound.holds);

    let risk = arithmetic_risk(cfg);
    record(
        "arithmetic_risk",
        f64::from(u8::from(risk)),
        0.0,
        !risk || cfg.assertions.non_arithmetic,
    );

    out.tables = vec![table];
    let mut w = Writer::open(cfg)?;
    w.stage(out, t0)?;
    w.finish()
}
