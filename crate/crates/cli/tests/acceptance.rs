//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line to
//! stderr (bypassing the test harness capture) and then asserts.

use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use lipmaps_core::chain::{self, BackwardOptions, StationaryBatch};
use lipmaps_core::cramer::{self, MagnitudeLaw, CLOSED_FORM_TOL};
use lipmaps_core::stable::{self, Centering, Eigenfunction, Exceedance, LimitParams, TailMeasure};
use lipmaps_core::stats::{self, Estimate};
use lipmaps_core::support;
use lipmaps_core::tail::{self, SortedSample};
use lipmaps_core::{Complex64, DistributionSpec, ModelSpec, Point, StreamKey};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] AC{id:02} {name}: {detail}");
}

fn s(x: f64) -> Point {
    Point::scalar(x)
}

fn constant(v: f64) -> DistributionSpec {
    DistributionSpec::Constant(v)
}

/// Extremal `x ↦ max(Ax, 1)` with `log A ~ N(μ, 1)`, so `α = −2μ`.
fn extremal(mu: f64) -> ModelSpec {
    ModelSpec::extremal(DistributionSpec::lognormal(mu, 1.0).unwrap(), constant(1.0)).unwrap()
}

/// `E A^s` for `log A ~ N(μ, 1)`.
fn lognormal_moment(mu: f64, s: f64) -> f64 {
    (mu * s + 0.5 * s * s).exp()
}

fn letac() -> ModelSpec {
    ModelSpec::letac(
        DistributionSpec::discrete(vec![1.0 / 3.0, 2.0], vec![0.75, 0.25]).unwrap(),
        constant(0.5),
        constant(-1.0),
    )
    .unwrap()
}

const BENCH_MU: f64 = -0.75;
const BENCH_ALPHA: f64 = 1.5;
const BENCH_M_ALPHA: f64 = 0.75;

/// One million backward samples of the α = 1.5 benchmark, shared by the
/// tests that need them.
fn bench_batch() -> &'static StationaryBatch {
    static BATCH: OnceLock<StationaryBatch> = OnceLock::new();
    BATCH.get_or_init(|| {
        chain::stationary_batch(
            &extremal(BENCH_MU),
            1_000_000,
            s(0.0),
            &BackwardOptions::default(),
            2024,
        )
        .unwrap()
    })
}

#[test]
fn ac01_cramer_exponent_of_the_letac_law() {
    let start = Instant::now();
    let law = MagnitudeLaw::from_law(
        &DistributionSpec::discrete(vec![1.0 / 3.0, 2.0], vec![0.75, 0.25]).unwrap(),
        0,
        StreamKey::new(0, 0, "ac01"),
    );
    let alpha = cramer::solve_cramer(&law, None, CLOSED_FORM_TOL).unwrap();
    let elapsed = start.elapsed();
    // oracle: Newton on (3/4)3^{-s} + (1/4)2^s = 1 from s = 2
    let f = |s: f64| 0.75 * 3f64.powf(-s) + 0.25 * 2f64.powf(s) - 1.0;
    let df = |s: f64| -0.75 * 3f64.ln() * 3f64.powf(-s) + 0.25 * 2f64.ln() * 2f64.powf(s);
    let mut oracle = 2.0;
    for _ in 0..50 {
        oracle -= f(oracle) / df(oracle);
    }
    let pass = (alpha - 1.851).abs() <= 1e-3 && (alpha - oracle).abs() <= 1e-4 && elapsed < Duration::from_secs(1);
    report(
        1,
        "Cramér exponent",
        pass,
        &format!("alpha = {alpha:.7} (oracle {oracle:.7}, target 1.851 ± 1e-3) in {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn ac02_bounded_support_counterexample() {
    let start = Instant::now();
    let spec = letac();
    let cloud =
        support::enumerate_fixed_points(&spec, 6, support::DEFAULT_FIXPOINT_TOL, support::DEFAULT_DEDUPE_TOL).unwrap();
    let mut xs: Vec<f64> = cloud.points.iter().map(Point::x).collect();
    xs.sort_by(f64::total_cmp);
    let two_points = xs.len() == 2 && (xs[0] + 5.0 / 6.0).abs() <= 1e-9 && xs[1].abs() <= 1e-9;
    let batch = chain::stationary_batch(&spec, 10_000, s(0.0), &BackwardOptions::default(), 2).unwrap();
    let coverage = support::coverage_check(&cloud, &batch.samples, 1e-6).unwrap();
    let elapsed = start.elapsed();
    let pass = two_points && coverage.fraction_covered == 1.0 && elapsed < Duration::from_secs(10);
    report(
        2,
        "bounded support",
        pass,
        &format!(
            "cloud = {xs:?}, coverage = {} at eps 1e-6 in {elapsed:?}",
            coverage.fraction_covered
        ),
    );
    assert!(pass);
}

/// `S = exp(max_k W_k)` with `W` the random walk of `log A`; stops once the
/// walk sits 60 below its running maximum.
fn max_representation(mu: f64, n: usize, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let mut st = StreamKey::new(seed, i as u64, "max-representation").stream();
            let (mut w, mut best) = (0.0f64, 0.0f64);
            while w > best - 60.0 {
                w += mu + st.normal();
                best = best.max(w);
            }
            best.exp()
        })
        .collect()
}

#[test]
fn ac03_backward_sampler_matches_explicit_law() {
    let start = Instant::now();
    let n = 100_000;
    let batch = chain::stationary_batch(&extremal(BENCH_MU), n, s(0.0), &BackwardOptions::default(), 3).unwrap();
    let backward: Vec<f64> = batch.samples.iter().map(Point::x).collect();
    let explicit = max_representation(BENCH_MU, n, 4);
    let ks = stats::ks_two_sample(&backward, &explicit);
    let critical = stats::ks_two_sample_critical(n, n);
    let elapsed = start.elapsed();
    let pass = ks < critical && elapsed < Duration::from_secs(30);
    report(
        3,
        "backward vs explicit law",
        pass,
        &format!("KS = {ks:.5} < {critical:.5} (1% critical) in {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn ac04_heavy_tail_at_desk_scale() {
    let start = Instant::now();
    let spec = extremal(BENCH_MU);
    let batch = bench_batch();
    let sorted = SortedSample::from_points(&batch.samples);
    let n = sorted.len();
    let k = (n as f64).powf(2.0 / 3.0).round() as usize;
    let hill = tail::hill_estimator(&sorted, k).unwrap();
    // oracle Hill from the top order statistics
    let desc: Vec<f64> = sorted.values().iter().rev().copied().collect();
    let hill_oracle = 1.0 / (desc[..k].iter().map(|x| (x / desc[k]).ln()).sum::<f64>() / k as f64);

    let c = tail::goldie_constant(
        &spec,
        &batch.samples,
        StreamKey::new(2024, 0, "goldie"),
        BENCH_ALPHA,
        BENCH_M_ALPHA,
    )
    .unwrap();
    // oracle plateau: mean of t^α P̂(|S| > t) on 32 log-spaced t in [q.99, q.9999]
    let (lo, hi) = (sorted.quantile(0.99), sorted.quantile(0.9999));
    let plateau: f64 = (0..32)
        .map(|i| {
            let t = lo * (hi / lo).powf(i as f64 / 31.0);
            let exceed = desc.partition_point(|x| *x > t);
            t.powf(BENCH_ALPHA) * exceed as f64 / n as f64
        })
        .sum::<f64>()
        / 32.0;
    let rel = (c.value - plateau).abs() / plateau;
    let elapsed = start.elapsed();
    let pass = (1.35..=1.65).contains(&hill)
        && (hill - hill_oracle).abs() <= 1e-9
        && rel <= 0.15
        && elapsed < Duration::from_secs(300);
    report(
        4,
        "heavy tail",
        pass,
        &format!(
            "Hill(k = {k}) = {hill:.4} in [1.35, 1.65]; C = {:.4} ± {:.4} vs plateau {plateau:.4} on [{lo:.1}, {hi:.1}] ({:.1}% ≤ 15%) in {elapsed:?}",
            c.value,
            c.se,
            100.0 * rel
        ),
    );
    assert!(pass);
}

#[test]
fn ac05_moment_identity() {
    let spec = extremal(BENCH_MU);
    let batch = bench_batch();
    let sv = 0.75;
    let kappa = lognormal_moment(BENCH_MU, sv);
    let lib = tail::moment_identity_residual(
        &spec,
        sv,
        &batch.samples,
        StreamKey::new(2024, 0, "identity"),
        Estimate::exact(kappa),
        BENCH_ALPHA,
    )
    .unwrap();
    // oracle: own A draws paired with each sample
    let diffs: Vec<f64> = batch
        .samples
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let a = (BENCH_MU + StreamKey::new(7, i as u64, "oracle-a").stream().normal()).exp();
            let x = x.x();
            x.powf(sv) * (1.0 - kappa) - ((a * x).max(1.0).powf(sv) - (a * x).powf(sv))
        })
        .collect();
    let oracle = Estimate::from_samples(diffs);
    let pass = lib.residual <= 3.0 && oracle.value.abs() <= 3.0 * oracle.se;
    report(
        5,
        "moment identity",
        pass,
        &format!(
            "lhs = {:.5}, rhs = {:.5}, |lhs − rhs| = {:.2} se (≤ 3, se {:.2e}); oracle residual {:.2e} ± {:.2e}",
            lib.lhs, lib.rhs, lib.residual, lib.se, oracle.value, oracle.se
        ),
    );
    assert!(pass);
}

#[test]
fn ac06_moment_bound() {
    let spec = extremal(BENCH_MU);
    let batch = bench_batch();
    let beta = 0.75;
    let kappa = lognormal_moment(BENCH_MU, beta);
    let b = chain::moment_bound(
        &spec,
        &batch.samples,
        beta,
        kappa,
        10_000,
        StreamKey::new(2024, 0, "bound"),
    )
    .unwrap();
    // oracle: |N| = 2|B| = 2, so the bound is 2/(1 − κ(β)^{1/β})
    let rhs_oracle = 2.0 / (1.0 - kappa.powf(1.0 / beta));
    let lhs_oracle =
        (batch.samples.iter().map(|x| x.x().powf(beta)).sum::<f64>() / batch.len() as f64).powf(1.0 / beta);
    let pass =
        b.holds && (b.rhs - rhs_oracle).abs() <= 1e-9 * rhs_oracle && (b.lhs - lhs_oracle).abs() <= 1e-9 * lhs_oracle;
    report(
        6,
        "moment bound",
        pass,
        &format!(
            "(mean|S|^β)^(1/β) = {:.4} ± {:.4} ≤ {:.4} (oracle {rhs_oracle:.4})",
            b.lhs, b.lhs_se, b.rhs
        ),
    );
    assert!(pass);
}

struct IndexRecovery {
    alpha_hat: f64,
    max_z: f64,
    elapsed: Duration,
}

fn index_recovery(mu: f64, seed: u64) -> IndexRecovery {
    let start = Instant::now();
    let alpha = -2.0 * mu;
    let spec = extremal(mu);
    let replicas = 10_000;
    let centering = if alpha < 1.0 {
        Centering::None
    } else {
        let batch = chain::stationary_batch(&spec, 100_000, s(0.0), &BackwardOptions::default(), seed).unwrap();
        let m = stable::stationary_mean(
            &spec,
            &batch.samples,
            Some(lognormal_moment(mu, 1.0)),
            StreamKey::new(seed, 0, "mean"),
        )
        .unwrap();
        Centering::Mean(m.value)
    };
    let params = LimitParams::new(alpha, centering).unwrap();
    let normalized = |n: usize, seed: u64| {
        let sums = chain::birkhoff_sums(&spec, s(0.0), n, replicas, seed).unwrap();
        stable::normalize_birkhoff(&sums, n, &params).unwrap()
    };
    let one = s(1.0);
    let big = normalized(10_000, seed + 1);
    let ts = stable::cf_window(&big, &one, 0.1, 0.9, 8).unwrap();
    let fit = stable::stable_index_fit(&big, &one, &ts).unwrap();
    let small = normalized(1_000, seed + 2);
    let cf_small = stable::empirical_cf(&small, &ts, std::slice::from_ref(&one));
    let max_z = fit
        .points
        .iter()
        .zip(&cf_small)
        .map(|(a, b)| (a.value - b.value).norm() / (a.se * a.se + b.se * b.se).sqrt())
        .fold(0.0, f64::max);
    IndexRecovery {
        alpha_hat: fit.alpha_hat,
        max_z,
        elapsed: start.elapsed(),
    }
}

#[test]
fn ac07_stable_index_recovery() {
    let mut pass = true;
    let mut details = Vec::new();
    for (mu, seed) in [(-0.4, 70), (-0.75, 80)] {
        let alpha = -2.0 * mu;
        let r = index_recovery(mu, seed);
        let ok = (r.alpha_hat - alpha).abs() <= 0.15 && r.max_z <= 3.0 && r.elapsed < Duration::from_secs(600);
        pass &= ok;
        details.push(format!(
            "alpha {alpha}: alpha_hat = {:.3} (|err| ≤ 0.15: {}), CF n=1e3 vs 1e4 max z = {:.1} (≤ 3: {}) in {:?}",
            r.alpha_hat,
            (r.alpha_hat - alpha).abs() <= 0.15,
            r.max_z,
            r.max_z <= 3.0,
            r.elapsed
        ));
    }
    report(7, "stable index recovery", pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn ac08_sign_of_the_limit_constant() {
    let spec = extremal(BENCH_MU);
    let batch = bench_batch();
    let c = tail::goldie_constant(
        &spec,
        &batch.samples,
        StreamKey::new(2024, 0, "goldie"),
        BENCH_ALPHA,
        BENCH_M_ALPHA,
    )
    .unwrap();
    let g = 1.0 / SortedSample::from_points(&batch.samples).quantile(0.99);
    let measure = TailMeasure::from_stationary(&batch.samples, BENCH_ALPHA, c.estimate(), g, 0.99).unwrap();
    let h = Eigenfunction::Series {
        spec: &spec,
        reps: 64,
        trunc_tol: 1e-10,
        key: StreamKey::new(2024, 0, "h"),
    };
    let ca = stable::c_alpha(&s(1.0), &h, &measure).unwrap();
    let pass = ca.value.re + 2.0 * ca.se_re < 0.0;
    report(
        8,
        "sign of the limit constant",
        pass,
        &format!(
            "Re C = {:.4} ± {:.4} (needs < −2 se), Im C = {:.4} ± {:.4}, outer scales agree: {}",
            ca.value.re, ca.se_re, ca.value.im, ca.se_im, ca.scales_agree
        ),
    );
    assert!(pass);
}

#[test]
fn ac09_gaussian_regime() {
    let start = Instant::now();
    let mu = -1.0;
    let spec = extremal(mu);
    let batch = chain::stationary_batch(&spec, 100_000, s(0.0), &BackwardOptions::default(), 90).unwrap();
    let m = stable::stationary_mean(
        &spec,
        &batch.samples,
        Some(lognormal_moment(mu, 1.0)),
        StreamKey::new(90, 0, "mean"),
    )
    .unwrap();
    let params = LimitParams::new(2.0, Centering::Mean(m.value)).unwrap();
    let n = 10_000;
    let sums = chain::birkhoff_sums(&spec, s(0.0), n, 10_000, 91).unwrap();
    let z = stable::project(&stable::normalize_birkhoff(&sums, n, &params).unwrap(), &s(1.0));
    let g = stable::gaussian_check(&z).unwrap();
    let pass = g.pass && g.skewness.abs() <= 0.15 && g.excess_kurtosis.abs() <= 0.3;
    report(
        9,
        "alpha = 2 regime",
        pass,
        &format!(
            "KS = {:.4} vs {:.4}, skew = {:.2} (≤ 0.15), excess kurtosis = {:.1} (≤ 0.3) in {:?}",
            g.ks,
            g.critical,
            g.skewness,
            g.excess_kurtosis,
            start.elapsed()
        ),
    );
    assert!(pass);
}

/// `∫₀^∞ (e^{ir} − 1) r^{−3/2} dr`: power series on `[0, 1]`, composite
/// Simpson on `[1, X]` and one integration by parts beyond `X`.
fn synthetic_oracle() -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut head = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..40 {
        term = term * i / k as f64;
        head += term / (k as f64 - 0.5);
    }
    let x_end = 1.0 + 2.0 * std::f64::consts::PI * 2000.0;
    let steps = 2_000_000usize;
    let h = (x_end - 1.0) / steps as f64;
    let f = |r: f64| Complex64::new(r.cos(), r.sin()) * r.powf(-1.5);
    let mut body = f(1.0) + f(x_end);
    for j in 1..steps {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        body += f(1.0 + j as f64 * h) * w;
    }
    body *= h / 3.0;
    let tail = i * Complex64::new(x_end.cos(), x_end.sin()) * x_end.powf(-1.5);
    head + body + tail - 2.0
}

#[test]
fn ac10_synthetic_limit_constant() {
    let oracle = synthetic_oracle();
    let analytic = Complex64::new(-1.0, 1.0) * (2.0 * std::f64::consts::PI).sqrt();
    let measure = TailMeasure::polar(0.5, vec![(s(1.0), 1.0)], 1_000_000, StreamKey::new(10, 0, "synthetic"));
    let c = stable::c_alpha(&s(1.0), &Eigenfunction::Unit, &measure).unwrap();
    let pass = (c.value.re - oracle.re).abs() <= 3.0 * c.se_re
        && (c.value.im - oracle.im).abs() <= 3.0 * c.se_im
        && (oracle - analytic).norm() <= 1e-6;
    report(
        10,
        "synthetic C_alpha",
        pass,
        &format!(
            "C = {:.5}{:+.5}i (se {:.1e}, {:.1e}) vs quadrature {:.6}{:+.6}i",
            c.value.re, c.value.im, c.se_re, c.se_im, oracle.re, oracle.im
        ),
    );
    assert!(pass);
}

const LETAC_CFG: &str = "\
[model]
family = letac
[distributions.a]
kind = discrete
values = 1/3, 2
probabilities = 3/4, 1/4
[distributions.b]
kind = constant
value = 1/2
[distributions.c]
kind = constant
value = -1
[experiment]
seed = 5
count = 3000
[assertions]
non_arithmetic = true
";

const EXTREMAL_CFG: &str = "\
[model]
family = extremal
[distributions.a]
kind = lognormal
meanlog = -0.75
sdlog = 1
[distributions.b]
kind = constant
value = 1
[experiment]
seed = 6
count = 50000
n = 1000
replicas = 2000
compare_n = 100
mean_count = 20000
draws = 20000
theta_draws = 50
";

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn ac11_reproducible_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_lipmaps");
    let runs = [
        ("cramer", LETAC_CFG),
        ("simulate", LETAC_CFG),
        ("support", LETAC_CFG),
        ("tail", EXTREMAL_CFG),
        ("limit", EXTREMAL_CFG),
        ("check", EXTREMAL_CFG),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (verb, cfg) in runs {
        let cfg_path = tmp.path().join(format!("{verb}.cfg"));
        std::fs::write(&cfg_path, cfg).unwrap();
        let mut outputs = Vec::new();
        for (threads, tag) in [(1, "a"), (8, "b"), (1, "c")] {
            let out = tmp.path().join(format!("{verb}-{tag}"));
            let status = Command::new(bin)
                .args([verb, "--config"])
                .arg(&cfg_path)
                .arg("--out")
                .arg(&out)
                .args(["--threads", &threads.to_string()])
                .output()
                .unwrap()
                .status;
            assert!(status.success(), "{verb} exited with {status}");
            outputs.push(csv_files(&out));
        }
        let same = !outputs[0].is_empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
        pass &= same;
        details.push(format!(
            "{verb}: {} files {}",
            outputs[0].len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    report(11, "reproducibility", pass, &details.join(", "));
    assert!(pass);
}

/// One named sampled property.
fn property(name: &str, ok: bool, detail: String, log: &mut Vec<String>) -> bool {
    log.push(format!("{name} {} ({detail})", if ok { "ok" } else { "FAILED" }));
    ok
}

#[test]
fn ac12_property_suites() {
    use lipmaps_core::random::sample_theta;
    let mut log = Vec::new();
    let mut pass = true;
    let bench = extremal(BENCH_MU);
    let models = [
        ("extremal", bench.clone()),
        ("letac", letac()),
        (
            "affine",
            ModelSpec::affine_1d(
                DistributionSpec::lognormal(-1.0, 0.5).unwrap(),
                DistributionSpec::normal(0.0, 1.0).unwrap(),
            )
            .unwrap(),
        ),
        (
            "sqrt_quadratic",
            ModelSpec::sqrt_quadratic(
                DistributionSpec::lognormal(-1.0, 0.5).unwrap(),
                constant(0.0),
                constant(1.0),
            )
            .unwrap(),
        ),
    ];

    // Lipschitz and dilation on random pairs
    let mut worst_lip = f64::NEG_INFINITY;
    let mut worst_dil = 0.0f64;
    for (mi, (_, spec)) in models.iter().enumerate() {
        let mut st = StreamKey::new(12, mi as u64, "pairs").stream();
        for _ in 0..2000 {
            let th = sample_theta(spec, &mut st).unwrap();
            let (x, y) = (s(4.0 * st.normal()), s(4.0 * st.normal()));
            let gap = spec.apply(&th, &x).unwrap().distance(&spec.apply(&th, &y).unwrap());
            worst_lip = worst_lip.max(gap - spec.lipschitz_bound(&th) * x.distance(&y));
            let t = st.uniform() + 0.01;
            let direct = spec.apply(&th, &x.scale(1.0 / t)).unwrap().scale(t);
            worst_dil = worst_dil.max(spec.apply_dilated(&th, t, &x).unwrap().distance(&direct) / (1.0 + x.norm()));
        }
    }
    pass &= property(
        "lipschitz",
        worst_lip <= 1e-9,
        format!("max excess {worst_lip:.1e}"),
        &mut log,
    );
    pass &= property(
        "dilation",
        worst_dil <= 1e-9,
        format!("max gap {worst_dil:.1e}"),
        &mut log,
    );

    // cancellation and smoothness on stationary points
    for (mi, (name, spec)) in models.iter().enumerate() {
        let b = chain::stationary_batch(spec, 500, s(0.0), &BackwardOptions::default(), 120 + mi as u64).unwrap();
        let canc = cramer::check_cancellation(spec, &b.samples, 100, StreamKey::new(12, mi as u64, "canc")).unwrap();
        pass &= property(
            &format!("cancellation[{name}]"),
            canc.fraction_violating == 0.0,
            format!("max {:.1e}", canc.max_violation),
            &mut log,
        );
        let sm = cramer::check_smoothness(
            spec,
            &b.samples[..50],
            &[1e-3, 0.1, 1.0],
            100,
            StreamKey::new(12, mi as u64, "smooth"),
        )
        .unwrap();
        pass &= property(
            &format!("smoothness[{name}]"),
            sm.pass,
            format!("max excess {:.1e}", sm.max_excess),
            &mut log,
        );
    }

    // κ convexity on a Monte Carlo law
    let law = MagnitudeLaw::sampled(
        &DistributionSpec::lognormal(-0.75, 1.0).unwrap(),
        200_000,
        StreamKey::new(12, 0, "kappa"),
    );
    let grid: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64).collect();
    let rep = cramer::analyze(&law, &grid, None).unwrap();
    pass &= property(
        "kappa convexity",
        rep.convexity_violations == 0 && (rep.alpha - 1.5).abs() < 0.05,
        format!("{} violations, alpha {:.3}", rep.convexity_violations, rep.alpha),
        &mut log,
    );

    // h_v bound and Hölder modulus, δ = α/2
    let kd = lognormal_moment(BENCH_MU, 0.75);
    let mut worst_h = f64::NEG_INFINITY;
    for &(x, y) in &[(0.1, 0.5), (0.5, 3.0), (1.0, 1.2)] {
        let hx = stable::h_v(&bench, &s(x), &s(1.0), 2000, 1e-10, StreamKey::new(12, 0, "hx")).unwrap();
        let hy = stable::h_v(&bench, &s(y), &s(1.0), 2000, 1e-10, StreamKey::new(12, 0, "hy")).unwrap();
        let slack = 3.0 * (hx.se.powi(2) + hy.se.powi(2)).sqrt();
        worst_h = worst_h.max((hx.value - hy.value).norm() - 2.0 / (1.0 - kd) * (x - y).abs().powf(0.75) - slack);
        worst_h = worst_h.max(hx.value.norm() - 1.0 - 3.0 * hx.se);
    }
    pass &= property(
        "h_v bound and modulus",
        worst_h <= 0.0,
        format!("max excess {worst_h:.2e}"),
        &mut log,
    );

    // Λ homogeneity: Λ(|x| > 2) = 2^{−α} Λ(|x| > 1)
    let samples = &bench_batch().samples[..200_000];
    let g = 1.0 / SortedSample::from_points(samples).quantile(0.99);
    let l1 = stable::lambda_functional(&Exceedance(1.0), samples, g, BENCH_ALPHA).unwrap();
    let l2 = stable::lambda_functional(&Exceedance(2.0), samples, g, BENCH_ALPHA).unwrap();
    let k = 2f64.powf(-BENCH_ALPHA);
    let se = (l2.se.powi(2) + (k * l1.se).powi(2)).sqrt();
    pass &= property(
        "lambda homogeneity",
        (l2.value - k * l1.value).abs() <= 3.0 * se,
        format!("{:.4} vs {:.4} ± {:.4}", l2.value, k * l1.value, se),
        &mut log,
    );

    // forward and backward iterates share their law
    let n = 20_000;
    let fwd: Vec<f64> = (0..n)
        .map(|i| {
            chain::forward_iterate(&bench, s(0.0), 200, &mut StreamKey::new(12, i as u64, "fwd").stream())
                .unwrap()
                .x()
        })
        .collect();
    let bwd: Vec<f64> = chain::stationary_batch(&bench, n, s(0.0), &BackwardOptions::default(), 121)
        .unwrap()
        .samples
        .iter()
        .map(Point::x)
        .collect();
    let ks = stats::ks_two_sample(&fwd, &bwd);
    let crit = stats::ks_two_sample_critical(n, n);
    pass &= property(
        "forward = backward",
        ks < crit,
        format!("KS {ks:.4} < {crit:.4}"),
        &mut log,
    );

    // support-cloud closure: frontier fraction never grows with depth
    let dense = ModelSpec::affine_1d(
        DistributionSpec::discrete(vec![0.3, 0.6], vec![0.5, 0.5]).unwrap(),
        DistributionSpec::discrete(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap(),
    )
    .unwrap();
    let fractions: Vec<f64> = (2..=8)
        .map(|d| {
            let cl =
                support::enumerate_fixed_points(&dense, d, support::DEFAULT_FIXPOINT_TOL, support::DEFAULT_DEDUPE_TOL)
                    .unwrap();
            support::closure_check(&dense, &cl, 2, 1e-3).unwrap().frontier_fraction
        })
        .collect();
    pass &= property(
        "support closure",
        fractions.windows(2).all(|w| w[1] <= w[0]),
        format!("frontier {:.3} → {:.3}", fractions[0], fractions[fractions.len() - 1]),
        &mut log,
    );

    report(12, "property suites", pass, &log.join("; "));
    assert!(pass);
}
