//! The moment function `κ(s) = E|M|^s`, its Cramér root and the sampled
//! assumption checks.
//!
//! `κ` is evaluated in closed form when the law of `|M|` allows it, and
//! otherwise as a Monte Carlo mean over one fixed set of draws of `log|M|`
//! (common random numbers), so that `s ↦ κ̂(s)` is a deterministic convex
//! function and bisection on it is well behaved.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::Point;
use crate::model::{Family, ModelSpec};
use crate::random::{sample_theta, DistributionSpec, StreamKey};
use crate::stats::{Estimate, MeanVar};

/// Default number of Monte Carlo draws for `κ`.
pub const DEFAULT_MC_DRAWS: usize = 1_000_000;
pub const CLOSED_FORM_TOL: f64 = 1e-6;
pub const MONTE_CARLO_TOL: f64 = 1e-3;

const CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Method::ClosedForm => CLOSED_FORM_TOL,
            Method::MonteCarlo => MONTE_CARLO_TOL,
        }
    }
}

/// Law of a nonnegative magnitude such as `|M|` or `|N|`.
#[derive(Clone, Debug, PartialEq)]
pub enum MagnitudeLaw {
    /// `|X|` for `X` drawn from a law with closed-form absolute moments.
    Exact(DistributionSpec),
    /// Fixed draws of `log|X|` (`-∞` for zeros).
    Empirical(Vec<f64>),
}

impl MagnitudeLaw {
    /// Closed form when available, otherwise `n` draws from `key`.
    pub fn from_law(law: &DistributionSpec, n: usize, key: StreamKey) -> Self {
        if law.closed_form_moment(1.0).is_some() {
            MagnitudeLaw::Exact(law.clone())
        } else {
            MagnitudeLaw::sampled(law, n, key)
        }
    }

    pub fn sampled(law: &DistributionSpec, n: usize, key: StreamKey) -> Self {
        let mut stream = key.stream();
        MagnitudeLaw::Empirical((0..n).map(|_| law.sample(&mut stream).abs().ln()).collect())
    }

    pub fn from_magnitudes(values: &[f64]) -> Self {
        MagnitudeLaw::Empirical(values.iter().map(|v| v.abs().ln()).collect())
    }

    /// Law of `|M_θ|` for `θ ~ μ`.
    pub fn linear_scale(spec: &ModelSpec, n: usize, key: StreamKey) -> Result<Self> {
        let exact = match spec.family() {
            Family::Affine | Family::Extremal | Family::Letac => spec.law("a").cloned(),
            Family::SqrtQuadratic => {
                let (a, b, c) = (spec.law("a"), spec.law("b"), spec.law("c"));
                match (a, b, c) {
                    // without rejections the law of A is unconditioned
                    (Some(a), Some(b), Some(c)) if b.support().1.powi(2) < 4.0 * a.support().0 * c.support().0 => {
                        a.sqrt_law()
                    }
                    _ => None,
                }
            }
            Family::Arch1 => {
                let k = spec.arch1_constants();
                match (spec.law("a").and_then(DistributionSpec::atoms), k) {
                    (Some(atoms), Some(k)) => {
                        let (values, probs) = atoms
                            .iter()
                            .map(|(v, p)| ((k.gamma + k.lambda.sqrt() * v).abs(), *p))
                            .unzip();
                        Some(DistributionSpec::DiscreteTable {
                            values,
                            probabilities: probs,
                        })
                    }
                    _ => None,
                }
            }
        };
        match exact {
            Some(law) if law.closed_form_moment(1.0).is_some() => Ok(MagnitudeLaw::Exact(law)),
            _ => {
                let mut stream = key.stream();
                let logs = (0..n)
                    .map(|_| sample_theta(spec, &mut stream).map(|th| spec.linear_part(&th).scale.abs().ln()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(MagnitudeLaw::Empirical(logs))
            }
        }
    }

    /// Sampled law of the cancellation bound `|N_θ|`.
    pub fn cancellation(spec: &ModelSpec, n: usize, key: StreamKey) -> Result<Self> {
        let mut stream = key.stream();
        let logs = (0..n)
            .map(|_| sample_theta(spec, &mut stream).map(|th| spec.cancellation_bound(&th).abs().ln()))
            .collect::<Result<Vec<_>>>()?;
        Ok(MagnitudeLaw::Empirical(logs))
    }

    pub fn method(&self) -> Method {
        match self {
            MagnitudeLaw::Exact(_) => Method::ClosedForm,
            MagnitudeLaw::Empirical(_) => Method::MonteCarlo,
        }
    }

    /// `E log|X|`.
    pub fn mean_log(&self) -> Estimate {
        match self {
            MagnitudeLaw::Exact(law) => match law {
                DistributionSpec::LogNormal { meanlog, .. } => Estimate::exact(*meanlog),
                _ => Estimate::exact(
                    law.atoms()
                        .map(|a| a.iter().map(|(v, p)| p * v.abs().ln()).sum())
                        .unwrap_or(f64::NAN),
                ),
            },
            MagnitudeLaw::Empirical(logs) => Estimate::from_samples(logs.iter().copied()),
        }
    }

    /// `E|X|^s` with its standard error; `s = 0` gives exactly 1.
    pub fn moment(&self, s: f64) -> Result<Estimate> {
        if !(s >= 0.0) {
            return Err(Error::Precondition(alloc::format!("κ(s) needs s ≥ 0 (got {s})")));
        }
        if s == 0.0 {
            return Ok(Estimate::exact(1.0));
        }
        let est = match self {
            MagnitudeLaw::Exact(law) => Estimate::exact(law.closed_form_moment(s).unwrap_or(f64::NAN)),
            MagnitudeLaw::Empirical(logs) => chunked_mean(logs, |l| (s * l).exp()),
        };
        if est.value.is_finite() && est.se.is_finite() {
            Ok(est)
        } else {
            Err(Error::Divergence { s })
        }
    }

    /// `E(|X|^s log|X|)`.
    pub fn log_moment(&self, s: f64) -> Result<Estimate> {
        let est = match self {
            MagnitudeLaw::Exact(law) => Estimate::exact(law.closed_form_log_moment(s).unwrap_or(f64::NAN)),
            MagnitudeLaw::Empirical(logs) => {
                chunked_mean(logs, |l| if l == f64::NEG_INFINITY { 0.0 } else { (s * l).exp() * l })
            }
        };
        if est.value.is_finite() {
            Ok(est)
        } else {
            Err(Error::Divergence { s })
        }
    }
}

/// Mean over fixed-size chunks merged in index order, so the result does not
/// depend on the thread count.
fn chunked_mean<F: Fn(f64) -> f64 + Sync + Send>(xs: &[f64], f: F) -> Estimate {
    let chunks = xs.len().div_ceil(CHUNK);
    let parts = exec::map_indexed(chunks, |c| {
        let mut acc = (0.0f64, 0.0f64);
        for x in &xs[c * CHUNK..((c + 1) * CHUNK).min(xs.len())] {
            let v = f(*x);
            acc.0 += v;
            acc.1 += v * v;
        }
        acc
    });
    let (sum, sq) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let n = xs.len() as f64;
    let mean = sum / n;
    let var = ((sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Estimate {
        value: mean,
        se: (var / n).sqrt(),
    }
}

/// `κ(s) = E|M|^s`.
pub fn kappa(law: &MagnitudeLaw, s: f64) -> Result<Estimate> {
    law.moment(s)
}

/// The Cramér root `α > 0` with `κ(α) = 1`, by bisection.
///
/// Without a bracket the search walks the ladder `s = 2^k`,
/// `k = −10, …, 10`, for the first sign change of `κ − 1`.
pub fn solve_cramer(law: &MagnitudeLaw, bracket: Option<(f64, f64)>, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = match bracket {
        Some((lo, hi)) => {
            if !(lo > 0.0 && hi > lo) || !(kappa(law, lo)?.value < 1.0) || !(kappa(law, hi)?.value > 1.0) {
                return Err(Error::NoCramerExponent { lo, hi });
            }
            (lo, hi)
        }
        None => auto_bracket(law)?,
    };
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let k = kappa(law, mid)?.value;
        if (k - 1.0).abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if k < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

fn auto_bracket(law: &MagnitudeLaw) -> Result<(f64, f64)> {
    let (first, last) = (1.0 / 1024.0, 1024.0);
    if !(law.mean_log().value < 0.0) {
        return Err(Error::NoCramerExponent { lo: first, hi: last });
    }
    let mut below = None;
    let mut s = first;
    while s <= last {
        let k = kappa(law, s)?.value;
        if k < 1.0 {
            below = Some(s);
        } else if k > 1.0 {
            if let Some(lo) = below {
                return Ok((lo, s));
            }
        }
        s *= 2.0;
    }
    Err(Error::NoCramerExponent { lo: first, hi: last })
}

/// `m_α = E(|M|^α log|M|)`; must be positive at the Cramér root.
pub fn m_alpha(law: &MagnitudeLaw, alpha: f64) -> Result<Estimate> {
    let m = law.log_moment(alpha)?;
    if m.value > 0.0 {
        Ok(m)
    } else {
        Err(Error::InvalidExponent(alloc::format!(
            "m_α = {} ≤ 0 at α = {alpha}; α is not a Cramér root",
            m.value
        )))
    }
}

/// Lower bound on `s_∞`: the last rung `s = 2^k` of the ladder where the
/// Monte Carlo `κ` stays finite with relative standard error ≤ 50%.
/// Closed-form laws report `∞`.
pub fn s_infinity_probe(law: &MagnitudeLaw) -> f64 {
    if law.method() == Method::ClosedForm {
        return f64::INFINITY;
    }
    let mut last = 0.0;
    let mut s = 1.0;
    while s <= 1024.0 {
        match kappa(law, s) {
            Ok(k) if k.se <= 0.5 * k.value => last = s,
            _ => break,
        }
        s *= 2.0;
    }
    last
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaPoint {
    pub s: f64,
    pub kappa: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CramerReport {
    /// Requested grid plus the root, sorted by `s`.
    pub grid: Vec<KappaPoint>,
    pub alpha: f64,
    pub m_alpha: f64,
    pub m_alpha_se: f64,
    pub s_infinity_probe: f64,
    pub method: Method,
    pub solver_tolerance: f64,
    /// Midpoint triples on the grid violating convexity of `log κ`.
    pub convexity_violations: usize,
}

/// Grid of `κ`, root, `m_α`, `s_∞` probe and convexity test in one pass.
pub fn analyze(law: &MagnitudeLaw, s_grid: &[f64], tol: Option<f64>) -> Result<CramerReport> {
    let method = law.method();
    let tol = tol.unwrap_or(method.default_tolerance());
    let alpha = solve_cramer(law, None, tol)?;
    let m = m_alpha(law, alpha)?;
    let mut grid = Vec::with_capacity(s_grid.len() + 1);
    for &s in s_grid {
        // beyond s_∞ the grid simply stops
        match kappa(law, s) {
            Ok(k) => grid.push(KappaPoint {
                s,
                kappa: k.value,
                se: k.se,
            }),
            Err(Error::Divergence { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let convexity_violations = convexity_violations(&grid);
    let k = kappa(law, alpha)?;
    grid.push(KappaPoint {
        s: alpha,
        kappa: k.value,
        se: k.se,
    });
    grid.sort_by(|a, b| a.s.total_cmp(&b.s));
    Ok(CramerReport {
        grid,
        alpha,
        m_alpha: m.value,
        m_alpha_se: m.se,
        s_infinity_probe: s_infinity_probe(law),
        method,
        solver_tolerance: tol,
        convexity_violations,
    })
}

/// Counts triples `s₁ < s₂ < s₃` (consecutive, `s₂` the midpoint) with
/// `log κ(s₂) > (log κ(s₁) + log κ(s₃))/2 + 3·(combined se)`.
pub fn convexity_violations(grid: &[KappaPoint]) -> usize {
    grid.windows(3)
        .filter(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let midpoint = (b.s - 0.5 * (a.s + c.s)).abs() <= 1e-9 * c.s.abs().max(1.0);
            if !midpoint || a.kappa <= 0.0 || b.kappa <= 0.0 || c.kappa <= 0.0 {
                return false;
            }
            // standard errors of log κ by the delta method
            let (ea, eb, ec) = (a.se / a.kappa, b.se / b.kappa, c.se / c.kappa);
            let se = (eb * eb + 0.25 * (ea * ea + ec * ec)).sqrt();
            b.kappa.ln() > 0.5 * (a.kappa.ln() + c.kappa.ln()) + 3.0 * se + 1e-12
        })
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionReport {
    pub e_log_l: Estimate,
    pub pass: bool,
}

/// Monte Carlo `E log L_θ`; passes iff `mean + 3·se < 0`.
pub fn check_contraction(spec: &ModelSpec, n_samples: usize, key: StreamKey) -> Result<ContractionReport> {
    let mut stream = key.stream();
    let mut acc = MeanVar::default();
    for _ in 0..n_samples {
        let th = sample_theta(spec, &mut stream)?;
        acc.push(spec.lipschitz_bound(&th).max(1e-300).ln());
    }
    let e = acc.estimate();
    let se = if e.se.is_finite() { e.se } else { 0.0 };
    Ok(ContractionReport {
        e_log_l: e,
        pass: e.value + 3.0 * se < 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CancellationReport {
    /// `max (|ψ_θ(x) − M_θx| − |N_θ|)` over all pairs.
    pub max_violation: f64,
    /// Share of pairs with a violation above `1e-10·(1 + |x|)`.
    pub fraction_violating: f64,
    pub pairs: usize,
}

/// Tests `|ψ_θ(x) − M_θx| ≤ |N_θ|` for every point against `n_theta` draws.
pub fn check_cancellation(
    spec: &ModelSpec,
    points: &[Point],
    n_theta: usize,
    key: StreamKey,
) -> Result<CancellationReport> {
    let mut stream = key.stream();
    let thetas = (0..n_theta)
        .map(|_| sample_theta(spec, &mut stream))
        .collect::<Result<Vec<_>>>()?;
    let mut max_violation = f64::NEG_INFINITY;
    let mut violating = 0usize;
    for x in points {
        for th in &thetas {
            let gap = spec.apply(th, x)?.distance(&spec.linear_part(th).apply(x));
            let v = gap - spec.cancellation_bound(th);
            max_violation = max_violation.max(v);
            if v > 1e-10 * (1.0 + x.norm()) {
                violating += 1;
            }
        }
    }
    let pairs = points.len() * thetas.len();
    Ok(CancellationReport {
        max_violation,
        fraction_violating: if pairs == 0 {
            0.0
        } else {
            violating as f64 / pairs as f64
        },
        pairs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessReport {
    /// `max (|ψ_{θ,t}(x) − ψ̄_θ(x)| − t|Q_θ|) / (1 + |x|)` over the grid.
    pub max_excess: f64,
    pub pass: bool,
}

pub fn check_smoothness(
    spec: &ModelSpec,
    x_grid: &[Point],
    t_grid: &[f64],
    n_theta: usize,
    key: StreamKey,
) -> Result<SmoothnessReport> {
    let mut stream = key.stream();
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..n_theta {
        let th = sample_theta(spec, &mut stream)?;
        let q = spec.smoothness_bound(&th);
        for x in x_grid {
            let lim = spec.limit_map(&th, x)?;
            for &t in t_grid {
                let d = spec.apply_dilated(&th, t, x)?.distance(&lim);
                max_excess = max_excess.max((d - t * q) / (1.0 + x.norm()));
            }
        }
    }
    Ok(SmoothnessReport {
        max_excess,
        pass: max_excess <= 1e-10,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NontrivialityProbe {
    pub s: Vec<f64>,
    /// `E|N|^s / κ(s)`.
    pub ratio: Vec<f64>,
    /// `(E|N|^s / κ(s))^{1/s}`.
    pub root: Vec<f64>,
    /// The last three ratios are non-increasing.
    pub decreasing_tail: bool,
}

/// Heuristic look at `E|N|^s/κ(s)` as `s` grows; stops at the first `s`
/// where either moment diverges.
pub fn nontriviality_probe(n_law: &MagnitudeLaw, m_law: &MagnitudeLaw, s_grid: &[f64]) -> Result<NontrivialityProbe> {
    let mut probe = NontrivialityProbe {
        s: Vec::new(),
        ratio: Vec::new(),
        root: Vec::new(),
        decreasing_tail: false,
    };
    for &s in s_grid {
        if !(s > 0.0) {
            return Err(Error::Precondition("nontriviality probe needs s > 0".into()));
        }
        let (n, k) = match (n_law.moment(s), m_law.moment(s)) {
            (Ok(n), Ok(k)) => (n.value, k.value),
            (Err(Error::Divergence { .. }), _) | (_, Err(Error::Divergence { .. })) => break,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let r = n / k;
        probe.s.push(s);
        probe.ratio.push(r);
        probe.root.push(r.powf(1.0 / s));
    }
    let m = probe.ratio.len();
    probe.decreasing_tail =
        m >= 3 && probe.ratio[m - 3] >= probe.ratio[m - 2] && probe.ratio[m - 2] >= probe.ratio[m - 1];
    Ok(probe)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMomentStability {
    pub small: Estimate,
    pub large: Estimate,
    pub stable: bool,
}

/// Finiteness check for `E(|M|^α |log|M||)`: Monte Carlo means on two
/// independent sample sizes must be finite and agree within 3 combined se.
pub fn log_moment_stability(
    law: &DistributionSpec,
    alpha: f64,
    n_small: usize,
    n_large: usize,
    key: StreamKey,
) -> LogMomentStability {
    let run = |n: usize, k: StreamKey| {
        let mut stream = k.stream();
        Estimate::from_samples((0..n).map(|_| {
            let m = law.sample(&mut stream).abs();
            if m == 0.0 {
                0.0
            } else {
                m.powf(alpha) * m.ln().abs()
            }
        }))
    };
    let small = run(n_small, key.child("small", 0));
    let large = run(n_large, key.child("large", 0));
    let se = (small.se * small.se + large.se * large.se).sqrt();
    LogMomentStability {
        small,
        large,
        stable: small.value.is_finite() && large.value.is_finite() && (small.value - large.value).abs() <= 3.0 * se,
    }
}
