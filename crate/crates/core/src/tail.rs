//! Tail diagnostics for stationary samples: survival curves, Hill estimates,
//! the pairwise tail constant, the moment identity and direction histograms.
//!
//! The tail constant is computed as
//! `C = E(|ψ_θ(S)|^α − |M_θS|^α) / (α m_α)` with `θ` independent of `S`.
//! Both terms have infinite mean, so every summand is formed from one
//! `(θ, S)` pair before averaging.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::Point;
use crate::model::ModelSpec;
use crate::random::{sample_theta, StreamKey};
use crate::stats::{median_of_means, Estimate, MeanVar};

/// Block count for median-of-means standard errors.
pub const MOM_BLOCKS: usize = 32;
/// Default plateau window in quantiles of `|S|`.
pub const PLATEAU_QUANTILES: (f64, f64) = (0.99, 0.9999);

const BLOCK: usize = 1 << 14;

/// `|S_i|` sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn from_values(xs: &[f64]) -> Self {
        let mut values: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        values.sort_by(f64::total_cmp);
        SortedSample { values }
    }

    pub fn from_points(points: &[Point]) -> Self {
        let mut values: Vec<f64> = points.iter().map(Point::norm).collect();
        values.sort_by(f64::total_cmp);
        SortedSample { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Share of values strictly above `t`.
    pub fn survival(&self, t: f64) -> f64 {
        let above = self.values.len() - self.values.partition_point(|v| *v <= t);
        above as f64 / self.values.len() as f64
    }

    /// Empirical quantile (lower order statistic at `⌊q(n−1)⌋`).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.values.len();
        let i = ((q.clamp(0.0, 1.0) * (n - 1) as f64).floor() as usize).min(n - 1);
        self.values[i]
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalRow {
    pub t: f64,
    pub p_hat: f64,
    pub t_alpha_p: f64,
}

/// Empirical `P(|S| > t)` and `t^α P̂` on an increasing positive grid.
pub fn survival_curve(sample: &SortedSample, t_grid: &[f64], alpha: f64) -> Result<Vec<SurvivalRow>> {
    if sample.is_empty() {
        return Err(Error::Degenerate("survival curve of an empty sample".into()));
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition(
            "survival grid must be positive and increasing".into(),
        ));
    }
    Ok(t_grid
        .iter()
        .map(|&t| {
            let p = sample.survival(t);
            SurvivalRow {
                t,
                p_hat: p,
                t_alpha_p: t.powf(alpha) * p,
            }
        })
        .collect())
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || lo == hi {
        return alloc::vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// `⌊n^{2/3}⌋`, kept inside `[1, n−1]`.
pub fn default_hill_k(n: usize) -> usize {
    ((n as f64).powf(2.0 / 3.0).floor() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Hill estimate `k / Σ_{i≤k} log(X_{(n−i+1)} / X_{(n−k)})`.
pub fn hill_estimator(sample: &SortedSample, k: usize) -> Result<f64> {
    let n = sample.len();
    if k == 0 || k >= n {
        return Err(Error::Precondition(alloc::format!(
            "Hill needs 1 ≤ k < n (k = {k}, n = {n})"
        )));
    }
    let v = sample.values();
    let threshold = v[n - k - 1];
    if !(threshold > 0.0) {
        return Err(Error::Degenerate(alloc::format!(
            "Hill threshold order statistic is {threshold}; shift or filter the sample"
        )));
    }
    let lt = threshold.ln();
    let sum: f64 = v[n - k..].iter().map(|x| x.ln() - lt).sum();
    if !(sum > 0.0) {
        return Err(Error::Degenerate(
            "Hill estimator undefined: no log excesses above the threshold".into(),
        ));
    }
    Ok(k as f64 / sum)
}

/// `(k, α̂_k)` on a log-spaced set of `k` from 10 up to `n/2`.
pub fn hill_curve(sample: &SortedSample, points: usize) -> Vec<(usize, f64)> {
    let n = sample.len();
    if n < 4 {
        return Vec::new();
    }
    let hi = (n / 2).max(2);
    let lo = 10.min(hi);
    let mut ks: Vec<usize> = log_grid(lo as f64, hi as f64, points)
        .into_iter()
        .map(|k| k.round() as usize)
        .collect();
    ks.dedup();
    ks.into_iter()
        .filter_map(|k| hill_estimator(sample, k).ok().map(|a| (k, a)))
        .collect()
}

/// `C = E(|ψ_θ(S)|^α − |M_θS|^α)/(α m_α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailConstant {
    pub value: f64,
    /// Median-of-means standard error.
    pub se: f64,
    pub plain_se: f64,
    pub median_of_means: f64,
    pub alpha: f64,
    pub m_alpha: f64,
    /// Plain and robust standard errors disagree by more than a factor 3.
    pub se_unreliable: bool,
}

impl TailConstant {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.value,
            se: self.se,
        }
    }
}

/// `|ψ_θ(S_i)|^s − |M_θS_i|^s` with one fresh `θ` per sample; block `b` of
/// samples draws from `key.child("block", b)`.
pub fn pairwise_differences(spec: &ModelSpec, samples: &[Point], s: f64, key: StreamKey) -> Result<Vec<f64>> {
    let blocks = samples.len().div_ceil(BLOCK);
    let parts = exec::try_map_indexed(blocks, |b| {
        let mut stream = key.child("block", b as u64).stream();
        let chunk = &samples[b * BLOCK..((b + 1) * BLOCK).min(samples.len())];
        chunk
            .iter()
            .map(|x| {
                let th = sample_theta(spec, &mut stream)?;
                let image = spec.apply(&th, x)?.norm();
                let linear = spec.linear_part(&th).scale.abs() * x.norm();
                Ok(image.powf(s) - linear.powf(s))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(parts.concat())
}

pub fn goldie_constant(
    spec: &ModelSpec,
    samples: &[Point],
    key: StreamKey,
    alpha: f64,
    m_alpha: f64,
) -> Result<TailConstant> {
    if samples.len() < MOM_BLOCKS {
        return Err(Error::Degenerate(alloc::format!(
            "tail constant needs at least {MOM_BLOCKS} stationary samples"
        )));
    }
    if !(alpha > 0.0 && m_alpha > 0.0) {
        return Err(Error::Precondition("tail constant needs α > 0 and m_α > 0".into()));
    }
    let d = pairwise_differences(spec, samples, alpha, key)?;
    let mom = median_of_means(&d, MOM_BLOCKS)?;
    let k = 1.0 / (alpha * m_alpha);
    let (robust, plain) = (mom.robust_se * k, mom.plain_se * k);
    let ratio = if robust > 0.0 && plain > 0.0 {
        (robust / plain).max(plain / robust)
    } else if robust == plain {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(TailConstant {
        value: mom.mean * k,
        se: robust,
        plain_se: plain,
        median_of_means: mom.median_of_means * k,
        alpha,
        m_alpha,
        se_unreliable: ratio > 3.0,
    })
}

/// `σ_Λ(S^{d−1}) = α C`.
pub fn sigma_mass(c: Estimate, alpha: f64) -> Estimate {
    c.scaled(alpha)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub window: (f64, f64),
    /// Mean of `t^α P̂` over a log grid on the window.
    pub level: f64,
    /// `sup |t^α P̂ − reference| / reference` on the same grid.
    pub deviation: f64,
}

/// Level and flatness of `t^α P̂(|S| > t)` on `window` (default: the
/// `[q_0.99, q_0.9999]` quantiles of `|S|`).
pub fn plateau(
    sample: &SortedSample,
    alpha: f64,
    window: Option<(f64, f64)>,
    reference: Option<f64>,
    points: usize,
) -> Result<Plateau> {
    if sample.is_empty() {
        return Err(Error::Degenerate("plateau of an empty sample".into()));
    }
    let window = window.unwrap_or_else(|| {
        (
            sample.quantile(PLATEAU_QUANTILES.0),
            sample.quantile(PLATEAU_QUANTILES.1),
        )
    });
    if !(window.0 > 0.0 && window.1 >= window.0) {
        return Err(Error::Degenerate(alloc::format!(
            "plateau window ({}, {}) is empty or not positive",
            window.0,
            window.1
        )));
    }
    let ts = log_grid(window.0, window.1, points.max(2));
    let vals: Vec<f64> = ts.iter().map(|t| t.powf(alpha) * sample.survival(*t)).collect();
    let level = vals.iter().sum::<f64>() / vals.len() as f64;
    let r = reference.unwrap_or(level);
    let deviation = vals.iter().map(|v| (v - r).abs() / r).fold(0.0, f64::max);
    Ok(Plateau {
        window,
        level,
        deviation,
    })
}

/// Residual of `E|S|^s (1 − κ(s)) = E(|ψ_θ(S)|^s − |M_θS|^s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentIdentity {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    /// `|lhs − rhs| / se`.
    pub residual: f64,
}

/// Needs `0 < s < α`. The standard error comes from the paired summands
/// `|S_i|^s (1 − κ) − d_i` plus the uncertainty of `κ(s)` itself.
pub fn moment_identity_residual(
    spec: &ModelSpec,
    s: f64,
    samples: &[Point],
    key: StreamKey,
    kappa_s: Estimate,
    alpha: f64,
) -> Result<MomentIdentity> {
    if !(s > 0.0 && s < alpha) {
        return Err(Error::Precondition(alloc::format!(
            "moment identity needs 0 < s < α (s = {s}, α = {alpha})"
        )));
    }
    if samples.len() < 2 {
        return Err(Error::Degenerate("moment identity needs at least two samples".into()));
    }
    let d = pairwise_differences(spec, samples, s, key)?;
    let factor = 1.0 - kappa_s.value;
    let (mut left, mut right, mut paired) = (MeanVar::default(), MeanVar::default(), MeanVar::default());
    for (x, di) in samples.iter().zip(&d) {
        let l = x.norm().powf(s) * factor;
        left.push(l);
        right.push(*di);
        paired.push(l - di);
    }
    let e = paired.estimate();
    let moment = left.mean() / factor;
    let kappa_part = moment * kappa_s.se;
    let se = (e.se * e.se + kappa_part * kappa_part).sqrt();
    let gap = (left.mean() - right.mean()).abs();
    let scale = left.mean().abs().max(right.mean().abs()).max(1.0);
    let residual = if gap <= 1e-12 * scale {
        0.0
    } else if se > 0.0 {
        gap / se
    } else {
        f64::INFINITY
    };
    Ok(MomentIdentity {
        s,
        lhs: left.mean(),
        rhs: right.mean(),
        se,
        residual,
    })
}

/// Directions `x/|x|` of the samples whose norm exceeds a quantile.
///
/// Bins: `d = 1` two (negative, positive); `d = 2` 64 equal angles;
/// `d = 3` a 64 × 64 grid, equal steps in `z ∈ [−1, 1]` (rows) by azimuth.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionHistogram {
    pub dim: usize,
    pub threshold: f64,
    pub exceedances: usize,
    /// Shape of `fractions` (rows, columns).
    pub shape: (usize, usize),
    /// Share of exceedances per bin, row-major.
    pub fractions: Vec<f64>,
}

pub const DIRECTION_BINS: usize = 64;

pub fn direction_histogram(samples: &[Point], quantile: f64) -> Result<DirectionHistogram> {
    let dim = samples
        .first()
        .map(Point::dim)
        .ok_or_else(|| Error::Degenerate("no samples".into()))?;
    let threshold = SortedSample::from_points(samples).quantile(quantile);
    let shape = match dim {
        1 => (1, 2),
        2 => (1, DIRECTION_BINS),
        _ => (DIRECTION_BINS, DIRECTION_BINS),
    };
    let mut counts = alloc::vec![0usize; shape.0 * shape.1];
    let mut exceedances = 0;
    let tau = 2.0 * core::f64::consts::PI;
    let bin = |u: f64, n: usize| ((u * n as f64).floor() as usize).min(n - 1);
    let turn = |y: f64, x: f64| {
        let a = y.atan2(x);
        (if a < 0.0 { a + tau } else { a }) / tau
    };
    for p in samples {
        let r = p.norm();
        if !(r > threshold) {
            continue;
        }
        exceedances += 1;
        let c = p.as_slice();
        let idx = match dim {
            1 => usize::from(c[0] > 0.0),
            2 => bin(turn(c[1], c[0]), DIRECTION_BINS),
            _ => {
                let z = (c[2] / r).clamp(-1.0, 1.0);
                let row = bin(0.5 * (z + 1.0), DIRECTION_BINS);
                let col = bin(turn(c[1], c[0]), DIRECTION_BINS);
                row * DIRECTION_BINS + col
            }
        };
        counts[idx] += 1;
    }
    let fractions = counts
        .iter()
        .map(|c| {
            if exceedances == 0 {
                0.0
            } else {
                *c as f64 / exceedances as f64
            }
        })
        .collect();
    Ok(DirectionHistogram {
        dim,
        threshold,
        exceedances,
        shape,
        fractions,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub survival_grid: Vec<SurvivalRow>,
    pub hill_curve: Vec<(usize, f64)>,
    pub hill_k: usize,
    pub hill_alpha: f64,
    pub goldie: TailConstant,
    pub sigma_mass: Estimate,
    pub plateau_window: (f64, f64),
    pub plateau_level: f64,
    /// Relative sup-deviation of `t^α P̂` from the tail constant on the window.
    pub plateau_deviation: f64,
}

/// Everything above on one stationary batch. The survival grid is 64
/// log-spaced points from the median of `|S|` to its maximum.
pub fn tail_report(
    spec: &ModelSpec,
    samples: &[Point],
    key: StreamKey,
    alpha: f64,
    m_alpha: f64,
) -> Result<TailReport> {
    let sorted = SortedSample::from_points(samples);
    if sorted.is_empty() {
        return Err(Error::Degenerate("tail report of an empty batch".into()));
    }
    let lo = sorted.quantile(0.5).max(f64::MIN_POSITIVE);
    let hi = sorted.max().max(lo);
    let survival_grid = survival_curve(&sorted, &log_grid(lo, hi, 64), alpha)?;
    let hill_k = default_hill_k(sorted.len());
    let hill_alpha = hill_estimator(&sorted, hill_k).unwrap_or(f64::NAN);
    let goldie = goldie_constant(spec, samples, key, alpha, m_alpha)?;
    let reference = if goldie.value > 0.0 { Some(goldie.value) } else { None };
    let pl = plateau(&sorted, alpha, None, reference, 32)?;
    Ok(TailReport {
        survival_grid,
        hill_curve: hill_curve(&sorted, 50),
        hill_k,
        hill_alpha,
        goldie,
        sigma_mass: sigma_mass(goldie.estimate(), alpha),
        plateau_window: pl.window,
        plateau_level: pl.level,
        plateau_deviation: pl.deviation,
    })
}
