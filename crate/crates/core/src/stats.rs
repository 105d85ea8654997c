//! Small statistical helpers shared by the estimators.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, se: 0.0 }
    }

    /// Sample mean and `sd/√n`.
    pub fn from_samples<I: IntoIterator<Item = f64>>(xs: I) -> Self {
        let mut acc = MeanVar::default();
        for x in xs {
            acc.push(x);
        }
        acc.estimate()
    }

    pub fn scaled(self, k: f64) -> Self {
        Estimate {
            value: self.value * k,
            se: self.se * k.abs(),
        }
    }
}

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanVar {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (zero below two observations).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n == 0 {
            f64::NAN
        } else {
            (self.variance() / self.n as f64).sqrt()
        };
        Estimate { value: self.mean, se }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Sample skewness and excess kurtosis (moment estimators).
pub fn skewness_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Median of a slice (sorts a copy).
pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median-of-means summary: the plain mean as point estimate and a standard
/// error from the spread of `blocks` contiguous block means.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianOfMeans {
    pub mean: f64,
    pub median_of_means: f64,
    /// Robust standard error of the mean: 1.4826·MAD(block means)/√blocks.
    pub robust_se: f64,
    /// Classical `sd/√n`.
    pub plain_se: f64,
}

pub fn median_of_means(xs: &[f64], blocks: usize) -> Result<MedianOfMeans> {
    if xs.len() < blocks || blocks == 0 {
        return Err(Error::Degenerate(alloc::format!(
            "median of means needs at least {blocks} values (got {})",
            xs.len()
        )));
    }
    let n = xs.len();
    let block_means: Vec<f64> = (0..blocks)
        .map(|b| {
            let (lo, hi) = (b * n / blocks, (b + 1) * n / blocks);
            mean(&xs[lo..hi])
        })
        .collect();
    let mom = median(&block_means);
    let deviations: Vec<f64> = block_means.iter().map(|m| (m - mom).abs()).collect();
    let mad = median(&deviations);
    let plain = Estimate::from_samples(xs.iter().copied());
    Ok(MedianOfMeans {
        mean: plain.value,
        median_of_means: mom,
        robust_se: 1.4826 * mad / (blocks as f64).sqrt(),
        plain_se: plain.se,
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Asymptotic 1% critical value of the Kolmogorov distribution.
pub const KOLMOGOROV_1PCT: f64 = 1.627_61;

/// One-sample Kolmogorov–Smirnov statistic of `xs` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x: Vec<f64> = a.to_vec();
    let mut y: Vec<f64> = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// 1% critical value of the two-sample statistic for sizes `n`, `m`.
pub fn ks_two_sample_critical(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KOLMOGOROV_1PCT * ((n + m) / (n * m)).sqrt()
}

/// Ordinary least squares `y = slope·x + intercept` with `r²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r2: if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) },
    }
}
