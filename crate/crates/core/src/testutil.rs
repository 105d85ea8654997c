//! Independent samplers used as test oracles.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::random::{DistributionSpec, StreamKey};

/// Pareto with `P(X > t) = t^{-α}` for `t ≥ 1`, by inverse CDF.
pub fn pareto(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut st = StreamKey::new(seed, 0, "oracle-pareto").stream();
    (0..n).map(|_| st.uniform().powf(-1.0 / alpha)).collect()
}

/// Chambers–Mallows–Stuck draws with characteristic function
/// `exp(−|t|^α (1 − iβ sign(t) tan(πα/2)))`, `α ≠ 1`.
pub fn stable(alpha: f64, beta: f64, n: usize, seed: u64) -> Vec<f64> {
    use core::f64::consts::{FRAC_PI_2, PI};
    let mut st = StreamKey::new(seed, 0, "oracle-stable").stream();
    let zeta = beta * (PI * alpha / 2.0).tan();
    let b = zeta.atan() / alpha;
    let scale = (1.0 + zeta * zeta).powf(1.0 / (2.0 * alpha));
    (0..n)
        .map(|_| {
            let v = PI * st.uniform() - FRAC_PI_2;
            let w = st.exponential();
            scale * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
                * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
        })
        .collect()
}

pub fn normal(n: usize, seed: u64) -> Vec<f64> {
    let mut st = StreamKey::new(seed, 0, "oracle-normal").stream();
    (0..n).map(|_| st.normal()).collect()
}

/// `S = max_k A_1⋯A_{k−1} B_k` for the extremal recursion with `B ≥ 0`
/// bounded by `b_max`, truncated once `A_1⋯A_{k−1} b_max < 1e-12 · S`.
pub fn extremal_representation(
    a: &DistributionSpec,
    b: &DistributionSpec,
    b_max: f64,
    n: usize,
    seed: u64,
) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let mut st = StreamKey::new(seed, i as u64, "oracle-extremal").stream();
            let (mut prod, mut best) = (1.0f64, 0.0f64);
            loop {
                best = best.max(prod * b.sample(&mut st));
                prod *= a.sample(&mut st);
                if prod * b_max < 1e-12 * best.max(1e-300) {
                    return best;
                }
            }
        })
        .collect()
}

/// Standard Cauchy draws, characteristic function `e^{−|t|}`.
pub fn stable_cauchy(n: usize, seed: u64) -> Vec<f64> {
    let mut st = StreamKey::new(seed, 0, "oracle-cauchy").stream();
    (0..n)
        .map(|_| (core::f64::consts::PI * (st.uniform() - 0.5)).tan())
        .collect()
}
