//! Forward chains, backward iteration and Birkhoff sums.
//!
//! The forward chain `X_n = ψ_{θ_n} ∘ … ∘ ψ_{θ_1}(x)` converges only in law.
//! The backward iterate `Y_n = ψ_{θ_1} ∘ … ∘ ψ_{θ_n}(x)` converges almost
//! surely to a draw `S` of the stationary law, and the gap is controlled by
//! `|Y_n − Y_{n+m}| ≤ Π_{i≤n} L_{θ_i} · |x − ψ_{θ_{n+1}} ∘ … ∘ ψ_{θ_{n+m}}(x)|`.
//! [`backward_sample`] stops as soon as that product times a running estimate
//! of the oscillation term falls below the tolerance.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::Point;
use crate::model::{ModelSpec, ThetaDraw};
use crate::random::{sample_theta, Stream, StreamKey};
use crate::stats::{Estimate, MeanVar};

/// `X_0, …, X_n` together with the partial sums `S_k = X_1 + … + X_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `n + 1` states starting with `X_0`.
    pub states: Vec<Point>,
    /// `n` entries; `partial_sums[k - 1] = S_k`.
    pub partial_sums: Vec<Point>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.partial_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_sums.is_empty()
    }
}

pub fn forward_chain(spec: &ModelSpec, x0: Point, n: usize, stream: &mut Stream) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(n + 1);
    let mut partial_sums = Vec::with_capacity(n);
    states.push(x0);
    let mut x = x0;
    let mut sum = Point::zeros(x0.dim());
    for _ in 0..n {
        let theta = sample_theta(spec, stream)?;
        x = spec.apply(&theta, &x)?;
        sum += x;
        states.push(x);
        partial_sums.push(sum);
    }
    Ok(Trajectory { states, partial_sums })
}

/// `X_n` alone, without storing the path.
pub fn forward_iterate(spec: &ModelSpec, x0: Point, n: usize, stream: &mut Stream) -> Result<Point> {
    let mut x = x0;
    for _ in 0..n {
        let theta = sample_theta(spec, stream)?;
        x = spec.apply(&theta, &x)?;
    }
    Ok(x)
}

/// `Y_n = ψ_{θ_1} ∘ … ∘ ψ_{θ_n}(x0)` for a fixed depth `n`.
pub fn backward_iterate(spec: &ModelSpec, x0: Point, n: usize, stream: &mut Stream) -> Result<Point> {
    let thetas = (0..n).map(|_| sample_theta(spec, stream)).collect::<Result<Vec<_>>>()?;
    compose_backward(spec, &thetas, x0)
}

fn compose_backward(spec: &ModelSpec, thetas: &[ThetaDraw], x0: Point) -> Result<Point> {
    thetas.iter().rev().try_fold(x0, |y, th| spec.apply(th, &y))
}

/// Stopping rule for [`backward_sample`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackwardOptions {
    pub tol: f64,
    pub max_depth: usize,
    /// Cap on the oscillation estimate.
    pub envelope: f64,
}

impl Default for BackwardOptions {
    fn default() -> Self {
        BackwardOptions {
            tol: 1e-9,
            max_depth: 100_000,
            envelope: 1e12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackwardSample {
    pub point: Point,
    pub depth: usize,
    /// `Π_{i≤depth} L_{θ_i} · R` at the stopping depth.
    pub bound: f64,
}

/// One approximate draw from the stationary law by backward iteration.
///
/// After drawing `θ_1, …, θ_n` the rule tracks `P_n = Π_{i≤n} L_{θ_i}` and
/// the oscillation estimate
/// `R_n = Σ_{k≤n} (Π_{i<k} L_{θ_i}) |x0 − ψ_{θ_k}(x0)|` (capped by the
/// envelope), and stops at the first `n` with `P_n·R_n < tol`. Transient
/// expansion (`P_n > 1`) simply delays the stop.
pub fn backward_sample(
    spec: &ModelSpec,
    x0: Point,
    opts: &BackwardOptions,
    stream: &mut Stream,
) -> Result<BackwardSample> {
    if !(opts.tol > 0.0) || opts.max_depth == 0 {
        return Err(Error::Precondition(
            "backward sampling needs tol > 0 and max_depth ≥ 1".into(),
        ));
    }
    let mut thetas: Vec<ThetaDraw> = Vec::with_capacity(64);
    let mut product = 1.0f64;
    let mut oscillation = 0.0f64;
    let mut bound = f64::INFINITY;
    for depth in 1..=opts.max_depth {
        let theta = sample_theta(spec, stream)?;
        let step = spec.apply(&theta, &x0)?.distance(&x0);
        oscillation += product * step;
        product *= spec.lipschitz_bound(&theta);
        thetas.push(theta);
        bound = product * oscillation.min(opts.envelope);
        if bound < opts.tol {
            let point = compose_backward(spec, &thetas, x0)?;
            return Ok(BackwardSample { point, depth, bound });
        }
    }
    Err(Error::Convergence {
        depth: opts.max_depth,
        bound,
    })
}

/// Independent approximate draws from the stationary law.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryBatch {
    pub samples: Vec<Point>,
    pub stop_depths: Vec<usize>,
    pub residual_bounds: Vec<f64>,
    pub tol: f64,
}

impl StationaryBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.samples.iter().map(Point::norm).collect()
    }
}

/// `count` backward samples; sample `i` uses the stream
/// `(master_seed, i, "stationary")`.
pub fn stationary_batch(
    spec: &ModelSpec,
    count: usize,
    x0: Point,
    opts: &BackwardOptions,
    master_seed: u64,
) -> Result<StationaryBatch> {
    let draws = exec::try_map_indexed(count, |i| {
        let mut stream = StreamKey::new(master_seed, i as u64, "stationary").stream();
        backward_sample(spec, x0, opts, &mut stream)
    })?;
    let mut batch = StationaryBatch {
        samples: Vec::with_capacity(count),
        stop_depths: Vec::with_capacity(count),
        residual_bounds: Vec::with_capacity(count),
        tol: opts.tol,
    };
    for d in draws {
        batch.samples.push(d.point);
        batch.stop_depths.push(d.depth);
        batch.residual_bounds.push(d.bound);
    }
    Ok(batch)
}

/// `S_n = X_1 + … + X_n` for independent forward chains started at `x0`;
/// replica `i` uses the stream `(master_seed, i, "birkhoff")`.
pub fn birkhoff_sums(spec: &ModelSpec, x0: Point, n: usize, replicas: usize, master_seed: u64) -> Result<Vec<Point>> {
    exec::try_map_indexed(replicas, |i| {
        let mut stream = StreamKey::new(master_seed, i as u64, "birkhoff").stream();
        let mut x = x0;
        let mut sum = Point::zeros(x0.dim());
        for _ in 0..n {
            let theta = sample_theta(spec, &mut stream)?;
            x = spec.apply(&theta, &x)?;
            sum += x;
        }
        Ok(sum)
    })
}

/// Sampled check of the moment bound
/// `(E|S|^β)^{1/β} ≤ (E|N|^β)^{1/β} / (1 − κ(β)^{1/β})` for `0 < β < α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentBound {
    pub beta: f64,
    /// `(mean |S|^β)^{1/β}`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `E|N|^β` over independent draws of `θ`.
    pub cancellation_moment: Estimate,
    pub kappa_beta: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    /// `lhs ≤ rhs + 3·(combined se)`.
    pub holds: bool,
}

pub fn moment_bound(
    spec: &ModelSpec,
    samples: &[Point],
    beta: f64,
    kappa_beta: f64,
    n_theta: usize,
    key: StreamKey,
) -> Result<MomentBound> {
    if !(beta > 0.0) || !(kappa_beta < 1.0) || samples.is_empty() || n_theta == 0 {
        return Err(Error::Precondition(
            "moment bound needs β > 0, κ(β) < 1 and nonempty samples".into(),
        ));
    }
    let mut s_acc = MeanVar::default();
    for p in samples {
        s_acc.push(p.norm().powf(beta));
    }
    let s_mom = s_acc.estimate();
    let mut stream = key.stream();
    let mut n_acc = MeanVar::default();
    for _ in 0..n_theta {
        let th = sample_theta(spec, &mut stream)?;
        n_acc.push(spec.cancellation_bound(&th).powf(beta));
    }
    let n_mom = n_acc.estimate();
    let inv = 1.0 / beta;
    let lhs = s_mom.value.powf(inv);
    let lhs_se = inv * s_mom.value.powf(inv - 1.0) * s_mom.se;
    let denom = 1.0 - kappa_beta.powf(inv);
    let rhs = n_mom.value.powf(inv) / denom;
    let rhs_se = inv * n_mom.value.powf(inv - 1.0) * n_mom.se / denom;
    let se = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    Ok(MomentBound {
        beta,
        lhs,
        lhs_se,
        cancellation_moment: n_mom,
        kappa_beta,
        rhs,
        rhs_se,
        holds: lhs <= rhs + 3.0 * se,
    })
}
