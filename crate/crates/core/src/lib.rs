//! Iterated random Lipschitz maps on low-dimensional Euclidean space.
//!
//! The crate simulates the Markov chain `X_n = ψ_{θ_n}(X_{n-1})` for a catalog
//! of random map families, samples its stationary law by certified backward
//! iteration, and estimates the quantities that govern the heavy tail of the
//! stationary law and the stable limits of its Birkhoff sums:
//!
//! * [`model`]: map families, dilatations, linearizations and residual bounds;
//! * [`random`]: parameter laws and reproducible counter-based streams;
//! * [`chain`]: forward chains, backward sampling and Birkhoff sums;
//! * [`cramer`]: the moment function `κ(s) = E|M|^s`, its Cramér root and
//!   sampled assumption checks;
//! * [`tail`]: survival curves, Hill estimation, the pairwise tail constant and
//!   the moment identity;
//! * [`stable`]: the eigenfunction `h_v`, tail-measure functionals, limit
//!   constants and characteristic-function diagnostics;
//! * [`support`]: fixed points of contracting compositions and coverage.
//!
//! The crate is `no_std` (with `alloc`). The default `parallel` feature runs
//! replica loops on rayon; results never depend on the number of threads.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod chain;
pub mod cramer;
mod error;
pub mod exec;
pub mod geometry;
pub mod model;
pub mod quad;
pub mod random;
pub mod stable;
pub mod stats;
pub mod support;
pub mod tail;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, ErrorKind, Result};
pub use geometry::{Point, Rotation};
pub use model::{Family, LinearPart, ModelSpec, ThetaDraw};
pub use num_complex::Complex64;
pub use random::{DistributionSpec, Stream, StreamKey};
