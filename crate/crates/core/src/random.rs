//! Parameter laws, reproducible random streams and draws of `θ`.
//!
//! Every random quantity in the crate is drawn from a [`Stream`] created from
//! a [`StreamKey`]. A key is the triple `(master_seed, replica, purpose)`; the
//! stream is a ChaCha8 keystream whose key encodes the seed and the purpose
//! and whose 64-bit stream selector is the replica index. Two workers never
//! share a stream, so the schedule cannot perturb any result.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rotation};
use crate::model::{ModelSpec, Params, ThetaDraw};

/// Law of one scalar parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionSpec {
    Constant(f64),
    DiscreteTable { values: Vec<f64>, probabilities: Vec<f64> },
    LogNormal { meanlog: f64, sdlog: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
}

impl DistributionSpec {
    pub fn constant(c: f64) -> Result<Self> {
        DistributionSpec::Constant(c).validated()
    }

    pub fn discrete(values: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        DistributionSpec::DiscreteTable { values, probabilities }.validated()
    }

    pub fn lognormal(meanlog: f64, sdlog: f64) -> Result<Self> {
        DistributionSpec::LogNormal { meanlog, sdlog }.validated()
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        DistributionSpec::Uniform { low, high }.validated()
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        DistributionSpec::Normal { mean, sd }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            DistributionSpec::Constant(c) if !c.is_finite() => bad(format!("constant {c} is not finite")),
            DistributionSpec::Constant(_) => Ok(()),
            DistributionSpec::DiscreteTable { values, probabilities } => {
                if values.is_empty() || values.len() != probabilities.len() {
                    return bad("discrete table needs equally many values and probabilities".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("discrete table values must be finite".into());
                }
                if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return bad("probabilities must be nonnegative".into());
                }
                let total: f64 = probabilities.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("probabilities must sum to 1 (got {total})"));
                }
                Ok(())
            }
            DistributionSpec::LogNormal { meanlog, sdlog } => {
                if !meanlog.is_finite() || !sdlog.is_finite() || *sdlog <= 0.0 {
                    return bad(format!(
                        "lognormal needs finite meanlog and sdlog > 0 (got {meanlog}, {sdlog})"
                    ));
                }
                Ok(())
            }
            DistributionSpec::Uniform { low, high } => {
                if !low.is_finite() || !high.is_finite() || high <= low {
                    return bad(format!("uniform needs finite low < high (got {low}, {high})"));
                }
                Ok(())
            }
            DistributionSpec::Normal { mean, sd } => {
                if !mean.is_finite() || !sd.is_finite() || *sd <= 0.0 {
                    return bad(format!("normal needs finite mean and sd > 0 (got {mean}, {sd})"));
                }
                Ok(())
            }
        }
    }

    /// One draw; advances the stream.
    #[inline]
    pub fn sample(&self, stream: &mut Stream) -> f64 {
        match self {
            DistributionSpec::Constant(c) => *c,
            DistributionSpec::DiscreteTable { values, probabilities } => {
                let u = stream.uniform();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probabilities) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                // u landed in the rounding gap above the cumulative sum
                *values
                    .iter()
                    .zip(probabilities)
                    .rev()
                    .find(|(_, p)| **p > 0.0)
                    .map(|(v, _)| v)
                    .unwrap_or(&values[values.len() - 1])
            }
            DistributionSpec::LogNormal { meanlog, sdlog } => (meanlog + sdlog * stream.normal()).exp(),
            DistributionSpec::Uniform { low, high } => low + (high - low) * stream.uniform(),
            DistributionSpec::Normal { mean, sd } => mean + sd * stream.normal(),
        }
    }

    /// `E|X|^s` when a closed form exists.
    pub fn closed_form_moment(&self, s: f64) -> Option<f64> {
        match self {
            DistributionSpec::Constant(c) => Some(abs_pow(*c, s)),
            DistributionSpec::DiscreteTable { values, probabilities } => Some(
                values
                    .iter()
                    .zip(probabilities)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(v, p)| p * abs_pow(*v, s))
                    .sum(),
            ),
            DistributionSpec::LogNormal { meanlog, sdlog } => Some((s * meanlog + 0.5 * s * s * sdlog * sdlog).exp()),
            DistributionSpec::Uniform { .. } | DistributionSpec::Normal { .. } => None,
        }
    }

    /// `E(|X|^s log|X|)`, the derivative of the closed-form moment in `s`.
    pub fn closed_form_log_moment(&self, s: f64) -> Option<f64> {
        match self {
            DistributionSpec::Constant(c) => Some(abs_pow(*c, s) * c.abs().ln()),
            DistributionSpec::DiscreteTable { values, probabilities } => Some(
                values
                    .iter()
                    .zip(probabilities)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(v, p)| p * abs_pow(*v, s) * v.abs().ln())
                    .sum(),
            ),
            DistributionSpec::LogNormal { meanlog, sdlog } => {
                let k = (s * meanlog + 0.5 * s * s * sdlog * sdlog).exp();
                Some(k * (meanlog + s * sdlog * sdlog))
            }
            DistributionSpec::Uniform { .. } | DistributionSpec::Normal { .. } => None,
        }
    }

    /// Closed interval containing the support (endpoints may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            DistributionSpec::Constant(c) => (*c, *c),
            DistributionSpec::DiscreteTable { values, probabilities } => values
                .iter()
                .zip(probabilities)
                .filter(|(_, p)| **p > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| {
                    (lo.min(*v), hi.max(*v))
                }),
            DistributionSpec::LogNormal { .. } => (0.0, f64::INFINITY),
            DistributionSpec::Uniform { low, high } => (*low, *high),
            DistributionSpec::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Almost surely `> 0`.
    pub fn is_strictly_positive(&self) -> bool {
        match self {
            DistributionSpec::LogNormal { .. } => true,
            DistributionSpec::Uniform { low, .. } => *low >= 0.0,
            _ => self.support().0 > 0.0,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.support().0 >= 0.0
    }

    /// Law invariant under `x ↦ −x`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            DistributionSpec::Constant(c) => *c == 0.0,
            DistributionSpec::DiscreteTable { values, probabilities } => {
                values.iter().zip(probabilities).all(|(v, p)| {
                    let mirror: f64 = values
                        .iter()
                        .zip(probabilities)
                        .filter(|(w, _)| (**w + v).abs() <= 1e-12 * (1.0 + v.abs()))
                        .map(|(_, q)| q)
                        .sum();
                    (mirror - p).abs() <= 1e-12 || *p == 0.0 && mirror == 0.0
                })
            }
            DistributionSpec::LogNormal { .. } => false,
            DistributionSpec::Uniform { low, high } => (low + high).abs() <= 1e-12 * (high - low),
            DistributionSpec::Normal { mean, .. } => *mean == 0.0,
        }
    }

    /// Atoms with positive probability, for finite laws.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            DistributionSpec::Constant(c) => Some(alloc::vec![(*c, 1.0)]),
            DistributionSpec::DiscreteTable { values, probabilities } => Some(
                values
                    .iter()
                    .zip(probabilities)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(v, p)| (*v, *p))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Flags laws whose logarithm is certainly or plausibly arithmetic
    /// (lattice-valued): constants and tables with at most two atoms. Such
    /// laws cannot be confirmed non-arithmetic from samples.
    pub fn arithmetic_risk(&self) -> bool {
        match self.atoms() {
            Some(atoms) => atoms.len() <= 2,
            None => false,
        }
    }

    /// Law of `√X` when it stays in the family (used for `√A` scales).
    pub fn sqrt_law(&self) -> Option<DistributionSpec> {
        match self {
            DistributionSpec::Constant(c) if *c >= 0.0 => Some(DistributionSpec::Constant(c.sqrt())),
            DistributionSpec::DiscreteTable { values, probabilities } if values.iter().all(|v| *v >= 0.0) => {
                Some(DistributionSpec::DiscreteTable {
                    values: values.iter().map(|v| v.sqrt()).collect(),
                    probabilities: probabilities.clone(),
                })
            }
            DistributionSpec::LogNormal { meanlog, sdlog } => Some(DistributionSpec::LogNormal {
                meanlog: 0.5 * meanlog,
                sdlog: 0.5 * sdlog,
            }),
            _ => None,
        }
    }
}

fn abs_pow(v: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        v.abs().powf(s)
    }
}

/// Identifies one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub replica: u64,
    purpose: u64,
    lineage: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64, replica: u64, purpose: &str) -> Self {
        StreamKey {
            master_seed,
            replica,
            purpose: fnv1a(purpose.as_bytes(), FNV_OFFSET),
            lineage: 0,
        }
    }

    /// Same seed and purpose, different replica.
    pub fn with_replica(&self, replica: u64) -> Self {
        StreamKey { replica, ..*self }
    }

    /// A key for nested work under this one: the child's purpose folds in
    /// the parent's purpose and the child's lineage records the parent replica.
    pub fn child(&self, purpose: &str, index: u64) -> Self {
        StreamKey {
            master_seed: self.master_seed,
            replica: index,
            purpose: fnv1a(purpose.as_bytes(), self.purpose),
            lineage: splitmix(self.lineage ^ splitmix(self.replica.wrapping_add(1))),
        }
    }

    pub fn stream(&self) -> Stream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.purpose.to_le_bytes());
        key[16..24].copy_from_slice(&self.lineage.to_le_bytes());
        key[24..].copy_from_slice(b"lipmaps\0");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.replica);
        Stream { rng }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    bytes
        .iter()
        .fold(seed, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic random stream owned by one worker.
#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Standard exponential.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

const MAX_REJECTIONS: usize = 100;

/// Draws one `θ` from the model's law, each parameter independently.
///
/// Sqrt-quadratic triples violating `B² − 4AC < 0` are redrawn (up to 100
/// attempts) so the conditional law is preserved.
pub fn sample_theta(spec: &ModelSpec, stream: &mut Stream) -> Result<ThetaDraw> {
    match spec.params() {
        Params::Affine {
            scale,
            orientation,
            shift,
            axis,
        } => {
            let dim = shift.len();
            let a = scale.sample(stream);
            let rotation = match (dim, orientation) {
                (_, None) => Rotation::identity(dim),
                (1, Some(law)) => Rotation::reflection_1d(law.sample(stream)),
                (2, Some(law)) => Rotation::planar(law.sample(stream)),
                (_, Some(law)) => Rotation::axis_angle(*axis, law.sample(stream)),
            };
            let mut b = Point::zeros(dim);
            for (slot, law) in b.as_mut_slice().iter_mut().zip(shift) {
                *slot = law.sample(stream);
            }
            Ok(ThetaDraw::Affine {
                scale: a,
                rotation,
                shift: b,
            })
        }
        Params::Extremal { a, b } => Ok(ThetaDraw::Extremal {
            a: a.sample(stream),
            b: b.sample(stream),
        }),
        Params::Letac { a, b, c } => Ok(ThetaDraw::Letac {
            a: a.sample(stream),
            b: b.sample(stream),
            c: c.sample(stream),
        }),
        Params::SqrtQuadratic { a, b, c } => {
            for _ in 0..MAX_REJECTIONS {
                let (x, y, z) = (a.sample(stream), b.sample(stream), c.sample(stream));
                if y * y - 4.0 * x * z < 0.0 {
                    return Ok(ThetaDraw::SqrtQuadratic { a: x, b: y, c: z });
                }
            }
            Err(Error::Configuration(format!(
                "sqrt-quadratic laws violated B^2 - 4AC < 0 on {MAX_REJECTIONS} consecutive draws"
            )))
        }
        Params::Arch1 { innovation, .. } => Ok(ThetaDraw::Arch1 {
            a: innovation.sample(stream),
        }),
    }
}
