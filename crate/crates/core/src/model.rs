//! Catalog of random Lipschitz map families.
//!
//! For every family the module exposes the map `ψ_θ`, its dilatations
//! `ψ_{θ,t}(x) = tψ_θ(x/t)`, the small-scale limit `ψ̄_θ = lim_{t→0} ψ_{θ,t}`,
//! the linear part `M_θ` and three per-θ bounds: the Lipschitz constant
//! `L_θ`, the cancellation bound `|N_θ| ≥ |ψ_θ(x) − M_θx|` (on the support of
//! the stationary law) and the smoothness bound `|Q_θ|` with
//! `|ψ_{θ,t}(x) − ψ̄_θ(x)| ≤ t|Q_θ|`.
//!
//! | family         | `ψ_θ(x)`                     | `ψ̄_θ(x)`          | `M_θ`          |
//! |----------------|------------------------------|--------------------|----------------|
//! | affine         | `A·R x + B`                  | `A·R x`            | `A·R`          |
//! | extremal       | `max(Ax, B)`                 | `max(Ax, 0)`       | `A`            |
//! | Letac          | `A·max(x, B) + C`            | `A·max(x, 0)`      | `A`            |
//! | sqrt-quadratic | `√(Ax² + Bx + C)`            | `√A·|x|`           | `√A`           |
//! | ARCH(1)        | `|γ|x| + √(β + λx²)·A|`      | `|γ + √λA|·|x|`    | `|γ + √λA|`    |

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rotation, MAX_DIM};
use crate::random::DistributionSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Affine,
    Extremal,
    Letac,
    SqrtQuadratic,
    Arch1,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Affine,
        Family::Extremal,
        Family::Letac,
        Family::SqrtQuadratic,
        Family::Arch1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Affine => "affine",
            Family::Extremal => "extremal",
            Family::Letac => "letac",
            Family::SqrtQuadratic => "sqrt_quadratic",
            Family::Arch1 => "arch1",
        }
    }

    pub fn parse(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Parameter names that must carry a law.
    pub fn required_parameters(self, dim: usize) -> Vec<String> {
        match self {
            Family::Affine if dim == 1 => vec!["a".into(), "b".into()],
            Family::Affine => core::iter::once("a".to_string())
                .chain((1..=dim).map(|i| format!("b{i}")))
                .collect(),
            Family::Extremal => vec!["a".into(), "b".into()],
            Family::Letac | Family::SqrtQuadratic => vec!["a".into(), "b".into(), "c".into()],
            Family::Arch1 => vec!["a".into()],
        }
    }

    /// Parameter names that may carry a law.
    pub fn optional_parameters(self, dim: usize) -> Vec<String> {
        match (self, dim) {
            (Family::Affine, 1) => vec!["sign".into()],
            (Family::Affine, _) => vec!["angle".into()],
            _ => Vec::new(),
        }
    }
}

/// Constants of the ARCH(1) family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arch1Constants {
    pub gamma: f64,
    pub beta: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Params {
    Affine {
        scale: DistributionSpec,
        orientation: Option<DistributionSpec>,
        shift: Vec<DistributionSpec>,
        axis: [f64; 3],
    },
    Extremal {
        a: DistributionSpec,
        b: DistributionSpec,
    },
    Letac {
        a: DistributionSpec,
        b: DistributionSpec,
        c: DistributionSpec,
    },
    SqrtQuadratic {
        a: DistributionSpec,
        b: DistributionSpec,
        c: DistributionSpec,
    },
    Arch1 {
        innovation: DistributionSpec,
        constants: Arch1Constants,
    },
}

/// A map family together with the laws of its parameters: the full law `μ`
/// of the random map `ψ_θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    family: Family,
    dim: usize,
    laws: BTreeMap<String, DistributionSpec>,
    params: Params,
}

impl ModelSpec {
    /// Validates and assembles a model from named parameter laws.
    ///
    /// `axis` is the fixed rotation axis of a 3-dimensional affine model
    /// (ignored otherwise); `arch` must be present exactly for ARCH(1).
    pub fn new(
        family: Family,
        dim: usize,
        laws: BTreeMap<String, DistributionSpec>,
        arch: Option<Arch1Constants>,
        axis: Option<[f64; 3]>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidModel(msg));
        if dim == 0 || dim > MAX_DIM {
            return invalid(format!("dimension {dim} unsupported: dimension ≤ 3 required"));
        }
        if family != Family::Affine && dim != 1 {
            return invalid(format!("family {} is scalar; dimension must be 1", family.name()));
        }
        for law in laws.values() {
            law.validate()?;
        }
        let required = family.required_parameters(dim);
        let optional = family.optional_parameters(dim);
        for name in &required {
            if !laws.contains_key(name) {
                return invalid(format!("missing parameter law '{name}' for family {}", family.name()));
            }
        }
        for name in laws.keys() {
            if !required.contains(name) && !optional.contains(name) {
                return invalid(format!("unknown parameter '{name}' for family {}", family.name()));
            }
        }
        let law = |name: &str| laws[name].clone();
        let positive = |name: &str| -> Result<()> {
            if laws[name].is_strictly_positive() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!(
                    "parameter '{name}' must be almost surely positive"
                )))
            }
        };
        let nonnegative = |name: &str| -> Result<()> {
            if laws[name].is_nonnegative() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("parameter '{name}' must be nonnegative")))
            }
        };
        if family != Family::Arch1 && arch.is_some() {
            return invalid("ARCH(1) constants given for a non-ARCH model".into());
        }
        let params = match family {
            Family::Affine => {
                positive("a")?;
                let axis = axis.unwrap_or([0.0, 0.0, 1.0]);
                if dim == 3 && !(axis.iter().map(|c| c * c).sum::<f64>() > 0.0) {
                    return invalid("rotation axis must be nonzero".into());
                }
                let shift = if dim == 1 {
                    vec![law("b")]
                } else {
                    (1..=dim).map(|i| law(&format!("b{i}"))).collect()
                };
                let orientation = laws.get(if dim == 1 { "sign" } else { "angle" }).cloned();
                Params::Affine {
                    scale: law("a"),
                    orientation,
                    shift,
                    axis,
                }
            }
            Family::Extremal => {
                positive("a")?;
                Params::Extremal {
                    a: law("a"),
                    b: law("b"),
                }
            }
            Family::Letac => {
                positive("a")?;
                Params::Letac {
                    a: law("a"),
                    b: law("b"),
                    c: law("c"),
                }
            }
            Family::SqrtQuadratic => {
                positive("a")?;
                nonnegative("b")?;
                nonnegative("c")?;
                Params::SqrtQuadratic {
                    a: law("a"),
                    b: law("b"),
                    c: law("c"),
                }
            }
            Family::Arch1 => {
                let Some(constants) = arch else {
                    return invalid("ARCH(1) needs constants gamma, beta, lambda".into());
                };
                let Arch1Constants { gamma, beta, lambda } = constants;
                if !(gamma >= 0.0 && beta > 0.0 && lambda > 0.0) || !(gamma + beta + lambda).is_finite() {
                    return invalid(format!(
                        "ARCH(1) needs gamma ≥ 0, beta > 0, lambda > 0 (got {gamma}, {beta}, {lambda})"
                    ));
                }
                if !laws["a"].is_symmetric() {
                    return invalid("ARCH(1) innovation law must be symmetric".into());
                }
                Params::Arch1 {
                    innovation: law("a"),
                    constants,
                }
            }
        };
        Ok(ModelSpec {
            family,
            dim,
            laws,
            params,
        })
    }

    fn from_pairs(family: Family, pairs: Vec<(&str, DistributionSpec)>) -> Result<Self> {
        let laws = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        ModelSpec::new(family, 1, laws, None, None)
    }

    /// `ψ(x) = max(Ax, B)`.
    pub fn extremal(a: DistributionSpec, b: DistributionSpec) -> Result<Self> {
        ModelSpec::from_pairs(Family::Extremal, vec![("a", a), ("b", b)])
    }

    /// `ψ(x) = Ax + B` on the line.
    pub fn affine_1d(a: DistributionSpec, b: DistributionSpec) -> Result<Self> {
        ModelSpec::from_pairs(Family::Affine, vec![("a", a), ("b", b)])
    }

    /// `ψ(x) = A·R x + B` in dimension `shift.len()`, with `R` built from
    /// the orientation law (a sign in `d = 1`, an angle otherwise).
    pub fn affine(
        scale: DistributionSpec,
        orientation: Option<DistributionSpec>,
        shift: Vec<DistributionSpec>,
        axis: Option<[f64; 3]>,
    ) -> Result<Self> {
        let dim = shift.len();
        let mut laws = BTreeMap::new();
        laws.insert("a".to_string(), scale);
        if let Some(o) = orientation {
            laws.insert(if dim == 1 { "sign" } else { "angle" }.to_string(), o);
        }
        for (i, b) in shift.into_iter().enumerate() {
            let name = if dim == 1 {
                "b".to_string()
            } else {
                format!("b{}", i + 1)
            };
            laws.insert(name, b);
        }
        ModelSpec::new(Family::Affine, dim, laws, None, axis)
    }

    /// `ψ(x) = A·max(x, B) + C`.
    pub fn letac(a: DistributionSpec, b: DistributionSpec, c: DistributionSpec) -> Result<Self> {
        ModelSpec::from_pairs(Family::Letac, vec![("a", a), ("b", b), ("c", c)])
    }

    /// `ψ(x) = √(Ax² + Bx + C)`.
    pub fn sqrt_quadratic(a: DistributionSpec, b: DistributionSpec, c: DistributionSpec) -> Result<Self> {
        ModelSpec::from_pairs(Family::SqrtQuadratic, vec![("a", a), ("b", b), ("c", c)])
    }

    /// `ψ(x) = |γ|x| + √(β + λx²)·A|`.
    pub fn arch1(constants: Arch1Constants, innovation: DistributionSpec) -> Result<Self> {
        let mut laws = BTreeMap::new();
        laws.insert("a".to_string(), innovation);
        ModelSpec::new(Family::Arch1, 1, laws, Some(constants), None)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn laws(&self) -> &BTreeMap<String, DistributionSpec> {
        &self.laws
    }

    pub fn law(&self, name: &str) -> Option<&DistributionSpec> {
        self.laws.get(name)
    }

    pub fn arch1_constants(&self) -> Option<Arch1Constants> {
        match &self.params {
            Params::Arch1 { constants, .. } => Some(*constants),
            _ => None,
        }
    }

    pub fn rotation_axis(&self) -> Option<[f64; 3]> {
        match &self.params {
            Params::Affine { axis, .. } if self.dim == 3 => Some(*axis),
            _ => None,
        }
    }

    pub(crate) fn params(&self) -> &Params {
        &self.params
    }

    /// `ψ_θ(x)`.
    #[inline]
    pub fn apply(&self, theta: &ThetaDraw, x: &Point) -> Result<Point> {
        self.apply_dilated(theta, 1.0, x)
    }

    /// `ψ_{θ,t}(x) = tψ_θ(x/t)`, evaluated in a form that is exact at `t = 1`.
    #[inline]
    pub fn apply_dilated(&self, theta: &ThetaDraw, t: f64, x: &Point) -> Result<Point> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::DomainViolation(format!(
                "dilation parameter t = {t} must be positive"
            )));
        }
        let y = match theta {
            ThetaDraw::Affine { scale, rotation, shift } => *scale * rotation.apply(x) + shift.scale(t),
            _ => {
                let x = x.x();
                Point::scalar(match *theta {
                    ThetaDraw::Extremal { a, b } => (a * x).max(t * b),
                    ThetaDraw::Letac { a, b, c } => a * x.max(t * b) + t * c,
                    ThetaDraw::SqrtQuadratic { a, b, c } => {
                        let radicand = a * x * x + b * t * x + c * t * t;
                        if !(radicand >= 0.0) {
                            return Err(Error::DomainViolation(format!(
                                "negative radicand {radicand} for sqrt-quadratic θ = ({a}, {b}, {c}) at x = {x}"
                            )));
                        }
                        radicand.sqrt()
                    }
                    ThetaDraw::Arch1 { a } => {
                        let k = self.arch_constants()?;
                        (k.gamma * x.abs() + (k.beta * t * t + k.lambda * x * x).sqrt() * a).abs()
                    }
                    ThetaDraw::Affine { .. } => unreachable!(),
                })
            }
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::DomainViolation(format!(
                "non-finite map value for θ = {theta:?}"
            )))
        }
    }

    /// `ψ̄_θ(x) = lim_{t→0} ψ_{θ,t}(x)`.
    #[inline]
    pub fn limit_map(&self, theta: &ThetaDraw, x: &Point) -> Result<Point> {
        let y = match *theta {
            ThetaDraw::Affine { scale, rotation, .. } => scale * rotation.apply(x),
            ThetaDraw::Extremal { a, .. } => Point::scalar((a * x.x()).max(0.0)),
            ThetaDraw::Letac { a, .. } => Point::scalar(a * x.x().max(0.0)),
            ThetaDraw::SqrtQuadratic { a, .. } => Point::scalar(a.sqrt() * x.x().abs()),
            ThetaDraw::Arch1 { a } => {
                let k = self.arch_constants()?;
                Point::scalar((k.gamma + k.lambda.sqrt() * a).abs() * x.x().abs())
            }
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::DomainViolation(format!(
                "non-finite limit map value for θ = {theta:?}"
            )))
        }
    }

    /// Lipschitz constant `L_θ` (an upper bound for ARCH(1)).
    #[inline]
    pub fn lipschitz_bound(&self, theta: &ThetaDraw) -> f64 {
        match *theta {
            ThetaDraw::Affine { scale, .. } => scale,
            ThetaDraw::Extremal { a, .. } | ThetaDraw::Letac { a, .. } => a,
            ThetaDraw::SqrtQuadratic { a, .. } => a.sqrt(),
            ThetaDraw::Arch1 { a } => match self.arch1_constants() {
                Some(k) => k.gamma + k.lambda.sqrt() * a.abs(),
                None => f64::NAN,
            },
        }
    }

    /// `|N_θ|` with `|ψ_θ(x) − M_θx| ≤ |N_θ|` on the nonnegative half-line
    /// (everywhere for the affine family).
    pub fn cancellation_bound(&self, theta: &ThetaDraw) -> f64 {
        match *theta {
            ThetaDraw::Affine { shift, .. } => shift.norm(),
            ThetaDraw::Extremal { b, .. } => 2.0 * b.abs(),
            ThetaDraw::Letac { a, b, c } => a * b.abs() + c.abs(),
            ThetaDraw::SqrtQuadratic { a, b, c } => b / a.sqrt() + c.sqrt(),
            ThetaDraw::Arch1 { a } => match self.arch1_constants() {
                Some(k) => k.beta.sqrt() * a.abs(),
                None => f64::NAN,
            },
        }
    }

    /// `|Q_θ|` with `|ψ_{θ,t}(x) − ψ̄_θ(x)| ≤ t|Q_θ|`.
    pub fn smoothness_bound(&self, theta: &ThetaDraw) -> f64 {
        match *theta {
            ThetaDraw::Affine { shift, .. } => shift.norm(),
            ThetaDraw::Extremal { b, .. } => b.abs(),
            ThetaDraw::Letac { a, b, c } => a * b.abs() + c.abs(),
            ThetaDraw::SqrtQuadratic { a, b, c } => {
                let v = c - b * b / (4.0 * a);
                let tail = if c == 0.0 { 0.0 } else { c / v.sqrt() };
                b / a.sqrt() + tail
            }
            ThetaDraw::Arch1 { a } => match self.arch1_constants() {
                Some(k) => k.beta.sqrt() * a.abs(),
                None => f64::NAN,
            },
        }
    }

    /// `M_θ` as scale times rotation.
    #[inline]
    pub fn linear_part(&self, theta: &ThetaDraw) -> LinearPart {
        match *theta {
            ThetaDraw::Affine { scale, rotation, .. } => LinearPart { scale, rotation },
            _ => {
                let scale = match *theta {
                    ThetaDraw::Extremal { a, .. } | ThetaDraw::Letac { a, .. } => a,
                    ThetaDraw::SqrtQuadratic { a, .. } => a.sqrt(),
                    ThetaDraw::Arch1 { a } => match self.arch1_constants() {
                        Some(k) => (k.gamma + k.lambda.sqrt() * a).abs(),
                        None => f64::NAN,
                    },
                    ThetaDraw::Affine { .. } => unreachable!(),
                };
                LinearPart {
                    scale,
                    rotation: Rotation::identity(1),
                }
            }
        }
    }

    fn arch_constants(&self) -> Result<Arch1Constants> {
        self.arch1_constants()
            .ok_or_else(|| Error::DomainViolation("ARCH(1) draw applied to a model without ARCH constants".into()))
    }
}

/// One realization of the random parameters `θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaDraw {
    Affine {
        scale: f64,
        rotation: Rotation,
        shift: Point,
    },
    Extremal {
        a: f64,
        b: f64,
    },
    Letac {
        a: f64,
        b: f64,
        c: f64,
    },
    SqrtQuadratic {
        a: f64,
        b: f64,
        c: f64,
    },
    Arch1 {
        a: f64,
    },
}

impl ThetaDraw {
    pub fn family(&self) -> Family {
        match self {
            ThetaDraw::Affine { .. } => Family::Affine,
            ThetaDraw::Extremal { .. } => Family::Extremal,
            ThetaDraw::Letac { .. } => Family::Letac,
            ThetaDraw::SqrtQuadratic { .. } => Family::SqrtQuadratic,
            ThetaDraw::Arch1 { .. } => Family::Arch1,
        }
    }

    /// Finite components and the family's positivity constraints.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ThetaDraw::Affine { scale, rotation, shift } => {
                scale > 0.0 && scale.is_finite() && shift.is_finite() && rotation.orthogonality_defect() <= 1e-12
            }
            ThetaDraw::Extremal { a, b } => a > 0.0 && a.is_finite() && b.is_finite(),
            ThetaDraw::Letac { a, b, c } => a > 0.0 && a.is_finite() && b.is_finite() && c.is_finite(),
            ThetaDraw::SqrtQuadratic { a, b, c } => {
                a > 0.0 && b >= 0.0 && c >= 0.0 && (a + b + c).is_finite() && b * b - 4.0 * a * c < 0.0
            }
            ThetaDraw::Arch1 { a } => a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!("invalid parameter tuple {self:?}")))
        }
    }
}

/// `M_θ = scale · rotation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearPart {
    pub scale: f64,
    pub rotation: Rotation,
}

impl LinearPart {
    #[inline]
    pub fn apply(&self, x: &Point) -> Point {
        self.scale * self.rotation.apply(x)
    }
}
