//! Stable limits of Birkhoff sums.
//!
//! With `φ(x) = Σ_{k≥1} ψ̄_{θ_k} ∘ … ∘ ψ̄_{θ_1}(x)` and
//! `h_v(x) = E exp(i⟨v, φ(x)⟩)`, the characteristic function of the
//! normalized sums tends to `exp(t^α C_α(v))` where, for `α < 2`,
//!
//! ```text
//! C_α(v) = ∫ ((e^{i⟨v,x⟩} − 1) h_v(x) − i⟨v,x⟩·c(x)) Λ(dx),
//! c(x) = 0 (α < 1),  1/(1 + |x|²) (α = 1),  1 (1 < α < 2),
//! ```
//!
//! and for `α = 2`
//! `C_2(v) = −¼ ∫ (⟨v,w⟩² + 2⟨v,w⟩⟨v,Eφ(w)⟩) σ_Λ(dw)`.
//!
//! `Λ` has the polar form `Λ(f) = ∫∫ f(rw) σ_Λ(dw) r^{−α−1} dr`. Integrals
//! against `Λ` are split at `r = 1`: the inner part is done by radial
//! quadrature over the atoms of `σ_Λ`, the outer part by the estimator
//! `g^{−α} E f(gS)` on stationary samples (or by exact Pareto radii when `Λ`
//! is given in closed form).
//!
//! The limit maps are positively homogeneous, so `φ(rw) = rφ(w)` draw by
//! draw. Reusing the same draws of `φ(w)` for every radius makes the sampled
//! `ĥ_v(rw)` smooth in `r`, which keeps the inner quadrature exact up to
//! Monte Carlo error in `h`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::Point;
use crate::model::ModelSpec;
use crate::quad::RadialRule;
use crate::random::{sample_theta, Stream, StreamKey};
use crate::stats::{self, linear_fit, skewness_kurtosis, Estimate, LinearFit, MeanVar};
use crate::tail::{self, direction_histogram, SortedSample};

/// Largest number of terms in one series draw of `φ`.
pub const MAX_SERIES_TERMS: usize = 100_000;
/// `|α − 1| ≤ REGIME_TOL` selects the `α = 1` regime, likewise for `α = 2`.
pub const REGIME_TOL: f64 = 1e-6;

/// One draw of `Σ_{k≤K} ψ̄_{θ_k} ∘ … ∘ ψ̄_{θ_1}(x)`, stopped at the first `K`
/// with `|M_{θ_K}⋯M_{θ_1}|·|x| < trunc_tol`.
pub fn phi_series_sample(spec: &ModelSpec, x: &Point, trunc_tol: f64, stream: &mut Stream) -> Result<Point> {
    if !(trunc_tol > 0.0) {
        return Err(Error::Precondition("series truncation needs trunc_tol > 0".into()));
    }
    let mut sum = Point::zeros(x.dim());
    let r = x.norm();
    if r == 0.0 {
        return Ok(sum);
    }
    let mut y = *x;
    let mut product = 1.0;
    for k in 1..=MAX_SERIES_TERMS {
        let th = sample_theta(spec, stream)?;
        y = spec.limit_map(&th, &y)?;
        sum += y;
        product *= spec.linear_part(&th).scale.abs();
        if product * r < trunc_tol || y.norm() == 0.0 {
            return Ok(sum);
        }
        if product > 1e250 {
            return Err(Error::Convergence {
                depth: k,
                bound: product * r,
            });
        }
    }
    Err(Error::Convergence {
        depth: MAX_SERIES_TERMS,
        bound: product * r,
    })
}

/// Complex Monte Carlo mean; `se` is `√(var Re + var Im / n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub se: f64,
}

impl ComplexEstimate {
    pub fn exact(value: Complex64) -> Self {
        ComplexEstimate { value, se: 0.0 }
    }

    pub fn from_samples<I: IntoIterator<Item = Complex64>>(zs: I) -> Self {
        let (mut re, mut im) = (MeanVar::default(), MeanVar::default());
        for z in zs {
            re.push(z.re);
            im.push(z.im);
        }
        let (r, i) = (re.estimate(), im.estimate());
        ComplexEstimate {
            value: Complex64::new(r.value, i.value),
            se: (r.se * r.se + i.se * i.se).sqrt(),
        }
    }
}

/// `ĥ_v(x)` from `reps` independent series draws.
pub fn h_v(
    spec: &ModelSpec,
    x: &Point,
    v: &Point,
    reps: usize,
    trunc_tol: f64,
    key: StreamKey,
) -> Result<ComplexEstimate> {
    let mut stream = key.stream();
    let phis = (0..reps)
        .map(|_| phi_series_sample(spec, x, trunc_tol, &mut stream))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexEstimate::from_samples(phis.iter().map(|p| cis(v.dot(p)))))
}

fn cis(a: f64) -> Complex64 {
    Complex64::new(a.cos(), a.sin())
}

/// The eigenfunction entering `C_α`: either `h ≡ 1` or the series `h_v`.
#[derive(Clone, Copy, Debug)]
pub enum Eigenfunction<'a> {
    Unit,
    Series {
        spec: &'a ModelSpec,
        reps: usize,
        trunc_tol: f64,
        key: StreamKey,
    },
}

impl Eigenfunction<'_> {
    /// Draws of `φ(x)`; `h ≡ 1` is represented by the single draw `φ = 0`.
    fn phi_draws(&self, x: &Point, key_index: (&str, u64)) -> Result<Vec<Point>> {
        match *self {
            Eigenfunction::Unit => Ok(alloc::vec![Point::zeros(x.dim())]),
            Eigenfunction::Series {
                spec,
                reps,
                trunc_tol,
                key,
            } => {
                let mut stream = key.child(key_index.0, key_index.1).stream();
                (0..reps)
                    .map(|_| phi_series_sample(spec, x, trunc_tol, &mut stream))
                    .collect()
            }
        }
    }

    fn eval(&self, x: &Point, v: &Point, key_index: (&str, u64)) -> Result<Complex64> {
        let draws = self.phi_draws(x, key_index)?;
        let sum: Complex64 = draws.iter().map(|p| cis(v.dot(p))).sum();
        Ok(sum / draws.len() as f64)
    }
}

/// A bounded test function vanishing on the ball of radius `zero_radius()`.
pub trait TestFunction: Sync {
    fn eval(&self, x: &Point) -> f64;
    /// Radius of a ball around 0 on which the function is 0, if declared.
    fn zero_radius(&self) -> Option<f64>;
}

/// `1{|x| > radius}`.
#[derive(Clone, Copy, Debug)]
pub struct Exceedance(pub f64);

impl TestFunction for Exceedance {
    fn eval(&self, x: &Point) -> f64 {
        if x.norm() > self.0 {
            1.0
        } else {
            0.0
        }
    }

    fn zero_radius(&self) -> Option<f64> {
        Some(self.0)
    }
}

/// A closure with a declared zero ball.
pub struct Vanishing<F> {
    pub f: F,
    pub radius: Option<f64>,
}

impl<F: Fn(&Point) -> f64 + Sync> TestFunction for Vanishing<F> {
    fn eval(&self, x: &Point) -> f64 {
        (self.f)(x)
    }

    fn zero_radius(&self) -> Option<f64> {
        self.radius
    }
}

/// `g^{−α} · mean f(g S_i)`, the sampled version of
/// `Λ(f) = lim_{g→0} g^{−α} E f(gS)`.
pub fn lambda_functional(f: &dyn TestFunction, samples: &[Point], g: f64, alpha: f64) -> Result<Estimate> {
    match f.zero_radius() {
        Some(r) if r > 0.0 => {}
        _ => {
            return Err(Error::Precondition(
                "Λ-functional needs a test function vanishing on a ball around 0".into(),
            ))
        }
    }
    if !(g > 0.0) || samples.is_empty() {
        return Err(Error::Precondition("Λ-functional needs g > 0 and samples".into()));
    }
    Ok(Estimate::from_samples(samples.iter().map(|x| f.eval(&x.scale(g)))).scaled(g.powf(-alpha)))
}

/// Coordinate-wise estimate with standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorEstimate {
    pub value: Point,
    pub se: Point,
}

/// `ξ(t) = E[tS/(1 + |tS|²)]` over stationary samples.
pub fn xi(t: f64, samples: &[Point]) -> Result<VectorEstimate> {
    let dim = samples
        .first()
        .map(Point::dim)
        .ok_or_else(|| Error::Degenerate("ξ of an empty batch".into()))?;
    let mut acc = [MeanVar::default(); 3];
    for x in samples {
        let y = x.scale(t);
        let w = 1.0 / (1.0 + y.dot(&y));
        for (a, c) in acc.iter_mut().zip(y.as_slice()) {
            a.push(c * w);
        }
    }
    let mut value = Point::zeros(dim);
    let mut se = Point::zeros(dim);
    for (i, a) in acc.iter().take(dim).enumerate() {
        let e = a.estimate();
        value.as_mut_slice()[i] = e.value;
        se.as_mut_slice()[i] = e.se;
    }
    Ok(VectorEstimate { value, se })
}

/// How the part of `Λ` outside the unit ball is integrated.
#[derive(Clone, Copy, Debug)]
pub enum Outer<'a> {
    /// `g^{−α} mean F(gS_i)` over stationary samples, at `g` and `g/2`.
    Stationary { samples: &'a [Point], g: f64 },
    /// Exact radii `R = U^{−1/α}` with directions drawn from `σ`.
    Polar { draws: usize, key: StreamKey },
}

/// The tail measure `Λ` through its spherical part and an outer estimator.
#[derive(Clone, Debug)]
pub struct TailMeasure<'a> {
    pub alpha: f64,
    /// Atoms `(w, σ_w)` of `σ_Λ`, with `|w| = 1`.
    pub directions: Vec<(Point, f64)>,
    /// Relative standard error of the total mass of `σ_Λ`.
    pub mass_rel_se: f64,
    pub outer: Outer<'a>,
}

impl<'a> TailMeasure<'a> {
    /// Closed polar form with given atoms of `σ_Λ`.
    pub fn polar(alpha: f64, directions: Vec<(Point, f64)>, draws: usize, key: StreamKey) -> Self {
        TailMeasure {
            alpha,
            directions,
            mass_rel_se: 0.0,
            outer: Outer::Polar { draws, key },
        }
    }

    /// `σ_Λ` of total mass `α·C`, spread over the directions of the samples
    /// beyond their `quantile` radius (bin centers of the direction
    /// histogram); outer part from the samples at scale `g`.
    pub fn from_stationary(samples: &'a [Point], alpha: f64, c: Estimate, g: f64, quantile: f64) -> Result<Self> {
        let hist = direction_histogram(samples, quantile)?;
        let total = alpha * c.value;
        let tau = 2.0 * core::f64::consts::PI;
        let (rows, cols) = hist.shape;
        let mut directions = Vec::new();
        for (idx, frac) in hist.fractions.iter().enumerate() {
            if *frac == 0.0 {
                continue;
            }
            let w = match hist.dim {
                1 => Point::scalar(if idx == 0 { -1.0 } else { 1.0 }),
                2 => {
                    let a = tau * (idx as f64 + 0.5) / cols as f64;
                    Point::new(&[a.cos(), a.sin()])
                }
                _ => {
                    let (row, col) = (idx / cols, idx % cols);
                    let z = 2.0 * (row as f64 + 0.5) / rows as f64 - 1.0;
                    let a = tau * (col as f64 + 0.5) / cols as f64;
                    let s = (1.0 - z * z).sqrt();
                    Point::new(&[s * a.cos(), s * a.sin(), z])
                }
            };
            directions.push((w, total * frac));
        }
        Ok(TailMeasure {
            alpha,
            directions,
            mass_rel_se: if c.value != 0.0 { (c.se / c.value).abs() } else { 0.0 },
            outer: Outer::Stationary { samples, g },
        })
    }

    /// `σ_Λ(S^{d−1})`.
    pub fn total_mass(&self) -> f64 {
        self.directions.iter().map(|(_, m)| m).sum()
    }
}

/// Outer-part estimate with its half-scale companion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterEstimate {
    pub value: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    /// Same estimator at `g/2` (stationary outer part only).
    pub half: Option<(Complex64, f64, f64)>,
    /// `g` and `g/2` agree within 3 combined se in both components.
    pub scales_agree: bool,
}

/// `Λ(F·1{|x| > 1})` for a bounded `F`; `F` gets a per-point index for its
/// own random streams.
fn outer_integral<F>(measure: &TailMeasure, f: F) -> Result<OuterEstimate>
where
    F: Fn(&Point, (&str, u64)) -> Result<Complex64> + Sync + Send,
{
    let alpha = measure.alpha;
    match measure.outer {
        Outer::Stationary { samples, g } => {
            let at_scale = |scale: f64, label: &str| -> Result<(Complex64, f64, f64)> {
                let idx: Vec<usize> = (0..samples.len())
                    .filter(|i| samples[*i].norm() * scale > 1.0)
                    .collect();
                let vals =
                    exec::try_map_indexed(idx.len(), |j| f(&samples[idx[j]].scale(scale), (label, idx[j] as u64)))?;
                let n = samples.len() as f64;
                let k = scale.powf(-alpha);
                let (re, im) = complex_mean_with_zeros(&vals, n);
                Ok((Complex64::new(re.value * k, im.value * k), re.se * k, im.se * k))
            };
            let (v1, sr1, si1) = at_scale(g, "outer")?;
            let (v2, sr2, si2) = at_scale(0.5 * g, "outer-half")?;
            let agree = (v1.re - v2.re).abs() <= 3.0 * (sr1 * sr1 + sr2 * sr2).sqrt()
                && (v1.im - v2.im).abs() <= 3.0 * (si1 * si1 + si2 * si2).sqrt();
            Ok(OuterEstimate {
                value: v1,
                se_re: sr1,
                se_im: si1,
                half: Some((v2, sr2, si2)),
                scales_agree: agree,
            })
        }
        Outer::Polar { draws, key } => {
            let total = measure.total_mass();
            if total == 0.0 || draws == 0 {
                return Ok(OuterEstimate {
                    value: Complex64::new(0.0, 0.0),
                    se_re: 0.0,
                    se_im: 0.0,
                    half: None,
                    scales_agree: true,
                });
            }
            let vals = exec::try_map_indexed(draws, |i| {
                let mut st = key.child("radius", i as u64).stream();
                let mut u = st.uniform() * total;
                let mut w = measure.directions[measure.directions.len() - 1].0;
                for (dir, m) in &measure.directions {
                    if u < *m {
                        w = *dir;
                        break;
                    }
                    u -= m;
                }
                let r = st.uniform().powf(-1.0 / alpha);
                f(&w.scale(r), ("outer", i as u64))
            })?;
            let k = total / alpha;
            let (re, im) = complex_mean_with_zeros(&vals, draws as f64);
            Ok(OuterEstimate {
                value: Complex64::new(re.value * k, im.value * k),
                se_re: re.se * k,
                se_im: im.se * k,
                half: None,
                scales_agree: true,
            })
        }
    }
}

/// Means of real and imaginary parts of `vals` padded with zeros to `n`.
fn complex_mean_with_zeros(vals: &[Complex64], n: f64) -> (Estimate, Estimate) {
    let part = |get: fn(&Complex64) -> f64| {
        let s: f64 = vals.iter().map(get).sum();
        let sq: f64 = vals.iter().map(|z| get(z) * get(z)).sum();
        let mean = s / n;
        let var = if n > 1.0 {
            ((sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            se: (var / n).sqrt(),
        }
    };
    (part(|z| z.re), part(|z| z.im))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    AlphaBelow1,
    AlphaEq1,
    AlphaIn12,
    AlphaEq2,
}

impl Regime {
    pub fn from_alpha(alpha: f64) -> Result<Regime> {
        if !(alpha > 0.0) || alpha > 2.0 + REGIME_TOL {
            return Err(Error::InvalidExponent(alloc::format!(
                "stable limits need 0 < α ≤ 2 (got {alpha})"
            )));
        }
        Ok(if (alpha - 1.0).abs() <= REGIME_TOL {
            Regime::AlphaEq1
        } else if (alpha - 2.0).abs() <= REGIME_TOL {
            Regime::AlphaEq2
        } else if alpha < 1.0 {
            Regime::AlphaBelow1
        } else {
            Regime::AlphaIn12
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::AlphaBelow1 => "alpha_below_1",
            Regime::AlphaEq1 => "alpha_eq_1",
            Regime::AlphaIn12 => "alpha_in_1_2",
            Regime::AlphaEq2 => "alpha_eq_2",
        }
    }
}

/// `τ(t) = ∫ (x/(1 + |tx|²) − x/(1 + |x|²)) Λ(dx)`, only for `α = 1`.
pub fn tau(t: f64, measure: &TailMeasure) -> Result<VectorEstimate> {
    if Regime::from_alpha(measure.alpha)? != Regime::AlphaEq1 {
        return Err(Error::Precondition(alloc::format!(
            "τ(t) is defined for α = 1 only (α = {})",
            measure.alpha
        )));
    }
    let dim = measure.directions.first().map(|(w, _)| w.dim()).unwrap_or(1);
    let rule = RadialRule::new(1.0, 3.0, 8, 16);
    // inner part: Σ_w σ_w w ∫_0^1 r (1/(1+t²r²) − 1/(1+r²)) r^{−2} dr
    let radial = rule.integrate(|r| r * (1.0 / (1.0 + t * t * r * r) - 1.0 / (1.0 + r * r)));
    let mut inner = Point::zeros(dim);
    for (w, m) in &measure.directions {
        inner += w.scale(m * radial);
    }
    let mut value = inner;
    let mut se = Point::zeros(dim);
    for i in 0..dim {
        let part = outer_integral(measure, |x, _| {
            let c = x.as_slice()[i];
            let r2 = x.dot(x);
            Ok(Complex64::new(c / (1.0 + t * t * r2) - c / (1.0 + r2), 0.0))
        })?;
        value.as_mut_slice()[i] += part.value.re;
        let rel = inner.as_slice()[i] * measure.mass_rel_se;
        se.as_mut_slice()[i] = (part.se_re * part.se_re + rel * rel).sqrt();
    }
    Ok(VectorEstimate { value, se })
}

/// `C_α(v)` with its parts and diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CAlpha {
    pub value: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    /// Radial quadrature over `r < 1`.
    pub inner: Complex64,
    /// Estimator over `r > 1`.
    pub outer: Complex64,
    /// Closed-form `−i⟨v,x⟩` part over `r > 1` (`1 < α < 2`).
    pub linear: Complex64,
    pub scales_agree: bool,
    /// `se(Re Ĉ) > |Re Ĉ|`.
    pub indeterminate_sign: bool,
}

pub fn c_alpha(v: &Point, h: &Eigenfunction, measure: &TailMeasure) -> Result<CAlpha> {
    let alpha = measure.alpha;
    let regime = Regime::from_alpha(alpha)?;
    if regime == Regime::AlphaEq2 {
        return c_two(v, h, measure);
    }
    let order = if regime == Regime::AlphaBelow1 { 1.0 } else { 2.0 };
    let rule = RadialRule::new(alpha, order, 8, 16);
    let mut inner = Complex64::new(0.0, 0.0);
    let (mut var_re, mut var_im) = (0.0, 0.0);
    for (k, (w, mass)) in measure.directions.iter().enumerate() {
        let b = v.dot(w);
        let phis = h.phi_draws(w, ("direction", k as u64))?;
        let per_draw: Vec<Complex64> = phis
            .iter()
            .map(|p| {
                let a = v.dot(p);
                let mut acc = Complex64::new(0.0, 0.0);
                for (r, wt) in rule.radii().iter().zip(rule.weights()) {
                    let mut z = (cis(r * b) - 1.0) * cis(r * a);
                    match regime {
                        Regime::AlphaEq1 => z -= Complex64::new(0.0, r * b / (1.0 + r * r)),
                        Regime::AlphaIn12 => z -= Complex64::new(0.0, r * b),
                        _ => {}
                    }
                    acc += z * *wt;
                }
                acc
            })
            .collect();
        let est = ComplexEstimate::from_samples(per_draw.iter().copied());
        let (re, im) = complex_mean_with_zeros(&per_draw, per_draw.len() as f64);
        inner += est.value * *mass;
        var_re += (mass * re.se).powi(2);
        var_im += (mass * im.se).powi(2);
    }
    let outer = outer_integral(measure, |x, idx| {
        let hv = h.eval(x, v, idx)?;
        let vx = v.dot(x);
        let mut z = (cis(vx) - 1.0) * hv;
        if regime == Regime::AlphaEq1 {
            z -= Complex64::new(0.0, vx / (1.0 + x.dot(x)));
        }
        Ok(z)
    })?;
    let linear = if regime == Regime::AlphaIn12 {
        let s: f64 = measure.directions.iter().map(|(w, m)| m * v.dot(w)).sum();
        Complex64::new(0.0, -s / (alpha - 1.0))
    } else {
        Complex64::new(0.0, 0.0)
    };
    // σ-mass uncertainty scales the inner and linear parts together
    let sigma_part = (inner + linear) * measure.mass_rel_se;
    let se_re = (var_re + outer.se_re.powi(2) + sigma_part.re.powi(2)).sqrt();
    let se_im = (var_im + outer.se_im.powi(2) + sigma_part.im.powi(2)).sqrt();
    let value = inner + outer.value + linear;
    Ok(CAlpha {
        value,
        se_re,
        se_im,
        inner,
        outer: outer.value,
        linear,
        scales_agree: outer.scales_agree,
        indeterminate_sign: se_re > value.re.abs(),
    })
}

fn c_two(v: &Point, h: &Eigenfunction, measure: &TailMeasure) -> Result<CAlpha> {
    let (mut value, mut var) = (0.0, 0.0);
    for (k, (w, mass)) in measure.directions.iter().enumerate() {
        let b = v.dot(w);
        let phis = h.phi_draws(w, ("direction", k as u64))?;
        let proj = Estimate::from_samples(phis.iter().map(|p| v.dot(p)));
        value += -0.25 * mass * (b * b + 2.0 * b * proj.value);
        if proj.se.is_finite() {
            var += (0.5 * mass * b * proj.se).powi(2);
        }
    }
    let se = (var + (value * measure.mass_rel_se).powi(2)).sqrt();
    Ok(CAlpha {
        value: Complex64::new(value, 0.0),
        se_re: se,
        se_im: 0.0,
        inner: Complex64::new(value, 0.0),
        outer: Complex64::new(0.0, 0.0),
        linear: Complex64::new(0.0, 0.0),
        scales_agree: true,
        indeterminate_sign: se > value.abs(),
    })
}

/// Centering `d_n` of the limit theorem.
#[derive(Clone, Debug, PartialEq)]
pub enum Centering {
    /// `α < 1`.
    None,
    /// `α = 1`: `n ξ(1/n)` computed per `n` from a stationary batch.
    Xi(Vec<(usize, Point)>),
    /// `1 < α ≤ 2`: `n m` with `m` the stationary mean.
    Mean(Point),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitParams {
    pub alpha: f64,
    pub regime: Regime,
    pub centering: Centering,
}

impl LimitParams {
    pub fn new(alpha: f64, centering: Centering) -> Result<Self> {
        let regime = Regime::from_alpha(alpha)?;
        let ok = matches!(
            (regime, &centering),
            (Regime::AlphaBelow1, Centering::None)
                | (Regime::AlphaEq1, Centering::Xi(_))
                | (Regime::AlphaIn12 | Regime::AlphaEq2, Centering::Mean(_))
        );
        if !ok {
            return Err(Error::Configuration(alloc::format!(
                "centering {centering:?} does not match regime {}",
                regime.name()
            )));
        }
        Ok(LimitParams {
            alpha,
            regime,
            centering,
        })
    }

    /// `α = 1` parameters with `ξ(1/n)` evaluated on `samples` for each `n`.
    pub fn alpha_one(samples: &[Point], ns: &[usize]) -> Result<Self> {
        let table = ns
            .iter()
            .map(|&n| xi(1.0 / n as f64, samples).map(|e| (n, e.value)))
            .collect::<Result<Vec<_>>>()?;
        LimitParams::new(1.0, Centering::Xi(table))
    }

    pub fn norming(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        match self.regime {
            Regime::AlphaEq2 if n < 2 => Err(Error::Precondition("(n log n)^{-1/2} needs n ≥ 2".into())),
            Regime::AlphaEq2 => Ok(1.0 / (nf * nf.ln()).sqrt()),
            Regime::AlphaEq1 => Ok(1.0 / nf),
            _ => Ok(nf.powf(-1.0 / self.alpha)),
        }
    }
}

/// Applies the regime's centering and norming to `S_n` samples.
pub fn normalize_birkhoff(sums: &[Point], n: usize, params: &LimitParams) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::Precondition("normalization needs n ≥ 1".into()));
    }
    let a = params.norming(n)?;
    let nf = n as f64;
    Ok(match &params.centering {
        Centering::None => sums.iter().map(|s| s.scale(a)).collect(),
        Centering::Mean(m) => sums.iter().map(|s| (*s - m.scale(nf)).scale(a)).collect(),
        Centering::Xi(table) => {
            let xi_n = table
                .iter()
                .find(|(k, _)| *k == n)
                .map(|(_, x)| *x)
                .ok_or_else(|| Error::Precondition(alloc::format!("no ξ(1/n) entry for n = {n}")))?;
            sums.iter().map(|s| s.scale(a) - xi_n.scale(nf)).collect()
        }
    })
}

/// Stationary mean; for nonnegative scalar samples with `κ(1) < 1` it uses
/// `E S = E(ψ_θ(S) − M_θS)/(1 − κ(1))`, whose summands are bounded by
/// `|N_θ|` instead of having infinite variance.
pub fn stationary_mean(
    spec: &ModelSpec,
    samples: &[Point],
    kappa_one: Option<f64>,
    key: StreamKey,
) -> Result<VectorEstimate> {
    let dim = samples
        .first()
        .map(Point::dim)
        .ok_or_else(|| Error::Degenerate("mean of an empty batch".into()))?;
    let nonneg = dim == 1 && samples.iter().all(|x| x.x() >= 0.0);
    match kappa_one {
        Some(k) if nonneg && k < 1.0 => {
            let d = tail::pairwise_differences(spec, samples, 1.0, key)?;
            let e = Estimate::from_samples(d).scaled(1.0 / (1.0 - k));
            Ok(VectorEstimate {
                value: Point::scalar(e.value),
                se: Point::scalar(e.se),
            })
        }
        _ => {
            let mut value = Point::zeros(dim);
            let mut se = Point::zeros(dim);
            for i in 0..dim {
                let e = Estimate::from_samples(samples.iter().map(|x| x.as_slice()[i]));
                value.as_mut_slice()[i] = e.value;
                se.as_mut_slice()[i] = e.se;
            }
            Ok(VectorEstimate { value, se })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CfPoint {
    pub t: f64,
    pub v_index: usize,
    pub value: Complex64,
    pub se: f64,
}

/// `mean exp(i t⟨v, X⟩)` on the product grid `ts × vs`.
pub fn empirical_cf(samples: &[Point], ts: &[f64], vs: &[Point]) -> Vec<CfPoint> {
    let mut out = Vec::with_capacity(ts.len() * vs.len());
    for &t in ts {
        for (vi, v) in vs.iter().enumerate() {
            let est = if t == 0.0 {
                ComplexEstimate::exact(Complex64::new(1.0, 0.0))
            } else {
                ComplexEstimate::from_samples(samples.iter().map(|x| cis(t * v.dot(x))))
            };
            out.push(CfPoint {
                t,
                v_index: vi,
                value: est.value,
                se: est.se,
            });
        }
    }
    out
}

/// Regression of `log(−log|CF̂(t)|)` on `log t`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexFit {
    pub alpha_hat: f64,
    pub regression: LinearFit,
    pub points: Vec<CfPoint>,
}

/// Lower and upper bounds on `|CF̂|` inside a usable window.
pub const CF_WINDOW: (f64, f64) = (0.05, 1.0);

pub fn stable_index_fit(samples: &[Point], v: &Point, ts: &[f64]) -> Result<IndexFit> {
    if ts.len() < 2 {
        return Err(Error::Precondition("index fit needs at least two t values".into()));
    }
    let points = empirical_cf(samples, ts, core::slice::from_ref(v));
    let mut xs = Vec::with_capacity(ts.len());
    let mut ys = Vec::with_capacity(ts.len());
    for p in &points {
        let m = p.value.norm();
        if !(m > CF_WINDOW.0 && m < CF_WINDOW.1) || !(p.t > 0.0) {
            return Err(Error::Degenerate(alloc::format!(
                "|CF| = {m} at t = {} is outside ({}, {}); choose another window",
                p.t,
                CF_WINDOW.0,
                CF_WINDOW.1
            )));
        }
        xs.push(p.t.ln());
        ys.push((-m.ln()).ln());
    }
    let regression = linear_fit(&xs, &ys);
    Ok(IndexFit {
        alpha_hat: regression.slope,
        regression,
        points,
    })
}

/// `points` log-spaced `t` between the first rung where `|CF̂|` drops below
/// `hi` and the first where it drops below `lo`, on the ladder `2^{k/4}`.
pub fn cf_window(samples: &[Point], v: &Point, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    let modulus = |t: f64| empirical_cf(samples, &[t], core::slice::from_ref(v))[0].value.norm();
    let mut t_hi_cf = None;
    let mut t_lo_cf = None;
    for k in -120..=120 {
        let t = 2f64.powf(k as f64 / 4.0);
        let m = modulus(t);
        if t_hi_cf.is_none() && m < hi {
            t_hi_cf = Some(t);
        }
        if t_hi_cf.is_some() && m < lo {
            t_lo_cf = Some(t / 2f64.powf(0.25));
            break;
        }
    }
    match (t_hi_cf, t_lo_cf) {
        (Some(a), Some(b)) if b > a => Ok(tail::log_grid(a, b, points)),
        _ => Err(Error::Degenerate(alloc::format!("no t window with {lo} < |CF| < {hi}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianCheck {
    pub ks: f64,
    /// 1% critical value `1.62761/√n`.
    pub critical: f64,
    pub pass: bool,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// KS distance to the normal law with the sample's mean and variance.
pub fn gaussian_check(xs: &[f64]) -> Result<GaussianCheck> {
    if xs.len() < 2 {
        return Err(Error::Degenerate("gaussian check needs at least two values".into()));
    }
    let mut acc = MeanVar::default();
    for x in xs {
        acc.push(*x);
    }
    let (mean, sd) = (acc.mean(), acc.variance().sqrt());
    if !(sd > 0.0) {
        return Err(Error::Degenerate("gaussian check of constant samples".into()));
    }
    let ks = stats::ks_statistic(xs, |x| stats::normal_cdf((x - mean) / sd));
    let critical = stats::KOLMOGOROV_1PCT / (xs.len() as f64).sqrt();
    let (skewness, excess_kurtosis) = skewness_kurtosis(xs);
    Ok(GaussianCheck {
        ks,
        critical,
        pass: ks < critical,
        mean,
        sd,
        skewness,
        excess_kurtosis,
    })
}

/// Projections `⟨v, x⟩`.
pub fn project(samples: &[Point], v: &Point) -> Vec<f64> {
    samples.iter().map(|x| v.dot(x)).collect()
}

/// Median of `|x|`, a scale for choosing `t` windows.
pub fn median_norm(samples: &[Point]) -> f64 {
    SortedSample::from_points(samples).quantile(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{stationary_batch, BackwardOptions};
    use crate::random::DistributionSpec;
    use crate::testutil;
    use alloc::vec;

    fn c(v: f64) -> DistributionSpec {
        DistributionSpec::Constant(v)
    }

    fn s(x: f64) -> Point {
        Point::scalar(x)
    }

    fn key(p: &str) -> StreamKey {
        StreamKey::new(77, 0, p)
    }

    fn benchmark() -> ModelSpec {
        ModelSpec::extremal(DistributionSpec::lognormal(-0.75, 1.0).unwrap(), c(1.0)).unwrap()
    }

    #[test]
    fn phi_series_examples() {
        let spec = benchmark();
        let mut st = key("phi").stream();
        assert_eq!(phi_series_sample(&spec, &s(0.0), 1e-12, &mut st).unwrap(), s(0.0));
        assert_eq!(phi_series_sample(&spec, &s(-3.0), 1e-12, &mut st).unwrap(), s(0.0));
        let aff = ModelSpec::affine_1d(c(0.5), c(1.0)).unwrap();
        let p = phi_series_sample(&aff, &s(3.0), 1e-13, &mut st).unwrap();
        assert!((p.x() - 3.0).abs() < 1e-12);
        let grow = ModelSpec::extremal(c(1.5), c(1.0)).unwrap();
        assert!(matches!(
            phi_series_sample(&grow, &s(1.0), 1e-12, &mut st),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn h_v_examples() {
        let spec = benchmark();
        let one = s(1.0);
        let h0 = h_v(&spec, &s(0.0), &one, 100, 1e-10, key("h")).unwrap();
        assert_eq!(h0.value, Complex64::new(1.0, 0.0));
        let aff = ModelSpec::affine_1d(c(0.5), c(1.0)).unwrap();
        for x in [0.3, 1.0, 2.5] {
            let h = h_v(&aff, &s(x), &one, 10, 1e-14, key("h")).unwrap();
            assert!((h.value - cis(x)).norm() < 1e-12);
        }
        for x in [0.4, 1.3] {
            let a = h_v(&spec, &s(2.0 * x), &one, 4000, 1e-10, key("hx")).unwrap();
            let b = h_v(&spec, &s(x), &s(2.0), 4000, 1e-10, key("hx")).unwrap();
            assert!((a.value - b.value).norm() <= 3.0 * (a.se * a.se + b.se * b.se).sqrt() + 1e-9);
            assert!(a.value.norm() <= 1.0 + 3.0 * a.se);
        }
    }

    #[test]
    fn h_v_holder_bound() {
        let spec = benchmark();
        let (alpha, kappa_delta) = (
            1.5,
            DistributionSpec::lognormal(-0.75, 1.0)
                .unwrap()
                .closed_form_moment(0.75)
                .unwrap(),
        );
        let delta = (alpha / 2.0f64).min(1.0);
        let one = s(1.0);
        let pts = [0.1, 0.5, 1.0, 3.0];
        for &x in &pts {
            for &y in &pts {
                let hx = h_v(&spec, &s(x), &one, 2000, 1e-10, key("x")).unwrap();
                let hy = h_v(&spec, &s(y), &one, 2000, 1e-10, key("y")).unwrap();
                let bound = 2.0 / (1.0 - kappa_delta) * (x - y).abs().powf(delta);
                assert!((hx.value - hy.value).norm() <= bound + 3.0 * (hx.se.powi(2) + hy.se.powi(2)).sqrt());
            }
        }
    }

    #[test]
    fn lambda_functional_examples() {
        let pts: Vec<Point> = testutil::pareto(1.5, 100_000, 3)
            .into_iter()
            .map(Point::scalar)
            .collect();
        // Λ({|x| > 1}) = 1 for the Pareto tail P(X > t) = t^{-1.5}
        let e1 = lambda_functional(&Exceedance(1.0), &pts, 0.02, 1.5).unwrap();
        let e2 = lambda_functional(&Exceedance(1.0), &pts, 0.01, 1.5).unwrap();
        assert!((e1.value - e2.value).abs() <= 3.0 * (e1.se.powi(2) + e2.se.powi(2)).sqrt());
        assert!((e1.value - 1.0).abs() <= 4.0 * e1.se);
        let e3 = lambda_functional(&Exceedance(2.0), &pts, 0.02, 1.5).unwrap();
        assert!((e3.value / e1.value - 2f64.powf(-1.5)).abs() <= 0.15 * 2f64.powf(-1.5));
        let zero = Vanishing {
            f: |_: &Point| 0.0,
            radius: Some(1.0),
        };
        assert_eq!(lambda_functional(&zero, &pts, 0.1, 1.5).unwrap().value, 0.0);
        let bad = Vanishing {
            f: |x: &Point| x.norm(),
            radius: None,
        };
        assert!(matches!(
            lambda_functional(&bad, &pts, 0.1, 1.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn xi_examples() {
        let two = vec![s(2.0); 5];
        assert!((xi(1.0, &two).unwrap().value.x() - 0.4).abs() < 1e-15);
        assert_eq!(xi(0.0, &two).unwrap().value.x(), 0.0);
        let aff = ModelSpec::affine(
            DistributionSpec::lognormal(-1.0, 0.5).unwrap(),
            Some(DistributionSpec::discrete(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()),
            vec![DistributionSpec::normal(0.0, 1.0).unwrap()],
            None,
        )
        .unwrap();
        let b = stationary_batch(&aff, 20_000, s(0.0), &BackwardOptions::default(), 4).unwrap();
        let e = xi(1.0, &b.samples).unwrap();
        assert!(e.value.x().abs() <= 3.0 * e.se.x());
    }

    #[test]
    fn tau_examples() {
        let one_sided = TailMeasure::polar(1.0, vec![(s(1.0), 1.0)], 200_000, key("tau"));
        let t1 = tau(1.0, &one_sided).unwrap();
        assert_eq!(t1.value.x(), 0.0);
        let t2 = tau(2.0, &one_sided).unwrap();
        // oracle: ∫_0^∞ (r/(1+4r²) − r/(1+r²)) r^{-2} dr = −ln 2
        assert!((t2.value.x() + 2f64.ln()).abs() <= 3.0 * t2.se.x(), "{t2:?}");
        let sym = TailMeasure::polar(1.0, vec![(s(1.0), 0.5), (s(-1.0), 0.5)], 200_000, key("tau"));
        let ts = tau(2.0, &sym).unwrap();
        assert!(ts.value.x().abs() <= 3.0 * ts.se.x() + 1e-12);
        let wrong = TailMeasure::polar(1.5, vec![(s(1.0), 1.0)], 10, key("tau"));
        assert!(matches!(tau(2.0, &wrong), Err(Error::Precondition(_))));
    }

    #[test]
    fn c_alpha_synthetic_oracle() {
        let m = TailMeasure::polar(0.5, vec![(s(1.0), 1.0)], 1_000_000, key("synthetic"));
        let c = c_alpha(&s(1.0), &Eigenfunction::Unit, &m).unwrap();
        // Γ(−1/2) e^{−iπ/4} = √(2π)(−1 + i)
        let target = Complex64::new(-2.506_628_274_631_000_5, 2.506_628_274_631_000_5);
        assert!((c.value.re - target.re).abs() <= 4.0 * c.se_re, "{c:?}");
        assert!((c.value.im - target.im).abs() <= 4.0 * c.se_im, "{c:?}");
        assert!(c.se_re < 0.01 && c.se_im < 0.01);
    }

    #[test]
    fn c_alpha_unit_homogeneity() {
        for alpha in [0.6, 1.5] {
            let m = TailMeasure::polar(alpha, vec![(s(1.0), 0.7), (s(-1.0), 0.3)], 400_000, key("hom"));
            let c1 = c_alpha(&s(1.0), &Eigenfunction::Unit, &m).unwrap();
            let c2 = c_alpha(&s(2.0), &Eigenfunction::Unit, &m).unwrap();
            let k = 2f64.powf(alpha);
            let se_re = (c2.se_re.powi(2) + (k * c1.se_re).powi(2)).sqrt();
            let se_im = (c2.se_im.powi(2) + (k * c1.se_im).powi(2)).sqrt();
            assert!(
                (c2.value.re - k * c1.value.re).abs() <= 3.0 * se_re,
                "α {alpha}: {c1:?} {c2:?}"
            );
            assert!(
                (c2.value.im - k * c1.value.im).abs() <= 3.0 * se_im,
                "α {alpha}: {c1:?} {c2:?}"
            );
            assert!(c1.value.re < 0.0);
        }
    }

    #[test]
    fn c_two_closed_form() {
        // affine M ≡ 1/2: Eφ(w) = w, so C_2(v) = −¼ Σ σ_w 3⟨v,w⟩²
        let aff = ModelSpec::affine_1d(c(0.5), c(1.0)).unwrap();
        let h = Eigenfunction::Series {
            spec: &aff,
            reps: 4,
            trunc_tol: 1e-14,
            key: key("c2"),
        };
        let m = TailMeasure::polar(2.0, vec![(s(1.0), 0.8), (s(-1.0), 0.2)], 0, key("c2"));
        let c = c_alpha(&s(1.0), &h, &m).unwrap();
        assert!((c.value.re + 0.75).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn regimes_and_normalization() {
        assert_eq!(Regime::from_alpha(0.5).unwrap(), Regime::AlphaBelow1);
        assert_eq!(Regime::from_alpha(1.0 + 1e-8).unwrap(), Regime::AlphaEq1);
        assert_eq!(Regime::from_alpha(1.5).unwrap(), Regime::AlphaIn12);
        assert_eq!(Regime::from_alpha(2.0).unwrap(), Regime::AlphaEq2);
        assert!(Regime::from_alpha(2.5).is_err());

        let p = LimitParams::new(0.5, Centering::None).unwrap();
        assert!((normalize_birkhoff(&[s(16.0)], 16, &p).unwrap()[0].x() - 0.0625).abs() < 1e-15);
        let p = LimitParams::new(2.0, Centering::Mean(s(0.0))).unwrap();
        let out = normalize_birkhoff(&[s(1.0)], 10, &p).unwrap()[0].x();
        assert!((1.0 / out - 4.798_525_912_188_081).abs() < 1e-9, "{}", 1.0 / out);
        let p = LimitParams::new(1.5, Centering::Mean(s(2.0))).unwrap();
        assert_eq!(normalize_birkhoff(&[s(2000.0)], 1000, &p).unwrap()[0].x(), 0.0);
        assert!(LimitParams::new(1.5, Centering::None).is_err());
        assert!(LimitParams::new(0.5, Centering::Mean(s(1.0))).is_err());

        let two = vec![s(2.0); 3];
        let p = LimitParams::alpha_one(&two, &[10]).unwrap();
        // S/n − n ξ(1/n) with ξ(0.1) = 0.2/1.04
        let out = normalize_birkhoff(&[s(20.0)], 10, &p).unwrap()[0].x();
        assert!((out - (2.0 - 10.0 * 0.2 / 1.04)).abs() < 1e-12);
        assert!(normalize_birkhoff(&[s(20.0)], 11, &p).is_err());
    }

    #[test]
    fn empirical_cf_examples() {
        let zeros = vec![s(0.0); 10];
        for p in empirical_cf(&zeros, &[0.5, 3.0], &[s(1.0)]) {
            assert_eq!(p.value, Complex64::new(1.0, 0.0));
        }
        let xs: Vec<Point> = testutil::normal(100_000, 5).into_iter().map(Point::scalar).collect();
        let p = empirical_cf(&xs, &[0.0, 1.0], &[s(1.0)]);
        assert_eq!(p[0].value, Complex64::new(1.0, 0.0));
        assert!((p[1].value - Complex64::new((-0.5f64).exp(), 0.0)).norm() <= 3.0 * p[1].se);
    }

    #[test]
    fn stable_sampler_matches_its_characteristic_function() {
        let alpha = 1.5;
        let xs: Vec<Point> = testutil::stable(alpha, 0.0, 100_000, 6)
            .into_iter()
            .map(Point::scalar)
            .collect();
        for p in empirical_cf(&xs, &[0.25, 0.5, 1.0, 1.5, 2.0], &[s(1.0)]) {
            let exact = (-p.t.powf(alpha)).exp();
            assert!((p.value - Complex64::new(exact, 0.0)).norm() <= 4.0 * p.se, "{p:?}");
        }
        let beta = 1.0;
        let ys: Vec<Point> = testutil::stable(0.8, beta, 100_000, 7)
            .into_iter()
            .map(Point::scalar)
            .collect();
        for p in empirical_cf(&ys, &[0.25, 0.5, 1.0, 1.5, 2.0], &[s(1.0)]) {
            let z = Complex64::new(
                -p.t.powf(0.8),
                p.t.powf(0.8) * beta * (core::f64::consts::PI * 0.4).tan(),
            );
            assert!((p.value - z.exp()).norm() <= 4.0 * p.se, "{p:?}");
        }
    }

    #[test]
    fn index_fit_examples() {
        let one = s(1.0);
        let cases: [(Vec<f64>, f64, f64); 3] = [
            (testutil::stable(1.5, 0.0, 100_000, 8), 1.4, 1.6),
            (testutil::normal(100_000, 9), 1.9, 2.1),
            (testutil::stable_cauchy(100_000, 10), 0.9, 1.1),
        ];
        for (xs, lo, hi) in cases {
            let pts: Vec<Point> = xs.into_iter().map(Point::scalar).collect();
            let ts = cf_window(&pts, &one, 0.2, 0.9, 8).unwrap();
            let fit = stable_index_fit(&pts, &one, &ts).unwrap();
            assert!(
                fit.alpha_hat >= lo && fit.alpha_hat <= hi,
                "{} not in [{lo}, {hi}]",
                fit.alpha_hat
            );
        }
        let zeros = vec![s(0.0); 10];
        assert!(stable_index_fit(&zeros, &one, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn gaussian_check_examples() {
        let g = gaussian_check(&testutil::normal(10_000, 11)).unwrap();
        assert!(g.pass, "{g:?}");
        let c = gaussian_check(&testutil::stable_cauchy(10_000, 12)).unwrap();
        assert!(!c.pass);
        assert!(gaussian_check(&[1.0; 100]).is_err());
    }

    #[test]
    fn stationary_mean_identity_matches_plain_mean() {
        let law = DistributionSpec::lognormal(-1.0, 1.0).unwrap();
        let spec = ModelSpec::extremal(law.clone(), c(1.0)).unwrap();
        let b = stationary_batch(&spec, 100_000, s(0.0), &BackwardOptions::default(), 12).unwrap();
        let k1 = law.closed_form_moment(1.0).unwrap();
        let fast = stationary_mean(&spec, &b.samples, Some(k1), key("mean")).unwrap();
        let plain = stationary_mean(&spec, &b.samples, None, key("mean")).unwrap();
        assert!(fast.se.x() < plain.se.x());
        assert!((fast.value.x() - plain.value.x()).abs() <= 4.0 * plain.se.x());
    }
}
