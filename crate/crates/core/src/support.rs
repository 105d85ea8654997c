//! Fixed points of contracting compositions for finite parameter laws.
//!
//! When every parameter law is finite, the support of the stationary law is
//! the closure of the set of fixed points `F_w^•` of all contracting words
//! `F_w = ψ_{θ_1} ∘ … ∘ ψ_{θ_k}` over the parameter atoms. This module
//! enumerates words breadth first up to a depth, computes their fixed points
//! and compares the resulting cloud with stationary samples.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{Point, Rotation};
use crate::model::{Family, ModelSpec, ThetaDraw};

pub const DEFAULT_DEDUPE_TOL: f64 = 1e-8;
pub const DEFAULT_FIXPOINT_TOL: f64 = 1e-10;
/// Largest number of words enumerated in one call.
pub const MAX_WORDS: usize = 1_000_000;
/// Words whose Lipschitz product exceeds this are not extended.
pub const PRUNE_PRODUCT: f64 = 1e6;
const MAX_ITER: usize = 100_000;

/// `ψ_{w_1} ∘ … ∘ ψ_{w_k}(x)`: the last letter acts first.
pub fn compose(spec: &ModelSpec, word: &[ThetaDraw], x: &Point) -> Result<Point> {
    word.iter().rev().try_fold(*x, |y, th| spec.apply(th, &y))
}

/// Lipschitz product of a word.
pub fn word_contraction(spec: &ModelSpec, word: &[ThetaDraw]) -> f64 {
    word.iter().map(|th| spec.lipschitz_bound(th)).product()
}

/// Banach iteration for the fixed point of a contracting word, stopped once
/// `|x_{k+1} − x_k| < tol (1 − L)/L`, which bounds the distance to the fixed
/// point by `tol`.
pub fn fixed_point(spec: &ModelSpec, word: &[ThetaDraw], x0: &Point, tol: f64, max_iter: usize) -> Result<Point> {
    let l = word_contraction(spec, word);
    if word.is_empty() || !(l < 1.0) {
        return Err(Error::Precondition(alloc::format!(
            "fixed point needs a nonempty contracting word (Lipschitz product {l})"
        )));
    }
    let threshold = if l == 0.0 { f64::INFINITY } else { tol * (1.0 - l) / l };
    let mut x = *x0;
    for _ in 0..max_iter {
        let next = compose(spec, word, &x)?;
        let step = next.distance(&x);
        x = next;
        if step < threshold {
            return Ok(x);
        }
    }
    Err(Error::Convergence {
        depth: max_iter,
        bound: f64::NAN,
    })
}

/// All parameter tuples with positive probability, in canonical order.
pub fn theta_atoms(spec: &ModelSpec) -> Result<Vec<ThetaDraw>> {
    let atoms_of = |name: &str| -> Result<Vec<f64>> {
        let law = spec
            .law(name)
            .ok_or_else(|| Error::Precondition(alloc::format!("missing law for '{name}'")))?;
        law.atoms()
            .map(|a| a.into_iter().map(|(v, _)| v).collect())
            .ok_or_else(|| {
                Error::Precondition(alloc::format!(
                    "support enumeration needs discrete or constant laws; '{name}' is continuous"
                ))
            })
    };
    let mut out = Vec::new();
    match spec.family() {
        Family::Extremal => {
            for a in atoms_of("a")? {
                for b in atoms_of("b")? {
                    out.push(ThetaDraw::Extremal { a, b });
                }
            }
        }
        Family::Letac | Family::SqrtQuadratic => {
            for a in atoms_of("a")? {
                for b in atoms_of("b")? {
                    for c in atoms_of("c")? {
                        if spec.family() == Family::Letac {
                            out.push(ThetaDraw::Letac { a, b, c });
                        } else if b * b - 4.0 * a * c < 0.0 {
                            out.push(ThetaDraw::SqrtQuadratic { a, b, c });
                        }
                    }
                }
            }
        }
        Family::Arch1 => {
            for a in atoms_of("a")? {
                out.push(ThetaDraw::Arch1 { a });
            }
        }
        Family::Affine => {
            let dim = spec.dimension();
            let orientation_name = if dim == 1 { "sign" } else { "angle" };
            let rotations: Vec<Rotation> = match spec.law(orientation_name) {
                None => alloc::vec![Rotation::identity(dim)],
                Some(_) => atoms_of(orientation_name)?
                    .into_iter()
                    .map(|o| match dim {
                        1 => Rotation::reflection_1d(o),
                        2 => Rotation::planar(o),
                        _ => Rotation::axis_angle(spec.rotation_axis().unwrap_or([0.0, 0.0, 1.0]), o),
                    })
                    .collect(),
            };
            let names: Vec<alloc::string::String> = if dim == 1 {
                alloc::vec!["b".into()]
            } else {
                (1..=dim).map(|i| alloc::format!("b{i}")).collect()
            };
            let mut shifts: Vec<Vec<f64>> = alloc::vec![Vec::new()];
            for name in &names {
                let coords = atoms_of(name)?;
                shifts = shifts
                    .into_iter()
                    .flat_map(|prefix| {
                        coords.iter().map(move |c| {
                            let mut p = prefix.clone();
                            p.push(*c);
                            p
                        })
                    })
                    .collect();
            }
            for a in atoms_of("a")? {
                for r in &rotations {
                    for b in &shifts {
                        out.push(ThetaDraw::Affine {
                            scale: a,
                            rotation: *r,
                            shift: Point::new(b),
                        });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Degenerate("parameter law has no admissible atoms".into()));
    }
    Ok(out)
}

/// Deduplicated fixed points of contracting words.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportCloud {
    pub points: Vec<Point>,
    /// Length of the first word producing each point.
    pub depths: Vec<usize>,
    /// That word, as indices into `atoms`.
    pub words: Vec<Vec<usize>>,
    pub atoms: Vec<ThetaDraw>,
    pub dedupe_tol: f64,
    pub fixpoint_tol: f64,
    pub max_depth: usize,
}

impl SupportCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn word(&self, i: usize) -> Vec<ThetaDraw> {
        self.words[i].iter().map(|k| self.atoms[*k]).collect()
    }
}

/// Grid index for neighbor queries at a fixed radius.
struct Grid {
    cell: f64,
    cells: BTreeMap<[i64; 3], Vec<usize>>,
}

impl Grid {
    fn new(cell: f64) -> Self {
        Grid {
            cell,
            cells: BTreeMap::new(),
        }
    }

    fn key(&self, p: &Point) -> [i64; 3] {
        let mut k = [0i64; 3];
        for (slot, c) in k.iter_mut().zip(p.as_slice()) {
            *slot = (c / self.cell).floor() as i64;
        }
        k
    }

    fn insert(&mut self, p: &Point, index: usize) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(index);
    }

    /// Some indexed point within `radius ≤ cell` of `p`.
    fn near(&self, p: &Point, points: &[Point], radius: f64) -> bool {
        let k = self.key(p);
        let dim = p.dim();
        let span = |i: usize| if i < dim { -1i64..=1 } else { 0..=0 };
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    if let Some(ids) = self.cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if ids.iter().any(|i| points[*i].distance(p) < radius) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Breadth-first enumeration of words up to `max_depth`.
///
/// Words with Lipschitz product above [`PRUNE_PRODUCT`] are not extended;
/// words with product `< 1` contribute their fixed point (start `x0 = 0`).
/// Points closer than `dedupe_tol` to an earlier point are dropped.
pub fn enumerate_fixed_points(
    spec: &ModelSpec,
    max_depth: usize,
    fixpoint_tol: f64,
    dedupe_tol: f64,
) -> Result<SupportCloud> {
    let atoms = theta_atoms(spec)?;
    let lips: Vec<f64> = atoms.iter().map(|a| spec.lipschitz_bound(a)).collect();
    let x0 = Point::zeros(spec.dimension());
    let mut cloud = SupportCloud {
        points: Vec::new(),
        depths: Vec::new(),
        words: Vec::new(),
        atoms: atoms.clone(),
        dedupe_tol,
        fixpoint_tol,
        max_depth,
    };
    let mut grid = Grid::new(dedupe_tol);
    let mut frontier: Vec<(Vec<usize>, f64)> = alloc::vec![(Vec::new(), 1.0)];
    let mut total = 0usize;
    for depth in 1..=max_depth {
        let count = frontier.len().saturating_mul(atoms.len());
        total = total.saturating_add(count);
        if total > MAX_WORDS {
            return Err(Error::Capacity(alloc::format!(
                "support enumeration needs more than {MAX_WORDS} words at depth {depth}; lower max_depth"
            )));
        }
        let lips = &lips;
        let level: Vec<(Vec<usize>, f64)> = frontier
            .iter()
            .flat_map(|(w, l)| {
                (0..atoms.len()).map(move |k| {
                    let mut word = w.clone();
                    word.push(k);
                    (word, l * lips[k])
                })
            })
            .collect();
        let fixed = exec::try_map_indexed(level.len(), |i| {
            let (word, l) = &level[i];
            if *l < 1.0 {
                let letters: Vec<ThetaDraw> = word.iter().map(|k| atoms[*k]).collect();
                fixed_point(spec, &letters, &x0, fixpoint_tol, MAX_ITER).map(Some)
            } else {
                Ok(None)
            }
        })?;
        for ((word, _), p) in level.iter().zip(fixed) {
            if let Some(p) = p {
                if !grid.near(&p, &cloud.points, dedupe_tol) {
                    grid.insert(&p, cloud.points.len());
                    cloud.points.push(p);
                    cloud.depths.push(depth);
                    cloud.words.push(word.clone());
                }
            }
        }
        frontier = level.into_iter().filter(|(_, l)| *l <= PRUNE_PRODUCT).collect();
    }
    Ok(cloud)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coverage {
    /// Share of samples within `eps` of the cloud.
    pub fraction_covered: f64,
    /// Largest sample-to-cloud distance.
    pub max_distance: f64,
}

pub fn coverage_check(cloud: &SupportCloud, samples: &[Point], eps: f64) -> Result<Coverage> {
    if cloud.is_empty() {
        return Err(Error::Degenerate("coverage check against an empty cloud".into()));
    }
    if samples.is_empty() {
        return Err(Error::Degenerate("coverage check of an empty batch".into()));
    }
    let dists = if cloud.points[0].dim() == 1 {
        let mut xs: Vec<f64> = cloud.points.iter().map(Point::x).collect();
        xs.sort_by(f64::total_cmp);
        exec::map_indexed(samples.len(), |i| {
            let x = samples[i].x();
            let j = xs.partition_point(|c| *c < x);
            let mut d = f64::INFINITY;
            if j < xs.len() {
                d = d.min(xs[j] - x);
            }
            if j > 0 {
                d = d.min(x - xs[j - 1]);
            }
            d
        })
    } else {
        exec::map_indexed(samples.len(), |i| {
            cloud
                .points
                .iter()
                .map(|p| p.distance(&samples[i]))
                .fold(f64::INFINITY, f64::min)
        })
    };
    let covered = dists.iter().filter(|d| **d <= eps).count();
    Ok(Coverage {
        fraction_covered: covered as f64 / samples.len() as f64,
        max_distance: dists.iter().copied().fold(0.0, f64::max),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Closure {
    pub pairs: usize,
    /// Pairs `(p, θ)` with `ψ_θ(p)` farther than `tol` from every cloud point.
    pub frontier: usize,
    pub frontier_fraction: f64,
}

/// Applies every atom to every cloud point first reached at depth
/// `≤ base_depth` and counts images that fall outside the cloud.
///
/// Clouds of increasing depth are nested, so for a fixed base the frontier
/// fraction can only shrink as the enumeration depth grows.
pub fn closure_check(spec: &ModelSpec, cloud: &SupportCloud, base_depth: usize, tol: f64) -> Result<Closure> {
    let mut grid = Grid::new(tol);
    for (i, p) in cloud.points.iter().enumerate() {
        grid.insert(p, i);
    }
    let mut frontier = 0;
    let mut pairs = 0;
    for (p, _) in cloud
        .points
        .iter()
        .zip(&cloud.depths)
        .filter(|(_, d)| **d <= base_depth)
    {
        for th in &cloud.atoms {
            pairs += 1;
            let q = spec.apply(th, p)?;
            if !grid.near(&q, &cloud.points, tol) {
                frontier += 1;
            }
        }
    }
    Ok(Closure {
        pairs,
        frontier,
        frontier_fraction: if pairs == 0 {
            0.0
        } else {
            frontier as f64 / pairs as f64
        },
    })
}
