//! Points in `R^d` for `d ≤ 3` and the rotations acting on them.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;

pub const MAX_DIM: usize = 3;

/// A point of `R^d`, `1 ≤ d ≤ 3`, stored inline so chains never allocate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point {
            coords: [x, 0.0, 0.0],
            dim: 1,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension must be 1..=3");
        Point {
            coords: [0.0; MAX_DIM],
            dim: dim as u8,
        }
    }

    /// Panics unless `1 ≤ coords.len() ≤ 3`.
    pub fn new(coords: &[f64]) -> Self {
        let mut p = Point::zeros(coords.len());
        p.coords[..coords.len()].copy_from_slice(coords);
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim as usize]
    }

    /// First coordinate; the value itself for scalar points.
    #[inline]
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.coords[0] * other.coords[0] + self.coords[1] * other.coords[1] + self.coords[2] * other.coords[2]
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        if self.dim == 1 {
            self.coords[0].abs()
        } else {
            self.dot(self).sqrt()
        }
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point {
        let mut out = self;
        for c in out.coords.iter_mut() {
            *c *= s;
        }
        out
    }

    /// Unit vector in the direction of `self`; `None` at the origin.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for i in 0..MAX_DIM {
            out.coords[i] += rhs.coords[i];
        }
        out
    }
}

impl AddAssign for Point {
    #[inline]
    fn add_assign(&mut self, rhs: Point) {
        *self = *self + rhs;
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        self + (-rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    #[inline]
    fn mul(self, rhs: Point) -> Point {
        rhs.scale(self)
    }
}

/// An orthogonal transformation of `R^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    m: [[f64; MAX_DIM]; MAX_DIM],
    dim: u8,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension must be 1..=3");
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Rotation { m, dim: dim as u8 }
    }

    /// `O(1) = {±1}`: the sign of `s` (zero counts as `+1`).
    pub fn reflection_1d(s: f64) -> Self {
        let mut r = Rotation::identity(1);
        r.m[0][0] = if s < 0.0 { -1.0 } else { 1.0 };
        r
    }

    /// Counter-clockwise planar rotation.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut r = Rotation::identity(2);
        r.m[0][0] = c;
        r.m[0][1] = -s;
        r.m[1][0] = s;
        r.m[1][1] = c;
        r
    }

    /// Rodrigues rotation about a unit `axis` in `R^3`.
    pub fn axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Rotation {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
            dim: 3,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn apply(&self, p: &Point) -> Point {
        debug_assert_eq!(self.dim, p.dim);
        if self.dim == 1 {
            return Point::scalar(self.m[0][0] * p.coords[0]);
        }
        let mut out = Point::zeros(self.dim as usize);
        for i in 0..self.dim as usize {
            out.coords[i] = (0..self.dim as usize).map(|j| self.m[i][j] * p.coords[j]).sum();
        }
        out
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut out = Rotation::identity(self.dim());
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                out.m[i][j] = (0..d).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        out
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    /// Largest entry of `|RᵀR − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| self.m[k][i] * self.m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}
