//! Gauss–Legendre quadrature, including the power-weighted radial integrals
//! `∫_0^1 F(r) r^{-α-1} dr` that appear in the polar form of a tail measure.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A fixed rule for `∫_0^1 F(r) r^{-α-1} dr` where `F(r) = O(r^order)` at
/// the origin with `order > α`.
///
/// The substitution `r = u^m` with `m(order − α) ≥ 2` turns the integrand
/// into a bounded function of `u`, after which composite Gauss–Legendre on
/// `[0, 1]` applies. `radii()` lists the nodes and `weights()` the matching
/// weights (already including `r^{-α-1}` and the Jacobian).
#[derive(Clone, Debug)]
pub struct RadialRule {
    radii: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialRule {
    pub fn new(alpha: f64, order: f64, panels: usize, points_per_panel: usize) -> Self {
        assert!(order > alpha, "integrand must vanish faster than r^alpha");
        let m = (2.0 / (order - alpha)).ceil().max(1.0);
        let (x, w) = gauss_legendre(points_per_panel);
        let mut radii = Vec::with_capacity(panels * points_per_panel);
        let mut weights = Vec::with_capacity(panels * points_per_panel);
        let h = 1.0 / panels as f64;
        for p in 0..panels {
            let (lo, hi) = (p as f64 * h, (p + 1) as f64 * h);
            for (xi, wi) in x.iter().zip(&w) {
                let u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi;
                let r = u.powf(m);
                // dr = m u^{m-1} du; r^{-α-1} = u^{-m(α+1)}
                let jac = m * u.powf(-m * alpha - 1.0);
                radii.push(r);
                weights.push(0.5 * (hi - lo) * wi * jac);
            }
        }
        RadialRule { radii, weights }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.radii.iter().zip(&self.weights).map(|(r, w)| w * f(*r)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((approx - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn radial_rule_matches_power_integrals() {
        // ∫_0^1 r^2 · r^{-2.5} dr = 2 and ∫_0^1 r · r^{-1.5} dr = 2
        let rule = RadialRule::new(1.5, 2.0, 4, 16);
        assert!((rule.integrate(|r| r * r) - 2.0).abs() < 1e-12);
        let rule = RadialRule::new(0.5, 1.0, 4, 16);
        assert!((rule.integrate(|r| r) - 2.0).abs() < 1e-12);
        // ∫_0^1 (1 - cos r) r^{-2.5} dr, with 1 - cos r written stably
        let rule = RadialRule::new(1.5, 2.0, 8, 16);
        let reference = 0.983_638_191_902_29; // Σ (-1)^{k+1} / ((2k)! (2k - 3/2))
        let v = rule.integrate(|r| 2.0 * (0.5 * r).sin().powi(2));
        assert!((v - reference).abs() < 1e-10, "{v}");
    }
}
