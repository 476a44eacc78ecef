//! Cubic segment polynomials and the exact integration primitives shared by
//! assembly and classification.
//!
//! Every coefficient in the supported model class is a polynomial of degree
//! at most three per grid cell plus an analytic power tail. The pairings that
//! appear downstream are therefore either polynomial integrands of degree at
//! most nine, handled exactly by 5-point Gauss–Legendre, or polynomial ×
//! power integrands, handled exactly by the shifted power rule.

use alloc::vec::Vec;
// powf/ln on f64 are std inherent methods; the trait supplies them for no_std
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Polynomial of degree ≤ 3 in a local variable `t` (distance from the left
/// endpoint of the cell it lives on).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly {
    pub coeffs: [f64; 4],
}

impl Poly {
    pub const ZERO: Poly = Poly { coeffs: [0.0; 4] };

    pub const fn new(coeffs: [f64; 4]) -> Self {
        Poly { coeffs }
    }

    pub const fn constant(c: f64) -> Self {
        Poly { coeffs: [c, 0.0, 0.0, 0.0] }
    }

    pub const fn linear(c0: f64, c1: f64) -> Self {
        Poly { coeffs: [c0, c1, 0.0, 0.0] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coeffs;
        c0 + t * (c1 + t * (c2 + t * c3))
    }

    pub fn derivative(&self) -> Poly {
        let [_, c1, c2, c3] = self.coeffs;
        Poly::new([c1, 2.0 * c2, 3.0 * c3, 0.0])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Reparametrizes: returns `r` with `r(u) = p(a0 + a1·u)`.
    pub fn compose_affine(&self, a0: f64, a1: f64) -> Poly {
        let [c0, c1, c2, c3] = self.coeffs;
        Poly::new([
            c0 + a0 * (c1 + a0 * (c2 + a0 * c3)),
            a1 * (c1 + a0 * (2.0 * c2 + 3.0 * a0 * c3)),
            a1 * a1 * (c2 + 3.0 * a0 * c3),
            a1 * a1 * a1 * c3,
        ])
    }
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// 5-point Gauss–Legendre rule on [a, b]; exact for polynomials of degree ≤ 9.
pub fn gauss5<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite 5-point rule with `parts` equal subintervals, for smooth
/// non-polynomial integrands.
pub fn gauss5_composite<F: FnMut(f64) -> f64>(a: f64, b: f64, parts: usize, mut f: F) -> f64 {
    let n = parts.max(1);
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let lo = a + i as f64 * h;
        acc += gauss5(lo, lo + h, &mut f);
    }
    acc
}

/// ∫_a^b t^γ dt for 0 ≤ a ≤ b ≤ ∞. Divergent integrals return `+∞`.
pub fn power_integral(gamma: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= a);
    if a == b {
        return 0.0;
    }
    if b.is_infinite() {
        if gamma < -1.0 && a > 0.0 {
            return -a.powf(gamma + 1.0) / (gamma + 1.0);
        }
        return f64::INFINITY;
    }
    if gamma == -1.0 {
        if a == 0.0 {
            return f64::INFINITY;
        }
        return (b / a).ln();
    }
    if a == 0.0 && gamma < -1.0 {
        return f64::INFINITY;
    }
    (b.powf(gamma + 1.0) - a.powf(gamma + 1.0)) / (gamma + 1.0)
}

/// ∫_a^b (t + σ)^(−α) · p(t − x0) dt, exactly, via expansion in powers of
/// s = t + σ. `x0` is the origin of `p`'s local variable. Requires a + σ > 0
/// unless every divergent term has zero coefficient; divergence yields ±∞.
pub fn power_weighted_integral(alpha: f64, sigma: f64, p: &Poly, x0: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= a);
    let q = p.compose_affine(-(x0 + sigma), 1.0);
    let (lo, hi) = (a + sigma, if b.is_infinite() { b } else { b + sigma });
    let mut acc = 0.0;
    for (j, &cj) in q.coeffs.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        acc += cj * power_integral(j as f64 - alpha, lo, hi);
    }
    acc
}

/// Continuous piecewise polynomial on `[grid[0], grid[last]]`, zero outside.
/// Used as the test-function class for distributional pairings.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    grid: Vec<f64>,
    segments: Vec<Poly>,
}

impl Piecewise {
    pub fn new(grid: Vec<f64>, segments: Vec<Poly>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidCoefficient(
                "piecewise function needs at least two grid points".into(),
            ));
        }
        if segments.len() + 1 != grid.len() {
            return Err(Error::InvalidCoefficient(
                "segment count must be grid point count minus one".into(),
            ));
        }
        if grid.iter().any(|x| !x.is_finite()) || !strictly_increasing(&grid) {
            return Err(Error::InvalidCoefficient(
                "grid must be finite and strictly increasing".into(),
            ));
        }
        Ok(Piecewise { grid, segments })
    }

    /// Piecewise-linear tent: 0 at `a`, `height` at `peak`, 0 at `b`.
    pub fn tent(a: f64, peak: f64, b: f64, height: f64) -> Result<Self> {
        let up = height / (peak - a);
        let down = height / (b - peak);
        Piecewise::new(
            alloc::vec![a, peak, b],
            alloc::vec![Poly::linear(0.0, up), Poly::linear(height, -down)],
        )
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn segments(&self) -> &[Poly] {
        &self.segments
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let i = cell_index(&self.grid, x);
        self.segments[i].eval(x - self.grid[i])
    }

    /// Largest jump across internal breakpoints and the outer boundary
    /// (where the function continues by zero).
    pub fn max_jump(&self) -> f64 {
        let mut worst: f64 = self.segments[0].eval(0.0).abs();
        for i in 1..self.grid.len() - 1 {
            let left = self.segments[i - 1].eval(self.grid[i] - self.grid[i - 1]);
            let right = self.segments[i].eval(0.0);
            worst = worst.max((left - right).abs());
        }
        let last = self.segments.len() - 1;
        worst.max(
            self.segments[last]
                .eval(self.grid[last + 1] - self.grid[last])
                .abs(),
        )
    }
}

pub(crate) fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Index of the cell of `grid` containing `x`; the last cell is closed on the
/// right. Assumes `grid[0] ≤ x ≤ grid[last]` and at least two points.
pub(crate) fn cell_index(grid: &[f64], x: f64) -> usize {
    match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(grid.len() - 2),
        Err(i) => i.saturating_sub(1).min(grid.len() - 2),
    }
}

/// Sorted deduplicated union of breakpoint lists restricted to [lo, hi],
/// with lo and hi always included.
pub(crate) fn merged_cells(lists: &[&[f64]], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(lists.iter().map(|l| l.len()).sum::<usize>() + 2);
    pts.push(lo);
    pts.push(hi);
    for list in lists {
        for &x in *list {
            if x > lo && x < hi {
                pts.push(x);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss5_exact_through_degree_nine() {
        for k in 0..=9u32 {
            let exact = 1.0 / (k as f64 + 1.0);
            let got = gauss5(0.0, 1.0, |x| x.powi(k as i32));
            assert!((got - exact).abs() < 1e-15, "degree {k}: {got} vs {exact}");
        }
        // degree 10 must show quadrature error, confirming the rule's order
        let err = (gauss5(0.0, 1.0, |x| x.powi(10)) - 1.0 / 11.0).abs();
        assert!(err > 1e-9);
    }

    #[test]
    fn power_integral_closed_forms() {
        assert!((power_integral(-2.0, 1.0, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((power_integral(-0.5, 0.0, 1.0) - 2.0).abs() < 1e-15);
        assert!((power_integral(-1.0, 1.0, core::f64::consts::E) - 1.0).abs() < 1e-15);
        assert_eq!(power_integral(-1.0, 0.0, 1.0), f64::INFINITY);
        assert_eq!(power_integral(-1.0, 1.0, f64::INFINITY), f64::INFINITY);
        assert_eq!(power_integral(2.0, 0.0, f64::INFINITY), f64::INFINITY);
        assert_eq!(power_integral(0.5, 3.0, 3.0), 0.0);
    }

    #[test]
    fn power_weighted_matches_quadrature_on_finite_cell() {
        // ∫_2^5 (t+1)^(−1.3) (t−2)² dt, origin x0 = 2
        let p = Poly::new([0.0, 0.0, 1.0, 0.0]);
        let exact = power_weighted_integral(1.3, 1.0, &p, 2.0, 2.0, 5.0);
        let quad = gauss5_composite(2.0, 5.0, 64, |t| (t + 1.0).powf(-1.3) * (t - 2.0).powi(2));
        assert!((exact - quad).abs() < 1e-10, "{exact} vs {quad}");
    }

    #[test]
    fn compose_affine_reparametrizes() {
        let p = Poly::new([1.0, -2.0, 0.5, 3.0]);
        let r = p.compose_affine(0.7, -1.3);
        for u in [-1.0, 0.0, 0.4, 2.0] {
            assert!((r.eval(u) - p.eval(0.7 - 1.3 * u)).abs() < 1e-12);
        }
    }

    #[test]
    fn tent_evaluates_and_is_continuous() {
        let h = Piecewise::tent(0.0, 1.0, 3.0, 2.0).unwrap();
        assert_eq!(h.eval(1.0), 2.0);
        assert!((h.eval(2.0) - 1.0).abs() < 1e-15);
        assert_eq!(h.eval(-0.1), 0.0);
        assert_eq!(h.eval(3.1), 0.0);
        assert!(h.max_jump() < 1e-15);
    }

    #[test]
    fn cell_index_handles_boundaries() {
        let grid = [0.0, 1.0, 2.5, 4.0];
        assert_eq!(cell_index(&grid, 0.0), 0);
        assert_eq!(cell_index(&grid, 1.0), 1);
        assert_eq!(cell_index(&grid, 3.9), 2);
        assert_eq!(cell_index(&grid, 4.0), 2);
    }
}
