//! Full-line grids in `r` on which the linear operators act.
//!
//! A grid is the image of a uniform computational coordinate `s` under a
//! monotone map `r(s)`: the identity (uniform in `r`) or `r = sinh s`
//! (the evolution grid). Derivatives are taken in `s` and divided by the
//! Jacobian `J = dr/ds`; the second derivative uses the conservative form
//! `(1/J) d_s((1/J) d_s f)`, whose stiffness part is symmetric in the
//! `J`-weighted inner product.

use crate::error::{Error, Result};
use crate::grid::Grid1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    UniformR,
    SinhMapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineGrid {
    kind: LineKind,
    ds: f64,
    s: Vec<f64>,
    r: Vec<f64>,
    jac: Vec<f64>,
    jac_half: Vec<f64>,
    weights: Vec<f64>,
    origin: Option<usize>,
}

impl LineGrid {
    fn build(kind: LineKind, s: Vec<f64>, ds: f64, origin: Option<usize>) -> Result<Self> {
        if s.len() < 5 {
            return Err(Error::InvalidGrid(format!(
                "operator grid needs at least 5 nodes, got {}",
                s.len()
            )));
        }
        let map = |t: f64| match kind {
            LineKind::UniformR => (t, 1.0),
            LineKind::SinhMapped => (t.sinh(), t.cosh()),
        };
        let (r, jac): (Vec<f64>, Vec<f64>) = s.iter().map(|&t| map(t)).unzip();
        let jac_half = s.windows(2).map(|w| map(0.5 * (w[0] + w[1])).1).collect();
        let n = s.len();
        let weights = (0..n)
            .map(|i| {
                let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                end * ds * jac[i]
            })
            .collect();
        for w in r.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
            }
        }
        Ok(Self {
            kind,
            ds,
            s,
            r,
            jac,
            jac_half,
            weights,
            origin,
        })
    }

    /// Uniform symmetric grid on `[-half_length, half_length]` with spacing
    /// close to `dr`; the origin is a node.
    pub fn uniform(half_length: f64, dr: f64) -> Result<Self> {
        check_positive(half_length, dr)?;
        let m = (half_length / dr).round().max(2.0) as usize;
        let ds = half_length / m as f64;
        let s = (0..=2 * m).map(|j| (j as f64 - m as f64) * ds).collect();
        Self::build(LineKind::UniformR, s, ds, Some(m))
    }

    /// Uniform grid on `[0, length]`; used for half-line (odd sector) problems.
    pub fn half_uniform(length: f64, dr: f64) -> Result<Self> {
        check_positive(length, dr)?;
        let m = (length / dr).round().max(4.0) as usize;
        let ds = length / m as f64;
        let s = (0..=m).map(|j| j as f64 * ds).collect();
        Self::build(LineKind::UniformR, s, ds, Some(0))
    }

    /// Symmetric `r = sinh s` grid on `s in [-half_extent_x, half_extent_x]`.
    pub fn sinh_mapped(half_extent_x: f64, dx: f64) -> Result<Self> {
        check_positive(half_extent_x, dx)?;
        let m = (half_extent_x / dx).round().max(2.0) as usize;
        let ds = half_extent_x / m as f64;
        let s = (0..=2 * m).map(|j| (j as f64 - m as f64) * ds).collect();
        Self::build(LineKind::SinhMapped, s, ds, Some(m))
    }

    /// The mirrored window `|x| <= x_window` of an evolution grid, as a
    /// `sinh`-mapped line. Node `origin + i` coincides with half-line node `i`.
    pub fn from_evolution_window(grid: &Grid1D, x_window: f64) -> Result<Self> {
        let m = grid.index_at_or_below(x_window);
        if m < 2 {
            return Err(Error::InvalidGrid("diagnostic window too small".into()));
        }
        let xs = grid.node_x();
        let s = (0..=2 * m)
            .map(|j| if j < m { -xs[m - j] } else { xs[j - m] })
            .collect();
        Self::build(LineKind::SinhMapped, s, grid.spacing(), Some(m))
    }

    pub fn kind(&self) -> LineKind {
        self.kind
    }
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
    pub fn ds(&self) -> f64 {
        self.ds
    }
    pub fn s(&self) -> &[f64] {
        &self.s
    }
    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn jac(&self) -> &[f64] {
        &self.jac
    }
    pub fn jac_half(&self) -> &[f64] {
        &self.jac_half
    }
    /// Trapezoid weights for `∫ f dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn origin(&self) -> Option<usize> {
        self.origin
    }
    /// Whether node `i` and node `n - 1 - i` are mirror images.
    pub fn is_symmetric(&self) -> bool {
        self.origin.is_some_and(|o| 2 * o + 1 == self.len())
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.r.iter().map(|&r| f(r)).collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// `∫ f g dr`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.norm_sq(f).sqrt()
    }

    /// `‖ g f ‖_{L^2}^2` for a pointwise weight `g`.
    pub fn weighted_norm_sq(&self, g: &[f64], f: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| {
                let t = a * b;
                t * t * w
            })
            .sum()
    }

    /// Nodal `d_r f` by the centered stencil, one-sided at the ends.
    pub fn grad(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (f[i + 1] - f[i - 1]) / (2.0 * self.ds * self.jac[i]);
        }
        d[0] = (f[1] - f[0]) / (self.ds * self.jac_half[0]);
        d[n - 1] = (f[n - 1] - f[n - 2]) / (self.ds * self.jac_half[n - 2]);
        d
    }

    /// Conservative second difference; zero at the two end nodes.
    pub fn second_difference(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n];
        let ds2 = self.ds * self.ds;
        for i in 1..n - 1 {
            let fwd = (f[i + 1] - f[i]) / self.jac_half[i];
            let bwd = (f[i] - f[i - 1]) / self.jac_half[i - 1];
            d[i] = (fwd - bwd) / (self.jac[i] * ds2);
        }
        d
    }

    /// Edge-based `‖d_r f‖^2 = Σ ((f_{i+1} - f_i)/ds)^2 ds / J_{i+1/2}`,
    /// the seminorm paired with [`LineGrid::second_difference`].
    pub fn edge_grad_norm_sq(&self, f: &[f64]) -> f64 {
        f.windows(2)
            .zip(&self.jac_half)
            .map(|(w, j)| {
                let d = (w[1] - w[0]) / self.ds;
                d * d * self.ds / j
            })
            .sum()
    }

    /// Values at mirrored nodes: `f(-r) - sign * f(r)`; zero for an exactly
    /// odd (`sign = -1`) or even (`sign = 1`) field on a symmetric grid.
    pub fn parity_defect(&self, f: &[f64], sign: f64) -> f64 {
        let n = self.len();
        (0..n).fold(0.0_f64, |m, i| m.max((f[n - 1 - i] - sign * f[i]).abs()))
    }
}

fn check_positive(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGrid(format!(
            "extent and spacing must be positive, got {a} and {b}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CoordinateKind;

    #[test]
    fn uniform_grid_is_symmetric() {
        let g = LineGrid::uniform(10.0, 0.1).unwrap();
        assert_eq!(g.len(), 201);
        assert!(g.is_symmetric());
        assert_eq!(g.r()[100], 0.0);
        let f = g.sample(|r| r.sin());
        assert_eq!(g.parity_defect(&f, -1.0), 0.0);
    }

    #[test]
    fn integrate_gaussian_on_both_kinds() {
        let exact = std::f64::consts::PI.sqrt();
        let u = LineGrid::uniform(12.0, 0.05).unwrap();
        assert!((u.integrate(&u.sample(|r| (-r * r).exp())) - exact).abs() < 1e-12);
        let m = LineGrid::sinh_mapped(4.0, 0.005).unwrap();
        let err = (m.integrate(&m.sample(|r| (-r * r).exp())) - exact).abs();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn second_difference_converges_on_mapped_grid() {
        let errs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&dx| {
                let g = LineGrid::sinh_mapped(3.0, dx).unwrap();
                let f = g.sample(|r| (-r * r).exp());
                let d2 = g.second_difference(&f);
                g.r()
                    .iter()
                    .zip(&d2)
                    .skip(1)
                    .take(g.len() - 2)
                    .fold(0.0_f64, |m, (&r, &d)| {
                        m.max((d - (4.0 * r * r - 2.0) * (-r * r).exp()).abs())
                    })
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn evolution_window_matches_half_line_nodes() {
        let g = Grid1D::new(CoordinateKind::XUniform, 20.0, 0.02).unwrap();
        let line = LineGrid::from_evolution_window(&g, 5.0).unwrap();
        let o = line.origin().unwrap();
        assert!(line.is_symmetric());
        for i in 0..=o {
            assert_eq!(line.r()[o + i], g.node_r()[i]);
            assert_eq!(line.r()[o - i], -g.node_r()[i]);
        }
    }
}
