//! Discrete realizations of the linearized operators: `L`, `L~ = -d_rr + V`,
//! the Darboux factors `U = d_r + nu`, `U* = -d_r + nu`, the partner
//! `L~1 = -d_rr + P1`, the smoother `X_eps = (1 - eps d_rr)^{-1}` and
//! `S_eps = X_eps U`.
//!
//! All operators act on fields sampled on a [`LineGrid`] and return zero at
//! the two end nodes (Dirichlet truncation). End values of the input are
//! used as given by the stencils.

mod line_grid;
mod spectrum;
mod tridiag;

pub use line_grid::{LineGrid, LineKind};
pub use spectrum::{smallest_eigenvalues, SpectralOperator, Spectrum, EIGEN_MAX_ITERATIONS, EIGEN_TOLERANCE};
pub use tridiag::TridiagonalSystem;

use crate::error::{Error, Result};
use crate::model;

fn pointwise(grid: &LineGrid, f: fn(f64) -> f64) -> Vec<f64> {
    grid.sample(f)
}

fn zero_ends(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.len();
    v[0] = 0.0;
    v[n - 1] = 0.0;
    v
}

/// `L v = -v_rr - r/(1+r^2) v_r - f'(H)/(1+r^2) v`.
pub fn apply_l(grid: &LineGrid, v: &[f64]) -> Vec<f64> {
    let d2 = grid.second_difference(v);
    let d1 = grid.grad(v);
    let out = grid
        .r()
        .iter()
        .zip(v)
        .zip(d1.iter().zip(&d2))
        .map(|((&r, &v), (&d1, &d2))| {
            let q = 1.0 + r * r;
            -d2 - r / q * d1 - model::nonlinearity_f_prime(model::kink_r(r)) / q * v
        })
        .collect();
    zero_ends(out)
}

fn schrodinger(grid: &LineGrid, w: &[f64], potential: fn(f64) -> f64) -> Vec<f64> {
    let d2 = grid.second_difference(w);
    let out = grid
        .r()
        .iter()
        .zip(w.iter().zip(&d2))
        .map(|(&r, (&w, &d2))| -d2 + potential(r) * w)
        .collect();
    zero_ends(out)
}

/// `L~ w = -w_rr + V w`.
pub fn apply_tilde_l(grid: &LineGrid, w: &[f64]) -> Vec<f64> {
    schrodinger(grid, w, model::potential_v)
}

/// `L~1 w = -w_rr + P1 w`.
pub fn apply_l1(grid: &LineGrid, w: &[f64]) -> Vec<f64> {
    schrodinger(grid, w, model::potential_p1)
}

/// `U w = w_r + nu w`, centered differences.
pub fn apply_u(grid: &LineGrid, w: &[f64]) -> Vec<f64> {
    let d1 = grid.grad(w);
    let nu = pointwise(grid, model::darboux_nu);
    zero_ends(
        d1.iter()
            .zip(w.iter().zip(&nu))
            .map(|(d, (w, n))| d + n * w)
            .collect(),
    )
}

/// `U* w = -w_r + nu w`.
pub fn apply_ustar(grid: &LineGrid, w: &[f64]) -> Vec<f64> {
    let d1 = grid.grad(w);
    let nu = pointwise(grid, model::darboux_nu);
    zero_ends(
        d1.iter()
            .zip(w.iter().zip(&nu))
            .map(|(d, (w, n))| -d + n * w)
            .collect(),
    )
}

/// The resolvent `X_eps = (1 - eps d_rr)^{-1}` with Dirichlet ends,
/// assembled once for repeated solves.
#[derive(Debug, Clone)]
pub struct Smoother {
    eps: f64,
    system: TridiagonalSystem,
    n: usize,
}

impl Smoother {
    pub fn new(grid: &LineGrid, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "smoothing parameter must be positive, got {eps}"
            )));
        }
        let n = grid.len();
        let m = n - 2;
        let (jac, jh, ds) = (grid.jac(), grid.jac_half(), grid.ds());
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let c = eps / (jac[i] * ds * ds);
            let (am, ap) = (1.0 / jh[i - 1], 1.0 / jh[i]);
            sub[k] = -c * am;
            sup[k] = -c * ap;
            diag[k] = 1.0 + c * (am + ap);
        }
        let system = TridiagonalSystem::new(sub, diag, sup);
        debug_assert!(system.dominance_margin() > -1e-12);
        Ok(Self { eps, system, n })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn system(&self) -> &TridiagonalSystem {
        &self.system
    }

    /// `g = X_eps h`; the ends of `h` are ignored and `g` vanishes there.
    pub fn solve(&self, h: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(h.len(), self.n);
        let inner = self.system.solve(&h[1..self.n - 1])?;
        let mut g = Vec::with_capacity(self.n);
        g.push(0.0);
        g.extend(inner);
        g.push(0.0);
        Ok(g)
    }

    /// `(1 - eps d_rr) g` on interior nodes, zero at the ends.
    pub fn forward(&self, g: &[f64]) -> Vec<f64> {
        let inner = self.system.apply(&g[1..self.n - 1]);
        let mut h = Vec::with_capacity(self.n);
        h.push(0.0);
        h.extend(inner);
        h.push(0.0);
        h
    }
}

pub fn solve_xeps(grid: &LineGrid, h: &[f64], eps: f64) -> Result<Vec<f64>> {
    Smoother::new(grid, eps)?.solve(h)
}

/// `S_eps w = X_eps (U w)`.
pub fn apply_seps(grid: &LineGrid, w: &[f64], eps: f64) -> Result<Vec<f64>> {
    Smoother::new(grid, eps)?.solve(&apply_u(grid, w))
}

pub fn apply_seps_with(smoother: &Smoother, grid: &LineGrid, w: &[f64]) -> Result<Vec<f64>> {
    smoother.solve(&apply_u(grid, w))
}

/// Two evaluations of `[X_eps, P1] U w1`.
#[derive(Debug, Clone)]
pub struct CommutatorCheck {
    /// `X_eps(P1 U w1) - P1 X_eps(U w1)`.
    pub direct: Vec<f64>,
    /// `2 eps X_eps(d_r P1 d_r h) + eps X_eps(d_rr P1 h)`, `h = S_eps w1`,
    /// with the discrete product rule of the conservative stencil: `d_r P1`
    /// is the averaged edge slope, `d_rr P1` the second difference of the
    /// sampled `P1`, and `h` in the last term is the neighbour average.
    pub identity_rhs: Vec<f64>,
    /// The same right-hand side with analytic `P1'`, `P1''` and nodal `h`.
    pub continuum_rhs: Vec<f64>,
}

pub fn commutator_xeps_p1(grid: &LineGrid, w1: &[f64], eps: f64) -> Result<CommutatorCheck> {
    let x = Smoother::new(grid, eps)?;
    commutator_with(&x, grid, w1)
}

pub fn commutator_with(x: &Smoother, grid: &LineGrid, w1: &[f64]) -> Result<CommutatorCheck> {
    let eps = x.eps();
    let n = grid.len();
    let p = pointwise(grid, model::potential_p1);
    let g = apply_u(grid, w1);
    let h = x.solve(&g)?;
    let pg: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a * b).collect();
    let xpg = x.solve(&pg)?;
    let direct: Vec<f64> = xpg
        .iter()
        .zip(p.iter().zip(&h))
        .map(|(a, (p, h))| a - p * h)
        .collect();

    let (jac, jh, ds) = (grid.jac(), grid.jac_half(), grid.ds());
    let d2p = grid.second_difference(&p);
    let mut slope_term = vec![0.0; n];
    let mut curv_term = vec![0.0; n];
    for i in 1..n - 1 {
        let a = (p[i + 1] - p[i]) / jh[i];
        let b = (p[i] - p[i - 1]) / jh[i - 1];
        let dp = (a + b) / (2.0 * ds);
        let dh = (h[i + 1] - h[i - 1]) / (2.0 * ds * jac[i]);
        slope_term[i] = 2.0 * eps * dp * dh;
        curv_term[i] = eps * d2p[i] * 0.5 * (h[i + 1] + h[i - 1]);
    }
    let identity_rhs: Vec<f64> = x
        .solve(&slope_term)?
        .iter()
        .zip(x.solve(&curv_term)?)
        .map(|(a, b)| a + b)
        .collect();

    let dh = grid.grad(&h);
    let cont_slope: Vec<f64> = grid
        .r()
        .iter()
        .zip(&dh)
        .map(|(&r, d)| 2.0 * eps * model::potential_p1_prime(r) * d)
        .collect();
    let cont_curv: Vec<f64> = grid
        .r()
        .iter()
        .zip(&h)
        .map(|(&r, h)| eps * model::potential_p1_second(r) * h)
        .collect();
    let continuum_rhs = x
        .solve(&cont_slope)?
        .iter()
        .zip(x.solve(&cont_curv)?)
        .map(|(a, b)| a + b)
        .collect();
    Ok(CommutatorCheck {
        direct,
        identity_rhs,
        continuum_rhs,
    })
}

/// Nodes `2..n-2`, where two-level stencil compositions are fully defined.
fn interior_norm(grid: &LineGrid, f: &[f64]) -> f64 {
    let n = grid.len();
    let w = grid.weights();
    (2..n - 2).map(|i| f[i] * f[i] * w[i]).sum::<f64>().sqrt()
}

/// `max ‖L~ phi - U*(U phi)‖ / ‖phi‖` over the test fields.
pub fn factorization_residual(grid: &LineGrid, fields: &[Vec<f64>]) -> f64 {
    fields
        .iter()
        .map(|phi| {
            let lhs = apply_tilde_l(grid, phi);
            let rhs = apply_ustar(grid, &apply_u(grid, phi));
            let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            interior_norm(grid, &diff) / grid.norm(phi)
        })
        .fold(0.0, f64::max)
}

/// `max ‖U(L~ phi) - L~1(U phi)‖ / ‖phi‖` over the test fields.
pub fn intertwining_residual(grid: &LineGrid, fields: &[Vec<f64>]) -> f64 {
    fields
        .iter()
        .map(|phi| {
            let lhs = apply_u(grid, &apply_tilde_l(grid, phi));
            let rhs = apply_l1(grid, &apply_u(grid, phi));
            let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            interior_norm(grid, &diff) / grid.norm(phi)
        })
        .fold(0.0, f64::max)
}

/// Relative interior residual `‖L~ Y~‖ / ‖Y~‖` of the zero mode.
pub fn zero_mode_residual(grid: &LineGrid) -> f64 {
    let y = grid.sample(model::darboux_ground_state);
    interior_norm(grid, &apply_tilde_l(grid, &y)) / grid.norm(&y)
}
