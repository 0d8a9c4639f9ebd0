//! Smallest eigenvalues of the (generalized) symmetric tridiagonal problems
//! `A x = lambda M x` that discretize the linearized operators.
//!
//! Eigenvalues are isolated by Sturm-count bisection on `A - sigma M` and
//! polished, together with their vectors, by shifted inverse iteration with
//! `M`-orthogonal deflation against the vectors already found.

use super::line_grid::LineGrid;
use super::tridiag::TridiagonalSystem;
use crate::error::{Error, Result};
use crate::model;

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralOperator {
    /// `L~ = -d_rr + V` on `[-L, L]`, `L^2` metric. Has the zero mode `Y~`.
    LTildeFull,
    /// `L~` on the odd sector `[0, L]`, measured against the energy norm:
    /// the smallest value of `B(v)/‖v‖_{H^1}^2`, i.e. the coercivity
    /// constant of the linearized energy for odd perturbations.
    LTildeOdd,
    /// `L~` on the full line against the energy norm (contains the
    /// translation mode, so its bottom tends to 0).
    LTildeFullEnergy,
    /// `L~` on the odd sector with the plain `L^2` metric. Its bottom is the
    /// edge of the continuous spectrum and tends to 0 like `L^{-2}`.
    LTildeOddL2,
    /// `L~1 = -d_rr + P1` on `[-L, L]`, `L^2` metric.
    L1,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub operator: SpectralOperator,
    pub values: Vec<f64>,
    /// Eigenvectors on all grid nodes (zero at the Dirichlet ends),
    /// normalized in the metric of the problem.
    pub vectors: Vec<Vec<f64>>,
    pub grid: LineGrid,
    pub iterations: Vec<usize>,
}

/// `k` smallest eigenvalues of `operator` on a domain of half-length
/// `domain` (the odd-sector problems use `[0, domain]`) with spacing `dr`.
pub fn smallest_eigenvalues(
    operator: SpectralOperator,
    k: usize,
    domain: f64,
    dr: f64,
) -> Result<Spectrum> {
    if k == 0 {
        return Err(Error::InvalidParameter("need k >= 1".into()));
    }
    let grid = match operator {
        SpectralOperator::LTildeOdd | SpectralOperator::LTildeOddL2 => {
            LineGrid::half_uniform(domain, dr)?
        }
        _ => LineGrid::uniform(domain, dr)?,
    };
    let (a, m) = match operator {
        SpectralOperator::LTildeFull | SpectralOperator::LTildeOddL2 => {
            l2_problem(&grid, model::potential_v)
        }
        SpectralOperator::L1 => l2_problem(&grid, model::potential_p1),
        SpectralOperator::LTildeOdd | SpectralOperator::LTildeFullEnergy => energy_problem(&grid),
    };
    if k > a.len() {
        return Err(Error::InvalidParameter(format!(
            "asked for {k} eigenvalues of a {}-dimensional problem",
            a.len()
        )));
    }
    let (values, inner, iterations) = generalized_smallest(&a, &m, k)?;
    let vectors = inner
        .into_iter()
        .map(|v| {
            let mut full = Vec::with_capacity(v.len() + 2);
            full.push(0.0);
            full.extend(v);
            full.push(0.0);
            full
        })
        .collect();
    Ok(Spectrum {
        operator,
        values,
        vectors,
        grid,
        iterations,
    })
}

/// Weak form of `-d_rr + q` with the lumped `L^2` mass, interior unknowns.
fn l2_problem(grid: &LineGrid, q: fn(f64) -> f64) -> (TridiagonalSystem, TridiagonalSystem) {
    let p = vec![1.0; grid.len() - 1];
    let pot: Vec<f64> = grid.r().iter().map(|&r| q(r)).collect();
    let ones = vec![1.0; grid.len()];
    let a = sturm_liouville(grid, &p, &pot);
    let m = sturm_liouville(grid, &vec![0.0; grid.len() - 1], &ones);
    (a, m)
}

/// `B(v) = ∫ sqrt(1+r^2) v_r^2 - f'(H)/sqrt(1+r^2) v^2 dr` against
/// `‖v‖^2 = ∫ sqrt(1+r^2) v_r^2 + v^2/sqrt(1+r^2) dr`, the `r`-form of
/// `∫ v_x^2 + W''(H)/2 v^2 dx` and `∫ v_x^2 + v^2 dx`.
fn energy_problem(grid: &LineGrid) -> (TridiagonalSystem, TridiagonalSystem) {
    let p: Vec<f64> = grid
        .r()
        .windows(2)
        .map(|w| {
            let rm = 0.5 * (w[0] + w[1]);
            (1.0 + rm * rm).sqrt()
        })
        .collect();
    let qa: Vec<f64> = grid
        .r()
        .iter()
        .map(|&r| -model::nonlinearity_f_prime(model::kink_r(r)) / (1.0 + r * r).sqrt())
        .collect();
    let qm: Vec<f64> = grid.r().iter().map(|&r| 1.0 / (1.0 + r * r).sqrt()).collect();
    (sturm_liouville(grid, &p, &qa), sturm_liouville(grid, &p, &qm))
}

/// Interior rows of `-(p v')' + q v` in symmetric weak form on a uniform grid.
fn sturm_liouville(grid: &LineGrid, p_half: &[f64], q: &[f64]) -> TridiagonalSystem {
    let n = grid.len();
    let m = n - 2;
    let ds = grid.ds();
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    for k in 0..m {
        let i = k + 1;
        diag[k] = (p_half[i - 1] + p_half[i]) / ds + ds * q[i];
        sub[k] = -p_half[i - 1] / ds;
        sup[k] = -p_half[i] / ds;
    }
    TridiagonalSystem::new(sub, diag, sup)
}

fn inf_norm(t: &TridiagonalSystem) -> f64 {
    (0..t.len()).fold(0.0_f64, |acc, i| {
        acc.max(t.sub[i].abs() + t.diag[i].abs() + t.sup[i].abs())
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn generalized_smallest(
    a: &TridiagonalSystem,
    m: &TridiagonalSystem,
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<usize>)> {
    let mut lo = -1.0;
    while a.count_below(m, lo) > 0 {
        lo *= 2.0;
    }
    let mut hi = 1.0;
    while a.count_below(m, hi) < k {
        hi *= 2.0;
    }
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut iterations = Vec::with_capacity(k);
    for j in 0..k {
        // smallest sigma with at least j+1 eigenvalues below it
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (l + h);
            if a.count_below(m, mid) > j {
                h = mid;
            } else {
                l = mid;
            }
            if h - l <= 1e-15 * (1.0 + l.abs().max(h.abs())) {
                break;
            }
        }
        let lambda = 0.5 * (l + h);
        let (vec, its) = inverse_iteration(a, m, lambda, &vectors)?;
        values.push(lambda);
        vectors.push(vec);
        iterations.push(its);
    }
    Ok((values, vectors, iterations))
}

fn inverse_iteration(
    a: &TridiagonalSystem,
    m: &TridiagonalSystem,
    sigma: f64,
    found: &[Vec<f64>],
) -> Result<(Vec<f64>, usize)> {
    let n = a.len();
    let shifted = TridiagonalSystem::new(
        a.sub.iter().zip(&m.sub).map(|(x, y)| x - sigma * y).collect(),
        a.diag.iter().zip(&m.diag).map(|(x, y)| x - sigma * y).collect(),
        a.sup.iter().zip(&m.sup).map(|(x, y)| x - sigma * y).collect(),
    );
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin())
        .collect();
    let mut residual = f64::INFINITY;
    for it in 1..=EIGEN_MAX_ITERATIONS {
        let mx = m.apply(&x);
        let mut y = match shifted.solve(&mx) {
            Ok(y) => y,
            // exact hit of the eigenvalue: nudge the shift
            Err(Error::Singular(_)) => {
                return inverse_iteration(a, m, sigma * (1.0 + 1e-12) + 1e-300, found)
            }
            Err(e) => return Err(e),
        };
        for f in found {
            let c = dot(&m.apply(f), &y);
            y.iter_mut().zip(f).for_each(|(yi, fi)| *yi -= c * fi);
        }
        let norm = dot(&m.apply(&y), &y).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NoConvergence {
                iterations: it,
                residual,
            });
        }
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
        let ax = a.apply(&x);
        let mx = m.apply(&x);
        let rq = dot(&ax, &x) / dot(&mx, &x);
        let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - rq * q).collect();
        // backward-error scale, meaningful also for eigenvalues near zero
        let scale = (inf_norm(a) + rq.abs() * inf_norm(m)) * dot(&x, &x).sqrt();
        residual = dot(&r, &r).sqrt() / scale.max(f64::MIN_POSITIVE);
        if residual <= EIGEN_TOLERANCE {
            return Ok((x, it));
        }
    }
    Err(Error::NoConvergence {
        iterations: EIGEN_MAX_ITERATIONS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_laplacian_eigenvalues() {
        // -d_rr on [0, pi]: eigenvalues (4/h^2) sin^2(k h / 2)
        let pi = std::f64::consts::PI;
        let grid = LineGrid::half_uniform(pi, pi / 200.0).unwrap();
        let (a, m) = l2_problem(&grid, |_| 0.0);
        let (vals, _, _) = generalized_smallest(&a, &m, 4).unwrap();
        let h = grid.ds();
        for (k, v) in vals.iter().enumerate() {
            let exact = 4.0 / (h * h) * ((k + 1) as f64 * h / 2.0).sin().powi(2);
            assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");
        }
    }

    #[test]
    fn harmonic_oscillator() {
        // -d_rr + r^2: eigenvalues 1, 3, 5
        let grid = LineGrid::uniform(10.0, 0.01).unwrap();
        let (a, m) = l2_problem(&grid, |r| r * r);
        let (vals, vecs, _) = generalized_smallest(&a, &m, 3).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert!((v - (2 * k + 1) as f64).abs() < 1e-3);
        }
        let c = dot(&m.apply(&vecs[0]), &vecs[1]);
        assert!(c.abs() < 1e-8);
    }

    #[test]
    fn zero_k_rejected() {
        assert!(smallest_eigenvalues(SpectralOperator::L1, 0, 10.0, 0.1).is_err());
    }
}
