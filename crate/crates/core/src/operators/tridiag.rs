//! Tridiagonal systems and the Thomas algorithm.

use crate::error::{Error, Result};

/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`; `sub[0]` and
/// `sup[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Self {
        assert!(sub.len() == diag.len() && sup.len() == diag.len());
        Self { sub, diag, sup }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Smallest margin `diag - 1 - |sub| - |sup|` over the rows.
    pub fn dominance_margin(&self) -> f64 {
        let n = self.len();
        (0..n).fold(f64::INFINITY, |m, i| {
            let off = if i > 0 { self.sub[i].abs() } else { 0.0 }
                + if i + 1 < n { self.sup[i].abs() } else { 0.0 };
            m.min(self.diag[i] - 1.0 - off)
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular(0));
        }
        c[0] = self.sup[0] / denom;
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.sub[i] * c[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Singular(i));
            }
            c[i] = if i + 1 < n { self.sup[i] / denom } else { 0.0 };
            d[i] = (rhs[i] - self.sub[i] * d[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Number of negative pivots of the `LDL^T` factorization of the
    /// symmetric matrix `self - sigma * other` (Sylvester inertia).
    pub(crate) fn count_below(&self, other: &TridiagonalSystem, sigma: f64) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut d_prev = 1.0;
        let mut off_prev = 0.0;
        for i in 0..n {
            let a = self.diag[i] - sigma * other.diag[i];
            let mut d = if i == 0 {
                a
            } else {
                a - off_prev * off_prev / d_prev
            };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
            if i + 1 < n {
                off_prev = self.sup[i] - sigma * other.sup[i];
            }
            d_prev = d;
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singular_system_reported() {
        let t = TridiagonalSystem::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]);
        assert_eq!(t.solve(&[1.0, 1.0]), Err(Error::Singular(0)));
    }

    proptest! {
        #[test]
        fn solve_inverts_apply(
            x in proptest::collection::vec(-10.0f64..10.0, 3..40),
            off in 0.0f64..0.45,
        ) {
            let n = x.len();
            let t = TridiagonalSystem::new(vec![-off; n], vec![1.0 + 2.0 * off; n], vec![-off; n]);
            let b = t.apply(&x);
            let y = t.solve(&b).unwrap();
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
