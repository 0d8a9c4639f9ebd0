use crate::error::{Error, Result};
use crate::model;
use crate::operators::LineGrid;

/// Smallest admissible `K`: `r V'(r) < 0` exactly for `r^2 > 9/5`.
pub const K_MIN_SQUARED: f64 = 9.0 / 5.0;

/// The even cutoff: `1` on `[-1, 1]`, `0` outside `[-2, 2]`, with the
/// quintic smoothstep `1 - (10t^3 - 15t^4 + 6t^5)`, `t = |s| - 1`, between.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutoffChi;

impl CutoffChi {
    fn t(s: f64) -> Option<f64> {
        let a = s.abs();
        (a > 1.0 && a < 2.0).then_some(a - 1.0)
    }

    pub fn value(self, s: f64) -> f64 {
        match Self::t(s) {
            Some(t) => 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t),
            None if s.abs() <= 1.0 => 1.0,
            None => 0.0,
        }
    }

    pub fn d1(self, s: f64) -> f64 {
        Self::t(s).map_or(0.0, |t| -s.signum() * 30.0 * t * t * (1.0 - t) * (1.0 - t))
    }

    pub fn d2(self, s: f64) -> f64 {
        Self::t(s).map_or(0.0, |t| -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t))
    }

    pub fn d3(self, s: f64) -> f64 {
        Self::t(s).map_or(0.0, |t| -s.signum() * 60.0 * (1.0 - 6.0 * t + 6.0 * t * t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub eps: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            a: 40.0,
            b: 8.0,
            k: 2.0,
            eps: 0.1,
        }
    }
}

/// Which parts of the scale ordering `K << B << A` and
/// `eps^{-1} B^{-2} << K^{-3}` hold for a parameter set. Advisory only.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Hierarchy {
    pub b_over_k: f64,
    pub a_over_b: f64,
    pub smoothing_ratio: f64,
    pub ordered: bool,
    pub strict: bool,
}

impl WeightParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("A", self.a), ("B", self.b), ("K", self.k), ("eps", self.eps)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.k * self.k <= K_MIN_SQUARED {
            return Err(Error::InvalidParameter(format!(
                "K = {} must exceed sqrt(9/5)",
                self.k
            )));
        }
        Ok(())
    }

    pub fn hierarchy(&self) -> Hierarchy {
        let smoothing_ratio = (1.0 / (self.eps * self.b * self.b)) / self.k.powi(-3);
        let b_over_k = self.b / self.k;
        let a_over_b = self.a / self.b;
        Hierarchy {
            b_over_k,
            a_over_b,
            smoothing_ratio,
            ordered: self.b > 1.0 && b_over_k > 1.0 && a_over_b > 1.0,
            strict: b_over_k >= 10.0 && a_over_b >= 10.0 && smoothing_ratio <= 0.1,
        }
    }
}

/// A weight `Φ` with the derivatives the virial identity needs.
#[derive(Debug, Clone, PartialEq)]
pub struct VirialWeight {
    pub phi: Vec<f64>,
    pub d1: Vec<f64>,
    pub d3: Vec<f64>,
}

/// All weight profiles for one `(A, B, K, eps)` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily {
    pub params: WeightParams,
    pub zeta_a: Vec<f64>,
    pub phi_a: Vec<f64>,
    pub zeta_b: Vec<f64>,
    pub phi_b: Vec<f64>,
    pub chi_a: Vec<f64>,
    pub psi_ab: Vec<f64>,
    pub sigma_a: Vec<f64>,
    pub sigma_b: Vec<f64>,
    pub rho_k: Vec<f64>,
    pub phi_a_over_r: Vec<f64>,
    /// `Φ_A` with `Φ_A' = ζ_A^2` and analytic `Φ_A'''`.
    pub virial_a: VirialWeight,
    /// `Ψ_{A,B}` with its analytic first and third derivatives.
    pub virial_ab: VirialWeight,
}

/// `g = (1 - χ)|r|` and its first two derivatives.
fn exponent(r: f64) -> (f64, f64, f64) {
    let chi = CutoffChi;
    let a = r.abs();
    let g = (1.0 - chi.value(r)) * a;
    let g1 = -chi.d1(r) * a + (1.0 - chi.value(r)) * r.signum();
    let g2 = -chi.d2(r) * a - 2.0 * chi.d1(r) * r.signum();
    (g, g1, g2)
}

/// `(ζ, (ζ^2)', (ζ^2)'')` for `ζ = exp(-g/scale)`.
fn zeta_derivs(r: f64, scale: f64) -> (f64, f64, f64) {
    let (g, g1, g2) = exponent(r);
    let z = (-g / scale).exp();
    let z2 = z * z;
    let k = 2.0 / scale;
    (z, -k * g1 * z2, z2 * (k * k * g1 * g1 - k * g2))
}

/// Cumulative trapezoid of `f` from the origin node, odd-extended on a
/// symmetric grid.
fn primitive_from_origin(grid: &LineGrid, f: &[f64]) -> Result<Vec<f64>> {
    let o = grid
        .origin()
        .ok_or_else(|| Error::InvalidGrid("weights need a grid with an origin node".into()))?;
    let n = grid.len();
    let (ds, jac) = (grid.ds(), grid.jac());
    let mut out = vec![0.0; n];
    for i in o + 1..n {
        out[i] = out[i - 1] + 0.5 * ds * (f[i - 1] * jac[i - 1] + f[i] * jac[i]);
    }
    if grid.is_symmetric() {
        for i in 0..o {
            out[i] = -out[n - 1 - i];
        }
    } else {
        for i in (0..o).rev() {
            out[i] = out[i + 1] - 0.5 * ds * (f[i + 1] * jac[i + 1] + f[i] * jac[i]);
        }
    }
    Ok(out)
}

pub fn build_weights(params: WeightParams, grid: &LineGrid) -> Result<WeightFamily> {
    params.validate()?;
    let WeightParams { a, b, k, .. } = params;
    let chi = CutoffChi;
    let r = grid.r();
    let za: Vec<(f64, f64, f64)> = r.iter().map(|&x| zeta_derivs(x, a)).collect();
    let zb: Vec<(f64, f64, f64)> = r.iter().map(|&x| zeta_derivs(x, b)).collect();
    let za2: Vec<f64> = za.iter().map(|z| z.0 * z.0).collect();
    let zb2: Vec<f64> = zb.iter().map(|z| z.0 * z.0).collect();
    let phi_a = primitive_from_origin(grid, &za2)?;
    let phi_b = primitive_from_origin(grid, &zb2)?;

    let mut psi = Vec::with_capacity(r.len());
    let mut psi1 = Vec::with_capacity(r.len());
    let mut psi3 = Vec::with_capacity(r.len());
    let mut chi_a = Vec::with_capacity(r.len());
    for (i, &x) in r.iter().enumerate() {
        let s = x / a;
        let (c0, c1, c2, c3) = (chi.value(s), chi.d1(s) / a, chi.d2(s) / (a * a), chi.d3(s) / a.powi(3));
        // derivatives of χ_A^2
        let q0 = c0 * c0;
        let q1 = 2.0 * c0 * c1;
        let q2 = 2.0 * (c1 * c1 + c0 * c2);
        let q3 = 2.0 * (3.0 * c1 * c2 + c0 * c3);
        let (f0, f1, f2, f3) = (phi_b[i], zb2[i], zb[i].1, zb[i].2);
        chi_a.push(c0);
        psi.push(q0 * f0);
        psi1.push(q1 * f0 + q0 * f1);
        psi3.push(q3 * f0 + 3.0 * q2 * f1 + 3.0 * q1 * f2 + q0 * f3);
    }
    let o = grid.origin().expect("checked by primitive_from_origin");
    let phi_a_over_r = r
        .iter()
        .zip(&phi_a)
        .enumerate()
        .map(|(i, (&x, &p))| if i == o { za2[i] } else { p / x })
        .collect();
    Ok(WeightFamily {
        params,
        zeta_a: za.iter().map(|z| z.0).collect(),
        zeta_b: zb.iter().map(|z| z.0).collect(),
        sigma_a: r.iter().map(|&x| 1.0 / (x / a).cosh()).collect(),
        sigma_b: r.iter().map(|&x| 1.0 / (x / b).cosh()).collect(),
        rho_k: r.iter().map(|&x| 1.0 / (x / k).cosh()).collect(),
        virial_a: VirialWeight {
            phi: phi_a.clone(),
            d1: za2.clone(),
            d3: za.iter().map(|z| z.2).collect(),
        },
        virial_ab: VirialWeight {
            phi: psi.clone(),
            d1: psi1,
            d3: psi3,
        },
        phi_a,
        phi_b,
        chi_a,
        psi_ab: psi,
        phi_a_over_r,
    })
}

/// Extreme values `(c1, c2)` of `ζ_A^2 / σ_A^2` on the grid.
pub fn sandwich_constants(family: &WeightFamily) -> (f64, f64) {
    family
        .zeta_a
        .iter()
        .zip(&family.sigma_a)
        .map(|(z, s)| (z * z) / (s * s))
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), q| (lo.min(q), hi.max(q)))
}

/// Checks `-Φ_A V' >= 0` for `|r| >= K` and returns the most negative value
/// of `-Φ_A V'` on `|r| < K` (the compact negative part).
pub fn sign_decomposition(family: &WeightFamily, grid: &LineGrid) -> (bool, f64) {
    let k = family.params.k;
    let mut outside_ok = true;
    let mut inside_min = 0.0_f64;
    for (&r, &p) in grid.r().iter().zip(&family.phi_a) {
        let q = -p * model::potential_v_prime(r);
        if r.abs() >= k {
            outside_ok &= q >= 0.0;
        } else {
            inside_min = inside_min.min(q);
        }
    }
    (outside_ok, inside_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn family() -> (LineGrid, WeightFamily) {
        let g = LineGrid::uniform(200.0, 0.01).unwrap();
        let f = build_weights(WeightParams::default(), &g).unwrap();
        (g, f)
    }

    #[test]
    fn chi_shape() {
        let c = CutoffChi;
        assert_eq!(c.value(0.0), 1.0);
        assert_eq!(c.value(1.0), 1.0);
        assert_eq!(c.value(2.0), 0.0);
        assert_eq!(c.value(-3.0), 0.0);
        assert!((c.value(1.5) - 0.5).abs() < 1e-15);
        for i in 0..=400 {
            let s = i as f64 * 0.01;
            assert_eq!(c.value(s), c.value(-s));
            assert!(c.d1(s) <= 0.0);
        }
    }

    proptest! {
        #[test]
        fn chi_derivatives_match_differences(s in -2.5f64..2.5) {
            let c = CutoffChi;
            let h = 1e-5;
            let fd1 = (c.value(s + h) - c.value(s - h)) / (2.0 * h);
            let fd2 = (c.d1(s + h) - c.d1(s - h)) / (2.0 * h);
            let fd3 = (c.d2(s + h) - c.d2(s - h)) / (2.0 * h);
            prop_assert!((fd1 - c.d1(s)).abs() < 1e-6);
            prop_assert!((fd2 - c.d2(s)).abs() < 1e-5);
            prop_assert!((fd3 - c.d3(s)).abs() < 1e-4);
        }
    }

    #[test]
    fn weights_at_origin_and_tails() {
        let (g, f) = family();
        let o = g.origin().unwrap();
        assert_eq!(f.zeta_a[o], 1.0);
        assert_eq!(f.phi_a[o], 0.0);
        assert_eq!(f.phi_a_over_r[o], 1.0);
        for (i, &r) in g.r().iter().enumerate() {
            if r.abs() >= 2.0 {
                assert_eq!(f.zeta_a[i], (-r.abs() / 40.0).exp());
            }
        }
        assert_eq!(g.parity_defect(&f.phi_a, -1.0), 0.0);
        assert_eq!(g.parity_defect(&f.psi_ab, -1.0), 0.0);
        assert!(f.phi_a.windows(2).all(|w| w[1] > w[0]));
        assert!(f.phi_a_over_r.iter().all(|&q| q > 0.0));
    }

    #[test]
    fn primitive_matches_closed_form_beyond_cutoff() {
        // for r >= 2: Φ_A(r) = Φ_A(2) + (A/2)(e^{-4/A} - e^{-2r/A})
        let (g, f) = family();
        let i2 = g.r().iter().position(|&r| r >= 2.0 - 1e-12).unwrap();
        let a: f64 = 40.0;
        for (i, &r) in g.r().iter().enumerate().skip(i2) {
            let exact = f.phi_a[i2] + 0.5 * a * ((-4.0 / a).exp() - (-2.0 * r / a).exp());
            assert!((f.phi_a[i] - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let (g, f) = family();
        let d = g.grad(&f.phi_a);
        let dd = g.grad(&g.grad(&f.virial_a.d1));
        let dpsi = g.grad(&f.psi_ab);
        let ddpsi = g.grad(&g.grad(&f.virial_ab.d1));
        let n = g.len();
        // the third derivative of χ jumps at |s| = 1, 2; skip those nodes
        let near_joint = |r: f64| {
            [1.0, 2.0, 40.0, 80.0].iter().any(|&j| (r.abs() - j).abs() < 0.05)
        };
        for i in (4..n - 4).filter(|&i| !near_joint(g.r()[i])) {
            assert!((d[i] - f.virial_a.d1[i]).abs() < 1e-4);
            assert!((dpsi[i] - f.virial_ab.d1[i]).abs() < 1e-4);
            assert!((dd[i] - f.virial_a.d3[i]).abs() < 2e-2, "{i} {} {}", dd[i], f.virial_a.d3[i]);
            assert!((ddpsi[i] - f.virial_ab.d3[i]).abs() < 2e-2, "{i} {} {}", ddpsi[i], f.virial_ab.d3[i]);
        }
    }

    #[test]
    fn psi_support() {
        let (g, f) = family();
        for (i, &r) in g.r().iter().enumerate() {
            if r.abs() >= 80.0 {
                assert_eq!(f.psi_ab[i], 0.0);
                assert_eq!(f.virial_ab.d1[i], 0.0);
            }
        }
    }

    #[test]
    fn small_k_rejected() {
        let g = LineGrid::uniform(10.0, 0.1).unwrap();
        let p = WeightParams { k: 1.3, ..WeightParams::default() };
        assert!(build_weights(p, &g).is_err());
        let p = WeightParams { k: 1.35, ..WeightParams::default() };
        assert!(build_weights(p, &g).is_ok());
    }

    #[test]
    fn sandwich_is_stable_under_a() {
        let g = LineGrid::uniform(400.0, 0.05).unwrap();
        let c: Vec<(f64, f64)> = [40.0, 80.0]
            .iter()
            .map(|&a| sandwich_constants(&build_weights(WeightParams { a, ..WeightParams::default() }, &g).unwrap()))
            .collect();
        for (lo, hi) in &c {
            assert!(*lo > 0.2 && *hi <= 4.0 + 1e-9, "{lo} {hi}");
        }
        assert!((c[0].0 / c[1].0 - 1.0).abs() < 0.5);
    }

    #[test]
    fn sign_split_holds_for_admissible_k() {
        let (g, f) = family();
        let (outside, inside_min) = sign_decomposition(&f, &g);
        assert!(outside);
        assert!(inside_min < 0.0);
    }

    #[test]
    fn hierarchy_report() {
        let h = WeightParams::default().hierarchy();
        assert!(h.ordered);
        assert!(!h.strict);
    }
}
