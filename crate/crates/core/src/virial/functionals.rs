use super::weights::{VirialWeight, WeightFamily};
use crate::error::Result;
use crate::model;
use crate::operators::{apply_seps_with, commutator_with, LineGrid, Smoother};

/// `∫ (Φ d_r a1 + Φ'/2 a1) a2 dr`.
pub fn virial_functional(grid: &LineGrid, weight: &VirialWeight, a1: &[f64], a2: &[f64]) -> f64 {
    let da = grid.grad(a1);
    let integrand: Vec<f64> = (0..a1.len())
        .map(|i| (weight.phi[i] * da[i] + 0.5 * weight.d1[i] * a1[i]) * a2[i])
        .collect();
    grid.integrate(&integrand)
}

/// `I = ∫ (Φ_A d_r w1 + Φ_A'/2 w1) w2`.
pub fn functional_i(grid: &LineGrid, weights: &WeightFamily, w1: &[f64], w2: &[f64]) -> f64 {
    virial_functional(grid, &weights.virial_a, w1, w2)
}

/// `H = ∫ σ_A^2 w1 w2`.
pub fn functional_h(grid: &LineGrid, weights: &WeightFamily, w1: &[f64], w2: &[f64]) -> f64 {
    let integrand: Vec<f64> = (0..w1.len())
        .map(|i| weights.sigma_a[i] * weights.sigma_a[i] * w1[i] * w2[i])
        .collect();
    grid.integrate(&integrand)
}

/// `J = ∫ (Ψ_{A,B} d_r u1 + Ψ'_{A,B}/2 u1) u2` on smoothed fields.
pub fn functional_j(grid: &LineGrid, weights: &WeightFamily, u1: &[f64], u2: &[f64]) -> f64 {
    virial_functional(grid, &weights.virial_ab, u1, u2)
}

/// Right-hand side of the virial identity for `a1_tt = -(-d_rr + P) a1 + G`:
///
/// ```text
/// -∫ Φ' (d_r a1)^2 + 1/4 ∫ Φ''' a1^2 + 1/2 ∫ Φ P' a1^2 + ∫ G (Φ d_r a1 + Φ'/2 a1)
/// ```
pub fn virial_rate(
    grid: &LineGrid,
    weight: &VirialWeight,
    a1: &[f64],
    p_prime: &[f64],
    source: &[f64],
) -> f64 {
    let da = grid.grad(a1);
    let integrand: Vec<f64> = (0..a1.len())
        .map(|i| {
            let (phi, d1, d3) = (weight.phi[i], weight.d1[i], weight.d3[i]);
            let a = a1[i];
            -d1 * da[i] * da[i]
                + 0.25 * d3 * a * a
                + 0.5 * phi * p_prime[i] * a * a
                + source[i] * (phi * da[i] + 0.5 * d1 * a)
        })
        .collect();
    grid.integrate(&integrand)
}

/// `d I/dt` from the identity with `(Φ_A, V, N(w1))`.
pub fn rate_i(grid: &LineGrid, weights: &WeightFamily, w1: &[f64]) -> f64 {
    let r = grid.r();
    let vp: Vec<f64> = r.iter().map(|&x| model::potential_v_prime(x)).collect();
    let n: Vec<f64> = r
        .iter()
        .zip(w1)
        .map(|(&x, &w)| model::transformed_nonlinearity(w, x))
        .collect();
    virial_rate(grid, &weights.virial_a, w1, &vp, &n)
}

/// The source of the smoothed system, `-[X_eps, P1] U w1 + S_eps N(w1)`.
pub fn smoothed_source(grid: &LineGrid, smoother: &Smoother, w1: &[f64]) -> Result<Vec<f64>> {
    let comm = commutator_with(smoother, grid, w1)?;
    let n: Vec<f64> = grid
        .r()
        .iter()
        .zip(w1)
        .map(|(&x, &w)| model::transformed_nonlinearity(w, x))
        .collect();
    let sn = apply_seps_with(smoother, grid, &n)?;
    Ok(sn.iter().zip(&comm.direct).map(|(s, c)| s - c).collect())
}

/// `d J/dt` from the identity with `(Ψ_{A,B}, P1, smoothed source)`.
pub fn rate_j(grid: &LineGrid, weights: &WeightFamily, smoother: &Smoother, w1: &[f64]) -> Result<f64> {
    let u1 = apply_seps_with(smoother, grid, w1)?;
    let pp: Vec<f64> = grid.r().iter().map(|&x| model::potential_p1_prime(x)).collect();
    let g = smoothed_source(grid, smoother, w1)?;
    Ok(virial_rate(grid, &weights.virial_ab, &u1, &pp, &g))
}

#[cfg(test)]
mod tests {
    use super::super::weights::{build_weights, WeightParams};
    use super::*;
    use crate::random::{FieldSampler, Symmetry};

    fn setup() -> (LineGrid, WeightFamily) {
        let g = LineGrid::uniform(60.0, 0.02).unwrap();
        let w = build_weights(WeightParams::default(), &g).unwrap();
        (g, w)
    }

    #[test]
    fn trivial_zeros_and_symmetries() {
        let (g, w) = setup();
        let s = FieldSampler::default();
        let a = s.sample(&g, Symmetry::Odd, 3, 0);
        let b = s.sample(&g, Symmetry::Odd, 3, 1);
        let z = vec![0.0; g.len()];
        assert_eq!(functional_i(&g, &w, &a, &z), 0.0);
        assert_eq!(functional_h(&g, &w, &z, &b), 0.0);
        assert_eq!(functional_j(&g, &w, &a, &z), 0.0);
        let nb: Vec<f64> = b.iter().map(|x| -x).collect();
        assert_eq!(functional_i(&g, &w, &a, &nb), -functional_i(&g, &w, &a, &b));
        assert!((functional_h(&g, &w, &a, &b) - functional_h(&g, &w, &b, &a)).abs() < 1e-14);
        let sa: Vec<f64> = a.iter().zip(&w.sigma_a).map(|(x, s)| x * s).collect();
        let sb: Vec<f64> = b.iter().zip(&w.sigma_a).map(|(x, s)| x * s).collect();
        assert!(functional_h(&g, &w, &a, &b).abs() <= g.norm(&sa) * g.norm(&sb) * (1.0 + 1e-12));
        assert_eq!(virial_rate(&g, &w.virial_a, &z, &a, &b), 0.0);
    }

    #[test]
    fn j_integrand_vanishes_outside_twice_a() {
        let (g, w) = setup();
        let a = g.sample(|r| r.sin());
        let b = g.sample(|r| r.cos());
        let da = g.grad(&a);
        for (i, &r) in g.r().iter().enumerate() {
            if r.abs() >= 80.0 {
                let v = (w.psi_ab[i] * da[i] + 0.5 * w.virial_ab.d1[i] * a[i]) * b[i];
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn free_rate_with_linear_weight() {
        // Φ = r, P' = 0, G = 0: rate = -∫ (d_r a1)^2.
        let g = LineGrid::uniform(20.0, 0.01).unwrap();
        let weight = VirialWeight {
            phi: g.r().to_vec(),
            d1: vec![1.0; g.len()],
            d3: vec![0.0; g.len()],
        };
        let a = g.sample(|r| r * (-r * r).exp());
        let z = vec![0.0; g.len()];
        let rate = virial_rate(&g, &weight, &a, &z, &z);
        // ∫ ((1 - 2r^2) e^{-r^2})^2 dr = (3/4) sqrt(pi/2)
        let exact = -0.75 * (std::f64::consts::PI / 2.0).sqrt();
        assert!((rate - exact).abs() < 5e-4, "{rate} {exact}");
    }

    #[test]
    fn rate_identity_for_free_wave() {
        // a(t, r) = F(r - t) solves a_tt = a_rr; compare d/dt of the functional
        // by central differences with the identity.
        let g = LineGrid::uniform(40.0, 0.005).unwrap();
        let (_, w) = setup();
        let fam = build_weights(w.params, &g).unwrap();
        let f = |x: f64| (-(x - 3.0).powi(2)).exp() - (-(x + 3.0).powi(2)).exp();
        let df = |x: f64| -2.0 * (x - 3.0) * (-(x - 3.0).powi(2)).exp() + 2.0 * (x + 3.0) * (-(x + 3.0).powi(2)).exp();
        let at = |t: f64| -> (Vec<f64>, Vec<f64>) { (g.sample(|r| f(r - t)), g.sample(|r| -df(r - t))) };
        let functional = |t: f64| {
            let (a1, a2) = at(t);
            virial_functional(&g, &fam.virial_a, &a1, &a2)
        };
        let t = 1.3;
        let h = 1e-3;
        let fd = (functional(t + h) - functional(t - h)) / (2.0 * h);
        let z = vec![0.0; g.len()];
        let rate = virial_rate(&g, &fam.virial_a, &at(t).0, &z, &z);
        assert!((fd - rate).abs() < 1e-4 * rate.abs().max(1.0), "{fd} {rate}");
    }
}
