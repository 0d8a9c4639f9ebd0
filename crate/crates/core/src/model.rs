//! Closed-form ingredients of the reduced equation
//! `cosh^2 x u_tt = u_xx + f(u)`, `f(u) = 2u(1 - u^2)`, and of its kink
//! `H(x) = tanh x`, written both in `x` and in `r = sinh x`.

use crate::error::{Error, Result};
use crate::grid::{Frame, Grid1D, Parity, ScalarField, WaveState};

/// Energy of the kink, and the Bogomolnyi lower bound for degree-one data.
pub const KINK_ENERGY: f64 = 4.0 / 3.0;

pub fn kink(x: f64) -> f64 {
    x.tanh()
}

/// `H(r) = r / sqrt(1 + r^2)`.
pub fn kink_r(r: f64) -> f64 {
    r / (1.0 + r * r).sqrt()
}

/// `H_x = sech^2 x`.
pub fn kink_derivative_x(x: f64) -> f64 {
    let s = 1.0 / x.cosh();
    s * s
}

/// `H'(r) = (1 + r^2)^{-3/2}`.
pub fn kink_derivative_r(r: f64) -> f64 {
    (1.0 + r * r).powf(-1.5)
}

pub fn nonlinearity_f(u: f64) -> f64 {
    2.0 * u * (1.0 - u * u)
}

pub fn nonlinearity_f_prime(u: f64) -> f64 {
    2.0 - 6.0 * u * u
}

/// `W(u) = (1 - u^2)^2`, so that `W' = -2 f`.
pub fn potential_w(u: f64) -> f64 {
    let a = 1.0 - u * u;
    a * a
}

/// Taylor remainder `f(H + v) - f(H) - f'(H) v` around the kink at `r`.
///
/// Evaluated through its exact cubic form `-6 H v^2 - 2 v^3`, which avoids
/// the cancellation of the three-term difference for small `v`.
pub fn nonlinear_remainder(v: f64, r: f64) -> f64 {
    let h = kink_r(r);
    -6.0 * h * v * v - 2.0 * v * v * v
}

/// Remainder in the `w` frame: `(1+r^2)^{-3/4} N((1+r^2)^{-1/4} w, r)`.
pub fn transformed_nonlinearity(w1: f64, r: f64) -> f64 {
    let q = 1.0 + r * r;
    q.powf(-0.75) * nonlinear_remainder(w1 * q.powf(-0.25), r)
}

/// Closed form `-6 H w^2 (1+r^2)^{-5/4} - 2 w^3 (1+r^2)^{-3/2}`.
pub fn transformed_nonlinearity_closed(w1: f64, r: f64) -> f64 {
    let q = 1.0 + r * r;
    -6.0 * kink_r(r) * w1 * w1 * q.powf(-1.25) - 2.0 * w1 * w1 * w1 * q.powf(-1.5)
}

/// Potential of `L~ = -d_rr + V`: `V = (3/4)(5r^2 - 2)/(1+r^2)^2`.
pub fn potential_v(r: f64) -> f64 {
    let q = 1.0 + r * r;
    0.75 * (5.0 * r * r - 2.0) / (q * q)
}

/// The same potential assembled from the conjugation of `L`:
/// `(2 - r^2)/(4(1+r^2)^2) - f'(H)/(1+r^2)`.
pub fn potential_v_from_conjugation(r: f64) -> f64 {
    let q = 1.0 + r * r;
    (2.0 - r * r) / (4.0 * q * q) - nonlinearity_f_prime(kink_r(r)) / q
}

pub fn potential_v_prime(r: f64) -> f64 {
    let q = 1.0 + r * r;
    (13.5 * r - 7.5 * r * r * r) / (q * q * q)
}

/// Partner potential `P1 = (3/4)(2 + r^2)/(1+r^2)^2` of `L~1 = U U*`.
pub fn potential_p1(r: f64) -> f64 {
    let q = 1.0 + r * r;
    0.75 * (2.0 + r * r) / (q * q)
}

pub fn potential_p1_prime(r: f64) -> f64 {
    let q = 1.0 + r * r;
    -1.5 * r * (3.0 + r * r) / (q * q * q)
}

pub fn potential_p1_second(r: f64) -> f64 {
    let q = 1.0 + r * r;
    let r2 = r * r;
    4.5 * (r2 * r2 + 4.0 * r2 - 1.0) / (q * q * q * q)
}

/// `-r P1'(r) = (3/2) r^2 (3 + r^2)/(1+r^2)^3`, nonnegative everywhere.
pub fn repulsivity_profile(r: f64) -> f64 {
    let q = 1.0 + r * r;
    1.5 * r * r * (3.0 + r * r) / (q * q * q)
}

/// Translation zero mode of `L`, i.e. `H_x = sech^2 x` written in `r`:
/// `1/(1+r^2)`. Note this is not `dH/dr`.
pub fn translation_mode_r(r: f64) -> f64 {
    1.0 / (1.0 + r * r)
}

/// Zero mode of `L~`: `Y~ = (1+r^2)^{1/4} H_x = (1+r^2)^{-3/4}`.
pub fn darboux_ground_state(r: f64) -> f64 {
    (1.0 + r * r).powf(-0.75)
}

/// `nu = -Y~'/Y~ = (3/2) r/(1+r^2)`, so that `U = d_r + nu`.
pub fn darboux_nu(r: f64) -> f64 {
    1.5 * r / (1.0 + r * r)
}

pub fn darboux_nu_prime(r: f64) -> f64 {
    let q = 1.0 + r * r;
    1.5 * (1.0 - r * r) / (q * q)
}

/// Pointwise factor `(1+r^2)^{1/4} = sqrt(cosh x)` linking the v and w frames.
pub fn frame_factor_x(x: f64) -> f64 {
    x.cosh().sqrt()
}

/// Converts between the `v` and `w` frames by the pointwise factor
/// `(1+r^2)^{±1/4}`. The `u` frame is produced only by `S_eps`.
pub fn field_transform(state: &WaveState, target: Frame) -> Result<WaveState> {
    let scale: Box<dyn Fn(f64) -> f64> = match (state.frame, target) {
        (Frame::V, Frame::V) | (Frame::W, Frame::W) => return Ok(state.clone()),
        (Frame::V, Frame::W) => Box::new(frame_factor_x),
        (Frame::W, Frame::V) => Box::new(|x| 1.0 / frame_factor_x(x)),
        (from, to) => return Err(Error::UnsupportedFrame { from, to }),
    };
    let grid = state.grid().clone();
    let factors: Vec<f64> = grid.node_x().iter().map(|&x| scale(x)).collect();
    let apply = |field: &ScalarField| -> Result<ScalarField> {
        let vals = field
            .values()
            .iter()
            .zip(&factors)
            .map(|(v, s)| v * s)
            .collect();
        ScalarField::new(grid.clone(), vals, field.parity())
    };
    WaveState::new(target, apply(&state.pos)?, apply(&state.vel)?, state.time)
}

/// A total field `u` on the full line `[-X_max, X_max]` together with `u_x`
/// and `u_t`, sampled on the mirrored nodes of a half-line grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FullLineField {
    pub dx: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub ut: Vec<f64>,
}

impl FullLineField {
    fn mirrored_nodes(grid: &Grid1D) -> Vec<f64> {
        let n = grid.n_points();
        let xs = grid.node_x();
        (0..2 * n - 1)
            .map(|j| {
                if j < n - 1 {
                    -xs[n - 1 - j]
                } else {
                    xs[j - (n - 1)]
                }
            })
            .collect()
    }

    /// Samples closed-form `u`, `u_x`, `u_t`.
    pub fn from_fn(
        grid: &Grid1D,
        u: impl Fn(f64) -> f64,
        ux: impl Fn(f64) -> f64,
        ut: impl Fn(f64) -> f64,
    ) -> Self {
        let x = Self::mirrored_nodes(grid);
        Self {
            dx: grid.spacing(),
            u: x.iter().map(|&s| u(s)).collect(),
            ux: x.iter().map(|&s| ux(s)).collect(),
            ut: x.iter().map(|&s| ut(s)).collect(),
            x,
        }
    }

    /// Samples `u`, `u_t` and differentiates `u` with the 3-point centered
    /// stencil (one-sided at the two ends).
    pub fn from_values(
        grid: &Grid1D,
        u: impl Fn(f64) -> f64,
        ut: impl Fn(f64) -> f64,
    ) -> Self {
        let x = Self::mirrored_nodes(grid);
        let uv: Vec<f64> = x.iter().map(|&s| u(s)).collect();
        let ux = centered_difference(&uv, grid.spacing());
        Self {
            dx: grid.spacing(),
            ut: x.iter().map(|&s| ut(s)).collect(),
            u: uv,
            ux,
            x,
        }
    }

    /// Total field `u = H + v1`, `u_t = v2` of a v-frame state, reflected
    /// oddly; `H_x` is analytic and `v_x` uses the centered stencil.
    pub fn from_state(state: &WaveState) -> Result<Self> {
        if state.frame != Frame::V {
            return Err(Error::UnsupportedFrame {
                from: state.frame,
                to: Frame::V,
            });
        }
        let grid = state.grid();
        let x = Self::mirrored_nodes(grid);
        let v1 = odd_reflection(state.pos.values());
        let v2 = odd_reflection(state.vel.values());
        let dv = centered_difference(&v1, grid.spacing());
        Ok(Self {
            dx: grid.spacing(),
            u: x.iter().zip(&v1).map(|(&s, v)| kink(s) + v).collect(),
            ux: x
                .iter()
                .zip(&dv)
                .map(|(&s, d)| kink_derivative_x(s) + d)
                .collect(),
            ut: v2,
            x,
        })
    }
}

/// Full-line array `[-f_{n-1}, ..., -f_1, f_0, f_1, ..., f_{n-1}]`.
pub fn odd_reflection(half: &[f64]) -> Vec<f64> {
    let n = half.len();
    let mut out = Vec::with_capacity(2 * n - 1);
    out.extend(half[1..].iter().rev().map(|v| -v));
    out.extend_from_slice(half);
    out
}

pub fn even_reflection(half: &[f64]) -> Vec<f64> {
    let n = half.len();
    let mut out = Vec::with_capacity(2 * n - 1);
    out.extend(half[1..].iter().rev());
    out.extend_from_slice(half);
    out
}

pub(crate) fn centered_difference(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    }
    d[0] = (u[1] - u[0]) / h;
    d[n - 1] = (u[n - 1] - u[n - 2]) / h;
    d
}

fn full_line_trapezoid(values: &[f64], h: f64) -> f64 {
    crate::grid::trapezoid_uniform(values, h)
}

/// `E(u) = 1/2 ∫ cosh^2 x u_t^2 + u_x^2 + (1 - u^2)^2 dx` by the trapezoid rule.
pub fn energy(field: &FullLineField) -> Result<f64> {
    let integrand: Vec<f64> = field
        .x
        .iter()
        .zip(field.u.iter().zip(field.ux.iter().zip(&field.ut)))
        .map(|(&x, (&u, (&ux, &ut)))| {
            let c = x.cosh();
            0.5 * (c * c * ut * ut + ux * ux + potential_w(u))
        })
        .collect();
    let e = full_line_trapezoid(&integrand, field.dx);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFinite("energy"))
    }
}

/// `E(u) - 4/3 - 1/2 ∫ (u_x - (1 - u^2))^2 dx` for static degree-one data.
/// Velocities are ignored.
pub fn bogomolnyi_defect(field: &FullLineField) -> f64 {
    let static_field = FullLineField {
        ut: vec![0.0; field.u.len()],
        ..field.clone()
    };
    let e = energy(&static_field).unwrap_or(f64::NAN);
    let sq: Vec<f64> = field
        .u
        .iter()
        .zip(&field.ux)
        .map(|(&u, &ux)| {
            let d = ux - (1.0 - u * u);
            d * d
        })
        .collect();
    e - KINK_ENERGY - 0.5 * full_line_trapezoid(&sq, field.dx)
}

/// Energy of the kink itself on the grid, with the analytic `H_x`.
pub fn kink_energy_on(grid: &Grid1D) -> f64 {
    let f = FullLineField::from_fn(grid, kink, kink_derivative_x, |_| 0.0);
    energy(&f).expect("kink energy is finite")
}

/// Energy carried by the perturbation of a v-frame state, in the form that
/// the leapfrog scheme conserves:
/// `1/2 Σ cosh^2 v2^2 + 1/2 Σ (Δv1/dx)^2 + 1/2 Σ [W(H+v1) - W(H) - W'(H) v1]`,
/// nodal sums with trapezoid weights and edge sums for the gradient, over the
/// full line. The term linear in `v1` vanishes identically for the exact kink
/// and is dropped.
pub fn perturbation_energy(state: &WaveState) -> Result<f64> {
    if state.frame != Frame::V {
        return Err(Error::UnsupportedFrame {
            from: state.frame,
            to: Frame::V,
        });
    }
    let grid = state.grid();
    let dx = grid.spacing();
    let v1 = state.pos.values();
    let v2 = state.vel.values();
    let nodal: Vec<f64> = grid
        .node_x()
        .iter()
        .zip(v1.iter().zip(v2))
        .map(|(&x, (&a, &b))| {
            let c = x.cosh();
            let h = kink(x);
            // W'(H) = -2 f(H)
            let wdiff = potential_w(h + a) - potential_w(h) + 2.0 * nonlinearity_f(h) * a;
            0.5 * (c * c * b * b + wdiff)
        })
        .collect();
    let grad: f64 = v1
        .windows(2)
        .map(|w| {
            let d = (w[1] - w[0]) / dx;
            0.5 * d * d * dx
        })
        .sum();
    let e = grid.integrate_even(&nodal) + 2.0 * grad;
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFinite("perturbation energy"))
    }
}

/// `E(H + v)` of a v-frame state: kink energy plus [`perturbation_energy`].
pub fn conserved_energy(state: &WaveState) -> Result<f64> {
    Ok(kink_energy_on(state.grid()) + perturbation_energy(state)?)
}

/// Odd field with the given closed form, zero at the origin.
pub fn odd_field(grid: std::sync::Arc<Grid1D>, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
    ScalarField::from_fn(grid, Parity::Odd, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CoordinateKind;
    use proptest::prelude::*;
    use std::sync::Arc;

    #[test]
    fn kink_values() {
        assert_eq!(kink(0.0), 0.0);
        assert!((kink_r(1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((kink_r(1e8) - 1.0).abs() < 1e-15);
        for &x in &[-3.0, -0.5, 0.2, 1.7, 4.0] {
            assert!((kink(x) - kink_r(f64::sinh(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn kink_derivative_values() {
        assert_eq!(kink_derivative_r(0.0), 1.0);
        assert!((kink_derivative_r(1.0) - 2f64.powf(-1.5)).abs() < 1e-15);
        let r = 0.5;
        let mut prev = f64::INFINITY;
        for k in 1..4 {
            let h = 10f64.powi(-k);
            let fd = (kink_r(r + h) - kink_r(r - h)) / (2.0 * h);
            let err = (fd - kink_derivative_r(r)).abs();
            assert!(err < prev);
            assert!(err < 2.0 * h * h);
            prev = err;
        }
    }

    #[test]
    fn nonlinearity_values() {
        assert_eq!(nonlinearity_f(0.0), 0.0);
        assert_eq!(nonlinearity_f(1.0), 0.0);
        assert_eq!(nonlinearity_f(-1.0), 0.0);
        assert!((nonlinearity_f(0.5) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn remainder_edge_cases() {
        for &r in &[0.0, 0.3, -2.0, 50.0] {
            assert_eq!(nonlinear_remainder(0.0, r), 0.0);
            assert_eq!(transformed_nonlinearity(0.0, r), 0.0);
        }
        for &v in &[0.1, -0.7, 2.0] {
            assert!((nonlinear_remainder(v, 0.0) + 2.0 * v * v * v).abs() < 1e-15);
            assert!((transformed_nonlinearity(v, 0.0) + 2.0 * v * v * v).abs() < 1e-15);
        }
    }

    #[test]
    fn potential_values() {
        assert!((potential_v(0.0) + 1.5).abs() < 1e-15);
        assert!(potential_v(1e6).abs() < 1e-10);
        assert!(potential_v((0.4f64).sqrt()).abs() < 1e-15);
        assert!((potential_p1(0.0) - 1.5).abs() < 1e-15);
        assert_eq!(repulsivity_profile(0.0), 0.0);
        assert!((repulsivity_profile(1.0) - 0.75).abs() < 1e-15);
        assert!((darboux_nu(1.0) - 0.75).abs() < 1e-15);
        assert_eq!(darboux_nu(0.0), 0.0);
    }

    #[test]
    fn ground_state_values() {
        assert_eq!(darboux_ground_state(0.0), 1.0);
        // r^{-3/2} decay: Y~(10 r)/Y~(r) -> 10^{-3/2}
        let ratio = darboux_ground_state(1000.0) / darboux_ground_state(100.0);
        assert!((ratio - 10f64.powf(-1.5)).abs() < 1e-5);
        let ratio = darboux_ground_state(100.0) / darboux_ground_state(10.0);
        assert!((ratio - 10f64.powf(-1.5)).abs() < 1e-3);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for &r in &[-3.0, -0.7, 0.0, 0.4, 1.3, 6.0] {
            let fd = |f: fn(f64) -> f64| (f(r + h) - f(r - h)) / (2.0 * h);
            assert!((fd(potential_v) - potential_v_prime(r)).abs() < 1e-8);
            assert!((fd(potential_p1) - potential_p1_prime(r)).abs() < 1e-8);
            assert!((fd(potential_p1_prime) - potential_p1_second(r)).abs() < 1e-8);
            assert!((fd(darboux_nu) - darboux_nu_prime(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn transform_round_trip_and_zero() {
        let g = Arc::new(Grid1D::new(CoordinateKind::XUniform, 10.0, 0.01).unwrap());
        let zero = WaveState::zero(Frame::V, g.clone());
        let w = field_transform(&zero, Frame::W).unwrap();
        assert!(w.pos.values().iter().all(|&v| v == 0.0));

        let pos = odd_field(g.clone(), |x| x.sin() * (-0.1 * x * x).exp()).unwrap();
        let vel = odd_field(g.clone(), |x| (2.0 * x).tanh() * (-x).exp()).unwrap();
        let v = WaveState::new(Frame::V, pos, vel, 0.0).unwrap();
        let w = field_transform(&v, Frame::W).unwrap();
        assert_eq!(w.frame, Frame::W);
        assert_eq!(w.pos.values()[0], 0.0);
        let back = field_transform(&w, Frame::V).unwrap();
        let dev = back
            .pos
            .values()
            .iter()
            .zip(v.pos.values())
            .chain(back.vel.values().iter().zip(v.vel.values()))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev < 1e-13);
    }

    #[test]
    fn transform_rejects_u_frame() {
        let g = Arc::new(Grid1D::new(CoordinateKind::XUniform, 2.0, 0.1).unwrap());
        let s = WaveState::zero(Frame::V, g);
        assert!(field_transform(&s, Frame::U).is_err());
        let mut u = s.clone();
        u.frame = Frame::U;
        assert!(field_transform(&u, Frame::V).is_err());
    }

    #[test]
    fn vacuum_has_zero_energy() {
        let g = Grid1D::new(CoordinateKind::XUniform, 20.0, 0.05).unwrap();
        let f = FullLineField::from_fn(&g, |_| 1.0, |_| 0.0, |_| 0.0);
        assert_eq!(energy(&f).unwrap(), 0.0);
    }

    #[test]
    fn kink_energy_finite_difference_route_is_second_order() {
        let errs: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&dx| {
                let g = Grid1D::new(CoordinateKind::XUniform, 20.0, dx).unwrap();
                let f = FullLineField::from_values(&g, kink, |_| 0.0);
                energy(&f).unwrap() - KINK_ENERGY
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn non_finite_energy_flagged() {
        let g = Grid1D::new(CoordinateKind::XUniform, 2.0, 0.1).unwrap();
        let f = FullLineField::from_fn(&g, |_| f64::NAN, |_| 0.0, |_| 0.0);
        assert!(matches!(energy(&f), Err(Error::NonFinite(_))));
    }

    #[test]
    fn translated_kink_defect_is_independent_of_shift() {
        let g = Grid1D::new(CoordinateKind::XUniform, 40.0, 0.01).unwrap();
        for &c in &[0.0, 1.5, -3.0, 7.0] {
            let f = FullLineField::from_fn(
                &g,
                |x| kink(x - c),
                |x| kink_derivative_x(x - c),
                |_| 0.0,
            );
            assert!(bogomolnyi_defect(&f).abs() < 1e-10);
            assert!((energy(&f).unwrap() - KINK_ENERGY).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn remainder_matches_taylor_difference(v in -2.0f64..2.0, r in -50.0f64..50.0) {
            let h = kink_r(r);
            let direct = nonlinearity_f(h + v) - nonlinearity_f(h) - nonlinearity_f_prime(h) * v;
            prop_assert!((direct - nonlinear_remainder(v, r)).abs() < 1e-13);
        }

        #[test]
        fn remainder_is_quadratic_at_zero(v in -1.0f64..1.0, r in -50.0f64..50.0) {
            let bound = 8.0 * (v * v + v.abs().powi(3));
            prop_assert!(nonlinear_remainder(v, r).abs() <= bound);
        }

        #[test]
        fn transformed_nonlinearity_two_routes(w in -3.0f64..3.0, r in -100.0f64..100.0) {
            let a = transformed_nonlinearity(w, r);
            let b = transformed_nonlinearity_closed(w, r);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
        }

        #[test]
        fn potential_two_routes(r in -1e3f64..1e3) {
            let a = potential_v(r);
            let b = potential_v_from_conjugation(r);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        }

        #[test]
        fn ground_state_two_routes(r in -1e3f64..1e3) {
            let a = darboux_ground_state(r);
            let b = (1.0 + r * r).powf(0.25) * translation_mode_r(r);
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn nu_identities(r in -1e3f64..1e3) {
            let nu = darboux_nu(r);
            let dnu = darboux_nu_prime(r);
            let scale = potential_p1(r).abs().max(1e-300);
            prop_assert!((potential_v(r) - (nu * nu - dnu)).abs() <= 1e-12 * scale);
            prop_assert!((potential_p1(r) - (nu * nu + dnu)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn repulsivity_nonnegative(r in -1e4f64..1e4) {
            prop_assert!(repulsivity_profile(r) >= 0.0);
            let via_derivative = -r * potential_p1_prime(r);
            prop_assert!((via_derivative - repulsivity_profile(r)).abs() <= 1e-14 * repulsivity_profile(r).max(1e-300) + 1e-300);
        }
    }
}
