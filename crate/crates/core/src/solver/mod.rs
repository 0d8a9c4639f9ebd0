//! Time evolution of odd perturbations `v = u - H` of the kink in the
//! uniform `x` coordinate:
//!
//! ```text
//! cosh^2 x v_tt = v_xx + f(H + v) - f(H)
//! ```
//!
//! by position Verlet (drift-kick-drift) with the 3-point second difference.
//! Node 0 (the origin) and the last node are pinned to zero.

mod convergence;
mod data;

pub use convergence::{convergence_order, ConvergenceProblem, ConvergenceResult};
pub use data::{make_initial_data, weighted_data_norm, CustomTable, DataFamily, InitialDataSpec};

use crate::error::{Error, Result};
use crate::grid::{CoordinateKind, Frame, Grid1D, WaveState};
use crate::model;
use std::sync::Arc;

pub const CFL_LIMIT: f64 = 0.9;
pub const CAUSALITY_MARGIN: f64 = 2.0;
pub const DEFAULT_BLOWUP_CAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    DirichletVacuum,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dx: f64,
    pub dt: f64,
    pub half_extent: f64,
    pub t_final: f64,
    pub observe_every: usize,
    pub boundary: Boundary,
    pub blowup_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dx: 0.02,
            dt: 0.015,
            half_extent: 220.0,
            t_final: 200.0,
            observe_every: 20,
            boundary: Boundary::DirichletVacuum,
            blowup_cap: DEFAULT_BLOWUP_CAP,
        }
    }
}

impl SolverConfig {
    pub fn check_cfl(&self) -> Result<()> {
        for (name, v) in [
            ("dx", self.dx),
            ("dt", self.dt),
            ("half_extent", self.half_extent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter("t_final must be >= 0".into()));
        }
        if self.observe_every == 0 {
            return Err(Error::InvalidParameter("observe_every must be >= 1".into()));
        }
        let limit = CFL_LIMIT * self.dx;
        if self.dt > limit {
            return Err(Error::Cfl {
                dt: self.dt,
                limit,
            });
        }
        Ok(())
    }

    /// CFL plus the causality bound `X_max >= t_final + support + 2`.
    pub fn validate(&self, support_radius: f64) -> Result<()> {
        self.check_cfl()?;
        let required = self.t_final + support_radius + CAUSALITY_MARGIN;
        if self.half_extent < required {
            return Err(Error::Causality {
                half_extent: self.half_extent,
                required,
            });
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<Grid1D>> {
        Ok(Arc::new(Grid1D::new(
            CoordinateKind::XUniform,
            self.half_extent,
            self.dx,
        )?))
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Which reaction term drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reaction {
    /// `f(H + v) - f(H)`.
    Full,
    /// `f'(H) v`.
    Linearized,
}

type Forcing = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Precomputed leapfrog stepper for one grid and time step.
pub struct Leapfrog {
    grid: Arc<Grid1D>,
    dt: f64,
    cap: f64,
    reaction: Reaction,
    inv_mass: Vec<f64>,
    kink: Vec<f64>,
    f_kink: Vec<f64>,
    fp_kink: Vec<f64>,
    forcing: Option<Forcing>,
    half: Vec<f64>,
}

impl Leapfrog {
    pub fn new(grid: Arc<Grid1D>, dt: f64, cap: f64) -> Self {
        let xs = grid.node_x();
        let kink: Vec<f64> = xs.iter().map(|&x| model::kink(x)).collect();
        Self {
            inv_mass: xs
                .iter()
                .map(|&x| {
                    let c = x.cosh();
                    1.0 / (c * c)
                })
                .collect(),
            f_kink: kink.iter().map(|&h| model::nonlinearity_f(h)).collect(),
            fp_kink: kink.iter().map(|&h| model::nonlinearity_f_prime(h)).collect(),
            kink,
            half: vec![0.0; grid.n_points()],
            grid,
            dt,
            cap,
            reaction: Reaction::Full,
            forcing: None,
        }
    }

    pub fn from_config(grid: Arc<Grid1D>, config: &SolverConfig) -> Self {
        Self::new(grid, config.dt, config.blowup_cap)
    }

    pub fn with_reaction(mut self, reaction: Reaction) -> Self {
        self.reaction = reaction;
        self
    }

    /// Adds a source `F(x, t)` to the right-hand side `v_xx + ... + F`.
    pub fn with_forcing(mut self, forcing: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Some(Box::new(forcing));
        self
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `v_tt` at the interior nodes for position `v` at time `t`.
    fn kick(&self, v: &[f64], vel: &mut [f64], t: f64, tau: f64) {
        let n = v.len();
        let dx = self.grid.spacing();
        let inv_dx2 = 1.0 / (dx * dx);
        let xs = self.grid.node_x();
        for i in 1..n - 1 {
            let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_dx2;
            let react = match self.reaction {
                Reaction::Full => model::nonlinearity_f(self.kink[i] + v[i]) - self.f_kink[i],
                Reaction::Linearized => self.fp_kink[i] * v[i],
            };
            let src = self.forcing.as_ref().map_or(0.0, |f| f(xs[i], t));
            vel[i] += tau * (lap + react + src) * self.inv_mass[i];
        }
    }

    /// One drift-kick-drift step; advances `state.time` by `dt`.
    pub fn step(&mut self, state: &mut WaveState, step_index: usize) -> Result<()> {
        if state.frame != Frame::V {
            return Err(Error::UnsupportedFrame {
                from: state.frame,
                to: Frame::V,
            });
        }
        let dt = self.dt;
        let n = state.pos.values().len();
        {
            let pos = state.pos.values();
            let vel = state.vel.values();
            for i in 0..n {
                self.half[i] = pos[i] + 0.5 * dt * vel[i];
            }
            self.half[0] = 0.0;
            self.half[n - 1] = 0.0;
        }
        let t_mid = state.time + 0.5 * dt;
        let half = std::mem::take(&mut self.half);
        self.kick(&half, state.vel.values_mut(), t_mid, dt);
        self.half = half;
        let mut max_abs = 0.0_f64;
        {
            let vel = state.vel.values().to_vec();
            let pos = state.pos.values_mut();
            for i in 1..n - 1 {
                pos[i] = self.half[i] + 0.5 * dt * vel[i];
                max_abs = max_abs.max(pos[i].abs());
            }
            pos[0] = 0.0;
            pos[n - 1] = 0.0;
        }
        state.vel.values_mut()[0] = 0.0;
        state.vel.values_mut()[n - 1] = 0.0;
        state.time += dt;
        if !max_abs.is_finite() || max_abs > self.cap {
            return Err(Error::BlowUp {
                step: step_index,
                time: state.time,
                max_abs,
                cap: self.cap,
            });
        }
        Ok(())
    }
}

/// One leapfrog step of `state` under `config`.
pub fn evolve_step(state: &WaveState, config: &SolverConfig) -> Result<WaveState> {
    config.check_cfl()?;
    if !state.is_odd() {
        return Err(Error::NotOdd(state.pos.values()[0]));
    }
    let mut stepper = Leapfrog::from_config(state.grid().clone(), config);
    let mut next = state.clone();
    stepper.step(&mut next, 1)?;
    Ok(next)
}

/// Receives the state every `observe_every` steps (and at `t = 0`).
pub trait Observer {
    type Record;
    fn observe(&mut self, state: &WaveState) -> Result<Self::Record>;
}

impl<R, F: FnMut(&WaveState) -> Result<R>> Observer for F {
    type Record = R;
    fn observe(&mut self, state: &WaveState) -> Result<R> {
        self(state)
    }
}

#[derive(Debug, Clone)]
pub struct Evolution<R> {
    pub records: Vec<R>,
    pub final_state: WaveState,
    pub steps: usize,
}

/// Steps to `t_final`, sampling the observer at `t = 0` and every
/// `observe_every` steps. Deterministic in `(initial, config)`.
pub fn evolve<O: Observer>(
    initial: WaveState,
    config: &SolverConfig,
    observer: &mut O,
) -> Result<Evolution<O::Record>> {
    let stepper = Leapfrog::from_config(initial.grid().clone(), config);
    evolve_with(stepper, initial, config, observer)
}

pub fn evolve_with<O: Observer>(
    mut stepper: Leapfrog,
    initial: WaveState,
    config: &SolverConfig,
    observer: &mut O,
) -> Result<Evolution<O::Record>> {
    config.check_cfl()?;
    if !initial.is_odd() {
        return Err(Error::NotOdd(initial.pos.values()[0]));
    }
    let n_steps = config.n_steps();
    let mut state = initial;
    let mut records = vec![observer.observe(&state)?];
    for step in 1..=n_steps {
        stepper.step(&mut state, step)?;
        if step % config.observe_every == 0 {
            records.push(observer.observe(&state)?);
        }
    }
    Ok(Evolution {
        records,
        final_state: state,
        steps: n_steps,
    })
}

/// `(t, E(H + v))` samples.
pub fn energy_observer(state: &WaveState) -> Result<(f64, f64)> {
    Ok((state.time, model::conserved_energy(state)?))
}

/// Max over samples of `|E(t) - E(0)| / E(0)`.
pub fn relative_energy_drift(samples: &[(f64, f64)]) -> f64 {
    let e0 = samples[0].1;
    samples
        .iter()
        .fold(0.0_f64, |m, &(_, e)| m.max((e - e0).abs() / e0.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Parity, ScalarField};

    fn small_config(t_final: f64) -> SolverConfig {
        SolverConfig {
            dx: 0.02,
            dt: 0.015,
            half_extent: 12.0,
            t_final,
            observe_every: 10,
            ..SolverConfig::default()
        }
    }

    fn bump_state(grid: &Arc<Grid1D>, amplitude: f64) -> WaveState {
        make_initial_data(
            &InitialDataSpec::gaussian(amplitude, 1.0),
            grid.clone(),
        )
        .unwrap()
    }

    #[test]
    fn cfl_and_causality_validation() {
        let mut c = small_config(1.0);
        c.dt = 0.019;
        assert!(matches!(c.check_cfl(), Err(Error::Cfl { .. })));
        let c = small_config(20.0);
        assert!(matches!(c.validate(3.0), Err(Error::Causality { .. })));
        assert!(small_config(5.0).validate(3.0).is_ok());
    }

    #[test]
    fn kink_is_stationary() {
        let c = small_config(4.5);
        let g = c.grid().unwrap();
        let run = evolve(WaveState::zero(Frame::V, g), &c, &mut energy_observer).unwrap();
        assert!(run.final_state.pos.values().iter().all(|&v| v == 0.0));
        assert!(run.final_state.vel.values().iter().all(|&v| v == 0.0));
        assert!((run.final_state.time - 4.5).abs() < 1e-9);
    }

    #[test]
    fn single_step_orders() {
        let c = small_config(1.0);
        let g = c.grid().unwrap();
        let s0 = bump_state(&g, 0.05);
        let mut dv1 = Vec::new();
        let mut dv2 = Vec::new();
        for dt in [0.01, 0.005] {
            let cfg = SolverConfig { dt, ..c.clone() };
            let s1 = evolve_step(&s0, &cfg).unwrap();
            let d1 = s1.pos.values().iter().zip(s0.pos.values()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            dv1.push(d1);
            dv2.push(s1.vel.max_abs());
        }
        assert!((dv1[0] / dv1[1] - 4.0).abs() < 0.05, "{:?}", dv1);
        assert!((dv2[0] / dv2[1] - 2.0).abs() < 0.02, "{:?}", dv2);
    }

    #[test]
    fn parity_is_structural() {
        let c = small_config(3.0);
        let g = c.grid().unwrap();
        let mut obs = |s: &WaveState| Ok((s.pos.values()[0], s.vel.values()[0]));
        let run = evolve(bump_state(&g, 0.1), &SolverConfig { observe_every: 1, ..c }, &mut obs).unwrap();
        assert!(run.records.iter().all(|&(a, b)| a == 0.0 && b == 0.0));
    }

    #[test]
    fn zero_final_time_gives_one_record() {
        let c = small_config(0.0);
        let g = c.grid().unwrap();
        let run = evolve(bump_state(&g, 0.05), &c, &mut energy_observer).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.steps, 0);
    }

    #[test]
    fn blow_up_detected() {
        let c = SolverConfig {
            blowup_cap: 0.01,
            ..small_config(2.0)
        };
        let g = c.grid().unwrap();
        let err = evolve(bump_state(&g, 0.5), &c, &mut energy_observer).unwrap_err();
        assert!(matches!(err, Error::BlowUp { step: 1, .. }), "{err:?}");
    }

    #[test]
    fn finite_speed() {
        let c = SolverConfig {
            half_extent: 14.0,
            observe_every: 1,
            t_final: 6.99,
            ..small_config(0.0)
        };
        let g = c.grid().unwrap();
        let idx = g.index_at_or_below(10.0);
        let spec = InitialDataSpec::gaussian(0.1, 0.25);
        assert!(spec.support_radius() <= 2.0);
        let s0 = make_initial_data(&spec, g.clone()).unwrap();
        let mut obs = |s: &WaveState| Ok(s.pos.values()[idx].abs().max(s.vel.values()[idx].abs()));
        let run = evolve(s0, &c, &mut obs).unwrap();
        assert!(run.records.iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn linearized_run_is_close_for_small_data() {
        let c = small_config(5.0);
        let g = c.grid().unwrap();
        let ratios: Vec<f64> = [1e-3, 1e-2]
            .iter()
            .map(|&delta| {
                let s0 = bump_state(&g, delta);
                let full = evolve(s0.clone(), &c, &mut energy_observer).unwrap();
                let lin = evolve_with(
                    Leapfrog::from_config(g.clone(), &c).with_reaction(Reaction::Linearized),
                    s0,
                    &c,
                    &mut energy_observer,
                )
                .unwrap();
                let diff = full
                    .final_state
                    .pos
                    .values()
                    .iter()
                    .zip(lin.final_state.pos.values())
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                diff / (delta * delta)
            })
            .collect();
        assert!(ratios[0] > 0.0);
        assert!((ratios[0] / ratios[1] - 1.0).abs() < 0.2, "{ratios:?}");
    }

    #[test]
    fn non_odd_state_rejected() {
        let c = small_config(1.0);
        let g = c.grid().unwrap();
        let pos = ScalarField::from_fn(g.clone(), Parity::None, |x| (-x * x).exp()).unwrap();
        let vel = ScalarField::zeros(g, Parity::Odd);
        let s = WaveState::new(Frame::V, pos, vel, 0.0).unwrap();
        assert!(evolve_step(&s, &c).is_err());
    }
}
