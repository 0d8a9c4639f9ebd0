use super::functionals::{functional_h, functional_i, functional_j};
use super::weights::{build_weights, WeightFamily, WeightParams};
use crate::error::{Error, Result};
use crate::grid::{Frame, Grid1D, WaveState};
use crate::model;
use crate::operators::{apply_seps_with, LineGrid, Smoother};
use crate::solver::Observer;

/// Default half-width of the diagnostic window in `x` (`r ≈ 4000`).
pub const DEFAULT_X_WINDOW: f64 = 9.0;

/// Instantaneous weighted norms of a `w`-frame pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct WeightedNorms {
    pub norm_sa_drw1: f64,
    pub norm_sa_w1: f64,
    pub norm_sa_w2: f64,
    pub norm_sb2rk2_w1: f64,
    pub phia_norm: f64,
    /// `(R, ∫_{-R}^{R} w2^2 + (d_r w1)^2 + w1^2)`.
    pub local_energy: Vec<(f64, f64)>,
    pub thm_weight: f64,
}

/// Squared norms `‖σ_A d_r w1‖^2`, `‖σ_A w1‖^2`, `‖σ_A w2‖^2`,
/// `‖σ_B^2 ρ_K^2 w1‖^2`, `∫ (Φ_A/r)(1+r^2)^{-1} w1^2`, local energies and
/// `∫ min{1, 1/|r|} (1+r^2)^{-1} w1^2`.
pub fn weighted_norms(
    grid: &LineGrid,
    weights: &WeightFamily,
    w1: &[f64],
    w2: &[f64],
    radii: &[f64],
) -> WeightedNorms {
    let dw = grid.grad(w1);
    let r = grid.r();
    let wts = grid.weights();
    let nested: Vec<f64> = (0..r.len())
        .map(|i| (weights.sigma_b[i] * weights.rho_k[i]).powi(2))
        .collect();
    let mut phia = 0.0;
    let mut thm = 0.0;
    for i in 0..r.len() {
        let q = 1.0 + r[i] * r[i];
        let w = w1[i] * w1[i] * wts[i] / q;
        phia += weights.phi_a_over_r[i] * w;
        thm += (1.0 / r[i].abs()).min(1.0) * w;
    }
    let local_energy = radii
        .iter()
        .map(|&radius| {
            let e: f64 = (0..r.len())
                .filter(|&i| r[i].abs() <= radius)
                .map(|i| (w2[i] * w2[i] + dw[i] * dw[i] + w1[i] * w1[i]) * wts[i])
                .sum();
            (radius, e)
        })
        .collect();
    WeightedNorms {
        norm_sa_drw1: grid.weighted_norm_sq(&weights.sigma_a, &dw),
        norm_sa_w1: grid.weighted_norm_sq(&weights.sigma_a, w1),
        norm_sa_w2: grid.weighted_norm_sq(&weights.sigma_a, w2),
        norm_sb2rk2_w1: grid.weighted_norm_sq(&nested, w1),
        phia_norm: phia,
        local_energy,
        thm_weight: thm,
    }
}

/// Time integrals `∫_0^t` of the squared norms entering the budget, by the
/// trapezoid rule over the observation samples. The two `σ_A` norms of
/// `w1`, `w2` carry the factor `A^{-2}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct RunningIntegrals {
    pub int_sb2rk2: f64,
    pub int_sa_drw1: f64,
    pub int_sa_w1: f64,
    pub int_sa_w2: f64,
    pub int_phia: f64,
}

impl RunningIntegrals {
    pub const NAMES: [&'static str; 5] =
        ["int_sB2rK2", "int_sA_drw1", "int_sA_w1", "int_sA_w2", "int_phiA"];

    pub fn values(&self) -> [f64; 5] {
        [
            self.int_sb2rk2,
            self.int_sa_drw1,
            self.int_sa_w1,
            self.int_sa_w2,
            self.int_phia,
        ]
    }

    fn integrands(n: &WeightedNorms, a: f64) -> [f64; 5] {
        let a2 = a * a;
        [
            n.norm_sb2rk2_w1,
            n.norm_sa_drw1,
            n.norm_sa_w1 / a2,
            n.norm_sa_w2 / a2,
            n.phia_norm,
        ]
    }
}

/// One time sample of every monitored scalar.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub energy: f64,
    pub i: f64,
    pub h: f64,
    pub j: f64,
    pub norms: WeightedNorms,
    pub integrals: RunningIntegrals,
}

impl DiagnosticsRecord {
    /// Column names, in the order of [`DiagnosticsRecord::row`].
    pub fn header(radii: &[f64]) -> Vec<String> {
        let mut h: Vec<String> = [
            "t",
            "energy",
            "I",
            "H",
            "J",
            "norm_sA_drw1",
            "norm_sA_w1",
            "norm_sA_w2",
            "norm_sB2rK2_w1",
            "phiA_norm",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(radii.iter().map(|r| format!("localE_{r}")));
        h.push("thm_weight".into());
        h.extend(RunningIntegrals::NAMES.iter().map(|s| s.to_string()));
        h
    }

    pub fn row(&self) -> Vec<f64> {
        let n = &self.norms;
        let mut v = vec![
            self.time,
            self.energy,
            self.i,
            self.h,
            self.j,
            n.norm_sa_drw1,
            n.norm_sa_w1,
            n.norm_sa_w2,
            n.norm_sb2rk2_w1,
            n.phia_norm,
        ];
        v.extend(n.local_energy.iter().map(|(_, e)| *e));
        v.push(n.thm_weight);
        v.extend(self.integrals.values());
        v
    }

    pub fn is_finite(&self) -> bool {
        self.row().iter().all(|x| x.is_finite())
    }
}

/// `w = (1+r^2)^{1/4} v` on the mirrored diagnostic window.
pub fn window_w_fields(window: &LineGrid, state: &WaveState) -> Result<(Vec<f64>, Vec<f64>)> {
    if state.frame != Frame::V {
        return Err(Error::UnsupportedFrame {
            from: state.frame,
            to: Frame::V,
        });
    }
    let o = window.origin().expect("window grids have an origin");
    let xs = state.grid().node_x();
    let lift = |vals: &[f64]| -> Vec<f64> {
        (0..window.len())
            .map(|j| {
                let (i, sign) = if j >= o { (j - o, 1.0) } else { (o - j, -1.0) };
                sign * vals[i] * model::frame_factor_x(xs[i])
            })
            .collect()
    };
    Ok((lift(state.pos.values()), lift(state.vel.values())))
}

/// Observer producing [`DiagnosticsRecord`]s from `v`-frame states.
pub struct VirialObserver {
    window: LineGrid,
    weights: WeightFamily,
    smoother: Smoother,
    radii: Vec<f64>,
    integrals: RunningIntegrals,
    last: Option<(f64, [f64; 5])>,
}

impl VirialObserver {
    pub fn new(grid: &Grid1D, x_window: f64, params: WeightParams, radii: &[f64]) -> Result<Self> {
        let window = LineGrid::from_evolution_window(grid, x_window)?;
        let r_max = window.r().last().copied().unwrap_or(0.0);
        if let Some(&bad) = radii.iter().find(|&&r| !(r > 0.0 && r < r_max)) {
            return Err(Error::InvalidParameter(format!(
                "local-energy radius {bad} outside (0, {r_max})"
            )));
        }
        let weights = build_weights(params, &window)?;
        let smoother = Smoother::new(&window, params.eps)?;
        Ok(Self {
            window,
            weights,
            smoother,
            radii: radii.to_vec(),
            integrals: RunningIntegrals::default(),
            last: None,
        })
    }

    pub fn window(&self) -> &LineGrid {
        &self.window
    }

    pub fn weights(&self) -> &WeightFamily {
        &self.weights
    }

    pub fn smoother(&self) -> &Smoother {
        &self.smoother
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

impl Observer for VirialObserver {
    type Record = DiagnosticsRecord;

    fn observe(&mut self, state: &WaveState) -> Result<DiagnosticsRecord> {
        let (w1, w2) = window_w_fields(&self.window, state)?;
        let (g, wf) = (&self.window, &self.weights);
        let u1 = apply_seps_with(&self.smoother, g, &w1)?;
        let u2 = apply_seps_with(&self.smoother, g, &w2)?;
        let norms = weighted_norms(g, wf, &w1, &w2, &self.radii);
        let now = RunningIntegrals::integrands(&norms, wf.params.a);
        if let Some((t0, prev)) = self.last {
            let dt = state.time - t0;
            let mut acc = self.integrals.values();
            for k in 0..5 {
                acc[k] += 0.5 * dt * (prev[k] + now[k]);
            }
            self.integrals = RunningIntegrals {
                int_sb2rk2: acc[0],
                int_sa_drw1: acc[1],
                int_sa_w1: acc[2],
                int_sa_w2: acc[3],
                int_phia: acc[4],
            };
        }
        self.last = Some((state.time, now));
        let record = DiagnosticsRecord {
            time: state.time,
            energy: model::conserved_energy(state)?,
            i: functional_i(g, wf, &w1, &w2),
            h: functional_h(g, wf, &w1, &w2),
            j: functional_j(g, wf, &u1, &u2),
            norms,
            integrals: self.integrals,
        };
        if !record.is_finite() {
            return Err(Error::NonFinite("diagnostics record"));
        }
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{FieldSampler, Symmetry};
    use crate::solver::{evolve, make_initial_data, InitialDataSpec, SolverConfig};
    use std::sync::Arc;

    #[test]
    fn zero_state_gives_zero_norms() {
        let g = LineGrid::uniform(50.0, 0.05).unwrap();
        let w = build_weights(WeightParams::default(), &g).unwrap();
        let z = vec![0.0; g.len()];
        let n = weighted_norms(&g, &w, &z, &z, &[1.0, 5.0]);
        assert_eq!(n.norm_sa_w1, 0.0);
        assert_eq!(n.phia_norm, 0.0);
        assert!(n.local_energy.iter().all(|&(_, e)| e == 0.0));
    }

    #[test]
    fn nested_weight_ordering() {
        let g = LineGrid::uniform(80.0, 0.05).unwrap();
        let w = build_weights(WeightParams::default(), &g).unwrap();
        let s = FieldSampler::default();
        for trial in 0..20 {
            let f = s.sample(&g, Symmetry::Odd, 11, trial);
            let n = weighted_norms(&g, &w, &f, &f, &[]);
            assert!(n.norm_sb2rk2_w1 <= n.norm_sa_w1);
        }
    }

    #[test]
    fn header_matches_row() {
        let g = LineGrid::uniform(50.0, 0.05).unwrap();
        let w = build_weights(WeightParams::default(), &g).unwrap();
        let z = vec![0.0; g.len()];
        let rec = DiagnosticsRecord {
            time: 0.0,
            energy: 0.0,
            i: 0.0,
            h: 0.0,
            j: 0.0,
            norms: weighted_norms(&g, &w, &z, &z, &[1.0, 5.0]),
            integrals: RunningIntegrals::default(),
        };
        let h = DiagnosticsRecord::header(&[1.0, 5.0]);
        assert_eq!(h.len(), rec.row().len());
        assert_eq!(h[10], "localE_1");
        assert_eq!(h[12], "thm_weight");
    }

    #[test]
    fn observer_runs_and_integrals_grow() {
        let cfg = SolverConfig {
            half_extent: 30.0,
            t_final: 10.0,
            observe_every: 20,
            ..SolverConfig::default()
        };
        let grid = cfg.grid().unwrap();
        let s0 = make_initial_data(&InitialDataSpec::gaussian(0.05, 1.0), Arc::clone(&grid)).unwrap();
        let mut obs = VirialObserver::new(&grid, DEFAULT_X_WINDOW, WeightParams::default(), &[1.0, 5.0]).unwrap();
        let run = evolve(s0, &cfg, &mut obs).unwrap();
        assert!(run.records.len() > 10);
        for w in run.records.windows(2) {
            for (a, b) in w[0].integrals.values().iter().zip(w[1].integrals.values()) {
                assert!(b >= *a);
            }
        }
        let first = &run.records[0];
        assert!(first.norms.local_energy[1].1 > first.norms.local_energy[0].1);
        assert!(first.i.is_finite() && first.j.is_finite());
    }

    #[test]
    fn radius_outside_window_rejected() {
        let grid = Grid1D::new(crate::grid::CoordinateKind::XUniform, 20.0, 0.02).unwrap();
        assert!(VirialObserver::new(&grid, 3.0, WeightParams::default(), &[50.0]).is_err());
    }
}
