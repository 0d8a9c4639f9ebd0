use super::{evolve_with, Leapfrog, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{Frame, WaveState};
use crate::model;

use super::data::{make_initial_data, InitialDataSpec};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ConvergenceProblem {
    /// Forced equation with exact solution `a cos t · x e^{-x^2}`.
    Manufactured { amplitude: f64, t_final: f64 },
    /// The total field started at the sampled kink; `v` is driven only by
    /// the discrete residual of `H`.
    KinkStationarity { t_final: f64 },
    /// Nonlinear bump evolution; meant for ladders that refine `dt` only.
    Bump { amplitude: f64, width: f64, t_final: f64 },
}

impl ConvergenceProblem {
    fn t_final(&self) -> f64 {
        match *self {
            Self::Manufactured { t_final, .. }
            | Self::KinkStationarity { t_final }
            | Self::Bump { t_final, .. } => t_final,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConvergenceResult {
    /// Observed order from the finest three levels.
    pub order: f64,
    /// Orders from every consecutive triple.
    pub orders: Vec<f64>,
    /// Grid max-norm of successive differences of `v1(T)`.
    pub differences: Vec<f64>,
    /// Max error against the exact solution, when one is known.
    pub exact_errors: Option<Vec<f64>>,
}

const DOMAIN: f64 = 8.0;

fn manufactured(x: f64, t: f64, a: f64) -> f64 {
    a * t.cos() * x * (-x * x).exp()
}

fn manufactured_forcing(x: f64, t: f64, a: f64) -> f64 {
    let g = (-x * x).exp();
    let v = a * t.cos() * x * g;
    let v_tt = -v;
    let v_xx = a * t.cos() * (4.0 * x.powi(3) - 6.0 * x) * g;
    let h = model::kink(x);
    let c = x.cosh();
    c * c * v_tt - v_xx - (model::nonlinearity_f(h + v) - model::nonlinearity_f(h))
}

fn run_level(problem: &ConvergenceProblem, dx: f64, dt: f64) -> Result<Vec<f64>> {
    let t_final = problem.t_final();
    let steps = t_final / dt;
    if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "t_final {t_final} is not a multiple of dt {dt}"
        )));
    }
    let config = SolverConfig {
        dx,
        dt,
        half_extent: DOMAIN,
        t_final,
        observe_every: usize::MAX,
        ..SolverConfig::default()
    };
    let grid = config.grid()?;
    let (stepper, initial) = match *problem {
        ConvergenceProblem::Manufactured { amplitude, .. } => (
            Leapfrog::from_config(grid.clone(), &config)
                .with_forcing(move |x, t| manufactured_forcing(x, t, amplitude)),
            {
                let mut s = WaveState::zero(Frame::V, grid.clone());
                let n = grid.n_points();
                for (i, &x) in grid.node_x().iter().enumerate().take(n - 1) {
                    s.pos.values_mut()[i] = manufactured(x, 0.0, amplitude);
                }
                s.pos.values_mut()[0] = 0.0;
                s
            },
        ),
        ConvergenceProblem::KinkStationarity { .. } => {
            let residual = move |x: f64, _t: f64| {
                let lap =
                    (model::kink(x + dx) - 2.0 * model::kink(x) + model::kink(x - dx)) / (dx * dx);
                lap + model::nonlinearity_f(model::kink(x))
            };
            (
                Leapfrog::from_config(grid.clone(), &config).with_forcing(residual),
                WaveState::zero(Frame::V, grid.clone()),
            )
        }
        ConvergenceProblem::Bump { amplitude, width, .. } => (
            Leapfrog::from_config(grid.clone(), &config),
            make_initial_data(&InitialDataSpec::gaussian(amplitude, width), grid.clone())?,
        ),
    };
    let mut none = |_: &WaveState| Ok(());
    let run = evolve_with(stepper, initial, &config, &mut none)?;
    Ok(run.final_state.pos.values().to_vec())
}

fn max_diff_on_coarse(coarse: &[f64], fine: &[f64], stride: usize) -> f64 {
    coarse
        .iter()
        .enumerate()
        .fold(0.0_f64, |m, (i, &c)| m.max((c - fine[i * stride]).abs()))
}

/// Observed order of `v1(T)` over a factor-2 ladder of `(dx, dt)` pairs,
/// coarse to fine. Each step halves `dt` and either halves or keeps `dx`.
pub fn convergence_order(
    problem: ConvergenceProblem,
    resolutions: &[(f64, f64)],
) -> Result<ConvergenceResult> {
    if resolutions.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 resolutions".into()));
    }
    let mut strides = Vec::new();
    for w in resolutions.windows(2) {
        let (rx, rt) = (w[0].0 / w[1].0, w[0].1 / w[1].1);
        if (rt - 2.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("dt must halve between levels".into()));
        }
        let stride = if (rx - 2.0).abs() < 1e-12 {
            2
        } else if (rx - 1.0).abs() < 1e-12 {
            1
        } else {
            return Err(Error::InvalidParameter("dx must halve or stay fixed".into()));
        };
        strides.push(stride);
    }
    let solutions = resolutions
        .iter()
        .map(|&(dx, dt)| run_level(&problem, dx, dt))
        .collect::<Result<Vec<_>>>()?;
    let differences: Vec<f64> = solutions
        .windows(2)
        .zip(&strides)
        .map(|(w, &s)| max_diff_on_coarse(&w[0], &w[1], s))
        .collect();
    let mut orders = Vec::new();
    for w in differences.windows(2) {
        if !(w[1] > 0.0 && w[1] < w[0]) {
            return Err(Error::Inconclusive(format!(
                "successive differences not decreasing: {:e} then {:e}",
                w[0], w[1]
            )));
        }
        orders.push((w[0] / w[1]).log2());
    }
    let exact_errors = match problem {
        ConvergenceProblem::Manufactured { amplitude, t_final } => Some(
            solutions
                .iter()
                .zip(resolutions)
                .map(|(v, &(dx, _))| {
                    v.iter().enumerate().fold(0.0_f64, |m, (i, &vi)| {
                        m.max((vi - manufactured(i as f64 * dx, t_final, amplitude)).abs())
                    })
                })
                .collect(),
        ),
        _ => None,
    };
    Ok(ConvergenceResult {
        order: *orders.last().expect("two or more differences"),
        orders,
        differences,
        exact_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder(dx: f64, dt: f64, refine_dx: bool) -> Vec<(f64, f64)> {
        (0..3)
            .map(|k| {
                let f = 2f64.powi(k);
                (if refine_dx { dx / f } else { dx }, dt / f)
            })
            .collect()
    }

    #[test]
    fn manufactured_solution_is_second_order() {
        let r = convergence_order(
            ConvergenceProblem::Manufactured { amplitude: 0.5, t_final: 2.0 },
            &ladder(0.04, 0.02, true),
        )
        .unwrap();
        assert!((1.8..=2.2).contains(&r.order), "{r:?}");
        let e = r.exact_errors.unwrap();
        assert!(((e[1] / e[2]).log2() - 2.0).abs() < 0.2, "{e:?}");
    }

    #[test]
    fn kink_residual_is_second_order() {
        let r = convergence_order(
            ConvergenceProblem::KinkStationarity { t_final: 2.0 },
            &ladder(0.04, 0.02, true),
        )
        .unwrap();
        assert!((1.8..=2.2).contains(&r.order), "{r:?}");
    }

    #[test]
    fn time_refinement_is_second_order() {
        let r = convergence_order(
            ConvergenceProblem::Bump { amplitude: 0.2, width: 1.0, t_final: 2.0 },
            &ladder(0.01, 0.008, false),
        )
        .unwrap();
        assert!((1.8..=2.2).contains(&r.order), "{r:?}");
    }

    #[test]
    fn zero_data_is_inconclusive() {
        let err = convergence_order(
            ConvergenceProblem::Bump { amplitude: 0.0, width: 1.0, t_final: 1.0 },
            &ladder(0.04, 0.02, true),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Inconclusive(_)));
    }

    #[test]
    fn short_ladder_rejected() {
        assert!(convergence_order(
            ConvergenceProblem::KinkStationarity { t_final: 1.0 },
            &[(0.04, 0.02), (0.02, 0.01)],
        )
        .is_err());
    }
}
