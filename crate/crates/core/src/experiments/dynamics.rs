use super::report::{ExperimentConfig, ExperimentReport, Series};
use crate::error::{Error, Result};
use crate::grid::WaveState;
use crate::operators::{apply_seps_with, LineGrid, Smoother};
use crate::solver::{
    energy_observer, evolve, make_initial_data, relative_energy_drift, weighted_data_norm,
    InitialDataSpec, Observer, SolverConfig,
};
use crate::virial::{
    build_weights, functional_i, functional_j, rate_i, rate_j, window_w_fields, DiagnosticsRecord,
    VirialObserver, WeightParams,
};
use rayon::prelude::*;

/// Largest spread `max / min` tolerated across an amplitude sweep.
const SWEEP_SPREAD: f64 = 2.0;
/// Local-energy ratio gate at the final time, for radii up to [`DECAY_RADIUS`].
const DECAY_GATE: f64 = 0.05;
const DECAY_RADIUS: f64 = 5.0;
/// Largest tail fraction of a saturated running integral.
const SATURATION_GATE: f64 = 0.10;
/// Largest relative spread of `integral / delta^2` across the sweep.
const SCALING_GATE: f64 = 0.30;
/// Rises between consecutive windowed averages smaller than this fraction of
/// the largest average count as flat.
pub const TREND_TOLERANCE: f64 = 1e-4;
/// Relative energy drift tolerated by a plain evolution.
pub const EVOLVE_DRIFT_GATE: f64 = 1e-6;
/// Length of the early stretch used for the budget's rate cross-check.
const RATE_CHECK_TIME: f64 = 10.0;

fn label(delta: f64) -> String {
    format!("delta_{delta}")
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0_f64, f64::max);
    if hi == 0.0 {
        1.0
    } else {
        hi / lo
    }
}

/// Means of `values` over consecutive time windows of length `window`
/// (the last, partial window included only if it holds half a window).
pub fn windowed_averages(times: &[f64], values: &[f64], window: f64) -> Vec<f64> {
    let Some(&t0) = times.first() else {
        return Vec::new();
    };
    let t_end = *times.last().expect("nonempty");
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let (a, b) = (t0 + k as f64 * window, t0 + (k + 1) as f64 * window);
        if a > t_end || (b > t_end + 1e-9 && t_end - a < 0.5 * window) {
            break;
        }
        let sel: Vec<f64> = times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= a - 1e-9 && **t < b - 1e-9)
            .map(|(_, v)| *v)
            .collect();
        if !sel.is_empty() {
            out.push(sel.iter().sum::<f64>() / sel.len() as f64);
        }
        k += 1;
    }
    out
}

/// Non-increasing from some index in the first half on, and ending below
/// where it started.
fn trend_detail(avgs: &[f64]) -> String {
    let peak = avgs.iter().cloned().fold(0.0, f64::max);
    let rise = avgs
        .windows(2)
        .skip(avgs.len() / 2)
        .map(|p| p[1] - p[0])
        .fold(0.0, f64::max);
    format!(
        "{} windows, first {:.4e}, last {:.4e}, largest late rise / peak {:.3e} (tolerance {TREND_TOLERANCE})",
        avgs.len(),
        avgs.first().copied().unwrap_or(0.0),
        avgs.last().copied().unwrap_or(0.0),
        if peak > 0.0 { rise / peak } else { 0.0 }
    )
}

fn eventually_decreasing(avgs: &[f64]) -> bool {
    if avgs.len() < 2 {
        return true;
    }
    let n = avgs.len();
    let floor = TREND_TOLERANCE * avgs.iter().cloned().fold(0.0, f64::max);
    let mut k0 = n - 1;
    while k0 > 0 && avgs[k0 - 1] + floor >= avgs[k0] {
        k0 -= 1;
    }
    k0 <= n / 2 && avgs[n - 1] <= avgs[0]
}

/// Sup over time of the orbital norm relative to its initial value, for
/// each amplitude of the sweep.
pub fn run_orbital_stability(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = ExperimentReport::new("orbital_stability", config.seed);
    let results: Vec<(f64, Result<(f64, f64)>)> = config
        .deltas
        .par_iter()
        .map(|&delta| {
            let run = || -> Result<(f64, f64)> {
                let grid = config.solver.grid()?;
                let s0 = make_initial_data(&config.with_amplitude(delta), grid)?;
                let mut obs = |s: &WaveState| Ok(weighted_data_norm(s));
                let ev = evolve(s0, &config.solver, &mut obs)?;
                let n0 = ev.records[0];
                let sup = ev.records.iter().copied().fold(0.0_f64, f64::max);
                Ok((n0, if n0 == 0.0 { 0.0 } else { sup / n0 }))
            };
            (delta, run())
        })
        .collect();
    let mut constants = Vec::new();
    for (delta, res) in results {
        match res {
            Ok((n0, c)) => {
                report.put(format!("norm0_{}", label(delta)), n0);
                report.put(format!("C_{}", label(delta)), c);
                report.check(format!("bounded_{}", label(delta)), c.is_finite(), format!("C = {c:.6}"));
                if n0 > 0.0 {
                    constants.push(c);
                }
            }
            Err(Error::BlowUp { step, time, max_abs, .. }) => {
                report.check(
                    format!("bounded_{}", label(delta)),
                    false,
                    format!("blow-up at step {step} (t = {time}, max |v| = {max_abs:.3e})"),
                );
            }
            Err(e) => return Err(e),
        }
    }
    let s = spread(&constants);
    report.put("C_spread", s);
    report.check("C_stable", s <= SWEEP_SPREAD, format!("max/min = {s:.4}"));
    Ok(report)
}

fn run_diagnostics(
    config: &ExperimentConfig,
    data: &InitialDataSpec,
) -> Result<(Vec<DiagnosticsRecord>, Vec<f64>)> {
    let grid = config.solver.grid()?;
    let s0 = make_initial_data(data, grid.clone())?;
    let mut obs = RateObserver {
        inner: VirialObserver::new(&grid, config.x_window, config.weights, &config.radii)?,
        rates: Vec::new(),
        until: RATE_CHECK_TIME,
    };
    let ev = evolve(s0, &config.solver, &mut obs)?;
    Ok((ev.records, obs.rates))
}

/// Diagnostics plus `dI/dt` from the identity over an initial stretch.
struct RateObserver {
    inner: VirialObserver,
    rates: Vec<f64>,
    until: f64,
}

impl Observer for RateObserver {
    type Record = DiagnosticsRecord;

    fn observe(&mut self, state: &WaveState) -> Result<DiagnosticsRecord> {
        if state.time <= self.until + 1e-9 {
            let (w1, _) = window_w_fields(self.inner.window(), state)?;
            self.rates.push(rate_i(self.inner.window(), self.inner.weights(), &w1));
        }
        self.inner.observe(state)
    }
}

/// Largest `|centered dI/dt - identity|` over the samples that have both,
/// and the largest `|identity|`.
fn rate_mismatch(records: &[DiagnosticsRecord], rates: &[f64]) -> (f64, f64) {
    let n = rates.len().min(records.len().saturating_sub(1));
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for k in 1..n {
        let fd = (records[k + 1].i - records[k - 1].i) / (records[k + 1].time - records[k - 1].time);
        err = err.max((fd - rates[k]).abs());
        scale = scale.max(rates[k].abs());
    }
    (err, scale)
}

/// One evolution at the configured amplitude with the full diagnostics.
/// Passes when no record is non-finite and the conserved energy drifts by
/// less than [`EVOLVE_DRIFT_GATE`] relative.
pub fn run_evolution(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = ExperimentReport::new("evolve", config.seed);
    let records = match run_diagnostics(config, &config.data) {
        Ok((records, _)) => records,
        Err(e @ Error::BlowUp { .. }) => {
            report.check("bounded", false, e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let finite = records.iter().all(DiagnosticsRecord::is_finite);
    report.check("finite", finite, format!("{} records", records.len()));
    let samples: Vec<(f64, f64)> = records.iter().map(|r| (r.time, r.energy)).collect();
    let drift = relative_energy_drift(&samples);
    report.put("energy_drift", drift);
    report.check(
        "energy_drift",
        drift < EVOLVE_DRIFT_GATE,
        format!("relative drift {drift:.3e} (gate {EVOLVE_DRIFT_GATE})"),
    );
    if let Some(last) = records.last() {
        report.put("t_final", last.time);
        for &(radius, e) in &last.norms.local_energy {
            report.put(format!("localE_{radius}_final"), e);
        }
    }
    report.series.push(Series {
        label: label(config.data.amplitude),
        radii: config.radii.clone(),
        records,
    });
    Ok(report)
}

/// Local energies and the decaying weighted norm along one run.
pub fn run_decay(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = ExperimentReport::new("decay", config.seed);
    let (records, _) = run_diagnostics(config, &config.data)?;
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let (first, last) = (&records[0], records.last().expect("at least one record"));
    for (k, &radius) in config.radii.iter().enumerate() {
        let e0 = first.norms.local_energy[k].1;
        let e1 = last.norms.local_energy[k].1;
        let ratio = if e0 == 0.0 { 0.0 } else { e1 / e0 };
        report.put(format!("localE_{radius}_initial"), e0);
        report.put(format!("localE_{radius}_final"), e1);
        report.put(format!("localE_{radius}_ratio"), ratio);
        let series: Vec<f64> = records.iter().map(|r| r.norms.local_energy[k].1).collect();
        let avgs = windowed_averages(&times, &series, config.average_window);
        let trend = eventually_decreasing(&avgs);
        if radius <= DECAY_RADIUS {
            report.check(
                format!("localE_{radius}_decay"),
                ratio < DECAY_GATE,
                format!("final/initial = {ratio:.4e} (gate {DECAY_GATE})"),
            );
            report.check(
                format!("localE_{radius}_trend"),
                trend,
                trend_detail(&avgs),
            );
        } else {
            report.put(format!("localE_{radius}_trend"), f64::from(u8::from(trend)));
        }
    }
    let thm: Vec<f64> = records.iter().map(|r| r.norms.thm_weight).collect();
    let avgs = windowed_averages(&times, &thm, config.average_window);
    report.put("thm_weight_initial", thm[0]);
    report.put("thm_weight_final", *thm.last().expect("nonempty"));
    report.check(
        "thm_weight_trend",
        eventually_decreasing(&avgs),
        trend_detail(&avgs),
    );
    report.series.push(Series {
        label: label(config.data.amplitude),
        radii: config.radii.clone(),
        records,
    });
    Ok(report)
}

/// Running integrals and the sizes of `I`, `H`, `J` across the sweep.
pub fn run_virial_budget(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = ExperimentReport::new("virial_budget", config.seed);
    let runs: Vec<(f64, (Vec<DiagnosticsRecord>, Vec<f64>))> = config
        .deltas
        .par_iter()
        .map(|&delta| Ok((delta, run_diagnostics(config, &config.with_amplitude(delta))?)))
        .collect::<Result<_>>()?;
    let a = config.weights.a;
    let names = crate::virial::RunningIntegrals::NAMES;
    let mut scaled: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut constants: [Vec<f64>; 3] = Default::default();
    for (delta, (records, rates)) in &runs {
        let tag = label(*delta);
        let scale = a * delta * delta;
        let sup = |f: &dyn Fn(&DiagnosticsRecord) -> f64| {
            records.iter().fold(0.0_f64, |m, r| m.max(f(r).abs()))
        };
        for (k, (key, value)) in [("I", sup(&|r| r.i)), ("H", sup(&|r| r.h)), ("J", sup(&|r| r.j))]
            .into_iter()
            .enumerate()
        {
            let c = if scale == 0.0 { 0.0 } else { value / scale };
            report.put(format!("c_{key}_{tag}"), c);
            report.check(format!("{key}_bounded_{tag}"), c.is_finite(), format!("sup|{key}|/(A delta^2) = {c:.4e}"));
            if scale > 0.0 {
                constants[k].push(c);
            }
        }
        let last = records.last().expect("at least one record");
        let t_end = last.time;
        let quarter = records
            .iter()
            .find(|r| r.time >= 0.75 * t_end - 1e-9)
            .unwrap_or(last);
        for (k, name) in names.iter().enumerate() {
            let total = last.integrals.values()[k];
            let tail = total - quarter.integrals.values()[k];
            let frac = if total == 0.0 { 0.0 } else { tail / total };
            report.put(format!("{name}_{tag}"), total);
            report.put(format!("{name}_tail_{tag}"), frac);
            report.check(
                format!("{name}_saturates_{tag}"),
                frac < SATURATION_GATE,
                format!("last-quarter share {frac:.4e}"),
            );
            if *delta > 0.0 {
                scaled[k].push(total / (delta * delta));
            }
        }
        let (err, rate_scale) = rate_mismatch(records, rates);
        report.put(format!("rate_mismatch_{tag}"), err);
        report.put(format!("rate_scale_{tag}"), rate_scale);
    }
    for (key, cs) in ["I", "H", "J"].iter().zip(&constants) {
        if cs.len() >= 2 {
            let s = spread(cs);
            report.put(format!("c_{key}_spread"), s);
            report.check(
                format!("{key}_constant_stable"),
                s <= SWEEP_SPREAD,
                format!("max/min of sup|{key}|/(A delta^2) = {s:.4}"),
            );
        }
    }
    for (k, name) in names.iter().enumerate() {
        if scaled[k].len() >= 2 {
            let s = spread(&scaled[k]) - 1.0;
            report.put(format!("{name}_delta2_spread"), s);
            report.check(
                format!("{name}_scales_delta2"),
                s <= SCALING_GATE,
                format!("relative spread of integral/delta^2 = {s:.4}"),
            );
        }
    }
    for (delta, (records, _)) in runs {
        report.series.push(Series {
            label: label(delta),
            radii: config.radii.clone(),
            records,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DriftStudy {
    pub drift: f64,
    pub drift_half_dt: f64,
    pub ratio: f64,
}

/// Relative energy drift at `dt` and `dt/2` (same `dx`).
pub fn energy_drift_study(solver: &SolverConfig, data: &InitialDataSpec) -> Result<DriftStudy> {
    let drifts: Vec<f64> = [1.0, 0.5]
        .par_iter()
        .map(|&f| {
            let cfg = SolverConfig {
                dt: solver.dt * f,
                observe_every: ((solver.observe_every as f64) / f).round() as usize,
                ..solver.clone()
            };
            cfg.validate(data.support_radius())?;
            let s0 = make_initial_data(data, cfg.grid()?)?;
            let ev = evolve(s0, &cfg, &mut energy_observer)?;
            Ok(relative_energy_drift(&ev.records))
        })
        .collect::<Result<_>>()?;
    Ok(DriftStudy {
        drift: drifts[0],
        drift_half_dt: drifts[1],
        ratio: drifts[0] / drifts[1],
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RateStudy {
    /// `(dx, dt)` per level.
    pub levels: Vec<(f64, f64)>,
    /// Max `|centered dI/dt - identity|` per level.
    pub errors_i: Vec<f64>,
    pub errors_j: Vec<f64>,
    pub ratio_i: f64,
    pub ratio_j: f64,
}

/// Refinement study of the virial identities for `I` and `J` along short
/// evolutions whose window covers the whole domain. `observe_every` is
/// kept fixed in steps, so the differencing interval halves with `dt`.
pub fn rate_identity_study(
    data: &InitialDataSpec,
    weights: WeightParams,
    levels: &[(f64, f64)],
    half_extent: f64,
    t_final: f64,
    observe_every: usize,
) -> Result<RateStudy> {
    if levels.len() < 2 {
        return Err(Error::InvalidParameter("need at least two levels".into()));
    }
    let errors: Vec<(f64, f64)> = levels
        .par_iter()
        .map(|&(dx, dt)| {
            let cfg = SolverConfig {
                dx,
                dt,
                half_extent,
                t_final,
                observe_every,
                ..SolverConfig::default()
            };
            cfg.check_cfl()?;
            let grid = cfg.grid()?;
            let window = LineGrid::from_evolution_window(&grid, half_extent - 2.0 * dx)?;
            let fam = build_weights(weights, &window)?;
            let x = Smoother::new(&window, weights.eps)?;
            let mut obs = |s: &WaveState| -> Result<[f64; 5]> {
                let (w1, w2) = window_w_fields(&window, s)?;
                let u1 = apply_seps_with(&x, &window, &w1)?;
                let u2 = apply_seps_with(&x, &window, &w2)?;
                Ok([
                    s.time,
                    functional_i(&window, &fam, &w1, &w2),
                    rate_i(&window, &fam, &w1),
                    functional_j(&window, &fam, &u1, &u2),
                    rate_j(&window, &fam, &x, &w1)?,
                ])
            };
            let ev = evolve(make_initial_data(data, grid)?, &cfg, &mut obs)?;
            let r = &ev.records;
            let (mut ei, mut ej) = (0.0_f64, 0.0_f64);
            for k in 1..r.len().saturating_sub(1) {
                let span = r[k + 1][0] - r[k - 1][0];
                ei = ei.max(((r[k + 1][1] - r[k - 1][1]) / span - r[k][2]).abs());
                ej = ej.max(((r[k + 1][3] - r[k - 1][3]) / span - r[k][4]).abs());
            }
            Ok((ei, ej))
        })
        .collect::<Result<_>>()?;
    let (errors_i, errors_j): (Vec<f64>, Vec<f64>) = errors.into_iter().unzip();
    let n = errors_i.len();
    Ok(RateStudy {
        levels: levels.to_vec(),
        ratio_i: errors_i[n - 2] / errors_i[n - 1],
        ratio_j: errors_j[n - 2] / errors_j[n - 1],
        errors_i,
        errors_j,
    })
}
