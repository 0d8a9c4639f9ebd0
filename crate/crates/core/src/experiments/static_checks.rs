use super::report::ExperimentReport;
use crate::error::Result;
use crate::model;
use crate::operators::{
    commutator_xeps_p1, factorization_residual, intertwining_residual, smallest_eigenvalues,
    zero_mode_residual, LineGrid, SpectralOperator,
};
use crate::random::{trial_rng, FieldSampler, Symmetry};
use crate::solver::{convergence_order, ConvergenceProblem};
use crate::virial::{lemma_check, Lemma, LemmaSetup};
use rand::Rng;
use rayon::prelude::*;

/// Accepted window for an observed second-order rate.
const ORDER_RANGE: (f64, f64) = (1.8, 2.2);

fn order_ok(p: f64) -> bool {
    (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&p)
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Every lemma check on the same setup, in parallel.
pub fn run_lemma_suite(setup: &LemmaSetup, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let reports: Vec<_> = Lemma::ALL
        .par_iter()
        .map(|&lemma| lemma_check(lemma, setup, trials, seed))
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new("lemmas", seed);
    for rep in reports {
        let name = rep.lemma.name();
        for b in &rep.bounds {
            report.put(format!("{name}_{}_max", b.bound), b.max);
            report.put(format!("{name}_{}_min", b.bound), b.min);
        }
        let detail = rep
            .bounds
            .iter()
            .map(|b| format!("{} in [{:.4}, {:.4}]", b.bound, b.min, b.max))
            .collect::<Vec<_>>()
            .join(", ");
        report.check(name, rep.passed, detail);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSetup {
    /// Half-lengths for the eigenvalue studies.
    pub domains: Vec<f64>,
    pub dr: f64,
    /// Spacings, coarse to fine, for the residual orders.
    pub ladder: Vec<f64>,
    pub residual_domain: f64,
    pub repulsivity_extent: f64,
    pub repulsivity_nodes: usize,
    pub l1_count: usize,
    pub seed: u64,
}

impl Default for SpectralSetup {
    fn default() -> Self {
        Self {
            domains: vec![40.0, 80.0],
            dr: 0.02,
            ladder: vec![0.04, 0.02, 0.01],
            residual_domain: 40.0,
            repulsivity_extent: 100.0,
            repulsivity_nodes: 100_000,
            l1_count: 5,
            seed: 0,
        }
    }
}

/// Factorization, intertwining and zero-mode residual orders, the
/// repulsivity sign, the Darboux identities at random points and the
/// eigenvalue studies of `L~` and `L~1`.
pub fn run_spectral_report(setup: &SpectralSetup) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("spectrum", setup.seed);

    // repulsivity and the closed form of P1'
    let n = setup.repulsivity_nodes.max(3);
    let ext = setup.repulsivity_extent;
    let h = 2.0 * ext / (n - 1) as f64;
    let rs: Vec<f64> = (0..n).map(|i| -ext + i as f64 * h).collect();
    let min_rep = rs.iter().map(|&r| model::repulsivity_profile(r)).fold(f64::INFINITY, f64::min);
    report.put("repulsivity_min", min_rep);
    report.check("repulsivity", min_rep >= 0.0, format!("min -rP1' = {min_rep:.3e} on {n} nodes"));
    let fd_err = |h: f64| {
        rs.iter().fold(0.0_f64, |m, &r| {
            let fd = (model::potential_p1(r + h) - model::potential_p1(r - h)) / (2.0 * h);
            m.max((fd - model::potential_p1_prime(r)).abs())
        })
    };
    let p = (fd_err(h) / fd_err(0.5 * h)).log2();
    report.put("p1_prime_fd_order", p);
    report.check("p1_prime_closed_form", order_ok(p), format!("difference order {p:.3}"));

    // Darboux identities pointwise
    let mut rng = trial_rng(setup.seed, 0);
    let (mut ev, mut ep) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let r: f64 = rng.gen_range(-50.0..50.0);
        let (nu, dnu) = (model::darboux_nu(r), model::darboux_nu_prime(r));
        ev = ev.max((model::potential_v(r) - (nu * nu - dnu)).abs());
        ep = ep.max((model::potential_p1(r) - (nu * nu + dnu)).abs());
    }
    report.put("darboux_v_error", ev);
    report.put("darboux_p1_error", ep);
    report.check("darboux_pointwise", ev < 1e-12 && ep < 1e-12, format!("{ev:.2e}, {ep:.2e}"));

    // residual ladders
    let sampler = FieldSampler::default();
    let levels: Vec<(f64, f64, f64)> = setup
        .ladder
        .par_iter()
        .map(|&dr| {
            let g = LineGrid::uniform(setup.residual_domain, dr)?;
            let fields: Vec<Vec<f64>> = (0..4)
                .map(|t| g.sample(sampler.field(Symmetry::None, setup.seed, t)))
                .collect();
            Ok((
                factorization_residual(&g, &fields),
                intertwining_residual(&g, &fields),
                zero_mode_residual(&g),
            ))
        })
        .collect::<Result<_>>()?;
    for (k, name) in ["factorization", "intertwining", "zero_mode"].iter().enumerate() {
        let errs: Vec<f64> = levels
            .iter()
            .map(|l| match k {
                0 => l.0,
                1 => l.1,
                _ => l.2,
            })
            .collect();
        let ords = orders(&errs);
        for (i, e) in errs.iter().enumerate() {
            report.put(format!("{name}_residual_{i}"), *e);
        }
        let ok = !ords.is_empty() && ords.iter().all(|&p| order_ok(p));
        report.check(format!("{name}_order"), ok, format!("orders {ords:.3?}"));
    }

    // eigenvalue studies
    let ytilde_overlap = |s: &crate::operators::Spectrum| {
        let y = s.grid.sample(model::darboux_ground_state);
        let v = &s.vectors[0];
        s.grid.inner(v, &y).abs() / (s.grid.norm(v) * s.grid.norm(&y))
    };
    let studies: Vec<(f64, f64, f64, f64, f64)> = setup
        .domains
        .par_iter()
        .map(|&d| {
            let full = smallest_eigenvalues(SpectralOperator::LTildeFull, 1, d, setup.dr)?;
            let odd = smallest_eigenvalues(SpectralOperator::LTildeOdd, 1, d, setup.dr)?;
            let odd_l2 = smallest_eigenvalues(SpectralOperator::LTildeOddL2, 1, d, setup.dr)?;
            Ok((d, full.values[0], ytilde_overlap(&full), odd.values[0], odd_l2.values[0]))
        })
        .collect::<Result<_>>()?;
    let mut mu0 = Vec::new();
    for &(d, lam, overlap, mu, mu_l2) in &studies {
        report.put(format!("ltilde_min_L{d}"), lam);
        report.put(format!("ytilde_overlap_L{d}"), overlap);
        report.put(format!("mu0_L{d}"), mu);
        report.put(format!("odd_l2_min_L{d}"), mu_l2);
        report.check(
            format!("zero_mode_L{d}"),
            lam.abs() < 1e-3 && overlap > 0.999,
            format!("lambda_min = {lam:.3e}, overlap = {overlap:.7}"),
        );
        report.check(format!("odd_gap_L{d}"), mu > 0.0, format!("mu0 = {mu:.6}"));
        mu0.push(mu);
    }
    if mu0.len() >= 2 {
        let lo = mu0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mu0.iter().copied().fold(0.0_f64, f64::max);
        let rel = (hi - lo) / lo;
        report.put("mu0_relative_spread", rel);
        report.check("mu0_stable", rel <= 0.10, format!("relative spread {rel:.3e}"));
    }
    let l1 = smallest_eigenvalues(SpectralOperator::L1, setup.l1_count, setup.domains[0], setup.dr)?;
    for (i, v) in l1.values.iter().enumerate() {
        report.put(format!("l1_eigenvalue_{i}"), *v);
    }
    let l1_min = l1.values[0];
    report.check("l1_nonnegative", l1_min >= -1e-10, format!("smallest = {l1_min:.3e}"));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CommutatorStudy {
    /// Max over fields of `‖direct - identity‖ / ‖direct‖`.
    pub max_relative_discrepancy: f64,
    pub eps_list: Vec<f64>,
    /// `‖[X_eps, P1] U w‖` for the reference profile, per `eps`.
    pub norms: Vec<f64>,
    /// Least-squares slope of `log ‖[X_eps, P1] U w‖` against `log eps`.
    pub slope: f64,
}

/// Discrete commutator identity on random odd fields, and the growth of the
/// commutator in `eps` for the smooth profile `r e^{-r^2/4}`.
pub fn commutator_study(
    grid: &LineGrid,
    eps: f64,
    trials: u64,
    seed: u64,
    eps_list: &[f64],
) -> Result<CommutatorStudy> {
    let sampler = FieldSampler::default();
    let discrepancies: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let w = sampler.sample(grid, Symmetry::Odd, seed, t);
            let c = commutator_xeps_p1(grid, &w, eps)?;
            let diff: Vec<f64> = c.direct.iter().zip(&c.identity_rhs).map(|(a, b)| a - b).collect();
            Ok(grid.norm(&diff) / grid.norm(&c.direct))
        })
        .collect::<Result<_>>()?;
    let w = grid.sample(|r| r * (-r * r / 4.0).exp());
    let norms: Vec<f64> = eps_list
        .iter()
        .map(|&e| Ok(grid.norm(&commutator_xeps_p1(grid, &w, e)?.direct)))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(CommutatorStudy {
        max_relative_discrepancy: discrepancies.iter().copied().fold(0.0, f64::max),
        eps_list: eps_list.to_vec(),
        norms,
        slope: sxy / sxx,
    })
}

/// Observed orders of the three convergence problems.
pub fn run_convergence() -> Result<ExperimentReport> {
    let ladder = |dx: f64, dt: f64, refine_dx: bool| -> Vec<(f64, f64)> {
        (0..3)
            .map(|k| {
                let f = 2f64.powi(k);
                (if refine_dx { dx / f } else { dx }, dt / f)
            })
            .collect()
    };
    let problems = [
        ("manufactured", ConvergenceProblem::Manufactured { amplitude: 0.5, t_final: 2.0 }, ladder(0.04, 0.02, true)),
        ("kink_stationarity", ConvergenceProblem::KinkStationarity { t_final: 2.0 }, ladder(0.04, 0.02, true)),
        ("dt_refinement", ConvergenceProblem::Bump { amplitude: 0.2, width: 1.0, t_final: 2.0 }, ladder(0.01, 0.008, false)),
    ];
    let results: Vec<_> = problems
        .par_iter()
        .map(|(name, p, l)| (name, convergence_order(*p, l)))
        .collect();
    let mut report = ExperimentReport::new("converge", 0);
    for (name, res) in results {
        match res {
            Ok(r) => {
                report.put(format!("{name}_order"), r.order);
                report.check(*name, order_ok(r.order), format!("order {:.4}, differences {:.3e}", r.order, r.differences.last().copied().unwrap_or(0.0)));
            }
            Err(e) => report.check(*name, false, e.to_string()),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_identity_and_slope() {
        let g = LineGrid::uniform(40.0, 0.02).unwrap();
        let s = commutator_study(&g, 0.1, 5, 3, &[0.01, 0.005, 0.0025]).unwrap();
        assert!(s.max_relative_discrepancy < 1e-10, "{s:?}");
        assert!((s.slope - 1.0).abs() < 0.15, "{s:?}");
    }

    #[test]
    fn small_spectral_report_passes() {
        let setup = SpectralSetup {
            domains: vec![20.0, 40.0],
            dr: 0.04,
            repulsivity_nodes: 2001,
            ..SpectralSetup::default()
        };
        let rep = run_spectral_report(&setup).unwrap();
        assert!(rep.passed, "{:#?}", rep.checks);
    }
}
