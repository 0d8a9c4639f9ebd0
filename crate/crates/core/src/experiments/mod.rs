//! Studies that combine the solver, operators and virial diagnostics:
//! orbital stability, local energy decay, virial budgets, lemma suites,
//! spectral reports and convergence.

mod dynamics;
mod report;
mod static_checks;

pub use dynamics::{
    energy_drift_study, rate_identity_study, run_decay, run_evolution, run_orbital_stability,
    run_virial_budget, windowed_averages, DriftStudy, RateStudy, EVOLVE_DRIFT_GATE,
    TREND_TOLERANCE,
};
pub use report::{Check, ExperimentConfig, ExperimentReport, Provenance, Series};
pub use static_checks::{
    commutator_study, run_convergence, run_lemma_suite, run_spectral_report, CommutatorStudy,
    SpectralSetup,
};
