//! Weight functions, the virial functionals `I`, `H`, `J`, the generic
//! virial rate, weighted norms, and randomized lemma checks.

mod diagnostics;
mod functionals;
mod lemmas;
mod weights;

pub use diagnostics::{
    weighted_norms, window_w_fields, DiagnosticsRecord, RunningIntegrals, VirialObserver,
    WeightedNorms, DEFAULT_X_WINDOW,
};
pub use functionals::{
    functional_h, functional_i, functional_j, rate_i, rate_j, smoothed_source, virial_functional,
    virial_rate,
};
pub use lemmas::{
    darboux_image, lemma_check, poincare_ratio, smoothing_derivative_ratio, BoundSummary, Lemma,
    LemmaCell, LemmaReport, LemmaSetup, TrialFields, STABILITY_FACTOR,
};
pub use weights::{
    build_weights, sandwich_constants, sign_decomposition, CutoffChi, Hierarchy, VirialWeight,
    WeightFamily, WeightParams, K_MIN_SQUARED,
};
