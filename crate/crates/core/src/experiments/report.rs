use crate::error::{Error, Result};
use crate::solver::{InitialDataSpec, SolverConfig};
use crate::virial::{DiagnosticsRecord, WeightParams, DEFAULT_X_WINDOW};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub solver: SolverConfig,
    pub data: InitialDataSpec,
    pub weights: WeightParams,
    /// Radii (in `r`) of the local energies.
    pub radii: Vec<f64>,
    /// Amplitudes of the sweeps, ascending.
    pub deltas: Vec<f64>,
    pub seed: u64,
    /// Half-width in `x` of the diagnostic window.
    pub x_window: f64,
    /// Length of the time windows for averaged trends.
    pub average_window: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            data: InitialDataSpec::default(),
            weights: WeightParams::default(),
            radii: vec![1.0, 2.0, 5.0, 10.0],
            deltas: vec![0.02, 0.05, 0.1],
            seed: 0,
            x_window: DEFAULT_X_WINDOW,
            average_window: 20.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate(self.data.support_radius())?;
        self.data.validate()?;
        self.weights.validate()?;
        if self.deltas.is_empty() {
            return Err(Error::InvalidParameter("delta list is empty".into()));
        }
        if self.deltas.windows(2).any(|w| w[1] < w[0]) || self.deltas.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::InvalidParameter("delta list must be ascending and >= 0".into()));
        }
        let r_window = self.x_window.min(self.solver.half_extent).sinh();
        if let Some(r) = self.radii.iter().find(|&&r| !(r > 0.0 && r < r_window)) {
            return Err(Error::InvalidParameter(format!(
                "radius {r} outside (0, {r_window:.6e})"
            )));
        }
        if !(self.x_window > 0.0 && self.x_window <= self.solver.half_extent) {
            return Err(Error::InvalidParameter("x_window must lie in (0, half_extent]".into()));
        }
        if !(self.average_window > 0.0) {
            return Err(Error::InvalidParameter("average_window must be positive".into()));
        }
        Ok(())
    }

    pub fn with_amplitude(&self, amplitude: f64) -> InitialDataSpec {
        InitialDataSpec {
            amplitude,
            ..self.data.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Series {
    pub label: String,
    pub radii: Vec<f64>,
    pub records: Vec<DiagnosticsRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub summary: BTreeMap<String, f64>,
    #[serde(skip)]
    pub series: Vec<Series>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub(crate) fn new(experiment: &str, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            passed: true,
            checks: Vec::new(),
            summary: BTreeMap::new(),
            series: Vec::new(),
            provenance: Provenance {
                config_hash: String::new(),
                code_version: env!("CARGO_PKG_VERSION").into(),
                seed,
            },
        }
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check::new(name, passed, detail));
    }

    pub(crate) fn put(&mut self, key: impl Into<String>, value: f64) {
        self.summary.insert(key.into(), value);
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
