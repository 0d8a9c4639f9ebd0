//! The sectioned run configuration: parsing with located diagnostics,
//! validation, canonical echo and hashing.

use crate::error::{CliError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use wklab::experiments::ExperimentConfig;
use wklab::solver::{InitialDataSpec, SolverConfig};
use wklab::virial::{DiagnosticsRecord, WeightParams, DEFAULT_X_WINDOW};

pub const SEED_ENV: &str = "WKLAB_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub radii: Vec<f64>,
    pub deltas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub x_window: f64,
    pub average_window: f64,
    /// Random fields per cell of the lemma suite.
    pub trials: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        Self {
            radii: e.radii,
            deltas: e.deltas,
            seed: None,
            x_window: DEFAULT_X_WINDOW,
            average_window: e.average_window,
            trials: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub svg: bool,
    /// Plot `log10 |y|` instead of `y`.
    pub log_y: bool,
    /// Columns of `series.csv` drawn in each plot.
    pub plot: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "wklab-out".into(),
            svg: true,
            log_y: true,
            plot: ["I", "H", "J", "thm_weight"].map(String::from).to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub solver: SolverConfig,
    pub data: InitialDataSpec,
    pub weights: WeightParams,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

/// 1-based line and column of a byte offset.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl RunConfigFile {
    /// Parses `text`; `origin` names the source in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| locate(text, s.start));
            CliError::Parse {
                path: origin.into(),
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.into(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical echo without the `[output]` section,
    /// so the hash names what was computed rather than where it went.
    pub fn hash(&self) -> String {
        let run = Self {
            output: OutputSection::default(),
            ..self.clone()
        };
        format!("{:x}", Sha256::digest(run.echo().as_bytes()))
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            solver: self.solver.clone(),
            data: self.data.clone(),
            weights: self.weights,
            radii: self.experiment.radii.clone(),
            deltas: self.experiment.deltas.clone(),
            seed: self.experiment.seed.unwrap_or(0),
            x_window: self.experiment.x_window,
            average_window: self.experiment.average_window,
        }
    }

    /// Fills in the seed from `flag`, the file, then [`SEED_ENV`], then 0.
    pub fn resolve_seed(&mut self, flag: Option<u64>, env: Option<String>) -> Result<u64> {
        let seed = match (flag, self.experiment.seed, env) {
            (Some(s), _, _) | (None, Some(s), _) => s,
            (None, None, Some(v)) => v.trim().parse().map_err(|_| CliError::EnvSeed(v))?,
            (None, None, None) => 0,
        };
        if seed > i64::MAX as u64 {
            return Err(CliError::Invalid(format!("seed {seed} exceeds {}", i64::MAX)));
        }
        self.experiment.seed = Some(seed);
        Ok(seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment_config().validate()?;
        if self.experiment.trials == 0 {
            return Err(CliError::Invalid("experiment.trials must be >= 1".into()));
        }
        if self.output.directory.is_empty() {
            return Err(CliError::Invalid("output.directory is empty".into()));
        }
        let header = DiagnosticsRecord::header(&self.experiment.radii);
        if let Some(bad) = self.output.plot.iter().find(|c| !header.contains(c)) {
            return Err(CliError::Invalid(format!(
                "output.plot column {bad:?} is not one of {}",
                header.join(",")
            )));
        }
        Ok(())
    }
}

/// Field reference printed by `--help`.
pub fn schema() -> String {
    format!(
        "CONFIGURATION (TOML, every section and key optional, unknown keys rejected)

[solver]
  dx, dt            grid spacing in x and time step (dt <= 0.9 dx)
  half_extent       grid covers |x| <= half_extent; needs >= t_final + data support + 2
  t_final           final time
  observe_every     steps between diagnostic records
  boundary          \"dirichlet_vacuum\"
  blowup_cap        abort when max |v| exceeds this
[data]
  family            \"odd_gaussian_bump\" | \"odd_velocity_bump\" | \"custom_table\"
  amplitude, width, center_offset
  [data.table]      x, v1, v2 arrays (custom_table only; symmetric x, odd columns)
[weights]
  A, B, K, eps      virial scales and smoothing parameter (K^2 > 9/5)
[experiment]
  radii             local-energy radii in r
  deltas            ascending amplitude sweep
  seed              overridden by --seed, falls back to {SEED_ENV}
  x_window          half-width in x of the diagnostic window
  average_window    time window of the averaged trends
  trials            random fields per lemma-suite cell
[output]
  directory         created on success only
  svg               write one plot per series
  log_y             plot log10 |value|
  plot              series.csv columns to draw

DEFAULTS

{}
EXIT CODES
  0 every check passed, 1 a check failed, 2 usage or configuration error",
        RunConfigFile::default().echo()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_default() {
        assert_eq!(RunConfigFile::parse("", "t").unwrap(), RunConfigFile::default());
    }

    #[test]
    fn echo_is_idempotent() {
        let text = "[solver]\nt_final = 50\ndx = 0.01\ndt = 0.0075\n\
                    [data]\nfamily = \"odd_velocity_bump\"\namplitude = 0.1\n\
                    [weights]\nA = 30.0\n[experiment]\nseed = 7\nradii = [1.0, 2.5]\n\
                    [output]\nsvg = false\n";
        let c = RunConfigFile::parse(text, "t").unwrap();
        assert_eq!(c.solver.t_final, 50.0);
        assert_eq!(c.weights.a, 30.0);
        let e = c.echo();
        let c2 = RunConfigFile::parse(&e, "echo").unwrap();
        assert_eq!(c, c2);
        assert_eq!(e, c2.echo());
    }

    #[test]
    fn table_round_trips() {
        let text = "[data]\nfamily = \"custom_table\"\n[data.table]\n\
                    x = [-1.0, 0.0, 1.0]\nv1 = [-0.1, 0.0, 0.1]\nv2 = [0.0, 0.0, 0.0]\n";
        let c = RunConfigFile::parse(text, "t").unwrap();
        c.validate().unwrap();
        assert_eq!(RunConfigFile::parse(&c.echo(), "e").unwrap(), c);
    }

    #[test]
    fn unknown_key_is_located() {
        let err = RunConfigFile::parse("[solver]\ndx = 0.02\nbogus = 1\n", "cfg").unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (3, 1)),
            e => panic!("{e}"),
        }
        let err = RunConfigFile::parse("[weights]\nA = \"x\"\n", "cfg").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn seed_precedence() {
        let mut c = RunConfigFile::default();
        assert_eq!(c.clone().resolve_seed(None, None).unwrap(), 0);
        assert_eq!(c.clone().resolve_seed(None, Some("9".into())).unwrap(), 9);
        assert!(c.clone().resolve_seed(None, Some("x".into())).is_err());
        c.experiment.seed = Some(4);
        assert_eq!(c.clone().resolve_seed(None, Some("9".into())).unwrap(), 4);
        assert_eq!(c.resolve_seed(Some(5), Some("9".into())).unwrap(), 5);
        assert_eq!(c.experiment.seed, Some(5));
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = RunConfigFile::default();
        c.validate().unwrap();
        c.solver.dt = 1.0;
        assert!(c.validate().is_err());
        let mut c = RunConfigFile::default();
        c.output.plot = vec!["nope".into()];
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfigFile::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.data.amplitude = 0.06;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.output.directory = "elsewhere".into();
        assert_eq!(a.hash(), c.hash());
    }
}
