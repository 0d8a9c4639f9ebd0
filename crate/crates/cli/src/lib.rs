//! Command-line driver: reads a run configuration, dispatches one of the
//! experiments and writes its outputs.

pub mod config;
pub mod error;
pub mod output;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use config::{RunConfigFile, SEED_ENV};
use error::{CliError, Result};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use wklab::experiments::{
    run_convergence, run_decay, run_evolution, run_lemma_suite, run_orbital_stability,
    run_spectral_report, run_virial_budget, ExperimentReport, SpectralSetup,
};
use wklab::virial::LemmaSetup;

#[derive(Debug, Parser)]
#[command(name = "wklab", version, about = "Kink stability experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run configuration (TOML); defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for every random draw; overrides the config and WKLAB_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for sweeps (default: number of processors).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print the canonical configuration and exit.
    #[arg(long, global = true)]
    pub echo_config: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// One evolution with the full diagnostics.
    Evolve,
    /// Local energy decay at the configured amplitude.
    Decay,
    /// Virial functionals and running integrals over the amplitude sweep.
    Budget,
    /// Measured constants of the smoothing, transfer, commutator,
    /// coercivity and Poincaré inequalities.
    Lemmas {
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Darboux residuals, repulsivity and eigenvalues.
    Spectrum {
        /// Half-length of the smaller eigenvalue domain (the larger is twice it).
        #[arg(long)]
        domain: Option<f64>,
        /// Nodes across the smaller domain.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Solver convergence orders.
    Converge,
    /// Every experiment, including orbital stability.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Decay => "decay",
            Command::Budget => "budget",
            Command::Lemmas { .. } => "lemmas",
            Command::Spectrum { .. } => "spectrum",
            Command::Converge => "converge",
            Command::Report => "report",
        }
    }
}

fn spectral_setup(domain: Option<f64>, n: Option<usize>, seed: u64) -> Result<SpectralSetup> {
    let mut s = SpectralSetup {
        seed,
        ..SpectralSetup::default()
    };
    if let Some(d) = domain {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::Invalid(format!("--domain {d} must be positive")));
        }
        s.domains = vec![d, 2.0 * d];
        s.residual_domain = d;
    }
    if let Some(n) = n {
        if n < 16 {
            return Err(CliError::Invalid(format!("--n {n} is too small")));
        }
        s.dr = 2.0 * s.domains[0] / n as f64;
    }
    Ok(s)
}

fn lemma_setup(cfg: &RunConfigFile) -> LemmaSetup {
    let eps = cfg.weights.eps;
    LemmaSetup {
        params: cfg.weights,
        eps_list: vec![eps, eps / 2.0],
        ..LemmaSetup::default()
    }
}

/// A validated command ready to run.
struct Job {
    command: Command,
    cfg: RunConfigFile,
    spectral: SpectralSetup,
    trials: u64,
    seed: u64,
}

impl Job {
    fn run(&self) -> Result<Vec<ExperimentReport>> {
        let exp = self.cfg.experiment_config();
        let lemmas = || run_lemma_suite(&lemma_setup(&self.cfg), self.trials, self.seed);
        let reports = match self.command {
            Command::Evolve => vec![run_evolution(&exp)?],
            Command::Decay => vec![run_decay(&exp)?],
            Command::Budget => vec![run_virial_budget(&exp)?],
            Command::Lemmas { .. } => vec![lemmas()?],
            Command::Spectrum { .. } => vec![run_spectral_report(&self.spectral)?],
            Command::Converge => vec![run_convergence()?],
            Command::Report => vec![
                run_orbital_stability(&exp)?,
                run_decay(&exp)?,
                run_virial_budget(&exp)?,
                lemmas()?,
                run_spectral_report(&self.spectral)?,
                run_convergence()?,
            ],
        };
        let hash = self.cfg.hash();
        Ok(reports
            .into_iter()
            .map(|mut r| {
                r.provenance.config_hash = hash.clone();
                r.provenance.seed = self.seed;
                r
            })
            .collect())
    }
}

fn prepare(cli: &Cli, env_seed: Option<String>) -> Result<Job> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfigFile::load(p)?,
        None => RunConfigFile::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.directory = out.display().to_string();
    }
    let seed = cfg.resolve_seed(cli.seed, env_seed)?;
    cfg.validate()?;
    let (domain, n) = match cli.command {
        Command::Spectrum { domain, n } => (domain, n),
        _ => (None, None),
    };
    let spectral = spectral_setup(domain, n, seed)?;
    let trials = match cli.command {
        Command::Lemmas { trials: Some(t) } => t,
        _ => cfg.experiment.trials,
    };
    if trials == 0 {
        return Err(CliError::Invalid("--trials must be >= 1".into()));
    }
    if cli.jobs == Some(0) {
        return Err(CliError::Invalid("--jobs must be >= 1".into()));
    }
    Ok(Job {
        command: cli.command.clone(),
        cfg,
        spectral,
        trials,
        seed,
    })
}

fn print_reports(out: &mut impl Write, reports: &[ExperimentReport]) -> std::io::Result<()> {
    for r in reports {
        writeln!(out, "== {} ({})", r.experiment, if r.passed { "PASS" } else { "FAIL" })?;
        for c in &r.checks {
            writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        if r.experiment == "spectrum" {
            writeln!(out, "-- eigenvalues")?;
            for (k, v) in r.summary.iter().filter(|(k, _)| {
                k.starts_with("ltilde_min") || k.starts_with("mu0_L") || k.starts_with("odd_l2_min") || k.starts_with("l1_eigenvalue")
            }) {
                writeln!(out, "{k:<20} {v:>24.16e}")?;
            }
        }
    }
    Ok(())
}

fn execute(cli: Cli, env_seed: Option<String>) -> Result<i32> {
    let job = prepare(&cli, env_seed)?;
    if cli.echo_config {
        print!("{}", job.cfg.echo());
        return Ok(0);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let reports = pool.install(|| job.run())?;

    let dir = PathBuf::from(&job.cfg.output.directory);
    let echo = job.cfg.echo();
    let spec = output::OutputSpec {
        directory: &dir,
        radii: &job.cfg.experiment.radii,
        svg: job.cfg.output.svg,
        log_y: job.cfg.output.log_y,
        plot: &job.cfg.output.plot,
        config_echo: &echo,
    };
    let written = output::emit_outputs(job.command.name(), &reports, &spec)?;
    let mut stdout = std::io::stdout().lock();
    let _ = print_reports(&mut stdout, &reports);
    for p in &written {
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

/// Parses `args` (program name first), runs and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = Cli::command().after_long_help(config::schema());
    let cli = match command
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, std::env::var(SEED_ENV).ok()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
