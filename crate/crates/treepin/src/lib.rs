//! Command-line driver for `treepin-core`.
//!
//! Every command reads a JSON configuration (optional), applies flag
//! overrides, runs, and writes CSV tables plus a run record into `--out`.
//! Exit codes: 0 success, 1 failed check, 2 configuration error, 3 domain or
//! budget error.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod exec;
pub mod record;

use config::{parse_defect, parse_disorder, Grid, RunConfig};
use treepin_core::treesim::DEFAULT_NODE_BUDGET;
use treepin_core::{DefectKind, DisorderSpec};

pub const NODE_BUDGET_ENV: &str = "TREEPIN_NODE_BUDGET";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Failed checks.
    Check(Vec<String>),
    Config(String),
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Check(fails) => write!(f, "check failed: {}", fails.join("; ")),
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Domain(msg) => write!(f, "domain error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<treepin_core::Error> for CliError {
    fn from(e: treepin_core::Error) -> Self {
        use treepin_core::Error as E;
        match e {
            E::InvalidSpec(_) | E::InvalidArgument(_) | E::WrongModelKind(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "treepin",
    version,
    about = "Directed polymers on trees with a defect branch or subtree"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Critical inverse temperature and free energy over a beta grid.
    Critical,
    /// Phase labels, Monte Carlo estimates and boundary curves on a (beta, u) grid.
    PhaseDiagram,
    /// Free-energy ladder over depths, with analytic anchors.
    FreeEnergy,
    /// Brute-force, decomposition and exact-moment oracle checks.
    OracleCheck,
    /// Distribution of the Gibbs pinned fraction.
    PinnedProfile,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Critical => "critical",
            Command::PhaseDiagram => "phase-diagram",
            Command::FreeEnergy => "free-energy",
            Command::OracleCheck => "oracle-check",
            Command::PinnedProfile => "pinned-profile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Flags override the configuration file.
#[derive(Debug, Args)]
struct Common {
    /// JSON configuration or run record to start from.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "treepin-out")]
    out: PathBuf,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 picks the number of cores. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Tree arity.
    #[arg(long, global = true)]
    d: Option<u32>,
    /// Defect arity.
    #[arg(long, global = true)]
    d1: Option<u32>,
    /// gaussian:MU:SIGMA, bernoulli:P:LO:HI or constant:C.
    #[arg(long, global = true, value_parser = parse_disorder)]
    disorder: Option<DisorderSpec>,
    /// none, branch_shift, subtree_constant or subtree_shift.
    #[arg(long, global = true, value_parser = parse_defect)]
    defect: Option<DefectKind>,
    /// X, X,Y,... or START:STOP:COUNT.
    #[arg(long, global = true, value_parser = Grid::parse, allow_hyphen_values = true)]
    beta: Option<Grid>,
    /// Defect potential: X, X,Y,... or START:STOP:COUNT.
    #[arg(long, global = true, value_parser = Grid::parse, allow_hyphen_values = true)]
    u: Option<Grid>,
    /// Comma-separated depth ladder.
    #[arg(long, global = true, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    /// Depth (maximum depth for oracle-check).
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true)]
    replicas: Option<u32>,
    /// Tolerance: oracle deviations, or the phase boundary band.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seeds per case in oracle-check.
    #[arg(long, global = true)]
    seeds: Option<u32>,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) {
        if self.d.is_some() || self.d1.is_some() || self.disorder.is_some() || self.defect.is_some()
        {
            let mut m = cfg.model.clone().unwrap_or_else(config::default_model);
            if let Some(d) = self.d {
                m.d = d;
            }
            if let Some(d1) = self.d1 {
                m.d1 = d1;
            }
            if let Some(bulk) = &self.disorder {
                m.bulk = bulk.clone();
            }
            if let Some(defect) = self.defect {
                m.defect = defect.with_u(m.defect.u().unwrap_or(0.0));
            }
            cfg.model = Some(m);
        }
        macro_rules! over {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = Some(v.clone());
                }
            )*};
        }
        over!(beta, u, n_list, n, replicas, seed, tol, seeds);
    }
}

fn node_budget() -> Result<u64, CliError> {
    match std::env::var(NODE_BUDGET_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("{NODE_BUDGET_ENV}={text:?}: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_NODE_BUDGET),
        Err(e) => Err(CliError::Config(format!("{NODE_BUDGET_ENV}: {e}"))),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    common.apply(&mut cfg);
    cfg.fill_defaults();

    let exec = exec::RayonExecutor::new(common.threads)
        .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", common.threads)))?;
    let ctx = commands::Context {
        exec: &exec,
        node_budget: node_budget()?,
    };
    let outcome = match cli.command {
        Command::Critical => commands::critical(&mut cfg)?,
        Command::PhaseDiagram => commands::phase_diagram(&mut cfg, &ctx)?,
        Command::FreeEnergy => commands::free_energy(&mut cfg, &ctx)?,
        Command::OracleCheck => commands::oracle_check(&mut cfg)?,
        Command::PinnedProfile => commands::pinned_profile(&mut cfg, &ctx)?,
    };
    print!("{}", outcome.summary);
    let json = common.format == Format::Json;
    for path in record::write_outputs(&common.out, cli.command.name(), json, cfg, &outcome)? {
        println!("wrote {}", path.display());
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(outcome.failures))
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("treepin: {e}");
            e.exit_code()
        }
    }
}
