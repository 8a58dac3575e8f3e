//! Command-line driver: config resolution, the subcommands and their
//! artifacts.

pub mod artifact;
pub mod commands;
pub mod config;

use artifact::{sha256_hex, Bundle, Meta, VERSION};
use clap::{Parser, Subcommand};
use commands::Status;
use config::{load_config, resolve, Command, ExperimentConfig};
use normcircle::Error;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

/// Circle-method experiments for aN(x) + bN(y) = z^n over a number field.
///
/// Exit codes: 0 success, 1 other failure, 2 invalid config or input,
/// 3 budget exhausted, 4 infeasible (report written), 5 invariant failure.
/// Every flag can also be set through the environment variable shown.
#[derive(Debug, Parser)]
#[command(name = "normcircle", version)]
pub struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true, env = "NORMCIRCLE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Worker threads; 1 gives the deterministic single-threaded path.
    #[arg(long, global = true, env = "NORMCIRCLE_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, env = "NORMCIRCLE_SEED")]
    pub seed: Option<u64>,
    /// Cap on enumerated points and other counted work.
    #[arg(long, global = true, env = "NORMCIRCLE_BUDGET_POINTS")]
    pub budget_points: Option<u128>,
    /// Artifact directory.
    #[arg(long, global = true, env = "NORMCIRCLE_OUT", default_value = "normcircle-out")]
    pub out: PathBuf,
    /// Built-in instance: gaussian, gaussian-wapprox, cube-root-two,
    /// vanishing-series or sqrt2-gaussian.
    #[arg(long, global = true, env = "NORMCIRCLE_INSTANCE")]
    pub instance: Option<String>,
    /// Comma-separated P schedule.
    #[arg(long = "p", global = true, env = "NORMCIRCLE_P", value_delimiter = ',')]
    pub p_schedule: Option<Vec<f64>>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Exact solution counts N(P) over the schedule.
    Count,
    /// Singular series, singular integral and the ratio N(P) / prediction.
    Predict,
    /// Minor-arc scan of |S3| with the fitted growth exponent.
    Arcs,
    /// Local certificates at every place up to the prime cutoff.
    Local,
    /// Weak-approximation witness search along the schedule.
    Wapprox,
    /// Replays the certificates in a `wapprox` or `local` artifact.
    VerifyCert {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Seeded invariant suite on the built-in fields and instances.
    Selftest,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Count => Command::Count,
            Sub::Predict => Command::Predict,
            Sub::Arcs => Command::Arcs,
            Sub::Local => Command::Local,
            Sub::Wapprox => Command::Wapprox,
            Sub::VerifyCert { .. } => Command::VerifyCert,
            Sub::Selftest => Command::Selftest,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MismatchedField { .. }
        | Error::MalformedTable(_)
        | Error::InvalidSpec(_)
        | Error::PrecisionUnderflow { .. }
        | Error::DegenerateEquation(_)
        | Error::ZeroDenominator
        | Error::NotIntegral
        | Error::NotPrime(_)
        | Error::DualityIncompatible => EXIT_SCHEMA,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::InconsistentLocalData(_) | Error::SingularCenter(_) | Error::CenterNotSolution { .. } => EXIT_INFEASIBLE,
        Error::Invariant(_) => EXIT_INVARIANT,
        Error::MissingEstimate(_) | Error::Numerical(_) => EXIT_OTHER,
    }
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct RunResult {
    pub code: i32,
    /// Artifacts, if any were written.
    pub bundle: Option<Bundle>,
    pub message: Option<String>,
}

fn failure(code: i32, message: String) -> RunResult {
    RunResult {
        code,
        bundle: None,
        message: Some(message),
    }
}

/// Applies flag overrides to the config file contents.
pub fn merged_config(cli: &Cli) -> normcircle::Result<(ExperimentConfig, PathBuf)> {
    let (mut c, base) = match &cli.config {
        Some(path) => {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (load_config(path)?, base)
        }
        None => (ExperimentConfig::default(), PathBuf::new()),
    };
    if let Sub::VerifyCert { cert } = &cli.command {
        // a certificate is checked against the config it was produced with
        if cli.config.is_none() {
            let sibling = cert.parent().map(|d| d.join("config.json"));
            if let Some(p) = sibling.filter(|p| p.exists()) {
                c = load_config(&p)?;
            }
        }
    }
    if let Some(name) = &cli.instance {
        c.instance = Some(name.clone());
    }
    if let Some(p) = &cli.p_schedule {
        c.p_schedule = Some(p.clone());
    }
    if cli.jobs.is_some() {
        c.jobs = cli.jobs;
    }
    if cli.seed.is_some() {
        c.seed = cli.seed;
    }
    if cli.budget_points.is_some() {
        c.budget_points = cli.budget_points;
    }
    Ok((c, base))
}

/// Runs a parsed command line, writing artifacts to `cli.out`.
pub fn execute(cli: &Cli) -> RunResult {
    let cmd = cli.command.command();
    let resolved = match merged_config(cli).and_then(|(c, base)| resolve(c, cmd, &base)) {
        Ok(r) => r,
        Err(e) => return failure(exit_code(&e), e.to_string()),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(resolved.jobs()).build() {
        Ok(p) => p,
        Err(e) => return failure(EXIT_OTHER, format!("cannot start worker pool: {e}")),
    };
    let config_json = resolved.canonical_json();
    let mut bundle = Bundle::new(Meta {
        tool: "normcircle",
        version: VERSION,
        command: cmd.name(),
        config_sha256: sha256_hex(config_json.as_bytes()),
        budget_points: resolved.budget(),
        points_used: 0,
    });
    bundle.add_raw("config.json", config_json.into_bytes());
    let status = pool.install(|| match &cli.command {
        Sub::Count => commands::count(&resolved, &mut bundle),
        Sub::Predict => commands::predict(&resolved, &mut bundle),
        Sub::Arcs => commands::arcs(&resolved, &mut bundle),
        Sub::Local => commands::local(&resolved, &mut bundle),
        Sub::Wapprox => commands::wapprox(&resolved, &mut bundle),
        Sub::VerifyCert { cert } => commands::verify_cert(&resolved, cert, &mut bundle),
        Sub::Selftest => commands::selftest(&resolved, &mut bundle),
    });
    let (code, message) = match status {
        Ok(Status::Done) => (EXIT_OK, None),
        Ok(Status::Infeasible) => (EXIT_INFEASIBLE, Some("infeasible: see the report".to_string())),
        Ok(Status::InvariantFailed) => (
            EXIT_INVARIANT,
            Some("invariant check failed: see the report".to_string()),
        ),
        Err(e) => {
            let code = exit_code(&e);
            if code != EXIT_INFEASIBLE {
                return failure(code, e.to_string());
            }
            // infeasible local data still gets a report
            bundle.add_json(
                "infeasible.json",
                &serde_json::json!({ "command": cmd.name(), "error": e.to_string() }),
            );
            (code, Some(e.to_string()))
        }
    };
    if let Err(e) = bundle.commit(&cli.out) {
        return failure(
            EXIT_OTHER,
            format!("cannot write artifacts to {}: {e}", cli.out.display()),
        );
    }
    RunResult {
        code,
        bundle: Some(bundle),
        message,
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    let r = execute(&cli);
    if let Some(m) = &r.message {
        eprintln!("normcircle: {m}");
    }
    r.code
}
