use std::path::PathBuf;
use std::process::ExitCode;

use cdslab_cli::{execute, CliError, ExperimentConfig, FileConfig, Format, Suite};
use clap::Parser;

/// Run a cdslab verification suite and write its reports.
///
/// Values from --config override the flags; flags override the defaults.
/// Exit status: 0 all checks pass, 1 a check failed, 2 usage or I/O error.
#[derive(Parser, Debug)]
#[command(name = "cdslab", version)]
struct Args {
    /// Suite to run: neq-classical, dj-shortening, neq-hybrid, ip-psm, bhm,
    /// forrelation, productness, one-way, two-prover, complementary, tools.
    #[arg(long)]
    suite: Option<Suite>,
    /// Problem sizes, comma separated. For bhm these are input lengths 2n.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Parallel repetition counts for two-prover, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Repetitions per forrelation decision.
    #[arg(long, default_value_t = cdslab_cli::config::DEFAULT_REPS)]
    reps: usize,
    #[arg(long, default_value_t = cdslab_cli::config::DEFAULT_SEED)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// CDQS protocol: forwarding, and, lifted-neq, leaky-and,
    /// depolarized-and, depolarized-lifted-neq or all.
    #[arg(long)]
    protocol: Option<String>,
    /// Instance count for sampled suites.
    #[arg(long)]
    instances: Option<usize>,
    /// TOML file with any of the above keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record wall-clock time in the reports (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

fn resolve(a: Args) -> Result<ExperimentConfig, CliError> {
    let file = match &a.config {
        Some(p) => Some(FileConfig::load(p)?),
        None => None,
    };
    let suite = file
        .as_ref()
        .and_then(|f| f.suite)
        .or(a.suite)
        .ok_or_else(|| CliError::Config("no suite given (use --suite or a config file)".into()))?;
    let mut cfg = ExperimentConfig::new(suite);
    cfg.n = a.n;
    cfg.k = a.k;
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    cfg.out = a.out;
    cfg.format = a.format;
    cfg.workers = a.workers;
    cfg.protocol = a.protocol;
    cfg.instances = a.instances;
    cfg.timing = a.timing;
    Ok(match file {
        Some(f) => cfg.overlay(f),
        None => cfg,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = resolve(args).and_then(|cfg| execute(&cfg));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("cdslab: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("cdslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
