//! Batch runner for the cdslab verification suites.
//!
//! A run resolves an [`ExperimentConfig`], executes one suite, and writes the
//! reports as a JSON array or as a CSV with one row per input. Output bytes
//! depend only on the config (seed included), never on the worker count:
//! every parallel map preserves input order and each random task draws from
//! its own stream seeded by `task_seed(seed, index)`.

pub mod config;
pub mod suites;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use cdslab::verifier::VerificationReport;

pub use config::{ExperimentConfig, FileConfig, Format, Suite};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Run(#[from] cdslab::Error),
}

impl CliError {
    /// 2 for usage, config and I/O problems; 1 when a computation failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

/// Runs the configured suite on a pool of `cfg.workers` threads.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let start = Instant::now();
    let mut reports = in_pool(cfg.workers, || suites::run(cfg))??;
    if cfg.timing {
        let ms = start.elapsed().as_millis() as u64;
        for r in &mut reports {
            r.wall_time_ms = Some(ms);
        }
    }
    Ok(reports)
}

#[cfg(feature = "parallel")]
fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn in_pool<T: Send>(_workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    Ok(f())
}

pub fn all_pass(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.all_checks_pass())
}

pub fn render(reports: &[VerificationReport], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(reports).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => to_csv(reports),
    }
}

const CSV_FIXED: [&str; 11] = [
    "protocol",
    "n",
    "cost_bits",
    "cost_qubits",
    "epsilon_hat",
    "delta_hat_lower",
    "delta_hat_upper",
    "x",
    "y",
    "f",
    "class",
];

/// One row per input. Diagnostic columns are the sorted union of every
/// distance key; a blank cell means the row has no such value.
pub fn to_csv(reports: &[VerificationReport]) -> Result<String, CliError> {
    let keys: BTreeSet<&str> = reports
        .iter()
        .flat_map(|r| r.inputs.iter().flat_map(|i| i.distances.keys().map(String::as_str)))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = CSV_FIXED.iter().copied().chain(keys.iter().copied());
    w.write_record(header).map_err(csv_err)?;
    for r in reports {
        for i in &r.inputs {
            let mut rec = vec![
                r.protocol.clone(),
                r.n.to_string(),
                r.cost.classical_bits.to_string(),
                r.cost.qubits.to_string(),
                r.epsilon_hat.to_string(),
                r.delta_hat_lower.to_string(),
                r.delta_hat_upper.to_string(),
                i.x.to_string(),
                i.y.to_string(),
                (i.f as u8).to_string(),
                i.class.clone().unwrap_or_default(),
            ];
            rec.extend(keys.iter().map(|k| i.distances.get(*k).map(f64::to_string).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// so a failed run never leaves a partial report behind.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(text.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

pub fn emit_report(reports: &[VerificationReport], cfg: &ExperimentConfig) -> Result<(), CliError> {
    let text = render(reports, cfg.format)?;
    match &cfg.out {
        Some(p) => write_atomic(p, &text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Runs and emits; Ok(true) when every check passed.
pub fn execute(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let reports = run_suite(cfg)?;
    emit_report(&reports, cfg)?;
    Ok(all_pass(&reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cdslab::protocol::types::{CostReport, ProtocolKind};
    use cdslab::verifier::InputDiagnostic;

    #[test]
    fn empty_results_are_an_empty_array() {
        let s = render(&[], Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v, serde_json::json!([]));
        let c = render(&[], Format::Csv).unwrap();
        assert_eq!(c.lines().count(), 1);
    }

    #[test]
    fn csv_quotes_and_blank_cells() {
        let mut r = VerificationReport::new("p(a,b)", ProtocolKind::Cdqs, "AND", 1, CostReport::default());
        r.inputs.push(InputDiagnostic::new(0, 1, false).with("u", 0.5));
        r.inputs.push(InputDiagnostic::new(1, 1, true).with("v", 1.0));
        let c = to_csv(&[r]).unwrap();
        let lines: Vec<&str> = c.lines().collect();
        assert!(lines[0].ends_with(",class,u,v"));
        assert!(lines[1].starts_with("\"p(a,b)\",1,"));
        assert!(lines[1].ends_with(",0,,0.5,"));
        assert!(lines[2].ends_with(",1,,,1"));
    }

    #[test]
    fn atomic_write_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/r.json"), "x").is_err());
    }
}
