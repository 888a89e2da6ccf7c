//! Scenario runner for the `ivp` binary.
//!
//! Each subcommand writes `report.json` and its CSV tables into
//! `<out>/<scenario>/`. The exit code is 0 when every assertion passes, 1 on a
//! failed assertion or a numerical failure, 2 on invalid input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde_json::json;

pub mod config;
pub mod report;
pub mod scenarios;

use config::{Cli, Command, ConfigError, ConfigFile};
use report::Outcome;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] ivp_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 1 for numerical failures, 2 for anything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        use ivp_core::Error as E;
        match self {
            RunError::Core(E::LpNotConverged { .. } | E::LpNumerical { .. } | E::IntegrationFailed(_)) => 1,
            _ => 2,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Runs the parsed command without touching the output directory.
pub fn run_scenario(cli: &Cli) -> Result<Outcome, RunError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::parse(&fs::read_to_string(path).map_err(io_error(path))?)?,
        None => ConfigFile::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError::flag("--threads", "must be at least 1").into());
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| RunError::Config(ConfigError::flag("--threads", e.to_string())))?;
    pool.install(|| match &cli.command {
        Command::VerifyIvp(a) => scenarios::verify_ivp(a, &file),
        Command::Counterexamples(a) => scenarios::counterexamples(a, &file),
        Command::BlackwellCheck(a) => scenarios::blackwell_check(a, &file),
        Command::TestingGame(a) => scenarios::testing_game(a, &file),
        Command::SignalingGame(a) => scenarios::signaling_game(a, &file),
        Command::Reversals(a) => scenarios::reversals(a, &file),
    })
}

fn out_root(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("IVP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Parses `args`, runs the scenario, writes its files and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let start = Instant::now();
    let outcome = match run_scenario(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let dir = out_root(&cli).join(cli.command.name());
    let written = outcome.write(&dir).map_err(io_error(&dir)).and_then(|()| {
        let meta = json!({
            "scenario": cli.command.name(),
            "duration_ms": start.elapsed().as_millis() as u64,
            "threads": cli.threads.unwrap_or_else(rayon::current_num_threads),
        });
        let path = dir.join("run_meta.json");
        fs::write(&path, format!("{meta:#}\n")).map_err(io_error(&path))
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return e.exit_code();
    }

    for a in &outcome.report.assertions {
        if !a.pass {
            eprintln!("FAIL {}: lhs {:e}, rhs {:e}", a.name, a.lhs, a.rhs);
        }
    }
    let failed = outcome.report.assertions.iter().filter(|a| !a.pass).count();
    println!(
        "{}: {} of {} assertions passed, output in {}",
        cli.command.name(),
        outcome.report.assertions.len() - failed,
        outcome.report.assertions.len(),
        dir.display()
    );
    i32::from(!outcome.passed())
}
