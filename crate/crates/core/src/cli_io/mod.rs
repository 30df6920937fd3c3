//! Run configuration, snapshot files and the `monopole` command line.
//!
//! Every file the CLI writes is deterministic for a fixed config and seed,
//! whatever the thread count.

mod config;
mod data;
mod run;
mod snapshot;

use std::path::PathBuf;

use clap::Parser;

pub use config::{load_config, save_config, DataKind, FamilyKind, Mode, RunConfig};
pub use data::{bump_data, initial_data, random_band_limited, random_coulomb_data};
pub use run::{document_header, run, write_error, Gate, RunOutcome, DIAGNOSTICS_COLUMNS, SUMMARY_SCHEMA_VERSION};
pub use snapshot::{
    load_fields, load_snapshot, save_fields, save_snapshot, sidecar_path, write_atomic, SnapshotHeader,
    CONVENTIONS, CONVENTION_VERSION,
};

use crate::error::{Error, Result};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "MONOPOLE_THREADS";

/// Output directory when neither `--out` nor the config's `out` is given.
pub const DEFAULT_OUT: &str = "monopole-out";

#[derive(Debug, Parser)]
#[command(name = "monopole", about = "Spectral solver and diagnostics for 2+1 dimensional monopoles")]
struct Cli {
    /// simulate, picard, gaugefix, estimates, admissible or residuals
    mode: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sizes the global rayon pool from `MONOPOLE_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::ConfigInvalid {
        field: THREADS_ENV.into(),
        message: format!("expected a positive integer, got {v:?}"),
    })?;
    // a pool built earlier in the process wins
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: &Cli) -> (Result<RunOutcome>, PathBuf) {
    let fallback = cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let cfg = (|| {
        configure_threads()?;
        let mode = Mode::parse(&cli.mode).ok_or_else(|| Error::ConfigInvalid {
            field: "mode".into(),
            message: format!("unknown mode {:?}", cli.mode),
        })?;
        let mut cfg = load_config(&cli.config)?;
        cfg.mode = mode;
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(o) = &cli.out {
            cfg.out = Some(o.clone());
        }
        Ok(cfg)
    })();
    match cfg {
        Ok(cfg) => {
            let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            (run(&cfg, &out), out)
        }
        Err(e) => (Err(e), fallback),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 when every gate passes, 1 when a gate fails, 2 on error.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (res, out) = execute(&cli);
    match res {
        Ok(o) => {
            for g in o.summary["gates"].as_array().into_iter().flatten() {
                eprintln!(
                    "{} {}: {} (limit {})",
                    if g["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                    g["name"].as_str().unwrap_or("?"),
                    g["value"],
                    g["limit"]
                );
            }
            eprintln!("wrote {}", out.join("summary.json").display());
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            if let Err(w) = write_error(&out, &e) {
                eprintln!("could not write error.json: {w}");
            }
            2
        }
    }
}
