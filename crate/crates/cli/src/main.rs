//! `penif run <config>` and `penif verify <config>`.
//!
//! Exit status: 0 on success, 1 on numerical failure or failed checks,
//! 2 on configuration errors. Errors are reported as a single line
//! `error: <kind>: <message>` on stderr.

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{Config, Experiment};
use experiments::Failure;
use output::{Manifest, Staging};

#[derive(Parser)]
#[command(name = "penif", version, about = "Penalized regression influence experiments")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run the oracle cross-check suite with the config's settings.
    Verify { config: PathBuf },
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fail(kind: &str, msg: &str, code: u8) -> ExitCode {
    eprintln!("error: {kind}: {}", one_line(msg));
    ExitCode::from(code)
}

fn execute(cfg: &Config, config_path: &Path, out: &Path) -> ExitCode {
    let started = Instant::now();
    let mut staging = match Staging::new(out) {
        Ok(s) => s,
        Err(e) => return fail("io", &format!("cannot prepare {}: {e}", out.display()), 1),
    };
    let outcome = match experiments::run(cfg) {
        Ok(o) => o,
        Err(Failure::Config(m)) => return fail("config", &m, 2),
        Err(Failure::Numerical(m)) => return fail("numerical", &m, 1),
    };
    for (name, contents) in &outcome.files {
        if let Err(e) = staging.write(name, contents) {
            return fail("io", &format!("cannot write {name}: {e}"), 1);
        }
    }
    let mut m = Manifest::default();
    m.set("experiment", cfg.experiment.name());
    m.set("config", config_path.display());
    m.set("seed", cfg.seed);
    m.set("n_draws", cfg.n_draws);
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("threads", rayon::current_num_threads());
    m.set("files", staging.files().join(","));
    m.set("passed", outcome.passed);
    m.set("wall_seconds", format!("{:.3}", started.elapsed().as_secs_f64()));
    if let Err(e) = staging.write("manifest.txt", &m.render()) {
        return fail("io", &format!("cannot write manifest: {e}"), 1);
    }
    if let Err(e) = staging.commit() {
        return fail("io", &format!("cannot move outputs into {}: {e}", out.display()), 1);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        fail("check", "one or more verification checks failed", 1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail("config", "--threads must be positive", 2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail("config", &e.to_string(), 2);
        }
    }
    let (path, force_verify) = match &cli.command {
        Command::Run { config } => (config, false),
        Command::Verify { config } => (config, true),
    };
    let mut cfg = match Config::load(path) {
        Ok(c) => c,
        Err(m) => return fail("config", &m, 2),
    };
    if force_verify {
        cfg.experiment = Experiment::Verify;
    }
    execute(&cfg, path, &cli.out)
}
