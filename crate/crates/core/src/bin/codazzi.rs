//! Command-line front end: run a scenario and print or write its report.
//!
//! Exit status: 0 all checks pass, 1 some check fails (or a check could not
//! be evaluated), 2 usage or configuration error.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use codazzi_core::config::{parse_config, ScenarioConfig, SCENARIOS};
use codazzi_core::report::{serialize_report, Format};
use codazzi_core::runner::{failure_lines, run_scenario};
use codazzi_core::GeomError;

#[derive(Parser, Debug)]
#[command(name = "codazzi", about = "Numerical verification of Codazzi-tensor and soliton identities")]
struct Cli {
    /// merton, gaussian, s3, cylinder, cigar-line, zones or all
    #[arg(long)]
    scenario: Option<String>,
    /// JSON configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// text, json or csv
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Finite-difference step for first and second derivatives
    #[arg(long)]
    h: Option<f64>,
    /// Use finite differences even where closed-form jets exist
    #[arg(long)]
    no_exact_jets: bool,
    /// Zone threshold on |d sigma / dt|
    #[arg(long)]
    threshold: Option<f64>,
    /// Seed for the negative-control perturbations
    #[arg(long)]
    seed: Option<u64>,
}

fn build_config(cli: &Cli) -> Result<ScenarioConfig, GeomError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = &cli.scenario {
        cfg.scenario = s.clone();
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse::<Format>()?;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(h) = cli.h {
        cfg.scheme.step = h;
    }
    if cli.no_exact_jets {
        cfg.scheme.use_exact_jets = false;
    }
    if let Some(t) = cli.threshold {
        cfg.threshold = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn usage_error(e: &GeomError) -> bool {
    matches!(e, GeomError::Config(_) | GeomError::Parse { .. } | GeomError::Io(_))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("codazzi: {e}");
            if matches!(e, GeomError::Config(ref m) if m.starts_with("unknown scenario")) {
                eprintln!("scenarios: {}", SCENARIOS.join(", "));
            }
            return ExitCode::from(2);
        }
    };
    let report = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("codazzi: {e}");
            return ExitCode::from(if usage_error(&e) { 2 } else { 1 });
        }
    };
    let text = match serialize_report(&report, cfg.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("codazzi: {e}");
            return ExitCode::from(2);
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("codazzi: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    for line in failure_lines(&report) {
        eprintln!("{line}");
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
