//! `fockbench <experiment> [--key value]...`
//!
//! Runs one named experiment, writes its CSV artifacts and a `run.manifest`
//! under the output directory, prints one line per check, and exits 0 on
//! success, 1 on configuration errors, 2 on check failures.

use std::process::ExitCode;
use std::time::Instant;

use fockbench::config::{Experiment, ExperimentConfig};
use fockbench::experiments::{self, grid_manifest};
use fockbench::report::write_manifest;
use fockbench::Outcome;

fn usage() -> String {
    format!(
        "usage: fockbench <experiment> [--config FILE] [--key value]...\n\
         experiments: {}\n\
         keys: symbol/f, g, alpha, n, extent, q, p, s, r, t, degree, tschedule,\n\
         tmin, rings, samples, out, filter, tol, fbound, gbound",
        Experiment::all_names().join(", ")
    )
}

fn build_config(args: &[String]) -> Result<ExperimentConfig, String> {
    let Some(name) = args.first() else {
        return Err(usage());
    };
    let Some(experiment) = Experiment::from_name(name) else {
        return Err(format!("unknown experiment '{name}'\n{}", usage()));
    };
    let mut cfg = ExperimentConfig::new(experiment);
    // first pass: config file (lowest precedence)
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            let path = args
                .get(i + 1)
                .ok_or_else(|| "--config needs a file path".to_string())?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config '{path}': {e}"))?;
            cfg.apply_file(&text).map_err(|e| e.to_string())?;
            i += 2;
        } else {
            i += 1;
        }
    }
    // second pass: command-line overrides (later wins)
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        if arg == "--config" {
            i += 2;
            continue;
        }
        let Some(key) = arg.strip_prefix("--") else {
            return Err(format!("expected --key, got '{arg}'\n{}", usage()));
        };
        let value = args
            .get(i + 1)
            .ok_or_else(|| format!("--{key} needs a value"))?;
        cfg.apply(key, value).map_err(|e| e.to_string())?;
        i += 2;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(message) => {
            eprintln!("{message}");
            return ExitCode::from(Outcome::ConfigError.code() as u8);
        }
    };
    let start = Instant::now();
    let (outcome, extra) = match experiments::run(&cfg) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            (report.outcome, report.extra)
        }
        Err(failure) => {
            eprintln!("{}", failure.message);
            (failure.outcome, Default::default())
        }
    };
    let mut manifest = cfg.echo();
    manifest.extend(grid_manifest(&cfg));
    manifest.extend(extra);
    manifest.insert("wall_ms".into(), start.elapsed().as_millis().to_string());
    manifest.insert(
        "outcome".into(),
        match outcome {
            Outcome::Pass => "pass".into(),
            Outcome::ConfigError => "config-error".into(),
            Outcome::CheckFailure => "check-failure".into(),
        },
    );
    if outcome != Outcome::ConfigError {
        if let Err(e) = write_manifest(&cfg.out, &manifest) {
            eprintln!("cannot write manifest: {e}");
            return ExitCode::from(Outcome::CheckFailure.code() as u8);
        }
    }
    println!("{}: {}", cfg.experiment.name(), match outcome {
        Outcome::Pass => "ok",
        Outcome::ConfigError => "configuration error",
        Outcome::CheckFailure => "check failure",
    });
    ExitCode::from(outcome.code() as u8)
}
