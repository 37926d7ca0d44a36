use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

mod args;
mod commands;
mod config;

use args::Cli;
use commands::Report;

fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var("URNFLOW_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("URNFLOW_THREADS must be a positive integer, got `{v}`")),
        },
    }
}

fn write_artifacts(dir: &Path, argv: &[String], cli: &Cli, report: &Report, threads: Option<usize>, ms: f64) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let file = format!("{}.{}", report.stem, report.extension());
    fs::write(dir.join(&file), &report.body)?;
    let manifest = json!({
        "argv": argv,
        "config": cli,
        "seed": cli.seed,
        "threads": threads,
        "versions": {
            "urnflow": urnflow::VERSION,
            "urnflow-cli": env!("CARGO_PKG_VERSION"),
        },
        "artifacts": [{"file": file, "bytes": report.body.len()}],
        "checks": report.checks,
        "durations_ms": {"total": ms},
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let argv = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            return ExitCode::from(code);
        }
    };
    let threads = match thread_cap() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {f}");
            return ExitCode::from(f.exit_code());
        }
    };
    print!("{}", report.body);
    if let Some(dir) = &cli.out {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if let Err(e) = write_artifacts(dir, &argv[1..], &cli, &report, threads, ms) {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if cli.check {
        for c in &report.checks {
            eprintln!("check {}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
        }
        if report.checks.iter().any(|c| !c.passed) {
            return ExitCode::from(3);
        }
    }
    ExitCode::SUCCESS
}
