mod args;
mod commands;
mod report;

use std::ffi::OsString;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, RunConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(argv: Vec<OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                return 0;
            }
            ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                let _ = e.print();
                return EXIT_USAGE;
            }
            _ => {
                let msg = e.to_string();
                eprintln!("{}", msg.lines().next().unwrap_or("error: invalid arguments"));
                return EXIT_USAGE;
            }
        },
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: --threads: {e}");
            return EXIT_FAIL;
        }
    }

    let started = Instant::now();
    let mut outcome = match commands::execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_FAIL;
        }
    };
    outcome.report.runtime_ms = started.elapsed().as_millis() as u64;
    let body = outcome.render(cfg.format);
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, body).map_err(|e| format!("--output: {}: {e}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return EXIT_FAIL;
    }
    if outcome.report.pass {
        0
    } else {
        EXIT_FAIL
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
