//! `ymstab`: runs the verification suites and writes a CSV or TOML report.
//!
//! Exit status is 0 when every check passes, 1 when any check fails and 2 on
//! invalid input.

mod config;
mod suites;

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use ymstab::Error;

use config::{resolve, Cli, Format, RunConfig};
use suites::CheckRow;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Serialize)]
struct TextReport<'a> {
    check: &'a [CheckRow],
}

fn render(rows: &[CheckRow], format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
        Format::Text => toml::to_string(&TextReport { check: rows }).map(String::into_bytes).map_err(|e| e.to_string()),
    }
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> io::Result<()> {
    match &cfg.out {
        Some(path) => File::create(path)?.write_all(bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn main() -> ExitCode {
    let (suite, args) = Cli::parse().command.split();
    let cfg = match resolve(suite, args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let rows = match suites::run(&cfg) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Validation(_) | Error::DimensionMismatch { .. } | Error::Divergent(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            };
            return ExitCode::from(code);
        }
    };
    let bytes = match render(&rows, cfg.format) {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("error: cannot render report: {msg}");
            return ExitCode::from(EXIT_FAIL);
        }
    };
    if let Err(e) = emit(&cfg, &bytes) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.passed()).collect();
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    for r in failed {
        eprintln!("FAIL {} [{}] value={:e} bound={:e} margin={:e}", r.check_id, r.params, r.value, r.bound, r.margin);
    }
    ExitCode::from(EXIT_FAIL)
}
