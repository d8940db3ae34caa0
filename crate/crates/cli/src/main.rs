mod args;
mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Format, Output};
use equistate::Error;

/// What a command produced, before it is written out.
pub struct Outcome {
    pub name: &'static str,
    pub params: Value,
    pub primary: Value,
    /// Replaces the JSON body when `--format csv` is requested and the command has tabular data.
    pub csv: Option<String>,
    pub summary: String,
    /// `Some(false)` for a computed but negative verification verdict.
    pub verdict: Option<bool>,
}

pub enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

const FAIL: u8 = 2;
const PRECONDITION: u8 = 3;
const PRECISION: u8 = 4;

fn default_path(name: &str, ext: &str) -> PathBuf {
    let dir = std::env::var_os("EQUISTATE_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{name}.{ext}"))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write(outcome: &Outcome, output: &Output, elapsed_ms: u128) -> Result<PathBuf, Failure> {
    let (body, ext) = match (output.format, &outcome.csv) {
        (Format::Csv, Some(csv)) => (csv.clone(), "csv"),
        _ => (serde_json::to_string_pretty(&outcome.primary).expect("serializable") + "\n", "json"),
    };
    let path = output.out.clone().unwrap_or_else(|| default_path(outcome.name, ext));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, body)?;
    let manifest = json!({
        "command": outcome.name,
        "parameters": outcome.params,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seeds": null,
        "output": path.to_string_lossy(),
        "format": if ext == "csv" { "csv" } else { "json" },
        "elapsed_ms": elapsed_ms,
    });
    std::fs::write(manifest_path(&path), serde_json::to_string_pretty(&manifest).expect("serializable") + "\n")?;
    Ok(path)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrecisionExhausted { .. } => PRECISION,
        _ => PRECONDITION,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { PRECONDITION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let (result, output) = commands::run(cli.command);
    let outcome = match result {
        Ok(o) => o,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(PRECONDITION);
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(PRECONDITION);
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let elapsed = start.elapsed().as_millis();
    match write(&outcome, &output, elapsed) {
        Ok(path) => {
            println!("{}", outcome.summary);
            println!("wrote {}", path.display());
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: cannot write output: {m}");
            return ExitCode::from(PRECONDITION);
        }
        Err(_) => unreachable!("writing only fails with io errors"),
    }
    match outcome.verdict {
        Some(false) => {
            println!("verdict: FAIL");
            ExitCode::from(FAIL)
        }
        Some(true) => {
            println!("verdict: PASS");
            ExitCode::SUCCESS
        }
        None => ExitCode::SUCCESS,
    }
}
