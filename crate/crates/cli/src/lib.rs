//! Front end of the `omega-curves` binary, callable in-process.

mod args;
mod commands;
mod input;
mod plot;

use std::ffi::OsString;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Common, Format};
use commands::Outcome;
use input::{CliError, CliResult};

pub const SCHEMA: u32 = 1;

/// Result of one command line.
#[derive(Debug)]
pub struct Invocation {
    /// 0 pass, 2 verdict failure, 1 usage or parse error.
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// `{schema, command, timestamp, payload}`; only the timestamp varies
/// between identical runs.
fn envelope(outcome: &Outcome) -> String {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = json!({
        "schema": SCHEMA,
        "command": outcome.command,
        "timestamp": timestamp,
        "payload": outcome.payload,
    });
    serde_json::to_string_pretty(&doc).expect("json") + "\n"
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(outcome: Outcome, common: &Common, stdout: &mut String) -> CliResult<bool> {
    let text = match common.format {
        Format::Json => envelope(&outcome),
        Format::Csv => outcome.csv.clone(),
    };
    match &common.out {
        Some(p) => write_file(p, &text)?,
        None => stdout.push_str(&text),
    }
    Ok(outcome.passed)
}

fn dispatch(cli: Cli, stdout: &mut String) -> CliResult<bool> {
    match cli.command {
        Command::Comass(a) => emit(commands::run_comass(&a)?, &a.common, stdout),
        Command::CheckCurve(a) => emit(commands::run_check_curve(&a)?, &a.common, stdout),
        Command::Energy(a) => emit(commands::run_energy(&a)?, &a.common, stdout),
        Command::Blowdown(a) => emit(commands::run_blowdown(&a)?, &a.common, stdout),
        Command::Proper(a) => emit(commands::run_proper(&a)?, &a.common, stdout),
        Command::Classify(a) => emit(commands::run_classify(&a)?, &a.common, stdout),
        Command::Report(a) => {
            let report = commands::run_report(&a)?;
            std::fs::create_dir_all(&a.out)
                .map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
            write_file(&a.out.join("report.json"), &envelope(&report.outcome))?;
            for (name, body) in &report.files {
                write_file(&a.out.join(name), body)?;
            }
            stdout.push_str(&format!("wrote {}\n", a.out.display()));
            Ok(report.outcome.passed)
        }
    }
}

/// Parses and runs a full argument vector (program name first).
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let (code, stdout, stderr) = if e.use_stderr() {
                (1, String::new(), text)
            } else {
                (0, text, String::new())
            };
            return Invocation {
                code,
                stdout,
                stderr,
            };
        }
    };
    let mut stdout = String::new();
    match dispatch(cli, &mut stdout) {
        Ok(passed) => Invocation {
            code: if passed { 0 } else { 2 },
            stdout,
            stderr: String::new(),
        },
        Err(e) => Invocation {
            code: 1,
            stdout,
            stderr: format!("error: {e}\n"),
        },
    }
}
