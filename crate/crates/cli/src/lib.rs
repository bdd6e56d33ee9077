//! Command-line front end for `layercake`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod grid;
pub mod instance;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;

use clap::{CommandFactory, Parser};

pub use commands::{Cli, CliError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Parses `args`, runs the command and writes the CSV to `out` (or `--output`).
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let rendered = e.render().to_string();
                let _ = write!(err, "{rendered}");
                if !rendered.contains("Usage:") {
                    let _ = writeln!(err, "\n{}", usage_for(&args));
                }
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match commands::execute(&cli) {
        Ok(done) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &done.csv).map_err(|e| format!("{}: {e}", path.display())),
                None => out.write_all(done.csv.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
            if let Some(summary) = &done.summary {
                let _ = writeln!(err, "{summary}");
            }
            if done.violated {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Usage line of the subcommand named in `args`, or of the whole tool.
fn usage_for(args: &[OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let named = args.iter().skip(1).filter_map(|a| a.to_str()).find(|a| cmd.find_subcommand(a).is_some());
    match named.and_then(|n| cmd.find_subcommand_mut(n)) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}
