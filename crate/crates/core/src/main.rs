use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use ciet::cli::{render_outcome, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    for d in &outcome.diagnostics {
        let _ = writeln!(err, "{d}");
    }
    print!("{}", render_outcome(&outcome, cli.opts.pretty));
    ExitCode::from(outcome.code)
}
