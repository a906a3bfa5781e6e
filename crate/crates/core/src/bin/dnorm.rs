use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use dnorm::cli::{run_text, Cli, Overrides, EXIT_PARSE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let path = cli.command.file();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("dnorm: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_PARSE as u8);
        }
    };
    let start = Instant::now();
    let report = run_text(cli.command.action(), &text, Overrides::from(&cli.flags));
    let json = report.to_json();
    if !cli.flags.quiet {
        // a closed pipe downstream is not an error of the run
        let _ = writeln!(std::io::stdout().lock(), "{json}");
    }
    if let Some(out) = &cli.flags.json {
        if let Err(e) = std::fs::write(out, format!("{json}\n")) {
            eprintln!("dnorm: cannot write {}: {e}", out.display());
        }
    }
    if let Some(err) = &report.error {
        eprintln!("dnorm: {}", err.message);
    }
    eprintln!("dnorm: {} finished in {:.3}s", report.command, start.elapsed().as_secs_f64());
    ExitCode::from(report.exit as u8)
}
