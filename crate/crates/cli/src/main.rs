use clap::Parser;
use hochcyc_cli::{run, Cli, RunConfig};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = RunConfig::from(Cli::parse());
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &cfg.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, report.to_json() + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            print!("{}", report.summary());
        }
        None => println!("{}", report.to_json()),
    }
    ExitCode::from(report.exit_code() as u8)
}
