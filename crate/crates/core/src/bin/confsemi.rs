use clap::Parser;
use confsemi::cli::{exit_code, run, RunOptions, Subcommand, EXIT_ERROR};
use std::path::PathBuf;
use std::process::ExitCode;

/// Semiclassical gravity on conformally static spacetimes.
#[derive(Parser, Debug)]
#[command(name = "confsemi", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Run configuration (TOML); defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomised checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplier applied to every pass/fail tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let opts = RunOptions {
        config: args.config,
        out: args.out,
        seed: args.seed,
        tol_scale: args.tol_scale,
    };
    let result = run(args.subcommand, &opts);
    match &result {
        Ok(o) => {
            let status = if o.passed { "PASS" } else { "FAIL" };
            println!("{status} {}: {}", args.subcommand.label(), o.summary);
            println!("output: {}", o.out_dir.display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
