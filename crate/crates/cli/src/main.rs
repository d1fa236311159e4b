mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use kerrlab::KerrError;

use args::{Cli, Command};
use config::Settings;

/// Bad input from the command line or config file; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn limit_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("KERRLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        UsageError(format!(
            "KERRLAB_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    limit_threads()?;
    let s = Settings::resolve(&cli.global)?;
    match &cli.command {
        Command::Potentials(a) => commands::potentials(&s, a),
        Command::Integrate(a) => commands::integrate_cmd(&s, a),
        Command::Spherical { command } => commands::spherical(&s, command),
        Command::Classify(a) => commands::classify_cmd(&s, a),
        Command::Elliptic(a) => commands::elliptic(&s, a),
        Command::Selftest => commands::selftest_cmd(&s),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<UsageError>() {
        return 2;
    }
    match err.downcast_ref::<KerrError>() {
        Some(
            KerrError::InvalidParams { .. } | KerrError::NonNull { .. } | KerrError::ChartMismatch,
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("kerrlab: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
