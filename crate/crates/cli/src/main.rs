use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mqnmr_cli::{render, run, verification_failed, Mode, SweepArgs, SweepConfig, DISCREPANCY_LIMIT};

#[derive(Parser)]
#[command(name = "mqnmr", version, about = "Multiple-quantum NMR coherence and entanglement tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair intensities J0, J+2, J-2: closed form next to full propagation
    PairSweep(SweepArgs),
    /// Chain intensities J0 and J+2 + J-2 with their sum-rule residual
    ChainSweep(SweepArgs),
    /// Concurrence (closed form and numeric), its fluctuation and onset temperature
    Entanglement(SweepArgs),
    /// Double-quantum intensity, concurrence and fluctuation against tau/T_MQ
    Figure1(SweepArgs),
}

fn execute(mode: Mode, args: &SweepArgs) -> Result<Option<f64>> {
    let cfg = SweepConfig::resolve(mode, args)?;
    let table = run(&cfg)?;
    let text = render(&cfg, &table)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(table.max_discrepancy())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("mqnmr=error,mqnmr_cli=warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (mode, args) = match &cli.command {
        Command::PairSweep(a) => (Mode::Pair, a),
        Command::ChainSweep(a) => (Mode::Chain, a),
        Command::Entanglement(a) => (Mode::Entanglement, a),
        Command::Figure1(a) => (Mode::Figure1, a),
    };
    match execute(mode, args) {
        Ok(Some(d)) if verification_failed(Some(d)) => {
            eprintln!("error: closed form and propagation disagree by {d:e} (limit {DISCREPANCY_LIMIT:e})");
            ExitCode::from(2)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
