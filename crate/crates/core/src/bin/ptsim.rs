use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pts_ofdm::harness::{execute, with_workers, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ptsim", version, about = "OFDM PAPR and PTS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One frame's time-domain envelope and its PAPR.
    TimeDomain(Common),
    /// PAPR CCDF for each subcarrier count in `n_list`.
    Ccdf(Common),
    /// PAPR CCDF for each oversampling factor in `l_list`.
    Oversampling(Common),
    /// PTS over each sub-block count in `m_list`, with saving gains.
    PtsSweep(Common),
    /// Amplifier energy model over `par_db_list`.
    PowerReport(Common),
    /// Bits through PTS, a multipath channel and back; exits 4 on bit errors.
    Roundtrip(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override one config key, e.g. `--set n_trials=1000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(command: Command, args: Common) -> pts_ofdm::Result<i32> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    for kv in &args.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    let outcome = with_workers(args.workers, || execute(command, &cfg))??;
    for line in &outcome.lines {
        println!("{line}");
    }
    println!(
        "wrote {} files and {} to {}",
        outcome.manifest.files.len(),
        pts_ofdm::harness::output::MANIFEST_NAME,
        cfg.out_dir.display()
    );
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let (command, args) = match Cli::parse().command {
        Cmd::TimeDomain(a) => (Command::TimeDomain, a),
        Cmd::Ccdf(a) => (Command::Ccdf, a),
        Cmd::Oversampling(a) => (Command::Oversampling, a),
        Cmd::PtsSweep(a) => (Command::PtsSweep, a),
        Cmd::PowerReport(a) => (Command::PowerReport, a),
        Cmd::Roundtrip(a) => (Command::Roundtrip, a),
    };
    let code = match run(command, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ptsim {command}: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
