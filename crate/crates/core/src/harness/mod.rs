//! Seeded, config-driven experiments that write CSV and JSON artifacts.
//!
//! [`execute`] is the single entry point shared by the `ptsim` binary and
//! the runnable examples. Every command writes its files plus a
//! `manifest.json` into `config.out_dir`.

pub mod config;
pub mod output;
pub mod runs;
pub mod seed;

use std::fmt;
use std::str::FromStr;

pub use config::ExperimentConfig;
pub use output::{Manifest, OutputDir};

use crate::error::{Error, Result};

/// Process exit code for a round trip that ran but delivered wrong bits.
pub const EXIT_DATA_MISMATCH: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    TimeDomain,
    Ccdf,
    Oversampling,
    PtsSweep,
    PowerReport,
    Roundtrip,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::TimeDomain,
        Command::Ccdf,
        Command::Oversampling,
        Command::PtsSweep,
        Command::PowerReport,
        Command::Roundtrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::TimeDomain => "time-domain",
            Command::Ccdf => "ccdf",
            Command::Oversampling => "oversampling",
            Command::PtsSweep => "pts-sweep",
            Command::PowerReport => "power-report",
            Command::Roundtrip => "roundtrip",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

/// What a finished command reports back.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    /// One human-readable line per headline number.
    pub lines: Vec<String>,
    /// Set by a round trip that delivered bit errors.
    pub data_mismatch: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.data_mismatch {
            EXIT_DATA_MISMATCH
        } else {
            0
        }
    }
}

/// Validates `cfg`, runs `command` and writes its artifacts.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut out = OutputDir::create(&cfg.out_dir)?;
    let mut lines = Vec::new();
    let mut data_mismatch = false;
    match command {
        Command::TimeDomain => {
            let run = runs::run_time_domain(cfg)?;
            lines.push(format!(
                "N={} L={}: PAPR {:.3} dB over {} samples",
                run.n_subcarriers,
                run.oversampling,
                run.papr.db,
                run.magnitudes.len()
            ));
            run.write(&mut out)?;
        }
        Command::Ccdf | Command::Oversampling => {
            let sweep = if command == Command::Ccdf {
                runs::run_ccdf_vs_n(cfg)?
            } else {
                runs::run_oversampling_sweep(cfg)?
            };
            for q in sweep.quantiles() {
                lines.push(format!(
                    "N={} L={}: {:.4} dB at CCDF {} (Nyquist theory {:.4} dB)",
                    q.n_subcarriers, q.oversampling, q.quantile_db, cfg.ccdf_level, q.theory_quantile_db
                ));
            }
            if command == Command::Ccdf {
                sweep.write_vs_n(cfg, &mut out)?;
            } else {
                sweep.write_vs_l(cfg, &mut out)?;
            }
        }
        Command::PtsSweep => {
            let sweep = runs::run_pts_sweep(cfg)?;
            lines.push(format!("no PTS: {:.4} dB", sweep.baseline.quantile_db));
            for e in &sweep.entries {
                lines.push(format!(
                    "M={:<2} {:>16}: {:.4} dB, G_s {:.3} dB, {} candidates/trial",
                    e.m,
                    format!("{:?}", e.search),
                    e.quantile_db,
                    e.saving_gain_db,
                    e.candidates_per_trial
                ));
            }
            sweep.write(cfg, &mut out)?;
        }
        Command::PowerReport => {
            let rows = runs::run_power_report(cfg)?;
            for r in &rows {
                lines.push(format!(
                    "PAR {:.2} dB -> {:.2} dB: G_s {:.3} dB, P_DC {:.4} W, saved {:.4} W",
                    r.par_initial_db, r.par_final_db, r.saving_gain_db, r.p_dc_final_w, r.p_savings_w
                ));
            }
            out.write_json("power_report.json", &rows)?;
            out.write_text("power_report.csv", &runs::power_report_csv(&rows))?;
        }
        Command::Roundtrip => {
            let report = runs::run_roundtrip(cfg)?;
            lines.push(format!(
                "{} frames, {} bits, {} bit errors, {} frame errors",
                report.frames, report.bits_total, report.bit_errors, report.frame_errors
            ));
            data_mismatch = !report.passed();
            out.write_json("roundtrip.json", &report)?;
        }
    }
    Ok(RunOutcome {
        manifest: out.finish(command.name(), cfg)?,
        lines,
        data_mismatch,
    })
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None`. Results never depend on the worker count.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidInput("--workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidInput(format!("cannot start {n} workers: {e}"))),
    }
}
