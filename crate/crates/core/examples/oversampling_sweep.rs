//! How the measured PAPR of 256-subcarrier frames depends on the
//! oversampling factor. The same frames are used for every factor.
//!
//! cargo run --release --example oversampling_sweep -- [trials]

use pts_ofdm::harness::{runs::run_oversampling_sweep, ExperimentConfig};

fn main() -> pts_ofdm::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.n_trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    cfg.ccdf_level = 1e-2;
    let sweep = run_oversampling_sweep(&cfg)?;

    println!("N = {}, {} trials, read-out at CCDF = {}", cfg.oversampling_n, cfg.n_trials, cfg.ccdf_level);
    let mut prev: Option<f64> = None;
    for e in &sweep.entries {
        let step = prev.map_or(String::new(), |p| format!("  (+{:.3} dB)", e.quantile_db - p));
        println!("  L = {}: {:.3} dB{step}", e.oversampling, e.quantile_db);
        prev = Some(e.quantile_db);
    }
    Ok(())
}
