//! PTS with binary phase factors on 1024-subcarrier frames for 1 to 16
//! adjacent sub-blocks, with the resulting amplifier saving gain.
//!
//! cargo run --release --example pts_sweep -- [trials]

use pts_ofdm::harness::{runs::run_pts_sweep, ExperimentConfig};

fn main() -> pts_ofdm::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.pts_trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    cfg.ccdf_level = 1e-2;
    let sweep = run_pts_sweep(&cfg)?;

    println!(
        "N = {}, L = {}, W = {}, {} trials, read-out at CCDF = {}",
        sweep.n_subcarriers, sweep.oversampling, sweep.w, sweep.n_trials, cfg.ccdf_level
    );
    println!("without PTS: {:.3} dB", sweep.baseline.quantile_db);
    println!("{:>3} {:>10} {:>10} {:>8} {:>10}", "M", "cand.", "PAPR dB", "G_s dB", "P_DC W");
    for e in &sweep.entries {
        println!(
            "{:>3} {:>10} {:>10.3} {:>8.3} {:>10.3}",
            e.m, e.candidates_per_trial, e.quantile_db, e.saving_gain_db, e.power.p_dc_final_w
        );
    }
    Ok(())
}
