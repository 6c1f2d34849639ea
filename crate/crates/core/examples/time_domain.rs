//! Renders one random QPSK frame with 1024 subcarriers at the physical
//! sample rate and prints the strongest peaks of its envelope.
//!
//! cargo run --example time_domain -- [seed]

use pts_ofdm::harness::{runs::run_time_domain, ExperimentConfig};

fn main() -> pts_ofdm::Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Some(seed) = std::env::args().nth(1) {
        cfg.apply_override(&format!("seed={seed}"))?;
    }
    let run = run_time_domain(&cfg)?;
    let mean = run.magnitudes.iter().map(|m| m * m).sum::<f64>() / run.magnitudes.len() as f64;
    println!(
        "N={} rendered at L={} ({} samples, {:.2} ms)",
        run.n_subcarriers,
        run.oversampling,
        run.magnitudes.len(),
        1e3 * run.magnitudes.len() as f64 / run.sample_rate
    );
    println!("mean power {mean:.4}, PAPR {:.3} dB", run.papr.db);

    let mut peaks: Vec<(usize, f64)> = run.magnitudes.iter().copied().enumerate().collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("largest peaks:");
    for (i, m) in peaks.iter().take(5) {
        println!(
            "  t = {:8.3} ms  |x| = {m:.3}  ({:.2} dB above mean)",
            1e3 * *i as f64 / run.sample_rate,
            10.0 * (m * m / mean).log10()
        );
    }
    Ok(())
}
