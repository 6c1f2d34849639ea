//! Monte Carlo PAPR CCDF for 64, 256 and 1024 subcarriers at 4x
//! oversampling, next to the Nyquist-rate Gaussian prediction.
//!
//! cargo run --release --example ccdf_vs_subcarriers -- [trials]

use pts_ofdm::harness::{runs::run_ccdf_vs_n, ExperimentConfig};

fn main() -> pts_ofdm::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.n_trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    cfg.ccdf_level = 1e-2;
    let sweep = run_ccdf_vs_n(&cfg)?;

    println!("{} trials per N, read-out at CCDF = {}", cfg.n_trials, cfg.ccdf_level);
    println!("{:>6} {:>12} {:>12}", "N", "measured dB", "theory dB");
    for q in sweep.quantiles() {
        println!("{:>6} {:>12.3} {:>12.3}", q.n_subcarriers, q.quantile_db, q.theory_quantile_db);
    }
    println!();
    println!("{:>6} Pr(PAPR > z) for each N", "z dB");
    for z in [6.0, 7.0, 8.0, 9.0, 10.0, 11.0] {
        let row: Vec<String> = sweep
            .entries
            .iter()
            .map(|e| format!("{:.2e}", e.curve.probability_at(z)))
            .collect();
        println!("{z:>6.1} {}", row.join("  "));
    }
    Ok(())
}
