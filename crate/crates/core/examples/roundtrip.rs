//! Sends random bits through PTS, a two-path channel whose echo falls inside
//! the cyclic prefix, and the matching receiver, then counts bit errors.
//! Pass `corrupt` to flip one side-information bit per frame.
//!
//! cargo run --release --example roundtrip -- [frames] [corrupt]

use pts_ofdm::harness::{runs::run_roundtrip, ExperimentConfig};

fn main() -> pts_ofdm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = ExperimentConfig::default();
    cfg.roundtrip_frames = args.first().and_then(|s| s.parse().ok()).unwrap_or(100);
    cfg.corrupt_side_info = args.iter().any(|a| a == "corrupt");
    let ch = cfg.channel()?;
    for t in ch.taps() {
        println!("tap: {:>5} samples, gain {:.3}", t.delay_samples, t.gain);
    }
    let r = run_roundtrip(&cfg)?;
    println!(
        "{} frames of N={}, M={}, W={} ({:?}); CP {} samples",
        r.frames, r.n_subcarriers, r.m, r.w, r.search, r.cp_samples
    );
    println!("mean PAPR {:.3} dB -> {:.3} dB", r.mean_papr_before_db, r.mean_papr_after_db);
    println!("{} / {} bits wrong in {} frames", r.bit_errors, r.bits_total, r.frame_errors);
    Ok(())
}
