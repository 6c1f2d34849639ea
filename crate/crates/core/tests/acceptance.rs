//! Acceptance gate. Each test prints one `PASS` / `FAIL` line with the
//! measured numbers before asserting. Tolerances are fixed here and must not be loosened.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use pts_ofdm::harness::runs::{
    run_ccdf_vs_n, run_oversampling_sweep, run_pts_sweep, run_roundtrip,
};
use pts_ofdm::harness::{execute, with_workers, Command, ExperimentConfig};
use pts_ofdm::ofdm::{ofdm_demodulate_oversampled, ofdm_modulate, SymbolFrame};
use pts_ofdm::papr::{ccdf_quantile, empirical_ccdf, default_thresholds, PaprValue};
use pts_ofdm::power::{dc_power, power_savings, saving_gain, amplifier_efficiency};
use pts_ofdm::pts::*;

const CCDF_LEVEL: f64 = 1e-3;

const C1_TRIALS: usize = 100_000;
const C1_TARGETS_DB: [(usize, f64); 3] = [(64, 9.3), (256, 10.0), (1024, 10.6)];
const C1_TOL_DB: f64 = 0.5;

const C2_TRIALS: usize = 100_000;
const C2_N: usize = 256;
const C2_L8_L4_MAX_DB: f64 = 0.1;

const C3_TRIALS: usize = 10_000;
const C3_TARGETS_DB: [(usize, f64); 5] = [(1, 11.0), (2, 9.9), (4, 8.88), (8, 8.25), (16, 7.55)];
const C3_TOL_DB: f64 = 1.0;

const C5_TOL: f64 = 1e-9;
const C7_BUDGET: Duration = Duration::from_secs(300);
const C8_FRAMES: usize = 1000;

fn report(criterion: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    // Written to the raw handle so the line survives libtest's capture.
    let _ = writeln!(std::io::stderr(), "criterion {criterion} [{verdict}] {title}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_ccdf_quantiles_vs_subcarriers() {
    let mut cfg = ExperimentConfig::default();
    cfg.n_trials = C1_TRIALS;
    cfg.oversampling = 4;
    cfg.ccdf_level = CCDF_LEVEL;
    cfg.n_list = C1_TARGETS_DB.iter().map(|t| t.0).collect();
    let sweep = run_ccdf_vs_n(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, target) in C1_TARGETS_DB {
        let q = sweep.entry(n, 4).unwrap().quantile_db;
        let ok = (q - target).abs() <= C1_TOL_DB;
        pass &= ok;
        parts.push(format!("N={n} {q:.3} dB (target {target} +/- {C1_TOL_DB})"));
    }
    let ordered = sweep.entries.windows(2).all(|w| w[0].quantile_db < w[1].quantile_db);
    parts.push(format!("increasing in N: {ordered}"));
    report(1, "CCDF read-out vs N, QPSK, L=4, 1e5 trials", pass && ordered, &parts.join(", "));
}

#[test]
fn criterion_2_oversampling_saturates() {
    let mut cfg = ExperimentConfig::default();
    cfg.n_trials = C2_TRIALS;
    cfg.oversampling_n = C2_N;
    cfg.l_list = vec![1, 2, 4, 8];
    cfg.ccdf_level = CCDF_LEVEL;
    let sweep = run_oversampling_sweep(&cfg).unwrap();
    let q = |l| sweep.entry(C2_N, l).unwrap().quantile_db;
    let (q1, q2, q4, q8) = (q(1), q(2), q(4), q(8));
    let pass = (q8 - q4).abs() < C2_L8_L4_MAX_DB && q1 < q2 && q2 < q4;
    report(
        2,
        "oversampling sweep, N=256",
        pass,
        &format!(
            "L=1 {q1:.3}, L=2 {q2:.3}, L=4 {q4:.3}, L=8 {q8:.3} dB; |L8-L4| = {:.3} (< {C2_L8_L4_MAX_DB})",
            (q8 - q4).abs()
        ),
    );
}

#[test]
fn criterion_3_pts_subblock_trend() {
    let mut cfg = ExperimentConfig::default();
    cfg.n_subcarriers = 1024;
    cfg.partition = PartitionScheme::Adjacent;
    cfg.phase_factors = 2;
    cfg.oversampling = 4;
    cfg.pts_trials = C3_TRIALS;
    cfg.ccdf_level = CCDF_LEVEL;
    cfg.m_list = C3_TARGETS_DB.iter().map(|t| t.0).collect();
    let sweep = run_pts_sweep(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, target) in C3_TARGETS_DB {
        let e = sweep.entry(m).unwrap();
        assert_eq!(e.search, SearchKind::Exhaustive, "M={m} must stay exhaustive");
        let ok = (e.quantile_db - target).abs() <= C3_TOL_DB;
        pass &= ok;
        parts.push(format!("M={m} {:.3} dB (target {target})", e.quantile_db));
    }
    let q: Vec<f64> = sweep.entries.iter().map(|e| e.quantile_db).collect();
    let decreasing = q.windows(2).all(|w| w[1] < w[0]);
    assert_eq!(sweep.entry(1).unwrap().papr_after_db, sweep.baseline.papr_db);
    parts.push(format!("strictly decreasing: {decreasing}, tol +/- {C3_TOL_DB}"));
    report(3, "PTS vs M, N=1024, W=2, adjacent, 1e4 trials", pass && decreasing, &parts.join(", "));
}

#[test]
fn criterion_4_candidate_counts_w4() {
    let want = [(1, 1u64), (2, 4), (4, 64), (8, 16_384), (16, 1_073_741_824)];
    let got: Vec<(usize, u64)> = want.iter().map(|&(m, _)| (m, candidate_count(4, m).unwrap())).collect();
    // 4^7 = 16384; a published 16484 for M = 8 is a digit slip.
    let pass = got.iter().zip(&want).all(|(g, w)| g == w) && candidate_count(4, 8).unwrap() != 16_484;
    report(4, "candidate counts W=4", pass, &format!("{got:?}"));
}

#[test]
fn criterion_5_saving_gain_from_papr_column() {
    let par = [11.0, 9.9, 8.88, 8.25, 7.55];
    let want = [0.0, 2.2, 4.24, 5.5, 6.9];
    let init = PaprValue::from_db(par[0]).unwrap();
    let got: Vec<f64> = par
        .iter()
        .map(|&p| saving_gain(&init, &PaprValue::from_db(p).unwrap()).unwrap())
        .collect();
    // The gain is twice the dB reduction; a printed gain column that does
    // not follow from the PAPR column is not reproducible from it.
    let pass = got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= C5_TOL);
    report(5, "saving gain from PAPR values", pass, &format!("{got:?} vs {want:?} (+/- {C5_TOL})"));
}

#[test]
fn criterion_6_eight_carrier_worked_example() {
    let x: Vec<Complex64> = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, -1.0, -1.0]
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let frame = SymbolFrame::new(x.clone()).unwrap();
    let plan = make_partition(8, 4, PartitionScheme::Adjacent, 0).unwrap();
    let r = pts_exhaustive(&frame, &plan, &PhaseFactorSet::binary(), 4).unwrap();
    let b: Vec<f64> = r.phase_vector.factors().iter().map(|f| f.re).collect();
    let out: Vec<f64> = rotate_frame(&frame, &plan, &r.phase_vector)
        .unwrap()
        .symbols()
        .iter()
        .map(|s| s.re)
        .collect();
    let (oracle_idx, oracle_papr, oracle_count) = common::brute_force_pts(&x, plan.assignment(), 4, 2, 4);
    let pass = b == [1.0, -1.0, -1.0, -1.0]
        && out == [1.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0]
        && r.candidates_evaluated == 8
        && oracle_count == 8
        && oracle_idx == r.phase_indices
        && (oracle_papr - r.papr_after.linear).abs() < 1e-9;
    report(
        6,
        "N=8, M=4, W=2 worked example",
        pass,
        &format!(
            "b = {b:?}, block = {out:?}, {} candidates, oracle {oracle_idx:?}",
            r.candidates_evaluated
        ),
    );
}

/// Deterministic sweep over the algebraic invariants.
fn invariant_failures() -> Vec<String> {
    let mut fails = Vec::new();
    let mut rng = common::Lcg(7);
    let mut check = |ok: bool, what: String| {
        if !ok {
            fails.push(what);
        }
    };
    for n in [4, 64, 1024] {
        for l in [1, 2, 4, 8] {
            let f = SymbolFrame::new(rng.qpsk(n)).unwrap();
            let x = ofdm_modulate(&f, l).unwrap();
            let back = ofdm_demodulate_oversampled(&x, n).unwrap();
            let err = back.symbols().iter().zip(f.symbols()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            check(err < 1e-9, format!("round trip N={n} L={l}: {err:e}"));
            check((x.mean_power() - f.mean_power()).abs() < 1e-9, format!("Parseval N={n} L={l}"));
        }
    }
    for n in [1, 2, 4, 8, 16] {
        for m in 1..=4.min(n) {
            for w in 2..=4 {
                let x = rng.qpsk(n);
                let frame = SymbolFrame::new(x.clone()).unwrap();
                let plan = make_partition(n, m, PartitionScheme::PseudoRandom, rng.next_u64()).unwrap();
                let phases = PhaseFactorSet::new(w).unwrap();
                let r = pts_exhaustive(&frame, &plan, &phases, 4).unwrap();
                let (idx, _, _) = common::brute_force_pts(&x, plan.assignment(), m, w, 4);
                check(idx == r.phase_indices, format!("oracle N={n} M={m} W={w}"));
                let parts = partial_sequences(&frame, &plan, 4).unwrap();
                let direct = ofdm_modulate(&rotate_frame(&frame, &plan, &r.phase_vector).unwrap(), 4).unwrap();
                let lin = (0..4 * n)
                    .map(|t| {
                        let s: Complex64 =
                            parts.iter().zip(r.phase_vector.factors()).map(|(p, b)| b * p.samples()[t]).sum();
                        (s - direct.samples()[t]).norm()
                    })
                    .fold(0.0, f64::max);
                check(lin < 1e-12, format!("linearity N={n} M={m}: {lin:e}"));
                let x0 = ofdm_modulate(&frame, 4).unwrap();
                check((r.signal.mean_power() - x0.mean_power()).abs() < 1e-12, format!("power N={n} M={m}"));
                check(r.papr_after.linear <= r.papr_before.linear * (1.0 + 1e-12), format!("never worse N={n}"));
            }
        }
    }
    let dbs: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.618_034).fract() * 14.0).collect();
    let vals: Vec<PaprValue> = dbs.iter().map(|&d| PaprValue::from_db(d).unwrap()).collect();
    let curve = empirical_ccdf(&vals, &default_thresholds(), 1).unwrap();
    check(curve.probabilities.windows(2).all(|w| w[1] <= w[0]), "CCDF monotone".into());
    check(ccdf_quantile(&dbs, 0.5).is_ok(), "quantile".into());
    for (a, b) in [(11.0, 7.55), (9.0, 9.0), (14.0, 0.0)] {
        let (pi, pf) = (PaprValue::from_db(a).unwrap(), PaprValue::from_db(b).unwrap());
        let eta = amplifier_efficiency(&pf).unwrap();
        let dc = dc_power(1.5, &pf).unwrap();
        check((eta * dc - 1.5).abs() < 1e-12, format!("eta * P_DC at {b} dB"));
        let s = power_savings(1.5, &pi, &pf).unwrap();
        check((dc_power(1.5, &pi).unwrap() - dc - s).abs() < 1e-9, format!("savings {a}->{b}"));
    }
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 3] {
        let mut cfg = ExperimentConfig::default();
        for kv in ["n_subcarriers=64", "fft_points=512", "pts_trials=30", "m_list=1,4,8", "seed=5"] {
            cfg.apply_override(kv).unwrap();
        }
        cfg.out_dir = tmp.path().join(workers.to_string());
        let o = with_workers(Some(workers), || execute(Command::PtsSweep, &cfg)).unwrap().unwrap();
        outputs.push(o.manifest.files);
    }
    check(outputs[0] == outputs[1], "worker-count reproducibility".into());
    fails
}

#[test]
fn criterion_7_property_suites() {
    let start = Instant::now();
    let fails = invariant_failures();
    let elapsed = start.elapsed();
    let pass = fails.is_empty() && elapsed < C7_BUDGET;
    report(
        7,
        "invariants (round trip, linearity, power, oracle, CCDF, power model, reproducibility)",
        pass,
        &format!("{} failures {fails:?} in {:.3} s (budget {} s)", fails.len(), elapsed.as_secs_f64(), C7_BUDGET.as_secs()),
    );
}

#[test]
fn criterion_8_noiseless_multipath_round_trip() {
    let mut cfg = ExperimentConfig::default();
    cfg.roundtrip_frames = C8_FRAMES;
    cfg.channel_noise_power = 0.0;
    let ch = cfg.channel().unwrap();
    assert!(ch.taps().len() >= 2 && ch.max_delay() <= cfg.cp_samples());
    let r = run_roundtrip(&cfg).unwrap();
    report(
        8,
        "noiseless two-path round trip within the cyclic prefix",
        r.bit_errors == 0 && r.frames == C8_FRAMES,
        &format!(
            "{} frames, {} bits, {} bit errors, delay {} <= CP {}",
            r.frames, r.bits_total, r.bit_errors, r.max_delay_samples, r.cp_samples
        ),
    );
}
