//! Library results checked against the reference implementations in
//! `common`.

mod common;

use common::*;
use pts_ofdm::harness::{runs::run_ccdf_vs_n, ExperimentConfig};
use pts_ofdm::modulation::ModulationScheme;
use pts_ofdm::ofdm::{ofdm_modulate, SymbolFrame};
use pts_ofdm::papr::{envelope_gaussianity, papr_of_frame, theoretical_ccdf};
use pts_ofdm::pts::*;

#[test]
fn modulation_matches_direct_sum() {
    let mut rng = Lcg(11);
    for n in [1, 2, 4, 8, 16, 64] {
        for l in [1, 2, 4, 8] {
            let x = rng.qpsk(n);
            let got = ofdm_modulate(&SymbolFrame::new(x.clone()).unwrap(), l).unwrap();
            let want = direct_synthesis(&x, l);
            for (a, b) in got.samples().iter().zip(&want) {
                assert!((a - b).norm() < 1e-9, "N={n} L={l}");
            }
        }
    }
}

#[test]
fn exhaustive_equals_brute_force_on_all_small_cases() {
    let mut rng = Lcg(2024);
    let mut cases = 0;
    for n in [1, 2, 4, 8, 16] {
        for m in 1..=4.min(n) {
            for w in 2..=4 {
                for scheme in [
                    PartitionScheme::Adjacent,
                    PartitionScheme::Interleaved,
                    PartitionScheme::PseudoRandom,
                ] {
                    for l in [1, 4] {
                        for _ in 0..2 {
                            let x = rng.qpsk(n);
                            let plan = make_partition(n, m, scheme, rng.next_u64()).unwrap();
                            let phases = PhaseFactorSet::new(w).unwrap();
                            let frame = SymbolFrame::new(x.clone()).unwrap();
                            let got = pts_exhaustive(&frame, &plan, &phases, l).unwrap();
                            let (idx, p, total) = brute_force_pts(&x, plan.assignment(), m, w, l);
                            let ctx = format!("N={n} M={m} W={w} {scheme} L={l}");
                            assert_eq!(got.phase_indices, idx, "{ctx}");
                            assert_eq!(got.candidates_evaluated, total, "{ctx}");
                            assert!((got.papr_after.linear - p).abs() < 1e-9 * p, "{ctx}");
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(cases > 300);
}

#[test]
fn single_phase_factor_is_rejected() {
    let frame = SymbolFrame::new(Lcg(1).qpsk(8)).unwrap();
    let plan = make_partition(8, 2, PartitionScheme::Adjacent, 0).unwrap();
    let phases = PhaseFactorSet::new(1).unwrap();
    assert!(pts_exhaustive(&frame, &plan, &phases, 4).is_err());
}

#[test]
fn iterative_never_beats_exhaustive() {
    let mut rng = Lcg(77);
    let plan = make_partition(64, 8, PartitionScheme::Adjacent, 0).unwrap();
    let phases = PhaseFactorSet::binary();
    let (mut gap, trials) = (0.0, 40);
    for _ in 0..trials {
        let frame = SymbolFrame::new(rng.qpsk(64)).unwrap();
        let ex = pts_exhaustive(&frame, &plan, &phases, 4).unwrap();
        let it = pts_iterative_binary(&frame, &plan, 4).unwrap();
        assert!(ex.papr_after.linear <= it.papr_after.linear * (1.0 + 1e-12));
        assert!(it.papr_after.linear <= it.papr_before.linear * (1.0 + 1e-12));
        assert_eq!(it.candidates_evaluated, 7);
        assert_eq!(ex.candidates_evaluated, 128);
        gap += it.papr_after.db - ex.papr_after.db;
    }
    assert!(gap / trials as f64 > 0.0);
}

/// Every BPSK frame of length `n` is equally likely, so the exact CCDF is a
/// count over all `2^n` frames.
fn exact_bpsk_papr(n: usize, l: usize) -> Vec<f64> {
    (0..1u32 << n)
        .map(|code| {
            let x: Vec<_> = (0..n)
                .map(|k| c(if code >> k & 1 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect();
            papr_db(&direct_synthesis(&x, l))
        })
        .collect()
}

#[test]
fn bpsk_ccdf_matches_enumeration() {
    for n in [2, 4] {
        let mut cfg = ExperimentConfig::default();
        cfg.modulation = ModulationScheme::Bpsk;
        cfg.n_list = vec![n];
        cfg.n_trials = 20_000;
        cfg.oversampling = 4;
        let sweep = run_ccdf_vs_n(&cfg).unwrap();
        let curve = &sweep.entries[0].curve;
        let atoms = exact_bpsk_papr(n, 4);
        for (&z, &p) in curve.thresholds_db.iter().zip(&curve.probabilities) {
            if atoms.iter().any(|a| (a - z).abs() < 1e-6) {
                continue;
            }
            let exact = atoms.iter().filter(|&&a| a > z).count() as f64 / atoms.len() as f64;
            let se = (exact * (1.0 - exact) / cfg.n_trials as f64).sqrt();
            assert!((p - exact).abs() <= 3.0 * se + 1e-12, "N={n} z={z}: {p} vs {exact}");
        }
    }
}

#[test]
fn large_n_envelope_is_gaussian() {
    let signals: Vec<_> = (0..40)
        .map(|s| {
            let f = SymbolFrame::new(Lcg(500 + s).qpsk(1024)).unwrap();
            ofdm_modulate(&f, 1).unwrap()
        })
        .collect();
    let st = envelope_gaussianity(&signals).unwrap();
    assert_eq!(st.n_samples, 40 * 1024);
    assert!((st.variance - 1.0).abs() < 0.05, "{}", st.variance);
    for q in [st.in_phase, st.quadrature] {
        assert!(q.mean.abs() < 0.02);
        assert!((q.variance - 0.5).abs() < 0.03);
        assert!(q.excess_kurtosis.unwrap().abs() < 0.1);
    }
}

#[test]
fn nyquist_papr_tracks_gaussian_theory() {
    // At L = 1 and N = 256 the samples are nearly independent, so the
    // measured exceedance at 8 dB lands close to the analytic curve.
    let mut rng = Lcg(9);
    let trials = 4000;
    let above = (0..trials)
        .filter(|_| {
            let f = SymbolFrame::new(rng.qpsk(256)).unwrap();
            papr_of_frame(&f, 1).unwrap().db > 8.0
        })
        .count() as f64
        / trials as f64;
    let theory = theoretical_ccdf(8.0, 256).unwrap();
    assert!((above - theory).abs() < 0.05, "{above} vs {theory}");
}
