//! The experiments. Each `run_*` function is pure computation returning a
//! result struct; the matching `write` method turns it into files.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::OutputDir;
use super::seed::{derive_seed, trial_bits, trial_frame, Stream};
use crate::channel::{apply_channel, equalize};
use crate::error::{Error, Result};
use crate::modulation::{demap_symbols, map_symbols};
use crate::ofdm::{
    add_cyclic_prefix, ofdm_demodulate_oversampled, ofdm_modulate, remove_cyclic_prefix,
    SymbolFrame,
};
use crate::papr::{
    ccdf_quantile, compute_papr, empirical_ccdf, papr_of_frame, theoretical_curve, threshold_grid,
    CcdfCurve, CcdfSidecar, PaprValue,
};
use crate::power::{saving_gain, PowerReport};
use crate::pts::{
    candidate_count, decode_side_info, make_partition, pts_exhaustive_with_budget,
    pts_iterative_binary, receiver_derotate, rotate_frame, PartitionPlan, PhaseFactorSet,
    PtsResult, PtsSummary, SearchKind,
};

/// Exhaustive search when `W^(M-1)` fits the budget, otherwise the greedy
/// binary search (only defined for `W = 2`).
pub fn search_kind_for(w: usize, m: usize, budget: u64) -> Result<SearchKind> {
    match candidate_count(w, m) {
        Ok(c) if c <= budget => Ok(SearchKind::Exhaustive),
        _ if w == 2 => Ok(SearchKind::IterativeBinary),
        Ok(c) => Err(Error::Budget {
            candidates: c as u128,
            w,
            m,
            budget,
        }),
        Err(_) => Err(Error::Budget {
            candidates: (w as u128).saturating_pow((m - 1) as u32),
            w,
            m,
            budget,
        }),
    }
}

fn run_search(
    kind: SearchKind,
    frame: &SymbolFrame,
    plan: &PartitionPlan,
    phases: &PhaseFactorSet,
    l: usize,
    budget: u64,
) -> Result<PtsResult> {
    match kind {
        SearchKind::Exhaustive => pts_exhaustive_with_budget(frame, plan, phases, l, budget),
        SearchKind::IterativeBinary => pts_iterative_binary(frame, plan, l),
    }
}

fn partition_for(cfg: &ExperimentConfig, n: usize, m: usize) -> Result<PartitionPlan> {
    make_partition(n, m, cfg.partition, derive_seed(cfg.seed, Stream::Partition, m as u64))
}

/// PAPR (dB) level exceeded with probability `level` under the Nyquist-rate
/// Gaussian model: inverse of `1 - (1 - e^-z)^n`.
pub fn theoretical_quantile_db(level: f64, n: usize) -> f64 {
    let inner = -((-level).ln_1p() / n as f64).exp_m1();
    10.0 * (-inner.ln()).log10()
}

fn sidecar(cfg: &ExperimentConfig, n_trials: usize, n: usize, l: usize) -> CcdfSidecar {
    CcdfSidecar {
        n_trials,
        n_subcarriers: n,
        oversampling: l,
        seed: cfg.seed,
        scheme: cfg.modulation.name().to_string(),
    }
}

fn thresholds(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    threshold_grid(cfg.ccdf_min_db, cfg.ccdf_max_db, cfg.ccdf_step_db)
}

// ---------------------------------------------------------------- time domain

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainRun {
    pub n_subcarriers: usize,
    pub oversampling: usize,
    pub sample_rate: f64,
    pub magnitudes: Vec<f64>,
    /// PAPR of the rendered waveform.
    pub papr: PaprValue,
}

#[derive(Serialize)]
struct TimeDomainJson {
    #[serde(rename = "N")]
    n_subcarriers: usize,
    #[serde(rename = "L")]
    oversampling: usize,
    sample_rate_hz: f64,
    n_samples: usize,
    papr_linear: f64,
    papr_db: f64,
}

/// Renders trial 0 of the configured frame size.
pub fn run_time_domain(cfg: &ExperimentConfig) -> Result<TimeDomainRun> {
    let frame = trial_frame(cfg.seed, 0, cfg.modulation, cfg.n_subcarriers)?;
    run_time_domain_frame(cfg, &frame)
}

/// Renders `frame` at `fft_points` samples per symbol.
pub fn run_time_domain_frame(cfg: &ExperimentConfig, frame: &SymbolFrame) -> Result<TimeDomainRun> {
    if frame.len() != cfg.n_subcarriers {
        return Err(Error::Sizing(format!(
            "frame has {} subcarriers, config says {}",
            frame.len(),
            cfg.n_subcarriers
        )));
    }
    let l = cfg.render_oversampling()?;
    let signal = ofdm_modulate(frame, l)?.with_sample_rate(cfg.sample_rate)?;
    Ok(TimeDomainRun {
        n_subcarriers: frame.len(),
        oversampling: l,
        sample_rate: cfg.sample_rate,
        magnitudes: signal.samples().iter().map(|s| s.norm()).collect(),
        papr: compute_papr(&signal)?,
    })
}

impl TimeDomainRun {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,time_s,magnitude\n");
        for (i, m) in self.magnitudes.iter().enumerate() {
            out.push_str(&format!("{i},{:.8e},{m:.10e}\n", i as f64 / self.sample_rate));
        }
        out
    }

    pub fn write(&self, out: &mut OutputDir) -> Result<()> {
        out.write_text("time_domain.csv", &self.to_csv())?;
        out.write_json(
            "time_domain.json",
            &TimeDomainJson {
                n_subcarriers: self.n_subcarriers,
                oversampling: self.oversampling,
                sample_rate_hz: self.sample_rate,
                n_samples: self.magnitudes.len(),
                papr_linear: self.papr.linear,
                papr_db: self.papr.db,
            },
        )
    }
}

// ---------------------------------------------------------------- CCDF sweeps

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfEntry {
    pub n_subcarriers: usize,
    pub oversampling: usize,
    pub papr_db: Vec<f64>,
    pub curve: CcdfCurve,
    pub quantile_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfSweep {
    pub level: f64,
    pub entries: Vec<CcdfEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    #[serde(rename = "N")]
    pub n_subcarriers: usize,
    #[serde(rename = "L")]
    pub oversampling: usize,
    pub n_trials: usize,
    pub quantile_db: f64,
    /// Nyquist-rate Gaussian-envelope prediction at the same level.
    pub theory_quantile_db: f64,
}

fn ccdf_entry(cfg: &ExperimentConfig, n: usize, l: usize, papr_db: Vec<f64>, grid: &[f64]) -> Result<CcdfEntry> {
    let values = papr_db
        .iter()
        .map(|&db| PaprValue::from_db(db))
        .collect::<Result<Vec<_>>>()?;
    Ok(CcdfEntry {
        n_subcarriers: n,
        oversampling: l,
        curve: empirical_ccdf(&values, grid, n)?,
        quantile_db: ccdf_quantile(&papr_db, cfg.ccdf_level)?,
        papr_db,
    })
}

/// PAPR (dB) of trials `0..n_trials` at every factor in `ls`, one row per `L`.
fn papr_table(cfg: &ExperimentConfig, n: usize, ls: &[usize]) -> Result<Vec<Vec<f64>>> {
    let per_trial = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|k| {
            let frame = trial_frame(cfg.seed, k, cfg.modulation, n)?;
            ls.iter()
                .map(|&l| papr_of_frame(&frame, l).map(|p| p.db))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..ls.len())
        .map(|j| per_trial.iter().map(|row| row[j]).collect())
        .collect())
}

/// Monte Carlo CCDF for each `N` in `n_list` at the configured `L`.
pub fn run_ccdf_vs_n(cfg: &ExperimentConfig) -> Result<CcdfSweep> {
    let grid = thresholds(cfg)?;
    let entries = cfg
        .n_list
        .iter()
        .map(|&n| {
            let db = papr_table(cfg, n, &[cfg.oversampling])?.remove(0);
            ccdf_entry(cfg, n, cfg.oversampling, db, &grid)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CcdfSweep {
        level: cfg.ccdf_level,
        entries,
    })
}

/// CCDF at `N = oversampling_n` for each `L` in `l_list`, on the same frames.
pub fn run_oversampling_sweep(cfg: &ExperimentConfig) -> Result<CcdfSweep> {
    let grid = thresholds(cfg)?;
    let n = cfg.oversampling_n;
    let table = papr_table(cfg, n, &cfg.l_list)?;
    let entries = cfg
        .l_list
        .iter()
        .zip(table)
        .map(|(&l, db)| ccdf_entry(cfg, n, l, db, &grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(CcdfSweep {
        level: cfg.ccdf_level,
        entries,
    })
}

impl CcdfSweep {
    pub fn entry(&self, n: usize, l: usize) -> Option<&CcdfEntry> {
        self.entries
            .iter()
            .find(|e| e.n_subcarriers == n && e.oversampling == l)
    }

    pub fn quantiles(&self) -> Vec<QuantileRow> {
        self.entries
            .iter()
            .map(|e| QuantileRow {
                n_subcarriers: e.n_subcarriers,
                oversampling: e.oversampling,
                n_trials: e.papr_db.len(),
                quantile_db: e.quantile_db,
                theory_quantile_db: theoretical_quantile_db(self.level, e.n_subcarriers),
            })
            .collect()
    }

    /// Files are keyed by `L` when `by_l`, otherwise by `N`.
    fn write(&self, cfg: &ExperimentConfig, out: &mut OutputDir, by_l: bool) -> Result<()> {
        for e in &self.entries {
            let base = if by_l {
                format!("ccdf_l{}", e.oversampling)
            } else {
                format!("ccdf_n{}", e.n_subcarriers)
            };
            out.write_text(&format!("{base}.csv"), &e.curve.to_csv())?;
            out.write_json(
                &format!("{base}.json"),
                &sidecar(cfg, e.papr_db.len(), e.n_subcarriers, e.oversampling),
            )?;
            if !by_l {
                let theory = theoretical_curve(&e.curve.thresholds_db, e.n_subcarriers)?;
                out.write_text(&format!("ccdf_theory_n{}.csv", e.n_subcarriers), &theory.to_csv())?;
            }
        }
        let name = if by_l { "oversampling_summary.json" } else { "ccdf_summary.json" };
        out.write_json(name, &self.quantiles())
    }

    pub fn write_vs_n(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
        self.write(cfg, out, false)
    }

    pub fn write_vs_l(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
        self.write(cfg, out, true)
    }
}

// ---------------------------------------------------------------- PTS sweep

#[derive(Debug, Clone, PartialEq)]
pub struct PtsSweepEntry {
    pub m: usize,
    pub search: SearchKind,
    pub candidates_per_trial: u64,
    pub papr_after_db: Vec<f64>,
    pub curve: CcdfCurve,
    pub quantile_db: f64,
    pub saving_gain_db: f64,
    pub power: PowerReport,
    pub summaries: Vec<PtsSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtsSweep {
    pub level: f64,
    pub n_subcarriers: usize,
    pub oversampling: usize,
    pub w: usize,
    pub n_trials: usize,
    /// Unmodified frames.
    pub baseline: CcdfEntry,
    pub entries: Vec<PtsSweepEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    #[serde(rename = "W")]
    pub w: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// `None` when `W^(M-1)` does not fit in 64 bits.
    pub candidates: Option<u64>,
}

/// `W^(M-1)` for each `M`.
pub fn candidate_table(w: usize, ms: &[usize]) -> Vec<CandidateRow> {
    ms.iter()
        .map(|&m| CandidateRow {
            w,
            m,
            candidates: candidate_count(w, m).ok(),
        })
        .collect()
}

#[derive(Serialize)]
struct PtsRow<'a> {
    #[serde(rename = "M")]
    m: usize,
    search: SearchKind,
    candidates_per_trial: u64,
    quantile_db: f64,
    saving_gain_db: f64,
    power: &'a PowerReport,
}

#[derive(Serialize)]
struct PtsSummaryJson<'a> {
    #[serde(rename = "N")]
    n_subcarriers: usize,
    #[serde(rename = "L")]
    oversampling: usize,
    #[serde(rename = "W")]
    w: usize,
    n_trials: usize,
    ccdf_level: f64,
    baseline_quantile_db: f64,
    rows: Vec<PtsRow<'a>>,
}

/// PTS over `pts_trials` frames for each `M` in `m_list`. All `M` see the
/// same frames; the baseline is their unmodified PAPR.
pub fn run_pts_sweep(cfg: &ExperimentConfig) -> Result<PtsSweep> {
    let n = cfg.n_subcarriers;
    let l = cfg.oversampling;
    let phases = PhaseFactorSet::new(cfg.phase_factors)?;
    let grid = thresholds(cfg)?;
    let frames = (0..cfg.pts_trials as u64)
        .into_par_iter()
        .map(|k| trial_frame(cfg.seed, k, cfg.modulation, n))
        .collect::<Result<Vec<_>>>()?;
    let baseline_db = frames
        .par_iter()
        .map(|f| papr_of_frame(f, l).map(|p| p.db))
        .collect::<Result<Vec<_>>>()?;
    let baseline = ccdf_entry(cfg, n, l, baseline_db, &grid)?;
    let base_q = PaprValue::from_db(baseline.quantile_db)?;

    let mut entries = Vec::with_capacity(cfg.m_list.len());
    for &m in &cfg.m_list {
        let kind = search_kind_for(phases.w(), m, cfg.search_budget)?;
        let plan = partition_for(cfg, n, m)?;
        let mut summaries = frames
            .par_iter()
            .map(|f| run_search(kind, f, &plan, &phases, l, cfg.search_budget).map(|r| r.summary()))
            .collect::<Result<Vec<_>>>()?;
        let after: Vec<f64> = summaries.iter().map(|s| s.papr_after_db).collect();
        let candidates_per_trial = summaries.first().map_or(0, |s| s.candidates_evaluated);
        for (k, s) in summaries.iter_mut().enumerate() {
            s.seed = Some(derive_seed(cfg.seed, Stream::Frame, k as u64));
        }
        let entry = ccdf_entry(cfg, n, l, after, &grid)?;
        let q = PaprValue::from_db(entry.quantile_db)?;
        entries.push(PtsSweepEntry {
            m,
            search: kind,
            candidates_per_trial,
            saving_gain_db: saving_gain(&base_q, &q)?,
            power: PowerReport::new(cfg.p_out_avg_w, &base_q, &q)?,
            curve: entry.curve,
            quantile_db: entry.quantile_db,
            papr_after_db: entry.papr_db,
            summaries,
        });
    }
    Ok(PtsSweep {
        level: cfg.ccdf_level,
        n_subcarriers: n,
        oversampling: l,
        w: phases.w(),
        n_trials: cfg.pts_trials,
        baseline,
        entries,
    })
}

impl PtsSweep {
    pub fn entry(&self, m: usize) -> Option<&PtsSweepEntry> {
        self.entries.iter().find(|e| e.m == m)
    }

    pub fn write(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
        let car = |t| sidecar(cfg, t, self.n_subcarriers, self.oversampling);
        out.write_text("pts_baseline.csv", &self.baseline.curve.to_csv())?;
        out.write_json("pts_baseline.json", &car(self.n_trials))?;
        for e in &self.entries {
            out.write_text(&format!("pts_m{}.csv", e.m), &e.curve.to_csv())?;
            out.write_json(&format!("pts_m{}.json", e.m), &car(self.n_trials))?;
            out.write_jsonl(&format!("pts_results_m{}.jsonl", e.m), &e.summaries)?;
            if e.search == SearchKind::IterativeBinary {
                out.note(format!(
                    "M={}: W^(M-1) exceeds the search budget {}, used iterative binary search",
                    e.m, cfg.search_budget
                ));
            }
        }
        out.note(format!("pts_trials = {}", self.n_trials));
        out.write_json(
            "pts_summary.json",
            &PtsSummaryJson {
                n_subcarriers: self.n_subcarriers,
                oversampling: self.oversampling,
                w: self.w,
                n_trials: self.n_trials,
                ccdf_level: self.level,
                baseline_quantile_db: self.baseline.quantile_db,
                rows: self
                    .entries
                    .iter()
                    .map(|e| PtsRow {
                        m: e.m,
                        search: e.search,
                        candidates_per_trial: e.candidates_per_trial,
                        quantile_db: e.quantile_db,
                        saving_gain_db: e.saving_gain_db,
                        power: &e.power,
                    })
                    .collect(),
            },
        )?;
        let mut counts = candidate_table(4, &[1, 2, 4, 8, 16]);
        if self.w != 4 {
            counts.extend(candidate_table(self.w, &cfg.m_list));
        }
        out.write_json("candidate_counts.json", &counts)
    }
}

// ---------------------------------------------------------------- power table

/// Energy model for each entry of `par_db_list` against the first one.
pub fn run_power_report(cfg: &ExperimentConfig) -> Result<Vec<PowerReport>> {
    let first = cfg
        .par_db_list
        .first()
        .ok_or_else(|| Error::InvalidInput("par_db_list is empty".into()))?;
    let initial = PaprValue::from_db(*first)?;
    cfg.par_db_list
        .iter()
        .map(|&db| PowerReport::new(cfg.p_out_avg_w, &initial, &PaprValue::from_db(db)?))
        .collect()
}

pub fn power_report_csv(reports: &[PowerReport]) -> String {
    let mut out = String::from(
        "par_initial_db,par_final_db,efficiency_final_ratio,p_dc_final_w,p_savings_w,saving_gain_db\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{:.4},{:.4},{:.8e},{:.8e},{:.8e},{:.6}\n",
            r.par_initial_db,
            r.par_final_db,
            r.efficiency_final_ratio,
            r.p_dc_final_w,
            r.p_savings_w,
            r.saving_gain_db
        ));
    }
    out
}

// ---------------------------------------------------------------- round trip

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub frames: usize,
    #[serde(rename = "N")]
    pub n_subcarriers: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub search: SearchKind,
    pub search_oversampling: usize,
    pub render_oversampling: usize,
    pub cp_samples: usize,
    pub max_delay_samples: usize,
    pub noise_power: f64,
    pub corrupt_side_info: bool,
    pub bits_total: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// Frames whose side information did not decode to a valid phase vector.
    pub side_info_failures: u64,
    pub mean_papr_before_db: f64,
    pub mean_papr_after_db: f64,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.bit_errors == 0
    }
}

struct FrameOutcome {
    bits: u64,
    errors: u64,
    side_info_failed: bool,
    before_db: f64,
    after_db: f64,
}

/// Full transmit/receive chain over `roundtrip_frames` frames and counts bit
/// errors. The channel's longest delay must fit inside the cyclic prefix.
pub fn run_roundtrip(cfg: &ExperimentConfig) -> Result<RoundtripReport> {
    let n = cfg.n_subcarriers;
    let m = cfg.roundtrip_m;
    let search_l = cfg.oversampling;
    let render_l = cfg.render_oversampling()?;
    let cp = cfg.cp_samples();
    let channel = cfg.channel()?;
    if channel.max_delay() > cp {
        return Err(Error::InvalidInput(format!(
            "channel delay {} samples exceeds the {cp}-sample cyclic prefix",
            channel.max_delay()
        )));
    }
    if cfg.corrupt_side_info && m < 2 {
        return Err(Error::InvalidInput(
            "corrupt_side_info needs roundtrip_m >= 2 (M = 1 sends no side information)".into(),
        ));
    }
    let phases = PhaseFactorSet::new(cfg.phase_factors)?;
    let kind = search_kind_for(phases.w(), m, cfg.search_budget)?;
    let plan = partition_for(cfg, n, m)?;
    let response = channel.frequency_response(n, render_l);
    let n_bits = n * cfg.modulation.bits_per_symbol();

    let outcomes = (0..cfg.roundtrip_frames as u64)
        .into_par_iter()
        .map(|f| -> Result<FrameOutcome> {
            let bits = trial_bits(cfg.seed, f, n_bits);
            let frame = map_symbols(&bits, cfg.modulation, n)?;
            let pts = run_search(kind, &frame, &plan, &phases, search_l, cfg.search_budget)?;
            let tx = rotate_frame(&frame, &plan, &pts.phase_vector)?;
            let wave = ofdm_modulate(&tx, render_l)?.with_sample_rate(cfg.sample_rate)?;
            let ch = channel.with_seed(derive_seed(cfg.seed, Stream::Noise, f));
            let rx = apply_channel(&add_cyclic_prefix(&wave, cp)?, &ch);
            let body = remove_cyclic_prefix(&rx, cp)?;
            let eq = equalize(&ofdm_demodulate_oversampled(&body, n)?, &response)?;

            let mut side = pts.side_info_bits.clone();
            if cfg.corrupt_side_info {
                side.flip(0);
            }
            let (b, side_info_failed) = match decode_side_info(&side, m, &phases) {
                Ok(b) => (b, false),
                Err(_) => (crate::pts::PhaseVector::identity(m), true),
            };
            let recovered = demap_symbols(&receiver_derotate(&eq, &plan, &b)?, cfg.modulation);
            Ok(FrameOutcome {
                bits: n_bits as u64,
                errors: recovered.hamming_distance(&bits) as u64,
                side_info_failed,
                before_db: pts.papr_before.db,
                after_db: pts.papr_after.db,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let frames = outcomes.len();
    let mean = |g: fn(&FrameOutcome) -> f64| outcomes.iter().map(g).sum::<f64>() / frames.max(1) as f64;
    Ok(RoundtripReport {
        frames,
        n_subcarriers: n,
        m,
        w: phases.w(),
        search: kind,
        search_oversampling: search_l,
        render_oversampling: render_l,
        cp_samples: cp,
        max_delay_samples: channel.max_delay(),
        noise_power: channel.noise_power(),
        corrupt_side_info: cfg.corrupt_side_info,
        bits_total: outcomes.iter().map(|o| o.bits).sum(),
        bit_errors: outcomes.iter().map(|o| o.errors).sum(),
        frame_errors: outcomes.iter().filter(|o| o.errors > 0).count() as u64,
        side_info_failures: outcomes.iter().filter(|o| o.side_info_failed).count() as u64,
        mean_papr_before_db: mean(|o| o.before_db),
        mean_papr_after_db: mean(|o| o.after_db),
    })
}
