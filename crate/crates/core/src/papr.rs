//! Peak-to-average power measurement and CCDF estimation.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::{modulate_symbols, SymbolFrame, TimeSignal};

/// Minimum number of samples accepted by [`envelope_gaussianity`].
pub const MIN_ENVELOPE_SAMPLES: usize = 10_000;

/// Peak-to-average power ratio, kept in both linear and dB form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaprValue {
    pub linear: f64,
    pub db: f64,
}

impl PaprValue {
    pub fn from_linear(linear: f64) -> Result<Self> {
        if !(linear.is_finite() && linear >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "PAPR must be a finite ratio >= 1, got {linear}"
            )));
        }
        Ok(Self {
            linear,
            db: 10.0 * linear.log10(),
        })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !(db.is_finite() && db >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "PAPR must be a finite value >= 0 dB, got {db}"
            )));
        }
        Ok(Self {
            linear: 10f64.powf(db / 10.0),
            db,
        })
    }

    /// Builds the ratio from a peak and a mean power. Rounding can push a
    /// constant envelope a few ulps below 1; that is clamped to exactly 1.
    pub(crate) fn from_powers(peak: f64, mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::InvalidInput(
                "PAPR is undefined for a zero-power signal".into(),
            ));
        }
        Self::from_linear((peak / mean).max(1.0))
    }
}

/// `max |x|^2 / mean |x|^2` over the samples of `signal`.
pub fn compute_papr(signal: &TimeSignal) -> Result<PaprValue> {
    papr_of_samples(signal.samples())
}

pub(crate) fn papr_of_samples(samples: &[num_complex::Complex64]) -> Result<PaprValue> {
    let mut peak = 0.0f64;
    let mut sum = 0.0f64;
    for s in samples {
        let p = s.norm_sqr();
        sum += p;
        if p > peak {
            peak = p;
        }
    }
    PaprValue::from_powers(peak, sum / samples.len() as f64)
}

/// PAPR of the `L`-times oversampled waveform of `frame`.
pub fn papr_of_frame(frame: &SymbolFrame, l: usize) -> Result<PaprValue> {
    if l == 0 {
        return Err(Error::InvalidInput("oversampling factor must be >= 1".into()));
    }
    papr_of_samples(&modulate_symbols(frame.symbols(), l))
}

/// Threshold grid from `start_db` to `stop_db` inclusive in `step_db` steps.
pub fn threshold_grid(start_db: f64, stop_db: f64, step_db: f64) -> Result<Vec<f64>> {
    if !(step_db > 0.0 && stop_db >= start_db && start_db.is_finite() && stop_db.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bad threshold grid {start_db}..{stop_db} step {step_db}"
        )));
    }
    let n = ((stop_db - start_db) / step_db + 1e-9).floor() as usize;
    // Computing each point from its index avoids accumulated drift.
    Ok((0..=n).map(|i| start_db + i as f64 * step_db).collect())
}

/// Default grid: 0 to 14 dB in 0.1 dB steps.
pub fn default_thresholds() -> Vec<f64> {
    threshold_grid(0.0, 14.0, 0.1).expect("static grid")
}

/// Exceedance probability `Pr(PAPR > z)` over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Zero for an analytic curve.
    pub n_trials: usize,
    pub n_subcarriers: usize,
}

impl CcdfCurve {
    /// Probability at the first grid point `>= z_db`, or 0 past the grid.
    pub fn probability_at(&self, z_db: f64) -> f64 {
        let i = self.thresholds_db.partition_point(|&t| t < z_db);
        self.probabilities.get(i).copied().unwrap_or(0.0)
    }

    /// CSV with header `threshold_db,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold_db,probability\n");
        for (t, p) in self.thresholds_db.iter().zip(&self.probabilities) {
            out.push_str(&format!("{t:.4},{p:.8e}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// JSON sidecar written next to every CCDF CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfSidecar {
    pub n_trials: usize,
    pub n_subcarriers: usize,
    #[serde(rename = "L")]
    pub oversampling: usize,
    pub seed: u64,
    pub scheme: String,
}

fn check_thresholds(thresholds_db: &[f64]) -> Result<()> {
    if thresholds_db.is_empty() {
        return Err(Error::InvalidInput("threshold grid is empty".into()));
    }
    if thresholds_db.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "thresholds must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Empirical CCDF: at each threshold `z`, the fraction of samples whose dB
/// value is strictly greater than `z`.
pub fn empirical_ccdf(
    papr_samples: &[PaprValue],
    thresholds_db: &[f64],
    n_subcarriers: usize,
) -> Result<CcdfCurve> {
    if papr_samples.is_empty() {
        return Err(Error::InvalidInput("no PAPR samples".into()));
    }
    check_thresholds(thresholds_db)?;
    let mut sorted: Vec<f64> = papr_samples.iter().map(|p| p.db).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let probabilities = thresholds_db
        .iter()
        .map(|&z| {
            let at_or_below = sorted.partition_point(|&v| v <= z);
            (n - at_or_below) as f64 / n as f64
        })
        .collect();
    Ok(CcdfCurve {
        thresholds_db: thresholds_db.to_vec(),
        probabilities,
        n_trials: n,
        n_subcarriers,
    })
}

/// Smallest sample value `q` such that at most `level * n` samples exceed
/// it, i.e. the read-out point of the empirical CCDF at probability `level`.
pub fn ccdf_quantile(papr_db: &[f64], level: f64) -> Result<f64> {
    if papr_db.is_empty() {
        return Err(Error::InvalidInput("no PAPR samples".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "CCDF level must lie in (0, 1), got {level}"
        )));
    }
    let mut sorted = papr_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let allowed = (level * n as f64 + 1e-9).floor() as usize;
    let idx = n.saturating_sub(allowed + 1);
    Ok(sorted[idx])
}

/// Analytic Nyquist-rate CCDF for `n` subcarriers with a Gaussian envelope:
/// `1 - (1 - exp(-z))^n` with `z` linear.
pub fn theoretical_ccdf_linear(z: f64, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidInput("subcarrier count must be >= 1".into()));
    }
    if z <= 0.0 {
        return Ok(1.0);
    }
    // -expm1(n * ln(1 - e^-z)) keeps precision in the far tail.
    let p = -((n as f64) * (-(-z).exp()).ln_1p()).exp_m1();
    Ok(p.clamp(0.0, 1.0))
}

pub fn theoretical_ccdf(z_db: f64, n: usize) -> Result<f64> {
    theoretical_ccdf_linear(10f64.powf(z_db / 10.0), n)
}

/// Analytic curve sampled on a threshold grid.
pub fn theoretical_curve(thresholds_db: &[f64], n: usize) -> Result<CcdfCurve> {
    check_thresholds(thresholds_db)?;
    let probabilities = thresholds_db
        .iter()
        .map(|&z| theoretical_ccdf(z, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(CcdfCurve {
        thresholds_db: thresholds_db.to_vec(),
        probabilities,
        n_trials: 0,
        n_subcarriers: n,
    })
}

/// Moments of one quadrature component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStats {
    pub mean: f64,
    pub variance: f64,
    /// `None` when the variance is zero.
    pub excess_kurtosis: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeStats {
    /// `E|x - E x|^2` of the complex envelope.
    pub variance: f64,
    pub in_phase: QuadratureStats,
    pub quadrature: QuadratureStats,
    pub n_samples: usize,
}

fn moments(values: impl Iterator<Item = f64> + Clone, n: usize) -> QuadratureStats {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    let (m2, m4) = values.fold((0.0, 0.0), |(m2, m4), v| {
        let d = v - mean;
        let d2 = d * d;
        (m2 + d2, m4 + d2 * d2)
    });
    let variance = m2 / nf;
    let excess_kurtosis = (variance > 0.0).then(|| (m4 / nf) / (variance * variance) - 3.0);
    QuadratureStats {
        mean,
        variance,
        excess_kurtosis,
    }
}

/// Pools the samples of `signals` and reports per-quadrature moments.
pub fn envelope_gaussianity(signals: &[TimeSignal]) -> Result<EnvelopeStats> {
    let n: usize = signals.iter().map(|s| s.len()).sum();
    if n < MIN_ENVELOPE_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "{n} samples pooled, at least {MIN_ENVELOPE_SAMPLES} required"
        )));
    }
    let all = || signals.iter().flat_map(|s| s.samples().iter());
    let in_phase = moments(all().map(|s| s.re), n);
    let quadrature = moments(all().map(|s| s.im), n);
    Ok(EnvelopeStats {
        variance: in_phase.variance + quadrature.variance,
        in_phase,
        quadrature,
        n_samples: n,
    })
}
