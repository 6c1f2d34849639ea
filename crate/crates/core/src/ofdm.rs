//! OFDM symbol synthesis and analysis.
//!
//! The synthesis transform is
//!
//! ```text
//! x[n] = 1/sqrt(N) * sum_k X[k] * exp(j*2*pi*k'*n / (L*N)),   n = 0 .. L*N-1
//! ```
//!
//! where `k'` places the lower half of the spectrum (`k < N/2`) at the start
//! of the `L*N` grid and the upper half at its end (zero padding in the
//! middle). For `L = 1` this is the plain unitary inverse DFT. The `1/sqrt(N)`
//! scale does not depend on `L`, so the mean power of the output is
//! `(1/N) * sum |X[k]|^2` for every oversampling factor.

use std::cell::RefCell;
use std::ops::Mul;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::ModulationScheme;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// Frequency-domain content of one OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    symbols: Vec<Complex64>,
}

impl SymbolFrame {
    /// The number of symbols must be a non-zero power of two.
    pub fn new(symbols: Vec<Complex64>) -> Result<Self> {
        let n = symbols.len();
        if n == 0 {
            return Err(Error::InvalidInput("symbol frame is empty".into()));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "subcarrier count {n} is not a power of two"
            )));
        }
        Ok(Self { symbols })
    }

    pub fn zeros(n_subcarriers: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n_subcarriers])
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Complex64> {
        self.symbols
    }

    pub fn n_subcarriers(&self) -> usize {
        self.symbols.len()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Mean symbol energy `(1/N) * sum |X[k]|^2`.
    pub fn mean_power(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.len() as f64
    }
}

impl Mul<Complex64> for &SymbolFrame {
    type Output = SymbolFrame;

    fn mul(self, rhs: Complex64) -> SymbolFrame {
        SymbolFrame {
            symbols: self.symbols.iter().map(|s| s * rhs).collect(),
        }
    }
}

/// Complex baseband samples with their sampling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
    oversampling: usize,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, oversampling: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("time signal is empty".into()));
        }
        if oversampling == 0 {
            return Err(Error::InvalidInput("oversampling factor must be >= 1".into()));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            oversampling,
        })
    }

    /// Wraps samples with a unit sample rate and `L = 1`.
    pub fn from_samples(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, 1.0, 1)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn with_sample_rate(mut self, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        self.sample_rate = sample_rate;
        Ok(self)
    }

    /// Same metadata, new samples.
    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            oversampling: self.oversampling,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.with_samples(self.samples.iter().map(|s| s * c).collect())
    }
}

/// Transmission parameters for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub n_subcarriers: usize,
    pub scheme: ModulationScheme,
    pub cp_samples: usize,
    /// Hz.
    pub sample_rate: f64,
    /// One-sided baseband bandwidth in Hz.
    pub bandwidth: f64,
    pub n_ofdm_symbols: usize,
    /// m/s; only used to turn ranges into delays.
    pub sound_speed: f64,
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || !self.n_subcarriers.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "n_subcarriers = {} is not a power of two",
                self.n_subcarriers
            )));
        }
        if !(self.sample_rate > 0.0 && self.bandwidth > 0.0 && self.sound_speed > 0.0) {
            return Err(Error::InvalidInput(
                "sample_rate, bandwidth and sound_speed must be positive".into(),
            ));
        }
        if self.bandwidth > self.sample_rate / 2.0 {
            return Err(Error::InvalidInput(format!(
                "bandwidth {} Hz exceeds Nyquist ({} Hz)",
                self.bandwidth,
                self.sample_rate / 2.0
            )));
        }
        Ok(())
    }
}

impl Default for FrameConfig {
    /// Underwater acoustic link parameters: 100 kHz sampling, 6.25 kHz
    /// bandwidth, 1024 QPSK subcarriers, 25 ms cyclic prefix, 23 symbols.
    fn default() -> Self {
        Self {
            n_subcarriers: 1024,
            scheme: ModulationScheme::Qpsk,
            cp_samples: cp_samples_for(0.025, 100_000.0),
            sample_rate: 100_000.0,
            bandwidth: 6_250.0,
            n_ofdm_symbols: 23,
            sound_speed: 1500.0,
        }
    }
}

/// Cyclic prefix length in samples for a guard time in seconds.
pub fn cp_samples_for(cp_time_s: f64, sample_rate: f64) -> usize {
    (cp_time_s * sample_rate).round() as usize
}

/// Position of subcarrier `k` on an `l * n`-point grid.
#[inline]
pub(crate) fn oversampled_bin(k: usize, n: usize, l: usize) -> usize {
    let half = n.div_ceil(2);
    if k < half {
        k
    } else {
        k + (l - 1) * n
    }
}

/// Synthesizes the `L`-times oversampled time signal of `frame`.
///
/// The returned signal has unit sample rate; callers attach a physical rate
/// with [`TimeSignal::with_sample_rate`].
pub fn ofdm_modulate(frame: &SymbolFrame, l: usize) -> Result<TimeSignal> {
    if l == 0 {
        return Err(Error::InvalidInput("oversampling factor must be >= 1".into()));
    }
    let samples = modulate_symbols(frame.symbols(), l);
    TimeSignal::new(samples, 1.0, l)
}

/// Same as [`ofdm_modulate`] on a raw, already validated symbol slice.
pub(crate) fn modulate_symbols(symbols: &[Complex64], l: usize) -> Vec<Complex64> {
    let n = symbols.len();
    let len = n * l;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (k, &s) in symbols.iter().enumerate() {
        buf[oversampled_bin(k, n, l)] = s;
    }
    inverse_plan(len).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Recovers the frame from one CP-free, Nyquist-rate (`L = 1`) symbol.
pub fn ofdm_demodulate(signal: &TimeSignal, n_subcarriers: usize) -> Result<SymbolFrame> {
    if signal.len() != n_subcarriers {
        return Err(Error::Sizing(format!(
            "signal has {} samples, expected {n_subcarriers}",
            signal.len()
        )));
    }
    demodulate_any(signal.samples(), n_subcarriers, 1)
}

/// Recovers the frame from one CP-free symbol sampled at `L * N` points,
/// reading the subcarriers from the same centered bins used by
/// [`ofdm_modulate`].
pub fn ofdm_demodulate_oversampled(signal: &TimeSignal, n_subcarriers: usize) -> Result<SymbolFrame> {
    if n_subcarriers == 0 || !signal.len().is_multiple_of(n_subcarriers) {
        return Err(Error::Sizing(format!(
            "signal length {} is not a multiple of {n_subcarriers} subcarriers",
            signal.len()
        )));
    }
    demodulate_any(signal.samples(), n_subcarriers, signal.len() / n_subcarriers)
}

fn demodulate_any(samples: &[Complex64], n: usize, l: usize) -> Result<SymbolFrame> {
    let len = n * l;
    let mut buf = samples.to_vec();
    forward_plan(len).process(&mut buf);
    let scale = (n as f64).sqrt() / len as f64;
    let symbols = (0..n).map(|k| buf[oversampled_bin(k, n, l)] * scale).collect();
    SymbolFrame::new(symbols)
}

/// Prepends the last `cp_samples` samples of `signal`.
pub fn add_cyclic_prefix(signal: &TimeSignal, cp_samples: usize) -> Result<TimeSignal> {
    let n = signal.len();
    if cp_samples > n {
        return Err(Error::InvalidInput(format!(
            "cyclic prefix of {cp_samples} samples is longer than the {n}-sample symbol"
        )));
    }
    let mut out = Vec::with_capacity(n + cp_samples);
    out.extend_from_slice(&signal.samples()[n - cp_samples..]);
    out.extend_from_slice(signal.samples());
    Ok(signal.with_samples(out))
}

/// Drops the first `cp_samples` samples of `signal`.
pub fn remove_cyclic_prefix(signal: &TimeSignal, cp_samples: usize) -> Result<TimeSignal> {
    if cp_samples >= signal.len() {
        return Err(Error::InvalidInput(format!(
            "cannot strip {cp_samples} prefix samples from a {}-sample signal",
            signal.len()
        )));
    }
    Ok(signal.with_samples(signal.samples()[cp_samples..].to_vec()))
}
