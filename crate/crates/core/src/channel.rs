//! Static tapped-delay-line multipath with additive Gaussian noise.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::{oversampled_bin, SymbolFrame, TimeSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay_samples: usize,
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipathChannel {
    taps: Vec<Tap>,
    noise_power: f64,
    seed: u64,
}

impl MultipathChannel {
    /// Taps must be listed with non-decreasing delays.
    pub fn new(taps: Vec<Tap>, noise_power: f64, seed: u64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidInput("channel needs at least one tap".into()));
        }
        if taps.windows(2).any(|w| w[1].delay_samples < w[0].delay_samples) {
            return Err(Error::InvalidInput(
                "tap delays must be non-decreasing".into(),
            ));
        }
        if !(noise_power.is_finite() && noise_power >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise power must be >= 0, got {noise_power}"
            )));
        }
        Ok(Self {
            taps,
            noise_power,
            seed,
        })
    }

    /// Single unit tap without noise.
    pub fn identity() -> Self {
        Self {
            taps: vec![Tap {
                delay_samples: 0,
                gain: Complex64::new(1.0, 0.0),
            }],
            noise_power: 0.0,
            seed: 0,
        }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_delay(&self) -> usize {
        self.taps.last().map_or(0, |t| t.delay_samples)
    }

    /// Same taps and noise level, different noise seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Response `H[k] = sum g * exp(-j*2*pi*k'*d / (L*N))` seen by each of
    /// the `n_subcarriers` carriers of an `L`-times oversampled symbol.
    pub fn frequency_response(&self, n_subcarriers: usize, l: usize) -> Vec<Complex64> {
        let len = (n_subcarriers * l) as f64;
        (0..n_subcarriers)
            .map(|k| {
                let bin = oversampled_bin(k, n_subcarriers, l) as f64;
                self.taps
                    .iter()
                    .map(|t| {
                        let ph = -2.0 * std::f64::consts::PI * bin * t.delay_samples as f64 / len;
                        t.gain * Complex64::from_polar(1.0, ph)
                    })
                    .sum()
            })
            .collect()
    }
}

/// `y[n] = sum_taps g * x[n - d] + w[n]`, truncated to the input length.
/// The noise is circularly-symmetric Gaussian with variance `noise_power`
/// and is fully determined by the channel seed.
pub fn apply_channel(signal: &TimeSignal, ch: &MultipathChannel) -> TimeSignal {
    let x = signal.samples();
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for tap in &ch.taps {
        if tap.delay_samples >= x.len() {
            continue;
        }
        for (out, &inp) in y[tap.delay_samples..].iter_mut().zip(x) {
            *out += tap.gain * inp;
        }
    }
    if ch.noise_power > 0.0 {
        let normal = Normal::new(0.0, (ch.noise_power / 2.0).sqrt()).expect("finite std");
        let mut rng = ChaCha8Rng::seed_from_u64(ch.seed);
        for v in &mut y {
            *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    signal.with_samples(y)
}

/// One-tap zero-forcing equalizer.
pub fn equalize(frame: &SymbolFrame, response: &[Complex64]) -> Result<SymbolFrame> {
    if response.len() != frame.len() {
        return Err(Error::Sizing(format!(
            "{} channel coefficients for {} subcarriers",
            response.len(),
            frame.len()
        )));
    }
    let symbols = frame
        .symbols()
        .iter()
        .zip(response)
        .map(|(y, h)| {
            if h.norm_sqr() == 0.0 {
                Err(Error::InvalidInput("channel has a spectral null".into()))
            } else {
                Ok(y / h)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SymbolFrame::new(symbols)
}

/// Propagation delay in samples, `round(range / c * fs)`.
pub fn delay_from_range(range_m: f64, sound_speed: f64, sample_rate: f64) -> Result<usize> {
    if !(range_m > 0.0 && sound_speed > 0.0 && sample_rate > 0.0) {
        return Err(Error::InvalidInput(format!(
            "range, sound speed and sample rate must be positive (got {range_m}, {sound_speed}, {sample_rate})"
        )));
    }
    Ok((range_m / sound_speed * sample_rate).round() as usize)
}
