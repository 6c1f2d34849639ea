//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Lists are comma
//! separated. Unknown or repeated keys are rejected so that typos surface
//! instead of silently falling back to defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::channel::{delay_from_range, MultipathChannel, Tap};
use crate::error::{Error, Result};
use crate::modulation::ModulationScheme;
use crate::ofdm::{cp_samples_for, FrameConfig};
use crate::pts::{PartitionScheme, DEFAULT_SEARCH_BUDGET};

/// Delay of one channel tap, either in samples or as a path-length excess.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TapDelay {
    Samples(usize),
    RangeMeters(f64),
}

/// One `delay:gain_re:gain_im` entry of `channel_taps`. A delay ending in
/// `m` is a range in meters converted with the sound speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapSpec {
    pub delay: TapDelay,
    pub gain: Complex64,
}

impl fmt::Display for TapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.delay {
            TapDelay::Samples(d) => write!(f, "{d}")?,
            TapDelay::RangeMeters(r) => write!(f, "{r}m")?,
        }
        write!(f, ":{}:{}", self.gain.re, self.gain.im)
    }
}

impl FromStr for TapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split(':').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!(
                "tap '{s}' must look like <delay>[m]:<gain_re>:<gain_im>"
            )));
        }
        let delay = match fields[0].strip_suffix('m') {
            Some(r) => TapDelay::RangeMeters(parse_value("channel_taps", r)?),
            None => TapDelay::Samples(parse_value("channel_taps", fields[0])?),
        };
        Ok(TapSpec {
            delay,
            gain: Complex64::new(
                parse_value("channel_taps", fields[1])?,
                parse_value("channel_taps", fields[2])?,
            ),
        })
    }
}

/// Everything an experiment run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_subcarriers: usize,
    pub modulation: ModulationScheme,
    pub cp_time_s: f64,
    pub sample_rate: f64,
    pub bandwidth: f64,
    /// Transform size used to render the physical waveform; the rendering
    /// oversampling factor is `fft_points / n_subcarriers`.
    pub fft_points: usize,
    pub n_ofdm_symbols: usize,
    pub sound_speed: f64,
    /// Oversampling factor for PAPR measurement and PTS search.
    pub oversampling: usize,
    pub n_list: Vec<usize>,
    pub l_list: Vec<usize>,
    pub oversampling_n: usize,
    pub m_list: Vec<usize>,
    pub phase_factors: usize,
    pub partition: PartitionScheme,
    pub n_trials: usize,
    pub pts_trials: usize,
    pub seed: u64,
    pub ccdf_level: f64,
    pub search_budget: u64,
    pub ccdf_min_db: f64,
    pub ccdf_max_db: f64,
    pub ccdf_step_db: f64,
    pub roundtrip_m: usize,
    pub roundtrip_frames: usize,
    pub channel_taps: Vec<TapSpec>,
    pub channel_noise_power: f64,
    pub corrupt_side_info: bool,
    pub p_out_avg_w: f64,
    pub par_db_list: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 1024,
            modulation: ModulationScheme::Qpsk,
            cp_time_s: 0.025,
            sample_rate: 100_000.0,
            bandwidth: 6_250.0,
            fft_points: 8192,
            n_ofdm_symbols: 23,
            sound_speed: 1500.0,
            oversampling: 4,
            n_list: vec![64, 256, 1024],
            l_list: vec![1, 2, 4, 8],
            oversampling_n: 256,
            m_list: vec![1, 2, 4, 8, 16],
            phase_factors: 2,
            partition: PartitionScheme::Adjacent,
            n_trials: 100_000,
            pts_trials: 10_000,
            seed: 1,
            ccdf_level: 1e-3,
            search_budget: DEFAULT_SEARCH_BUDGET,
            ccdf_min_db: 0.0,
            ccdf_max_db: 14.0,
            ccdf_step_db: 0.1,
            roundtrip_m: 4,
            roundtrip_frames: 23,
            channel_taps: vec![
                TapSpec {
                    delay: TapDelay::Samples(0),
                    gain: Complex64::new(1.0, 0.0),
                },
                TapSpec {
                    delay: TapDelay::RangeMeters(15.0),
                    gain: Complex64::new(0.45, -0.2),
                },
            ],
            channel_noise_power: 0.0,
            corrupt_side_info: false,
            p_out_avg_w: 1.0,
            par_db_list: vec![11.0, 9.9, 8.88, 8.25, 7.55],
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse_value(key, v))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Every recognised key, in canonical order.
    pub const KEYS: &'static [&'static str] = &[
        "n_subcarriers",
        "modulation",
        "cp_time_s",
        "sample_rate",
        "bandwidth",
        "fft_points",
        "n_ofdm_symbols",
        "sound_speed",
        "oversampling",
        "n_list",
        "l_list",
        "oversampling_n",
        "m_list",
        "phase_factors",
        "partition",
        "n_trials",
        "pts_trials",
        "seed",
        "ccdf_level",
        "search_budget",
        "ccdf_min_db",
        "ccdf_max_db",
        "ccdf_step_db",
        "roundtrip_m",
        "roundtrip_frames",
        "channel_taps",
        "channel_noise_power",
        "corrupt_side_info",
        "p_out_avg_w",
        "par_db_list",
        "out_dir",
    ];

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "n_subcarriers" => self.n_subcarriers = parse_value(key, v)?,
            "modulation" => self.modulation = v.parse()?,
            "cp_time_s" => self.cp_time_s = parse_value(key, v)?,
            "sample_rate" => self.sample_rate = parse_value(key, v)?,
            "bandwidth" => self.bandwidth = parse_value(key, v)?,
            "fft_points" => self.fft_points = parse_value(key, v)?,
            "n_ofdm_symbols" => self.n_ofdm_symbols = parse_value(key, v)?,
            "sound_speed" => self.sound_speed = parse_value(key, v)?,
            "oversampling" => self.oversampling = parse_value(key, v)?,
            "n_list" => self.n_list = parse_list(key, v)?,
            "l_list" => self.l_list = parse_list(key, v)?,
            "oversampling_n" => self.oversampling_n = parse_value(key, v)?,
            "m_list" => self.m_list = parse_list(key, v)?,
            "phase_factors" => self.phase_factors = parse_value(key, v)?,
            "partition" => self.partition = v.parse()?,
            "n_trials" => self.n_trials = parse_value(key, v)?,
            "pts_trials" => self.pts_trials = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "ccdf_level" => self.ccdf_level = parse_value(key, v)?,
            "search_budget" => self.search_budget = parse_value(key, v)?,
            "ccdf_min_db" => self.ccdf_min_db = parse_value(key, v)?,
            "ccdf_max_db" => self.ccdf_max_db = parse_value(key, v)?,
            "ccdf_step_db" => self.ccdf_step_db = parse_value(key, v)?,
            "roundtrip_m" => self.roundtrip_m = parse_value(key, v)?,
            "roundtrip_frames" => self.roundtrip_frames = parse_value(key, v)?,
            "channel_taps" => self.channel_taps = parse_list(key, v)?,
            "channel_noise_power" => self.channel_noise_power = parse_value(key, v)?,
            "corrupt_side_info" => self.corrupt_side_info = parse_value(key, v)?,
            "p_out_avg_w" => self.p_out_avg_w = parse_value(key, v)?,
            "par_db_list" => self.par_db_list = parse_list(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Canonical `(key, value)` pairs; parsing them back yields `self`.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        Self::KEYS
            .iter()
            .map(|&k| {
                let v = match k {
                    "n_subcarriers" => self.n_subcarriers.to_string(),
                    "modulation" => self.modulation.to_string(),
                    "cp_time_s" => self.cp_time_s.to_string(),
                    "sample_rate" => self.sample_rate.to_string(),
                    "bandwidth" => self.bandwidth.to_string(),
                    "fft_points" => self.fft_points.to_string(),
                    "n_ofdm_symbols" => self.n_ofdm_symbols.to_string(),
                    "sound_speed" => self.sound_speed.to_string(),
                    "oversampling" => self.oversampling.to_string(),
                    "n_list" => join(&self.n_list),
                    "l_list" => join(&self.l_list),
                    "oversampling_n" => self.oversampling_n.to_string(),
                    "m_list" => join(&self.m_list),
                    "phase_factors" => self.phase_factors.to_string(),
                    "partition" => self.partition.to_string(),
                    "n_trials" => self.n_trials.to_string(),
                    "pts_trials" => self.pts_trials.to_string(),
                    "seed" => self.seed.to_string(),
                    "ccdf_level" => self.ccdf_level.to_string(),
                    "search_budget" => self.search_budget.to_string(),
                    "ccdf_min_db" => self.ccdf_min_db.to_string(),
                    "ccdf_max_db" => self.ccdf_max_db.to_string(),
                    "ccdf_step_db" => self.ccdf_step_db.to_string(),
                    "roundtrip_m" => self.roundtrip_m.to_string(),
                    "roundtrip_frames" => self.roundtrip_frames.to_string(),
                    "channel_taps" => join(&self.channel_taps),
                    "channel_noise_power" => self.channel_noise_power.to_string(),
                    "corrupt_side_info" => self.corrupt_side_info.to_string(),
                    "p_out_avg_w" => self.p_out_avg_w.to_string(),
                    "par_db_list" => join(&self.par_db_list),
                    "out_dir" => self.out_dir.display().to_string(),
                    _ => unreachable!("KEYS and entries() out of sync"),
                };
                (k, v)
            })
            .collect()
    }

    /// Config text in canonical order.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of the canonical text, excluding `out_dir` (where results
    /// go does not change what they are).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries() {
            if k != "out_dir" {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{kv}' is not key=value")))?;
        self.set(k.trim(), v)
    }

    pub fn frame_config(&self) -> FrameConfig {
        FrameConfig {
            n_subcarriers: self.n_subcarriers,
            scheme: self.modulation,
            cp_samples: self.cp_samples(),
            sample_rate: self.sample_rate,
            bandwidth: self.bandwidth,
            n_ofdm_symbols: self.n_ofdm_symbols,
            sound_speed: self.sound_speed,
        }
    }

    pub fn cp_samples(&self) -> usize {
        cp_samples_for(self.cp_time_s, self.sample_rate)
    }

    /// Oversampling factor of the physical waveform.
    pub fn render_oversampling(&self) -> Result<usize> {
        if self.fft_points < self.n_subcarriers || !self.fft_points.is_multiple_of(self.n_subcarriers) {
            return Err(Error::InvalidInput(format!(
                "fft_points {} is not a multiple of n_subcarriers {}",
                self.fft_points, self.n_subcarriers
            )));
        }
        Ok(self.fft_points / self.n_subcarriers)
    }

    /// The configured channel with ranges converted to sample delays.
    pub fn channel(&self) -> Result<MultipathChannel> {
        let taps = self
            .channel_taps
            .iter()
            .map(|t| {
                let delay_samples = match t.delay {
                    TapDelay::Samples(d) => d,
                    TapDelay::RangeMeters(r) => delay_from_range(r, self.sound_speed, self.sample_rate)?,
                };
                Ok(Tap {
                    delay_samples,
                    gain: t.gain,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MultipathChannel::new(taps, self.channel_noise_power, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.frame_config().validate()?;
        let positive = [
            ("oversampling", self.oversampling),
            ("oversampling_n", self.oversampling_n),
            ("phase_factors", self.phase_factors),
            ("n_trials", self.n_trials),
            ("pts_trials", self.pts_trials),
            ("roundtrip_m", self.roundtrip_m),
            ("roundtrip_frames", self.roundtrip_frames),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be >= 1")));
            }
        }
        for (name, list) in [("n_list", &self.n_list), ("l_list", &self.l_list), ("m_list", &self.m_list)] {
            if list.is_empty() || list.contains(&0) {
                return Err(Error::InvalidInput(format!("{name} must be a non-empty list of positive integers")));
            }
        }
        if let Some(n) = self
            .n_list
            .iter()
            .chain(std::iter::once(&self.oversampling_n))
            .find(|n| !n.is_power_of_two())
        {
            return Err(Error::InvalidInput(format!("subcarrier count {n} is not a power of two")));
        }
        if !(self.ccdf_level > 0.0 && self.ccdf_level < 1.0) {
            return Err(Error::InvalidInput(format!(
                "ccdf_level must lie in (0, 1), got {}",
                self.ccdf_level
            )));
        }
        if !(self.cp_time_s >= 0.0) {
            return Err(Error::InvalidInput("cp_time_s must be >= 0".into()));
        }
        if !(self.p_out_avg_w > 0.0) {
            return Err(Error::InvalidInput("p_out_avg_w must be positive".into()));
        }
        if self.channel_taps.is_empty() {
            return Err(Error::InvalidInput("channel_taps must list at least one tap".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::parse_str(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::parse_str("n_trails = 5\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn duplicate_key_rejected() {
        assert!(ExperimentConfig::parse_str("seed = 1\nseed = 2\n").is_err());
    }

    #[test]
    fn comments_and_lists() {
        let cfg = ExperimentConfig::parse_str(
            "# comment\n\nm_list = 1, 2,4\npartition = interleaved\nchannel_taps = 0:1:0, 37.5m:0.5:0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.m_list, vec![1, 2, 4]);
        assert_eq!(cfg.partition, PartitionScheme::Interleaved);
        let ch = cfg.channel().unwrap();
        assert_eq!(ch.taps()[1].delay_samples, 2500);
    }

    #[test]
    fn hash_ignores_out_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn table1_derived_quantities() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.cp_samples(), 2500);
        assert_eq!(cfg.render_oversampling().unwrap(), 8);
    }

    #[test]
    fn bad_level_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_override("ccdf_level=1.5").unwrap();
        assert!(cfg.validate().is_err());
        assert!(cfg.apply_override("ccdf_level").is_err());
    }
}
