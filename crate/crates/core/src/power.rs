//! Class-A power amplifier energy model.
//!
//! With a peak-to-average ratio `PAR` (linear), the amplifier has to be
//! backed off so that peaks stay in its linear region, and its efficiency
//! drops from the 50 % class-A ceiling to
//!
//! ```text
//! eta  = 0.5 / PAR
//! P_DC = P_out,avg / eta = 2 * P_out,avg * PAR
//! ```
//!
//! Lowering the ratio from `PAR_i` to `PAR_f` saves
//! `2 * P_out,avg * (PAR_i - PAR_f)` of DC power. The saving gain
//! `G_s = 2 * (PAR_i - PAR_f)` is reported on the dB values, the way
//! PAPR tables are normally quoted; everything else uses linear ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::papr::PaprValue;

fn check_par(par: &PaprValue) -> Result<()> {
    if !(par.linear.is_finite() && par.linear >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "PAR must be >= 1 (linear), got {}",
            par.linear
        )));
    }
    Ok(())
}

fn check_power(p_out_avg: f64) -> Result<()> {
    if !(p_out_avg.is_finite() && p_out_avg > 0.0) {
        return Err(Error::InvalidInput(format!(
            "average output power must be positive, got {p_out_avg}"
        )));
    }
    Ok(())
}

/// `0.5 / PAR`, in `(0, 0.5]`.
pub fn amplifier_efficiency(par: &PaprValue) -> Result<f64> {
    check_par(par)?;
    Ok(0.5 / par.linear)
}

/// DC supply power `2 * P_out,avg * PAR`.
pub fn dc_power(p_out_avg: f64, par: &PaprValue) -> Result<f64> {
    check_power(p_out_avg)?;
    check_par(par)?;
    Ok(2.0 * p_out_avg * par.linear)
}

/// DC power saved by reducing the ratio from `par_initial` to `par_final`.
pub fn power_savings(p_out_avg: f64, par_initial: &PaprValue, par_final: &PaprValue) -> Result<f64> {
    check_power(p_out_avg)?;
    check_par(par_initial)?;
    check_par(par_final)?;
    if par_final.linear > par_initial.linear {
        return Err(Error::InvalidInput(format!(
            "final PAR {} exceeds initial PAR {}",
            par_final.linear, par_initial.linear
        )));
    }
    Ok(2.0 * p_out_avg * (par_initial.linear - par_final.linear))
}

/// Saving gain `2 * (PAR_i[dB] - PAR_f[dB])`.
pub fn saving_gain(par_initial: &PaprValue, par_final: &PaprValue) -> Result<f64> {
    check_par(par_initial)?;
    check_par(par_final)?;
    Ok(2.0 * (par_initial.db - par_final.db))
}

/// Every quantity of the energy model for one before/after pair.
///
/// Field suffixes carry the unit: `_w` watts (or the caller's power unit),
/// `_ratio` dimensionless linear, `_db` decibels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub p_out_avg_w: f64,
    pub par_initial_linear: f64,
    pub par_initial_db: f64,
    pub par_final_linear: f64,
    pub par_final_db: f64,
    pub efficiency_initial_ratio: f64,
    pub efficiency_final_ratio: f64,
    pub p_dc_initial_w: f64,
    pub p_dc_final_w: f64,
    pub p_savings_w: f64,
    /// Saving gain on the dB-difference basis.
    pub saving_gain_db: f64,
    /// Input back-off, taken equal to the PAR in dB. Informational only.
    pub ibo_initial_db: f64,
    pub ibo_final_db: f64,
}

impl PowerReport {
    pub fn new(p_out_avg: f64, par_initial: &PaprValue, par_final: &PaprValue) -> Result<Self> {
        Ok(Self {
            p_out_avg_w: p_out_avg,
            par_initial_linear: par_initial.linear,
            par_initial_db: par_initial.db,
            par_final_linear: par_final.linear,
            par_final_db: par_final.db,
            efficiency_initial_ratio: amplifier_efficiency(par_initial)?,
            efficiency_final_ratio: amplifier_efficiency(par_final)?,
            p_dc_initial_w: dc_power(p_out_avg, par_initial)?,
            p_dc_final_w: dc_power(p_out_avg, par_final)?,
            p_savings_w: power_savings(p_out_avg, par_initial, par_final)?,
            saving_gain_db: saving_gain(par_initial, par_final)?,
            ibo_initial_db: par_initial.db,
            ibo_final_db: par_final.db,
        })
    }
}
