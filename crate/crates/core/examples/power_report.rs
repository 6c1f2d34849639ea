//! Class-A amplifier efficiency and DC power for a list of PAPR values.
//!
//! cargo run --example power_report -- [P_out_avg_W] [PAPR_dB ...]

use pts_ofdm::papr::PaprValue;
use pts_ofdm::power::{amplifier_efficiency, PowerReport};

fn main() -> pts_ofdm::Result<()> {
    let mut args = std::env::args().skip(1);
    let p_out: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let mut pars: Vec<f64> = args.filter_map(|s| s.parse().ok()).collect();
    if pars.is_empty() {
        pars = vec![11.0, 9.9, 8.88, 8.25, 7.55];
    }
    let initial = PaprValue::from_db(pars[0])?;
    println!("P_out,avg = {p_out} W, reference PAPR {:.2} dB", initial.db);
    println!("{:>8} {:>10} {:>10} {:>10} {:>8}", "PAPR dB", "eta %", "P_DC W", "saved W", "G_s dB");
    for db in pars {
        let par = PaprValue::from_db(db)?;
        let r = PowerReport::new(p_out, &initial, &par)?;
        println!(
            "{:>8.2} {:>10.3} {:>10.3} {:>10.3} {:>8.2}",
            db,
            100.0 * amplifier_efficiency(&par)?,
            r.p_dc_final_w,
            r.p_savings_w,
            r.saving_gain_db
        );
    }
    Ok(())
}
