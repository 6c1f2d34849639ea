//! The eight-carrier BPSK block split into four adjacent pairs, searched
//! over all eight binary phase vectors. Prints every candidate so the
//! choice can be checked by hand.
//!
//! cargo run --example eight_carrier_search

use num_complex::Complex64;
use pts_ofdm::ofdm::SymbolFrame;
use pts_ofdm::papr::papr_of_frame;
use pts_ofdm::pts::*;

fn main() -> pts_ofdm::Result<()> {
    let x = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, -1.0, -1.0];
    let frame = SymbolFrame::new(x.iter().map(|&v| Complex64::new(v, 0.0)).collect())?;
    let plan = make_partition(8, 4, PartitionScheme::Adjacent, 0)?;
    let phases = PhaseFactorSet::binary();
    let l = 4;

    println!("X = {x:?}, original PAPR {:.3} dB", papr_of_frame(&frame, l)?.db);
    for idx in 0..candidate_count(2, 4)? as usize {
        let indices = [0, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
        let b = PhaseVector::from_indices(&indices, &phases)?;
        let p = papr_of_frame(&rotate_frame(&frame, &plan, &b)?, l)?;
        let signs: Vec<i32> = b.factors().iter().map(|f| f.re as i32).collect();
        println!("  b = {signs:>2?}  PAPR {:.3} dB", p.db);
    }

    let r = pts_exhaustive(&frame, &plan, &phases, l)?;
    let chosen: Vec<i32> = r.phase_vector.factors().iter().map(|f| f.re as i32).collect();
    let out = rotate_frame(&frame, &plan, &r.phase_vector)?;
    let tx: Vec<i32> = out.symbols().iter().map(|s| s.re as i32).collect();
    println!("chosen b = {chosen:?}, side info {:?}", r.side_info_bits.as_slice());
    println!("transmitted block {tx:?}");
    println!(
        "PAPR {:.3} dB -> {:.3} dB after {} candidates",
        r.papr_before.db, r.papr_after.db, r.candidates_evaluated
    );
    Ok(())
}
