//! Baseband OFDM simulation with partial transmit sequence (PTS) PAPR
//! reduction and a class-A amplifier energy model.
//!
//! The pipeline is built from small, pure pieces:
//!
//! * [`modulation`] maps bits onto BPSK / QPSK symbols and back,
//! * [`ofdm`] turns a frame of symbols into an (optionally oversampled)
//!   time signal, adds and strips cyclic prefixes and demodulates,
//! * [`papr`] measures peak-to-average power and builds CCDF curves,
//! * [`pts`] partitions frames, searches phase factors and codes the side
//!   information,
//! * [`power`] converts PAPR figures into amplifier efficiency and DC power,
//! * [`channel`] is a static multipath + noise channel for round trips,
//! * [`harness`] runs seeded Monte Carlo experiments and writes CSV / JSON.
//!
//! ```
//! use pts_ofdm::{modulation::*, ofdm::*, papr::*, pts::*};
//!
//! let bits = BitStream::new(vec![0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 0, 1, 1, 1]).unwrap();
//! let frame = map_symbols(&bits, ModulationScheme::Qpsk, 8).unwrap();
//! let plan = make_partition(8, 4, PartitionScheme::Adjacent, 0).unwrap();
//! let result = pts_exhaustive(&frame, &plan, &PhaseFactorSet::binary(), 4).unwrap();
//! assert!(result.papr_after.linear <= result.papr_before.linear);
//! assert_eq!(result.candidates_evaluated, 8);
//! ```

pub mod channel;
pub mod error;
pub mod harness;
pub mod modulation;
pub mod ofdm;
pub mod papr;
pub mod power;
pub mod pts;

pub use error::{Error, Result};
