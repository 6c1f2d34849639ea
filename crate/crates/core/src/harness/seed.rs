//! Counter-based seed derivation.
//!
//! Every random quantity is keyed by `(master, stream, index)` and seeded
//! independently, so trial `k` of any run can be regenerated on its own and
//! results cannot depend on how trials are scheduled across workers:
//!
//! ```text
//! seed = splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::modulation::{map_symbols, BitStream, ModulationScheme};
use crate::ofdm::SymbolFrame;

/// Independent random streams drawn from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Payload bits of Monte Carlo frame `k`.
    Frame,
    /// Pseudo-random partition for sub-block count `M`.
    Partition,
    /// Channel noise of round-trip frame `k`.
    Noise,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Frame => 0x6672_616d_6500_0001,
            Stream::Partition => 0x7061_7274_0000_0002,
            Stream::Noise => 0x6e6f_6973_6500_0003,
        }
    }
}

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream.tag())) ^ index)
}

/// Random payload of trial `index`, identical for every `L` and `M`.
pub fn trial_bits(master: u64, index: u64, n_bits: usize) -> BitStream {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, Stream::Frame, index));
    BitStream::random(n_bits, &mut rng)
}

pub fn trial_frame(
    master: u64,
    index: u64,
    scheme: ModulationScheme,
    n_subcarriers: usize,
) -> Result<SymbolFrame> {
    let bits = trial_bits(master, index, n_subcarriers * scheme.bits_per_symbol());
    map_symbols(&bits, scheme, n_subcarriers)
}
