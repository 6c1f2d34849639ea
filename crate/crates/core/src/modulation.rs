//! Bit streams and the BPSK / QPSK constellation mappers.
//!
//! Both alphabets are unit-magnitude points on the real and imaginary axes:
//! BPSK uses `{+1, -1}` and QPSK uses `{1, j, -1, -j}`. QPSK bit pairs are
//! Gray ordered, so neighbouring points differ in a single bit:
//!
//! | bits | symbol |
//! |------|--------|
//! | 00   | 1      |
//! | 01   | j      |
//! | 11   | -1     |
//! | 10   | -j     |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::SymbolFrame;

/// An ordered sequence of binary digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BitStream(Vec<u8>);

impl BitStream {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidInput(format!(
                "bit {pos} has value {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self(bits))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random_range(0..2u8)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Number of positions where `self` and `other` differ; the tail of the
    /// longer stream counts as errors.
    pub fn hamming_distance(&self, other: &BitStream) -> usize {
        let common = self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count();
        common + self.0.len().abs_diff(other.0.len())
    }

    /// Flips bit `index` in place.
    pub fn flip(&mut self, index: usize) {
        self.0[index] ^= 1;
    }
}

impl TryFrom<Vec<u8>> for BitStream {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        BitStream::new(bits)
    }
}

impl From<BitStream> for Vec<u8> {
    fn from(bits: BitStream) -> Self {
        bits.0
    }
}

/// Constellation used to map bits onto subcarriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModulationScheme {
    Bpsk,
    Qpsk,
}

const BPSK_ALPHABET: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];

// Indexed by the bit pair read MSB first: 00, 01, 10, 11.
const QPSK_ALPHABET: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, -1.0),
    Complex64::new(-1.0, 0.0),
];

impl ModulationScheme {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModulationScheme::Bpsk => 1,
            ModulationScheme::Qpsk => 2,
        }
    }

    /// Alphabet indexed by the symbol's bit group read MSB first.
    pub fn alphabet(self) -> &'static [Complex64] {
        match self {
            ModulationScheme::Bpsk => &BPSK_ALPHABET,
            ModulationScheme::Qpsk => &QPSK_ALPHABET,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModulationScheme::Bpsk => "BPSK",
            ModulationScheme::Qpsk => "QPSK",
        }
    }

    /// Index of the alphabet point nearest to `point`.
    fn slice(self, point: Complex64) -> usize {
        match self {
            ModulationScheme::Bpsk => usize::from(point.re < 0.0),
            ModulationScheme::Qpsk => {
                // Decision regions are the quadrants rotated by 45 degrees.
                if point.re.abs() >= point.im.abs() {
                    if point.re >= 0.0 {
                        0
                    } else {
                        3
                    }
                } else if point.im >= 0.0 {
                    1
                } else {
                    2
                }
            }
        }
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModulationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(ModulationScheme::Bpsk),
            "qpsk" => Ok(ModulationScheme::Qpsk),
            other => Err(Error::InvalidInput(format!(
                "unknown modulation scheme '{other}' (expected BPSK or QPSK)"
            ))),
        }
    }
}

/// Maps `bits` onto one frame of `n_subcarriers` constellation points.
pub fn map_symbols(
    bits: &BitStream,
    scheme: ModulationScheme,
    n_subcarriers: usize,
) -> Result<SymbolFrame> {
    let k = scheme.bits_per_symbol();
    if bits.len() != n_subcarriers * k {
        return Err(Error::Sizing(format!(
            "{} bits cannot fill {n_subcarriers} {scheme} subcarriers ({} bits required)",
            bits.len(),
            n_subcarriers * k
        )));
    }
    let alphabet = scheme.alphabet();
    let symbols = bits
        .as_slice()
        .chunks_exact(k)
        .map(|group| {
            let index = group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            alphabet[index]
        })
        .collect();
    SymbolFrame::new(symbols)
}

/// Hard-decision demapper: each symbol is sliced to the nearest alphabet
/// point and expanded back into its bit group.
pub fn demap_symbols(frame: &SymbolFrame, scheme: ModulationScheme) -> BitStream {
    let k = scheme.bits_per_symbol();
    let mut bits = Vec::with_capacity(frame.len() * k);
    for &s in frame.symbols() {
        let index = scheme.slice(s);
        for shift in (0..k).rev() {
            bits.push(((index >> shift) & 1) as u8);
        }
    }
    BitStream(bits)
}
