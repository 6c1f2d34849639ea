//! Partial transmit sequences.
//!
//! A frame is split into `M` disjoint sub-blocks. Each sub-block is
//! modulated on its own (the partial sequences `x^m`), rotated by a phase
//! factor `b_m` drawn from `{exp(j*2*pi*i/W)}`, and the rotated sequences are
//! summed. The transmitter picks the phase vector with the lowest PAPR and
//! signals its indices to the receiver as side information. `b_1` is always
//! 1, so an exhaustive search visits `W^(M-1)` candidates.
//!
//! Candidates are ordered lexicographically by their phase indices with
//! `b_2` as the most significant digit. The searches return the first
//! candidate (in that order) whose peak power is minimal; peaks within a
//! relative [`TIE_TOLERANCE`] of each other count as equal.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::BitStream;
use crate::ofdm::{modulate_symbols, SymbolFrame, TimeSignal};
use crate::papr::{papr_of_samples, PaprValue};

/// Default cap on the number of candidates an exhaustive search may visit.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1 << 20;

/// Relative peak difference below which two candidates are tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

// Upper bound on the rows of the precomputed low-digit table, and on its
// size in bytes.
const LOW_TABLE_MAX_ROWS: usize = 256;
const LOW_TABLE_MAX_BYTES: usize = 64 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionScheme {
    /// Contiguous runs of subcarriers.
    Adjacent,
    /// Sub-block `m` owns carriers `m, m+M, m+2M, ...`.
    Interleaved,
    /// A seeded uniform permutation split into balanced runs.
    PseudoRandom,
}

impl PartitionScheme {
    pub fn name(self) -> &'static str {
        match self {
            PartitionScheme::Adjacent => "adjacent",
            PartitionScheme::Interleaved => "interleaved",
            PartitionScheme::PseudoRandom => "pseudo-random",
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "adjacent" => Ok(PartitionScheme::Adjacent),
            "interleaved" => Ok(PartitionScheme::Interleaved),
            "pseudo-random" | "pseudorandom" | "random" => Ok(PartitionScheme::PseudoRandom),
            other => Err(Error::InvalidInput(format!(
                "unknown partition scheme '{other}'"
            ))),
        }
    }
}

/// Assignment of every subcarrier to exactly one sub-block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    n_subcarriers: usize,
    n_subblocks: usize,
    scheme: PartitionScheme,
    assignment: Vec<usize>,
    seed: Option<u64>,
}

impl PartitionPlan {
    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_subblocks(&self) -> usize {
        self.n_subblocks
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }

    /// Sub-block index of each subcarrier.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Only set for [`PartitionScheme::PseudoRandom`].
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Subcarrier indices of each sub-block, ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.n_subblocks];
        for (k, &m) in self.assignment.iter().enumerate() {
            blocks[m].push(k);
        }
        blocks
    }

    fn check_frame(&self, frame: &SymbolFrame) -> Result<()> {
        if frame.len() != self.n_subcarriers {
            return Err(Error::Sizing(format!(
                "partition covers {} subcarriers, frame has {}",
                self.n_subcarriers,
                frame.len()
            )));
        }
        Ok(())
    }
}

/// Splits `n` subcarriers into `m` sub-blocks. When `m` does not divide `n`
/// the sub-block sizes differ by at most one. `seed` is only used by the
/// pseudo-random scheme.
pub fn make_partition(
    n: usize,
    m: usize,
    scheme: PartitionScheme,
    seed: u64,
) -> Result<PartitionPlan> {
    if m < 1 || m > n {
        return Err(Error::InvalidInput(format!(
            "cannot split {n} subcarriers into {m} non-empty sub-blocks"
        )));
    }
    // Balanced contiguous split: run `b` covers [b*n/m, (b+1)*n/m).
    let run_of = |pos: usize| -> usize { ((pos + 1) * m - 1) / n };
    let (assignment, seed) = match scheme {
        PartitionScheme::Adjacent => ((0..n).map(run_of).collect(), None),
        PartitionScheme::Interleaved => ((0..n).map(|k| k % m).collect(), None),
        PartitionScheme::PseudoRandom => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut assignment = vec![0; n];
            for (pos, &k) in order.iter().enumerate() {
                assignment[k] = run_of(pos);
            }
            (assignment, Some(seed))
        }
    };
    Ok(PartitionPlan {
        n_subcarriers: n,
        n_subblocks: m,
        scheme,
        assignment,
        seed,
    })
}

/// `exp(j*2*pi*i/w)`, exact on quarter turns.
fn unit_root(i: usize, w: usize) -> Complex64 {
    if (4 * i).is_multiple_of(w) {
        match (4 * i / w) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / w as f64)
    }
}

/// The `W` allowed rotations `exp(j*2*pi*i/W)`, `i = 0..W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFactorSet {
    values: Vec<Complex64>,
}

impl PhaseFactorSet {
    pub fn new(w: usize) -> Result<Self> {
        if w < 1 {
            return Err(Error::InvalidInput("phase factor set needs W >= 1".into()));
        }
        Ok(Self {
            values: (0..w).map(|i| unit_root(i, w)).collect(),
        })
    }

    /// `{+1, -1}`.
    pub fn binary() -> Self {
        Self::new(2).expect("W=2")
    }

    pub fn w(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn index_of(&self, b: Complex64) -> Option<usize> {
        self.values.iter().position(|v| (v - b).norm() < 1e-9)
    }

    /// Side-information bits per factor, `ceil(log2 W)`.
    pub fn bits_per_factor(&self) -> usize {
        self.w().next_power_of_two().trailing_zeros() as usize
    }
}

/// Rotation applied to each sub-block; the first factor is always 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    factors: Vec<Complex64>,
}

impl PhaseVector {
    pub fn new(factors: Vec<Complex64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("phase vector is empty".into()));
        }
        if let Some(b) = factors.iter().find(|b| (b.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidInput(format!(
                "phase factor {b} is not unit magnitude"
            )));
        }
        if (factors[0] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "first phase factor must be 1, got {}",
                factors[0]
            )));
        }
        Ok(Self { factors })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            factors: vec![Complex64::new(1.0, 0.0); m.max(1)],
        }
    }

    /// Full index list (one per sub-block, first must be 0).
    pub fn from_indices(indices: &[usize], phases: &PhaseFactorSet) -> Result<Self> {
        let factors = indices
            .iter()
            .map(|&i| {
                phases.values().get(i).copied().ok_or_else(|| {
                    Error::InvalidInput(format!("phase index {i} outside W={}", phases.w()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn factors(&self) -> &[Complex64] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn indices_in(&self, phases: &PhaseFactorSet) -> Result<Vec<usize>> {
        self.factors
            .iter()
            .map(|&b| {
                phases.index_of(b).ok_or_else(|| {
                    Error::InvalidInput(format!("phase factor {b} is not in the W={} set", phases.w()))
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchKind {
    Exhaustive,
    IterativeBinary,
}

/// Outcome of one PTS optimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct PtsResult {
    pub phase_vector: PhaseVector,
    pub phase_indices: Vec<usize>,
    /// Optimised waveform at the search oversampling factor.
    pub signal: TimeSignal,
    pub papr_before: PaprValue,
    pub papr_after: PaprValue,
    pub side_info_bits: BitStream,
    pub candidates_evaluated: u64,
    pub search: SearchKind,
    pub scheme: PartitionScheme,
    pub n_subblocks: usize,
    pub w: usize,
    pub seed: Option<u64>,
}

/// JSON form of a [`PtsResult`] without the waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtsSummary {
    pub scheme: PartitionScheme,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub seed: Option<u64>,
    pub search: SearchKind,
    pub phase_indices: Vec<usize>,
    pub papr_before_db: f64,
    pub papr_after_db: f64,
    pub candidates_evaluated: u64,
    pub side_info_bits: BitStream,
}

impl PtsResult {
    pub fn summary(&self) -> PtsSummary {
        PtsSummary {
            scheme: self.scheme,
            m: self.n_subblocks,
            w: self.w,
            seed: self.seed,
            search: self.search,
            phase_indices: self.phase_indices.clone(),
            papr_before_db: self.papr_before.db,
            papr_after_db: self.papr_after.db,
            candidates_evaluated: self.candidates_evaluated,
            side_info_bits: self.side_info_bits.clone(),
        }
    }
}

/// `W^(M-1)`, the number of phase vectors with `b_1 = 1`.
pub fn candidate_count(w: usize, m: usize) -> Result<u64> {
    if w < 1 || m < 1 {
        return Err(Error::InvalidInput(format!(
            "candidate count needs W >= 1 and M >= 1, got W={w}, M={m}"
        )));
    }
    let exp = u32::try_from(m - 1)
        .map_err(|_| Error::Overflow(format!("exponent M-1 = {} too large", m - 1)))?;
    (w as u64)
        .checked_pow(exp)
        .ok_or_else(|| Error::Overflow(format!("W^(M-1) = {w}^{exp} does not fit in 64 bits")))
}

/// Frame restricted to one sub-block: the other carriers are zeroed.
fn masked_symbols(frame: &SymbolFrame, plan: &PartitionPlan, block: usize) -> Vec<Complex64> {
    frame
        .symbols()
        .iter()
        .zip(plan.assignment())
        .map(|(&s, &m)| if m == block { s } else { Complex64::new(0.0, 0.0) })
        .collect()
}

/// The `M` partial sequences `x^m`: the modulation of the frame with every
/// carrier outside sub-block `m` set to zero. They sum to the full signal.
pub fn partial_sequences(
    frame: &SymbolFrame,
    plan: &PartitionPlan,
    l: usize,
) -> Result<Vec<TimeSignal>> {
    plan.check_frame(frame)?;
    if l == 0 {
        return Err(Error::InvalidInput("oversampling factor must be >= 1".into()));
    }
    (0..plan.n_subblocks())
        .map(|m| TimeSignal::new(modulate_symbols(&masked_symbols(frame, plan, m), l), 1.0, l))
        .collect()
}

fn apply_rotation(
    frame: &SymbolFrame,
    plan: &PartitionPlan,
    b: &PhaseVector,
    conjugate: bool,
) -> Result<SymbolFrame> {
    plan.check_frame(frame)?;
    if b.len() != plan.n_subblocks() {
        return Err(Error::Sizing(format!(
            "phase vector has {} factors, partition has {} sub-blocks",
            b.len(),
            plan.n_subblocks()
        )));
    }
    let symbols = frame
        .symbols()
        .iter()
        .zip(plan.assignment())
        .map(|(&s, &m)| {
            let f = b.factors()[m];
            s * if conjugate { f.conj() } else { f }
        })
        .collect();
    SymbolFrame::new(symbols)
}

/// Transmitter side: multiplies each sub-block by its phase factor.
pub fn rotate_frame(frame: &SymbolFrame, plan: &PartitionPlan, b: &PhaseVector) -> Result<SymbolFrame> {
    apply_rotation(frame, plan, b, false)
}

/// Receiver side: undoes [`rotate_frame`] by multiplying each sub-block by
/// the conjugate of its phase factor.
pub fn receiver_derotate(
    frame: &SymbolFrame,
    plan: &PartitionPlan,
    b: &PhaseVector,
) -> Result<SymbolFrame> {
    apply_rotation(frame, plan, b, true)
}

/// Index encoding of `b_2 .. b_M`, `ceil(log2 W)` bits each, MSB first.
pub fn encode_side_info(b: &PhaseVector, phases: &PhaseFactorSet) -> Result<BitStream> {
    let indices = b.indices_in(phases)?;
    let k = phases.bits_per_factor();
    let mut bits = Vec::with_capacity((indices.len() - 1) * k);
    for &i in &indices[1..] {
        for shift in (0..k).rev() {
            bits.push(((i >> shift) & 1) as u8);
        }
    }
    BitStream::new(bits)
}

pub fn decode_side_info(bits: &BitStream, m: usize, phases: &PhaseFactorSet) -> Result<PhaseVector> {
    if m < 1 {
        return Err(Error::InvalidInput("M must be >= 1".into()));
    }
    let k = phases.bits_per_factor();
    let expected = (m - 1) * k;
    if bits.len() != expected {
        return Err(Error::Sizing(format!(
            "side information has {} bits, expected {expected} for M={m}, W={}",
            bits.len(),
            phases.w()
        )));
    }
    let mut indices = vec![0usize];
    if k > 0 {
        for group in bits.as_slice().chunks_exact(k) {
            indices.push(group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize));
        }
    } else {
        indices.extend(std::iter::repeat_n(0, m - 1));
    }
    PhaseVector::from_indices(&indices, phases)
}

/// Split-complex buffer; keeps the inner loops free of shuffles.
#[derive(Clone)]
struct Planar {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Planar {
    fn zeros(len: usize) -> Self {
        Self {
            re: vec![0.0; len],
            im: vec![0.0; len],
        }
    }

    fn from_complex(v: &[Complex64]) -> Self {
        Self {
            re: v.iter().map(|c| c.re).collect(),
            im: v.iter().map(|c| c.im).collect(),
        }
    }

    /// `self = base + b * part`.
    fn set_rotated_sum(&mut self, base: &Planar, part: &Planar, b: Complex64) {
        let (br, bi) = (b.re, b.im);
        for i in 0..self.re.len() {
            let (pr, pi) = (part.re[i], part.im[i]);
            self.re[i] = base.re[i] + (pr * br - pi * bi);
            self.im[i] = base.im[i] + (pr * bi + pi * br);
        }
    }

    fn add_rotated(&mut self, part: &Planar, b: Complex64) {
        let (br, bi) = (b.re, b.im);
        for i in 0..self.re.len() {
            let (pr, pi) = (part.re[i], part.im[i]);
            self.re[i] += pr * br - pi * bi;
            self.im[i] += pr * bi + pi * br;
        }
    }
}

const LANES: usize = 8;
const CHUNK: usize = 32;

#[inline(always)]
fn chunk_peak(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> f64 {
    if let (Ok(ar), Ok(ai), Ok(br), Ok(bi)) = (
        <&[f64; CHUNK]>::try_from(ar),
        <&[f64; CHUNK]>::try_from(ai),
        <&[f64; CHUNK]>::try_from(br),
        <&[f64; CHUNK]>::try_from(bi),
    ) {
        let mut lane = [0.0f64; LANES];
        for base in (0..CHUNK).step_by(LANES) {
            for j in 0..LANES {
                let re = ar[base + j] + br[base + j];
                let im = ai[base + j] + bi[base + j];
                let p = re * re + im * im;
                lane[j] = if p > lane[j] { p } else { lane[j] };
            }
        }
        return lane.iter().fold(0.0, |m, &v| if v > m { v } else { m });
    }
    let mut peak = 0.0f64;
    for j in 0..ar.len() {
        let re = ar[j] + br[j];
        let im = ai[j] + bi[j];
        peak = peak.max(re * re + im * im);
    }
    peak
}

/// Peak of `|a + b|^2`, or `Err(i)` as soon as sample `i` reaches
/// `threshold`.
#[inline]
fn peak_below(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], threshold: f64) -> std::result::Result<f64, usize> {
    let mut peak = 0.0f64;
    let n = ar.len();
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let p = chunk_peak(&ar[start..end], &ai[start..end], &br[start..end], &bi[start..end]);
        if p >= threshold {
            let hit = (start..end)
                .find(|&i| {
                    let (re, im) = (ar[i] + br[i], ai[i] + bi[i]);
                    re * re + im * im >= threshold
                })
                .unwrap_or(start);
            return Err(hit);
        }
        if p > peak {
            peak = p;
        }
        start = end;
    }
    Ok(peak)
}

/// Sample positions that recently disqualified candidates. Checking them
/// first rejects most candidates after a handful of samples.
struct HotSamples {
    slots: [usize; 8],
    next: usize,
}

impl HotSamples {
    fn new() -> Self {
        Self {
            slots: [0; 8],
            next: 0,
        }
    }

    #[inline]
    fn rejects(&self, ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], threshold: f64) -> bool {
        self.slots.iter().any(|&i| {
            let (re, im) = (ar[i] + br[i], ai[i] + bi[i]);
            re * re + im * im >= threshold
        })
    }

    fn record(&mut self, i: usize) {
        if !self.slots.contains(&i) {
            self.slots[self.next] = i;
            self.next = (self.next + 1) % self.slots.len();
        }
    }
}

fn peak_power(x: &Planar) -> f64 {
    let zeros = vec![0.0; x.re.len()];
    peak_below(&x.re, &x.im, &zeros, &zeros, f64::INFINITY).expect("infinite threshold")
}

#[inline]
fn improves(peak: f64, best: f64) -> bool {
    peak < best * (1.0 - TIE_TOLERANCE)
}

/// Digits of `index` in base `w`, most significant first.
fn digits_of(mut index: u64, w: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = (index % w as u64) as usize;
        index /= w as u64;
    }
    d
}

/// Exhaustive lexicographic search. Returns the phase indices of sub-blocks
/// `2..=M` and the winning peak power.
///
/// The free digits are split into a high group, enumerated directly, and a
/// low group whose rotated sums are tabulated once. Each candidate is then
/// `high_sum + low_row`, scanned with early exit against the best peak so
/// far. Visiting order is exactly the lexicographic candidate order.
fn exhaustive_search(parts: &[Planar], phases: &[Complex64]) -> (Vec<usize>, f64) {
    let m = parts.len();
    let free = m - 1;
    let w = phases.len();
    let len = parts[0].re.len();

    let mut low = 0usize;
    let mut rows = 1usize;
    while low < free
        && rows * w <= LOW_TABLE_MAX_ROWS.max(w)
        && rows * w * len * 32 <= LOW_TABLE_MAX_BYTES
    {
        low += 1;
        rows *= w;
    }
    let high = free - low;

    WORKSPACE.with(|ws| {
        let mut ws = ws.borrow_mut();
        ws.build(&parts[1 + high..], phases, len);
        search_with_table(parts, phases, high, &ws)
    })
}

/// Rotated sums of the low sub-blocks for every low-digit combination, in
/// two layouts: row-major (one candidate contiguous) for full scans and
/// column-major (one sample position contiguous) for screening.
///
/// Row `r` holds the digits of `r` in base `W` on the low sub-blocks, most
/// significant first. Both layouts are filled by the same operation
/// sequence, so they hold bit-identical values.
#[derive(Default)]
struct LowTable {
    rows: usize,
    len: usize,
    row_re: Vec<f64>,
    row_im: Vec<f64>,
    col_re: Vec<f64>,
    col_im: Vec<f64>,
}

thread_local! {
    static WORKSPACE: std::cell::RefCell<LowTable> = std::cell::RefCell::new(LowTable::default());
}

/// Doubling step on one segment: `seg[d*n + r] = seg[r] + b_d * p`.
#[inline]
fn expand(seg_re: &mut [f64], seg_im: &mut [f64], n: usize, phases: &[Complex64], pr: f64, pi: f64) {
    for d in (0..phases.len()).rev() {
        let (br, bi) = (phases[d].re, phases[d].im);
        let (ar, ai) = (pr * br - pi * bi, pr * bi + pi * br);
        for r in 0..n {
            seg_re[d * n + r] = seg_re[r] + ar;
            seg_im[d * n + r] = seg_im[r] + ai;
        }
    }
}

impl LowTable {
    fn build(&mut self, low_parts: &[Planar], phases: &[Complex64], len: usize) {
        let w = phases.len();
        let rows = w.pow(low_parts.len() as u32);
        let size = rows * len;
        for v in [&mut self.row_re, &mut self.row_im, &mut self.col_re, &mut self.col_im] {
            if v.len() < size {
                v.resize(size, 0.0);
            }
        }
        self.rows = rows;
        self.len = len;

        for i in 0..len {
            let seg_re = &mut self.col_re[i * rows..][..rows];
            let seg_im = &mut self.col_im[i * rows..][..rows];
            seg_re[0] = 0.0;
            seg_im[0] = 0.0;
            let mut n = 1;
            for part in low_parts.iter().rev() {
                expand(seg_re, seg_im, n, phases, part.re[i], part.im[i]);
                n *= w;
            }
        }

        self.row_re[..len].fill(0.0);
        self.row_im[..len].fill(0.0);
        let mut n = 1;
        for part in low_parts.iter().rev() {
            for d in (0..w).rev() {
                let (br, bi) = (phases[d].re, phases[d].im);
                for r in 0..n {
                    let (src, dst) = (r * len, (d * n + r) * len);
                    for i in 0..len {
                        let (pr, pi) = (part.re[i], part.im[i]);
                        let (ar, ai) = (pr * br - pi * bi, pr * bi + pi * br);
                        self.row_re[dst + i] = self.row_re[src + i] + ar;
                        self.row_im[dst + i] = self.row_im[src + i] + ai;
                    }
                }
            }
            n *= w;
        }
    }

    fn row(&self, r: usize) -> (&[f64], &[f64]) {
        let at = r * self.len;
        (&self.row_re[at..][..self.len], &self.row_im[at..][..self.len])
    }

    fn column(&self, i: usize) -> (&[f64], &[f64]) {
        let at = i * self.rows;
        (&self.col_re[at..][..self.rows], &self.col_im[at..][..self.rows])
    }
}

fn search_with_table(parts: &[Planar], phases: &[Complex64], high: usize, table: &LowTable) -> (Vec<usize>, f64) {
    let w = phases.len();
    let len = table.len;
    let n_rows = table.rows;
    let free = parts.len() - 1;
    let high_count = (w as u64).pow(high as u32);
    let mut head = Planar::zeros(len);
    let mut screen = vec![0.0f64; n_rows];
    let mut best_peak = f64::INFINITY;
    let mut best_index = 0u64;
    let mut hot = HotSamples::new();
    for h in 0..high_count {
        let digits = digits_of(h, w, high);
        head.re.copy_from_slice(&parts[0].re);
        head.im.copy_from_slice(&parts[0].im);
        for (j, &d) in digits.iter().enumerate() {
            head.add_rotated(&parts[1 + j], phases[d]);
        }
        // Lower bound on every row's peak from the positions where the head
        // is loudest. The threshold only ever decreases, so a row whose
        // bound already reaches it can be skipped without a full scan.
        screen.fill(0.0);
        for i in loudest_samples(&head, SCREEN_SAMPLES) {
            let (hr, hi) = (head.re[i], head.im[i]);
            let (cr, ci) = table.column(i);
            for ((s, &lr), &li) in screen.iter_mut().zip(cr).zip(ci) {
                let (re, im) = (hr + lr, hi + li);
                let p = re * re + im * im;
                *s = if p > *s { p } else { *s };
            }
        }
        for (r, &bound) in screen.iter().enumerate() {
            let threshold = best_peak * (1.0 - TIE_TOLERANCE);
            if bound >= threshold {
                continue;
            }
            let (lr, li) = table.row(r);
            if hot.rejects(&head.re, &head.im, lr, li, threshold) {
                continue;
            }
            match peak_below(&head.re, &head.im, lr, li, threshold) {
                Ok(p) => {
                    best_peak = p;
                    best_index = h * n_rows as u64 + r as u64;
                }
                Err(i) => hot.record(i),
            }
        }
    }
    (digits_of(best_index, w, free), best_peak)
}

const SCREEN_SAMPLES: usize = 64;

/// Indices of the `k` largest-magnitude samples of `x`.
fn loudest_samples(x: &Planar, k: usize) -> Vec<usize> {
    let power: Vec<f64> = x.re.iter().zip(&x.im).map(|(r, i)| r * r + i * i).collect();
    let mut idx: Vec<usize> = (0..power.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k, |&a, &b| power[b].total_cmp(&power[a]));
        idx.truncate(k);
    }
    idx
}

fn planar_parts(frame: &SymbolFrame, plan: &PartitionPlan, l: usize) -> Vec<Planar> {
    (0..plan.n_subblocks())
        .map(|m| Planar::from_complex(&modulate_symbols(&masked_symbols(frame, plan, m), l)))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    frame: &SymbolFrame,
    plan: &PartitionPlan,
    phases: &PhaseFactorSet,
    l: usize,
    free_indices: Vec<usize>,
    candidates_evaluated: u64,
    search: SearchKind,
) -> Result<PtsResult> {
    let mut phase_indices = vec![0usize];
    phase_indices.extend(free_indices);
    let phase_vector = PhaseVector::from_indices(&phase_indices, phases)?;
    let papr_before = papr_of_samples(&modulate_symbols(frame.symbols(), l))?;
    let rotated = rotate_frame(frame, plan, &phase_vector)?;
    let signal = TimeSignal::new(modulate_symbols(rotated.symbols(), l), 1.0, l)?;
    let papr_after = papr_of_samples(signal.samples())?;
    let side_info_bits = encode_side_info(&phase_vector, phases)?;
    Ok(PtsResult {
        phase_vector,
        phase_indices,
        signal,
        papr_before,
        papr_after,
        side_info_bits,
        candidates_evaluated,
        search,
        scheme: plan.scheme(),
        n_subblocks: plan.n_subblocks(),
        w: phases.w(),
        seed: plan.seed(),
    })
}

fn check_search_inputs(frame: &SymbolFrame, plan: &PartitionPlan, l: usize) -> Result<()> {
    plan.check_frame(frame)?;
    if l == 0 {
        return Err(Error::InvalidInput("oversampling factor must be >= 1".into()));
    }
    if frame.mean_power() == 0.0 {
        return Err(Error::InvalidInput(
            "PAPR is undefined for an all-zero frame".into(),
        ));
    }
    Ok(())
}

/// Exhaustive search with the [`DEFAULT_SEARCH_BUDGET`].
pub fn pts_exhaustive(
    frame: &SymbolFrame,
    plan: &PartitionPlan,
    phases: &PhaseFactorSet,
    l: usize,
) -> Result<PtsResult> {
    pts_exhaustive_with_budget(frame, plan, phases, l, DEFAULT_SEARCH_BUDGET)
}

/// Visits all `W^(M-1)` phase vectors and returns the lexicographically
/// first one with minimal PAPR at oversampling `l`.
pub fn pts_exhaustive_with_budget(
    frame: &SymbolFrame,
    plan: &PartitionPlan,
    phases: &PhaseFactorSet,
    l: usize,
    budget: u64,
) -> Result<PtsResult> {
    check_search_inputs(frame, plan, l)?;
    let w = phases.w();
    let m = plan.n_subblocks();
    if w < 2 {
        return Err(Error::InvalidInput(format!("exhaustive search needs W >= 2, got {w}")));
    }
    let candidates = match candidate_count(w, m) {
        Ok(c) if c <= budget => c,
        Ok(c) => {
            return Err(Error::Budget {
                candidates: c as u128,
                w,
                m,
                budget,
            })
        }
        Err(_) => {
            return Err(Error::Budget {
                candidates: (w as u128).saturating_pow((m - 1) as u32),
                w,
                m,
                budget,
            })
        }
    };
    let parts = planar_parts(frame, plan, l);
    let (free, _) = exhaustive_search(&parts, phases.values());
    finish(frame, plan, phases, l, free, candidates, SearchKind::Exhaustive)
}

/// One greedy pass over binary phase factors: starting from all `+1`, flip
/// `b_m` to `-1` for `m = 2..M` and keep each flip only if it lowers the
/// peak. Evaluates `M - 1` trial flips.
pub fn pts_iterative_binary(frame: &SymbolFrame, plan: &PartitionPlan, l: usize) -> Result<PtsResult> {
    check_search_inputs(frame, plan, l)?;
    let parts = planar_parts(frame, plan, l);
    let len = parts[0].re.len();
    let mut current = Planar::zeros(len);
    for p in &parts {
        current.add_rotated(p, Complex64::new(1.0, 0.0));
    }
    let mut current_peak = peak_power(&current);
    let mut trial = Planar::zeros(len);
    let zeros = vec![0.0; len];
    let mut free = vec![0usize; parts.len() - 1];
    for (j, part) in parts.iter().enumerate().skip(1) {
        trial.set_rotated_sum(&current, part, Complex64::new(-2.0, 0.0));
        let threshold = current_peak * (1.0 - TIE_TOLERANCE);
        if let Ok(p) = peak_below(&trial.re, &trial.im, &zeros, &zeros, threshold) {
            if improves(p, current_peak) {
                std::mem::swap(&mut current, &mut trial);
                current_peak = p;
                free[j - 1] = 1;
            }
        }
    }
    let evaluated = (parts.len() - 1) as u64;
    finish(
        frame,
        plan,
        &PhaseFactorSet::binary(),
        l,
        free,
        evaluated,
        SearchKind::IterativeBinary,
    )
}
