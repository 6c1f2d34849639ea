//! Reference implementations written straight from the definitions, with
//! no FFT and no shared code paths with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Frequency of carrier `k` in cycles per `L * N` samples: carriers in the
/// upper half of the block sit at negative frequencies.
pub fn signed_freq(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// `x[t] = N^-1/2 * sum_k X_k exp(j 2 pi f_k t / (L N))` by direct summation.
pub fn direct_synthesis(x: &[Complex64], l: usize) -> Vec<Complex64> {
    let n = x.len();
    let len = (n * l) as f64;
    let scale = 1.0 / (n as f64).sqrt();
    (0..n * l)
        .map(|t| {
            x.iter()
                .enumerate()
                .map(|(k, &xk)| xk * Complex64::from_polar(1.0, 2.0 * PI * signed_freq(k, n) * t as f64 / len))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

pub fn papr_linear(samples: &[Complex64]) -> f64 {
    let peak = samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    let mean = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64;
    (peak / mean).max(1.0)
}

pub fn papr_db(samples: &[Complex64]) -> f64 {
    10.0 * papr_linear(samples).log10()
}

pub fn root(i: usize, w: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * i as f64 / w as f64)
}

/// Brute-force PTS: every phase vector with `b_1 = 1` in lexicographic
/// order (`b_2` most significant); a later candidate wins only if its PAPR
/// is below the incumbent by more than a relative `1e-9`.
/// Returns `(full phase indices, PAPR linear, candidates)`.
pub fn brute_force_pts(
    x: &[Complex64],
    assignment: &[usize],
    m: usize,
    w: usize,
    l: usize,
) -> (Vec<usize>, f64, u64) {
    let free = m - 1;
    let total = (w as u64).pow(free as u32);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for code in 0..total {
        let mut idx = vec![0usize; m];
        let mut rest = code;
        for j in (1..m).rev() {
            idx[j] = (rest % w as u64) as usize;
            rest /= w as u64;
        }
        let rotated: Vec<Complex64> = x
            .iter()
            .zip(assignment)
            .map(|(&s, &b)| s * root(idx[b], w))
            .collect();
        let p = papr_linear(&direct_synthesis(&rotated, l));
        match &best {
            Some((_, bp)) if !(p < bp * (1.0 - 1e-9)) => {}
            _ => best = Some((idx, p)),
        }
    }
    let (idx, p) = best.expect("at least one candidate");
    (idx, p, total)
}

/// Small deterministic generator so oracle inputs do not depend on the
/// library's seeding.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn qpsk(&mut self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| match self.next_u64() % 4 {
                0 => c(1.0, 0.0),
                1 => c(0.0, 1.0),
                2 => c(-1.0, 0.0),
                _ => c(0.0, -1.0),
            })
            .collect()
    }
}
