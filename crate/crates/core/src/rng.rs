//! Seeded test-vector generation.
//!
//! Vectors come from SplitMix64 so that any implementation can regenerate the
//! same corpus from a seed:
//!
//! ```text
//! state += 0x9e3779b97f4a7c15
//! z = state
//! z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//! z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//! return z ^ (z >> 31)
//! ```
//!
//! Residues are `next() % q`. FFT samples draw the real part, then the
//! imaginary part, each as `(next() % 65537) - 32768` in Q16.15 bits, which
//! covers [-1.0, 1.0].

use crate::butterfly::Mode;
use crate::fixed_point::{FixedComplex, Q16_15};
use crate::memory::{Signal, FFT_POINTS, NTT_POINTS};
use crate::modring::{Modulus, Polynomial};

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn unit_q16_15(&mut self) -> Q16_15 {
        Q16_15((self.next_u64() % 65_537) as i32 - 32_768)
    }
}

pub fn random_poly(modulus: Modulus, seed: u64) -> Polynomial {
    let mut rng = SplitMix64::new(seed);
    let q = u64::from(modulus.q());
    let coeffs = (0..NTT_POINTS)
        .map(|_| (rng.next_u64() % q) as u32)
        .collect();
    Polynomial::new(modulus, coeffs).expect("reduced by construction")
}

/// 512 samples with both parts in [-1.0, 1.0].
pub fn random_fft_input(seed: u64) -> Vec<FixedComplex> {
    let mut rng = SplitMix64::new(seed);
    (0..FFT_POINTS)
        .map(|_| {
            let re = rng.unit_q16_15();
            let im = rng.unit_q16_15();
            FixedComplex::new(re, im)
        })
        .collect()
}

/// 512 samples with `|x| <= 1`, drawn like [`random_fft_input`] and
/// rejecting points outside the unit disk.
pub fn random_unit_disk_input(seed: u64) -> Vec<FixedComplex> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(FFT_POINTS);
    while out.len() < FFT_POINTS {
        let (re, im) = (rng.unit_q16_15(), rng.unit_q16_15());
        if i64::from(re.0).pow(2) + i64::from(im.0).pow(2) <= 1 << 30 {
            out.push(FixedComplex::new(re, im));
        }
    }
    out
}

pub fn random_signal(mode: Mode, seed: u64) -> Signal {
    match mode.modulus() {
        None => Signal::Complex(random_fft_input(seed)),
        Some(m) => Signal::Poly(random_poly(m, seed)),
    }
}
