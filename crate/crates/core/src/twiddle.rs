//! Twiddle tables and their ROM images.
//!
//! FFT twiddles are `exp(-2*pi*j*k/512)` rounded to Q1.30. The NTT zetas
//! follow the bit-reversed ordering of the ML-KEM and ML-DSA standards:
//! `17^brv7(k) mod 3329` and `1753^brv8(k) mod 8380417`.

use std::f64::consts::PI;

use crate::butterfly::Mode;
use crate::fixed_point::{TwiddleComplex, Q1_30};
use crate::memory::{bit_reverse, RomImage, TwiddleRom, FFT_POINTS};
use crate::modring::ModulusConfig;

pub const KYBER_ROOT: u32 = 17;
pub const DILITHIUM_ROOT: u32 = 1753;

pub const FFT_TWIDDLES: usize = 512;
pub const KYBER_ZETAS: usize = 128;
pub const DILITHIUM_ZETAS: usize = 256;

/// First ROM row of the Kyber zeta pairs in the NTT image.
pub const KYBER_ROM_BASE: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwiddleTable {
    Fft(Vec<TwiddleComplex>),
    MlKem(Vec<u32>),
    MlDsa(Vec<u32>),
}

impl TwiddleTable {
    pub fn mode(&self) -> Mode {
        match self {
            TwiddleTable::Fft(_) => Mode::Fft,
            TwiddleTable::MlKem(_) => Mode::MlKem,
            TwiddleTable::MlDsa(_) => Mode::MlDsa,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TwiddleTable::Fft(t) => t.len(),
            TwiddleTable::MlKem(t) | TwiddleTable::MlDsa(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `(cos, sin)` of `2*pi*k/512`, folded into the first octant so that
/// symmetric angles produce bit-identical values.
fn unit_circle(k: usize) -> (f64, f64) {
    let n = FFT_POINTS;
    let k = k % n;
    // angle = 2*pi*k/n; reduce by quadrant, then octant
    let quadrant = k / (n / 4);
    let r = k % (n / 4);
    let eighth = n / 8;
    let (c, s) = if r <= eighth {
        let t = 2.0 * PI * r as f64 / n as f64;
        (t.cos(), t.sin())
    } else {
        let t = 2.0 * PI * (n / 4 - r) as f64 / n as f64;
        (t.sin(), t.cos())
    };
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

pub fn gen_fft_twiddles() -> TwiddleTable {
    TwiddleTable::Fft(
        (0..FFT_TWIDDLES)
            .map(|k| {
                let (c, s) = unit_circle(k);
                TwiddleComplex::new(Q1_30::from_f64(c), Q1_30::from_f64(-s))
            })
            .collect(),
    )
}

pub fn gen_kyber_zetas() -> TwiddleTable {
    let cfg = &ModulusConfig::KYBER;
    TwiddleTable::MlKem(
        (0..KYBER_ZETAS)
            .map(|k| cfg.pow(KYBER_ROOT, bit_reverse(k, 7) as u64))
            .collect(),
    )
}

pub fn gen_dilithium_zetas() -> TwiddleTable {
    let cfg = &ModulusConfig::DILITHIUM;
    TwiddleTable::MlDsa(
        (0..DILITHIUM_ZETAS)
            .map(|k| cfg.pow(DILITHIUM_ROOT, bit_reverse(k, 8) as u64))
            .collect(),
    )
}

/// FFT image: twiddle `k` at rows `2k` (real) and `2k + 1` (imaginary).
pub fn fft_rom() -> TwiddleRom {
    let TwiddleTable::Fft(table) = gen_fft_twiddles() else {
        unreachable!()
    };
    let rows: Vec<u32> = table
        .iter()
        .flat_map(|w| [w.re.to_bits(), w.im.to_bits()])
        .collect();
    TwiddleRom::from_rows(RomImage::Fft, &rows)
}

/// NTT image: Dilithium zetas zero-padded to 32 bits at rows 0..256, then
/// Kyber zeta pairs (even entry in the low half) at rows 256..320.
pub fn ntt_rom() -> TwiddleRom {
    let (TwiddleTable::MlDsa(dil), TwiddleTable::MlKem(kyber)) =
        (gen_dilithium_zetas(), gen_kyber_zetas())
    else {
        unreachable!()
    };
    let mut rows = dil;
    rows.extend(kyber.chunks_exact(2).map(|p| p[0] | (p[1] << 16)));
    TwiddleRom::from_rows(RomImage::Ntt, &rows)
}

pub fn rom_for(mode: Mode) -> TwiddleRom {
    match RomImage::for_mode(mode) {
        RomImage::Fft => fft_rom(),
        RomImage::Ntt => ntt_rom(),
    }
}

/// ROM rows holding twiddle or zeta `index` for `mode`.
pub fn rom_rows(mode: Mode, index: usize) -> [usize; 2] {
    match mode {
        Mode::Fft => [2 * index, 2 * index + 1],
        Mode::MlDsa => [index, index],
        Mode::MlKem => {
            let row = KYBER_ROM_BASE + index / 2;
            [row, row]
        }
    }
}

/// Decodes twiddle `index` from the row words returned by [`rom_rows`].
pub fn decode(mode: Mode, index: usize, words: [u32; 2]) -> (u32, u32) {
    match mode {
        Mode::Fft => (words[0], words[1]),
        Mode::MlDsa => (words[0], 0),
        Mode::MlKem => ((words[0] >> (16 * (index & 1))) & 0xFFFF, 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_examples() {
        let TwiddleTable::Fft(t) = gen_fft_twiddles() else {
            panic!()
        };
        assert_eq!(t.len(), 512);
        assert_eq!((t[0].re.to_bits(), t[0].im.to_bits()), (0x4000_0000, 0));
        assert_eq!((t[128].re.to_bits(), t[128].im.to_bits()), (0, 0xC000_0000));
        // round(2^30 / sqrt 2) = (isqrt(2^61) + 1) / 2 since isqrt(2^61) = 1518500249 is odd
        assert_eq!((t[64].re.0, t[64].im.0), (759_250_125, -759_250_125));
    }

    #[test]
    fn fft_conjugate_symmetry_is_bit_exact() {
        let TwiddleTable::Fft(t) = gen_fft_twiddles() else {
            panic!()
        };
        for k in 1..256 {
            assert_eq!(t[512 - k], t[k].conj(), "k = {k}");
        }
    }

    #[test]
    fn kyber_examples() {
        let TwiddleTable::MlKem(z) = gen_kyber_zetas() else {
            panic!()
        };
        assert_eq!(z.len(), 128);
        assert_eq!(z[0], 1);
        assert_eq!(z[1], 1729); // 17^64 mod 3329
        assert_eq!(&z[..8], &[1, 1729, 2580, 3289, 2642, 630, 1897, 848]);
    }

    #[test]
    fn dilithium_examples() {
        let TwiddleTable::MlDsa(z) = gen_dilithium_zetas() else {
            panic!()
        };
        assert_eq!(z.len(), 256);
        assert_eq!(&z[..4], &[1, 4_808_194, 3_765_607, 3_761_513]);
        assert_eq!(1753u32 * 1753, 3_073_009);
    }

    #[test]
    fn rom_images() {
        let fft = fft_rom();
        assert_eq!(
            (fft.populated(), fft.row(0), fft.row(1)),
            (1024, 0x4000_0000, 0)
        );
        let ntt = ntt_rom();
        assert_eq!(ntt.populated(), 320);
        assert_eq!(ntt.row(0), 1);
        assert_eq!(ntt.row(256), 1 | (1729 << 16));
        assert_eq!(decode(Mode::MlKem, 1, [ntt.row(256); 2]).0, 1729);
    }
}
