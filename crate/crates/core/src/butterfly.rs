//! The unified butterfly unit.
//!
//! One issue consumes twelve 16-bit input lanes and produces eight 16-bit
//! output lanes. Depending on the mode that is one complex FFT butterfly, two
//! ML-DSA butterflies or four ML-KEM butterflies. All three share the
//! multiplier and adder primitives in [`crate::fixed_point`]; only the
//! modular correction differs.
//!
//! Lane map (little-endian halves for 32-bit quantities):
//!
//! | lanes  | FFT              | ML-DSA             | ML-KEM      |
//! |--------|------------------|--------------------|-------------|
//! | 0..4   | a.re lo/hi, a.im | a0 lo/hi, a1 lo/hi | a0 a1 a2 a3 |
//! | 4..8   | b.re lo/hi, b.im | b0 lo/hi, b1 lo/hi | b0 b1 b2 b3 |
//! | 8..12  | w.re lo/hi, w.im | z0 lo/hi, z1 lo/hi | z0 z1 z2 z3 |
//!
//! Output lanes 0..4 carry the `a + w*b` results and lanes 4..8 the
//! `a - w*b` results, in the same layout as input lanes 0..4 and 4..8, so the
//! engine writes them straight back over the operands.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fixed_point::{
    add32_split, karatsuba32, mul16, quantize_product, signed_mul32, sub32_split, FixedComplex,
    Signedness, TwiddleComplex, Q16_15, Q1_30,
};
use crate::modring::{Modulus, ModulusConfig, Residue};

/// Operating mode, selected by a 2-bit external input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Fft,
    MlKem,
    MlDsa,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Fft, Mode::MlKem, Mode::MlDsa];

    /// The 2-bit selector value.
    pub fn selector(self) -> u8 {
        match self {
            Mode::Fft => 0b00,
            Mode::MlKem => 0b01,
            Mode::MlDsa => 0b10,
        }
    }

    /// Butterflies completed per issue.
    pub fn parallelism(self) -> usize {
        match self {
            Mode::Fft => 1,
            Mode::MlDsa => 2,
            Mode::MlKem => 4,
        }
    }

    pub fn modulus(self) -> Option<Modulus> {
        match self {
            Mode::Fft => None,
            Mode::MlKem => Some(Modulus::Kyber),
            Mode::MlDsa => Some(Modulus::Dilithium),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Fft => "fft",
            Mode::MlKem => "mlkem",
            Mode::MlDsa => "mldsa",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fft" => Ok(Mode::Fft),
            "mlkem" | "ml-kem" | "kyber" => Ok(Mode::MlKem),
            "mldsa" | "ml-dsa" | "dilithium" => Ok(Mode::MlDsa),
            other => Err(format!(
                "unknown mode `{other}` (expected fft, mlkem or mldsa)"
            )),
        }
    }
}

/// Timing metadata of the butterfly pipeline. Results are computed
/// atomically per issue; the engine consumes only the depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineModel {
    pub depth: u64,
    pub issue_rate: u64,
}

impl PipelineModel {
    pub const UNIFIED: PipelineModel = PipelineModel {
        depth: 9,
        issue_rate: 1,
    };

    /// Cycle at which an issue made at `cycle` leaves the pipeline.
    pub fn ready_at(&self, cycle: u64) -> u64 {
        cycle + self.depth
    }
}

pub const IN_LANES: usize = 12;
pub const OUT_LANES: usize = 8;

/// Twelve input lanes as presented to the unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LaneBundle {
    pub lanes: [u16; IN_LANES],
}

/// Result of one issue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IssueOutput {
    pub lanes: [u16; OUT_LANES],
    /// Signed overflow in an FFT adder (the result wrapped).
    pub overflow: bool,
}

/// Typed operands of one issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operands {
    Fft {
        a: FixedComplex,
        b: FixedComplex,
        w: TwiddleComplex,
    },
    /// `(a, b, zeta)` per butterfly.
    MlDsa([(u32, u32, u32); 2]),
    MlKem([(u32, u32, u32); 4]),
}

/// Typed results of one issue, `(a + zb, a - zb)` per butterfly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outputs {
    Fft(FixedComplex, FixedComplex),
    MlDsa([(u32, u32); 2]),
    MlKem([(u32, u32); 4]),
}

fn split(word: u32) -> [u16; 2] {
    [word as u16, (word >> 16) as u16]
}

fn join(lo: u16, hi: u16) -> u32 {
    u32::from(lo) | (u32::from(hi) << 16)
}

impl Operands {
    pub fn mode(&self) -> Mode {
        match self {
            Operands::Fft { .. } => Mode::Fft,
            Operands::MlDsa(_) => Mode::MlDsa,
            Operands::MlKem(_) => Mode::MlKem,
        }
    }

    pub fn pack(&self) -> LaneBundle {
        let mut lanes = [0u16; IN_LANES];
        match *self {
            Operands::Fft { a, b, w } => {
                let words = [
                    a.re.to_bits(),
                    a.im.to_bits(),
                    b.re.to_bits(),
                    b.im.to_bits(),
                    w.re.to_bits(),
                    w.im.to_bits(),
                ];
                for (i, word) in words.into_iter().enumerate() {
                    lanes[2 * i..2 * i + 2].copy_from_slice(&split(word));
                }
            }
            Operands::MlDsa(ops) => {
                for (i, (a, b, z)) in ops.into_iter().enumerate() {
                    lanes[2 * i..2 * i + 2].copy_from_slice(&split(a));
                    lanes[4 + 2 * i..6 + 2 * i].copy_from_slice(&split(b));
                    lanes[8 + 2 * i..10 + 2 * i].copy_from_slice(&split(z));
                }
            }
            Operands::MlKem(ops) => {
                for (i, (a, b, z)) in ops.into_iter().enumerate() {
                    lanes[i] = a as u16;
                    lanes[4 + i] = b as u16;
                    lanes[8 + i] = z as u16;
                }
            }
        }
        LaneBundle { lanes }
    }

    /// Reads a bundle back into typed operands, rejecting residues that are
    /// not reduced (which includes non-zero padding bits).
    pub fn unpack(mode: Mode, bundle: &LaneBundle) -> Result<Operands> {
        let l = &bundle.lanes;
        match mode {
            Mode::Fft => {
                let word = |i: usize| join(l[2 * i], l[2 * i + 1]);
                Ok(Operands::Fft {
                    a: FixedComplex::from_bits(word(0), word(1)),
                    b: FixedComplex::from_bits(word(2), word(3)),
                    w: TwiddleComplex::new(Q1_30(word(4) as i32), Q1_30(word(5) as i32)),
                })
            }
            Mode::MlDsa => {
                let q = ModulusConfig::DILITHIUM.q;
                let mut ops = [(0, 0, 0); 2];
                for (i, op) in ops.iter_mut().enumerate() {
                    let a = join(l[2 * i], l[2 * i + 1]);
                    let b = join(l[4 + 2 * i], l[5 + 2 * i]);
                    let z = join(l[8 + 2 * i], l[9 + 2 * i]);
                    check_reduced(mode, q, [a, b, z])?;
                    *op = (a, b, z);
                }
                Ok(Operands::MlDsa(ops))
            }
            Mode::MlKem => {
                let q = ModulusConfig::KYBER.q;
                let mut ops = [(0, 0, 0); 4];
                for (i, op) in ops.iter_mut().enumerate() {
                    let (a, b, z) = (u32::from(l[i]), u32::from(l[4 + i]), u32::from(l[8 + i]));
                    check_reduced(mode, q, [a, b, z])?;
                    *op = (a, b, z);
                }
                Ok(Operands::MlKem(ops))
            }
        }
    }
}

fn check_reduced(mode: Mode, q: u32, values: [u32; 3]) -> Result<()> {
    match values.iter().find(|&&v| v >= q) {
        Some(v) => Err(Error::Packing {
            mode,
            reason: format!("lane value {v} is not reduced modulo {q}"),
        }),
        None => Ok(()),
    }
}

impl Outputs {
    pub fn pack(&self) -> [u16; OUT_LANES] {
        let mut lanes = [0u16; OUT_LANES];
        match *self {
            Outputs::Fft(sum, diff) => {
                let words = [
                    sum.re.to_bits(),
                    sum.im.to_bits(),
                    diff.re.to_bits(),
                    diff.im.to_bits(),
                ];
                for (i, word) in words.into_iter().enumerate() {
                    lanes[2 * i..2 * i + 2].copy_from_slice(&split(word));
                }
            }
            Outputs::MlDsa(pairs) => {
                for (i, (sum, diff)) in pairs.into_iter().enumerate() {
                    lanes[2 * i..2 * i + 2].copy_from_slice(&split(sum));
                    lanes[4 + 2 * i..6 + 2 * i].copy_from_slice(&split(diff));
                }
            }
            Outputs::MlKem(pairs) => {
                for (i, (sum, diff)) in pairs.into_iter().enumerate() {
                    lanes[i] = sum as u16;
                    lanes[4 + i] = diff as u16;
                }
            }
        }
        lanes
    }

    pub fn unpack(mode: Mode, lanes: &[u16; OUT_LANES]) -> Outputs {
        let word = |i: usize| join(lanes[2 * i], lanes[2 * i + 1]);
        match mode {
            Mode::Fft => Outputs::Fft(
                FixedComplex::from_bits(word(0), word(1)),
                FixedComplex::from_bits(word(2), word(3)),
            ),
            Mode::MlDsa => Outputs::MlDsa([(word(0), word(2)), (word(1), word(3))]),
            Mode::MlKem => Outputs::MlKem(std::array::from_fn(|i| {
                (u32::from(lanes[i]), u32::from(lanes[4 + i]))
            })),
        }
    }
}

/// Complex butterfly `(a + wb, a - wb)` plus the signed-overflow flag of
/// any of its adders.
pub fn fft_butterfly_checked(
    a: FixedComplex,
    b: FixedComplex,
    w: TwiddleComplex,
) -> ((FixedComplex, FixedComplex), bool) {
    use Signedness::Signed;

    let rr = quantize_product(signed_mul32(w.re.0, b.re.0)).to_bits();
    let ii = quantize_product(signed_mul32(w.im.0, b.im.0)).to_bits();
    let ri = quantize_product(signed_mul32(w.re.0, b.im.0)).to_bits();
    let ir = quantize_product(signed_mul32(w.im.0, b.re.0)).to_bits();

    let t_re = sub32_split(rr, ii, Signed);
    let t_im = add32_split(ri, ir, Signed);
    let sum_re = add32_split(a.re.to_bits(), t_re.value, Signed);
    let sum_im = add32_split(a.im.to_bits(), t_im.value, Signed);
    let diff_re = sub32_split(a.re.to_bits(), t_re.value, Signed);
    let diff_im = sub32_split(a.im.to_bits(), t_im.value, Signed);

    let overflow = [t_re, t_im, sum_re, sum_im, diff_re, diff_im]
        .iter()
        .any(|r| r.overflow);
    let sum = FixedComplex::new(
        Q16_15::from_bits(sum_re.value),
        Q16_15::from_bits(sum_im.value),
    );
    let diff = FixedComplex::new(
        Q16_15::from_bits(diff_re.value),
        Q16_15::from_bits(diff_im.value),
    );
    ((sum, diff), overflow)
}

pub fn fft_butterfly(
    a: FixedComplex,
    b: FixedComplex,
    w: TwiddleComplex,
) -> (FixedComplex, FixedComplex) {
    fft_butterfly_checked(a, b, w).0
}

/// Sum and difference through the split adders, each followed by one
/// conditional correction.
fn mod_add_sub(cfg: &ModulusConfig, a: u32, t: u32) -> (u32, u32) {
    let sum = cfg.correct_sum(add32_split(a, t, Signedness::Unsigned).value);
    let diff = sub32_split(a, t, Signedness::Unsigned);
    let diff = if diff.overflow {
        add32_split(diff.value, cfg.q, Signedness::Unsigned).value
    } else {
        diff.value
    };
    (sum, diff)
}

/// ML-KEM butterfly on raw reduced values. The 12-bit operands ride a single
/// 16-bit multiplier.
#[inline]
pub fn kem_butterfly_raw(a: u32, b: u32, zeta: u32) -> (u32, u32) {
    let cfg = &ModulusConfig::KYBER;
    let t = cfg.reduce_product(u64::from(mul16(zeta as u16, b as u16)));
    mod_add_sub(cfg, a, t)
}

/// ML-DSA butterfly on raw reduced values. The 23-bit operands, zero-padded
/// to 32 bits, ride one Karatsuba multiplier.
#[inline]
pub fn dsa_butterfly_raw(a: u32, b: u32, zeta: u32) -> (u32, u32) {
    let cfg = &ModulusConfig::DILITHIUM;
    let t = cfg.reduce_product(karatsuba32(zeta, b));
    mod_add_sub(cfg, a, t)
}

fn typed_ntt_butterfly(
    modulus: Modulus,
    a: Residue,
    b: Residue,
    zeta: Residue,
    raw: fn(u32, u32, u32) -> (u32, u32),
) -> Result<(Residue, Residue)> {
    for r in [a, b, zeta] {
        if r.modulus() != modulus {
            return Err(Error::ModulusMismatch {
                left: modulus,
                right: r.modulus(),
            });
        }
    }
    let (sum, diff) = raw(a.value(), b.value(), zeta.value());
    Ok((Residue::new(sum, modulus)?, Residue::new(diff, modulus)?))
}

pub fn kem_butterfly(a: Residue, b: Residue, zeta: Residue) -> Result<(Residue, Residue)> {
    typed_ntt_butterfly(Modulus::Kyber, a, b, zeta, kem_butterfly_raw)
}

pub fn dsa_butterfly(a: Residue, b: Residue, zeta: Residue) -> Result<(Residue, Residue)> {
    typed_ntt_butterfly(Modulus::Dilithium, a, b, zeta, dsa_butterfly_raw)
}

/// Executes typed operands directly, bypassing lane packing.
pub fn execute(ops: &Operands) -> (Outputs, bool) {
    match *ops {
        Operands::Fft { a, b, w } => {
            let ((sum, diff), overflow) = fft_butterfly_checked(a, b, w);
            (Outputs::Fft(sum, diff), overflow)
        }
        Operands::MlDsa(ops) => (
            Outputs::MlDsa(ops.map(|(a, b, z)| dsa_butterfly_raw(a, b, z))),
            false,
        ),
        Operands::MlKem(ops) => (
            Outputs::MlKem(ops.map(|(a, b, z)| kem_butterfly_raw(a, b, z))),
            false,
        ),
    }
}

/// One issue of the unified unit.
pub fn issue(mode: Mode, bundle: &LaneBundle) -> Result<IssueOutput> {
    let ops = Operands::unpack(mode, bundle)?;
    let (outputs, overflow) = execute(&ops);
    Ok(IssueOutput {
        lanes: outputs.pack(),
        overflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed_point::{counters, MulCounters};

    fn c(re: f64, im: f64) -> FixedComplex {
        FixedComplex::from_f64(re, im)
    }

    #[test]
    fn fft_identity_twiddle() {
        let (a, b) = (c(1.5, -2.25), c(0.75, 3.0));
        assert_eq!(
            fft_butterfly(a, b, TwiddleComplex::ONE),
            (c(2.25, 0.75), c(0.75, -5.25))
        );
    }

    #[test]
    fn fft_zero_b() {
        let a = c(-3.0, 0.125);
        let w = TwiddleComplex::new(Q1_30(123_456_789), Q1_30(-987_654_321));
        assert_eq!(fft_butterfly(a, FixedComplex::ZERO, w), (a, a));
    }

    #[test]
    fn fft_minus_j_twiddle() {
        let w = TwiddleComplex::new(Q1_30::ZERO, Q1_30::NEG_ONE);
        let out = fft_butterfly(FixedComplex::ZERO, c(1.0, 0.0), w);
        assert_eq!(out, (c(0.0, -1.0), c(0.0, 1.0)));
    }

    #[test]
    fn kem_examples() {
        assert_eq!(kem_butterfly_raw(1, 0, 17), (1, 1));
        assert_eq!(kem_butterfly_raw(0, 1, 17), (17, 3312));
        assert_eq!(kem_butterfly_raw(1, 1, 3328), (0, 2));
    }

    #[test]
    fn dsa_examples() {
        assert_eq!(dsa_butterfly_raw(0, 1, 3_073_009), (3_073_009, 5_307_408));
        assert_eq!(dsa_butterfly_raw(4242, 0, 3_073_009), (4242, 4242));
        assert_eq!(dsa_butterfly_raw(1, 1, 8_380_416), (0, 2));
    }

    #[test]
    fn typed_butterflies_check_field() {
        let k = |v| Residue::new(v, Modulus::Kyber).unwrap();
        let d = |v| Residue::new(v, Modulus::Dilithium).unwrap();
        let (u, v) = kem_butterfly(k(0), k(1), k(17)).unwrap();
        assert_eq!((u.value(), v.value()), (17, 3312));
        assert!(kem_butterfly(k(0), d(1), k(17)).is_err());
        assert!(dsa_butterfly(d(0), d(1), k(17)).is_err());
    }

    #[test]
    fn issue_fft_identity() {
        let (a, b) = (c(1.0, 2.0), c(0.5, -0.5));
        let bundle = Operands::Fft {
            a,
            b,
            w: TwiddleComplex::ONE,
        }
        .pack();
        let out = issue(Mode::Fft, &bundle).unwrap();
        assert_eq!(
            Outputs::unpack(Mode::Fft, &out.lanes),
            Outputs::Fft(c(1.5, 1.5), c(0.5, 2.5))
        );
        assert!(!out.overflow);
    }

    #[test]
    fn issue_kem_four_copies() {
        let bundle = Operands::MlKem([(1, 0, 17); 4]).pack();
        let out = issue(Mode::MlKem, &bundle).unwrap();
        assert_eq!(
            Outputs::unpack(Mode::MlKem, &out.lanes),
            Outputs::MlKem([(1, 1); 4])
        );
    }

    #[test]
    fn issue_rejects_dirty_padding() {
        let mut bundle = Operands::MlKem([(1, 0, 17); 4]).pack();
        bundle.lanes[2] = 0x8001;
        assert!(matches!(
            issue(Mode::MlKem, &bundle),
            Err(Error::Packing { .. })
        ));
        let mut bundle = Operands::MlDsa([(1, 0, 17); 2]).pack();
        bundle.lanes[9] = 0x0100;
        assert!(matches!(
            issue(Mode::MlDsa, &bundle),
            Err(Error::Packing { .. })
        ));
    }

    #[test]
    fn multiplier_usage_per_mode() {
        let fft = Operands::Fft {
            a: c(1.0, 1.0),
            b: c(0.3, -0.7),
            w: TwiddleComplex::ONE,
        }
        .pack();
        let dsa = Operands::MlDsa([(1, 2, 3), (4, 5, 6)]).pack();
        let kem = Operands::MlKem([(1, 2, 3); 4]).pack();
        let cases = [
            (
                Mode::Fft,
                fft,
                MulCounters {
                    mul16: 12,
                    karatsuba32: 4,
                },
            ),
            (
                Mode::MlDsa,
                dsa,
                MulCounters {
                    mul16: 6,
                    karatsuba32: 2,
                },
            ),
            (
                Mode::MlKem,
                kem,
                MulCounters {
                    mul16: 4,
                    karatsuba32: 0,
                },
            ),
        ];
        for (mode, bundle, expected) in cases {
            let before = counters();
            issue(mode, &bundle).unwrap();
            assert_eq!(counters() - before, expected, "{mode}");
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("FFT".parse::<Mode>(), Ok(Mode::Fft));
        assert_eq!("mlkem".parse::<Mode>(), Ok(Mode::MlKem));
        assert_eq!("mldsa".parse::<Mode>(), Ok(Mode::MlDsa));
        assert!("ntt".parse::<Mode>().is_err());
        assert_eq!(PipelineModel::UNIFIED.ready_at(10), 19);
    }
}
