//! Fixed-point words and the shared wide-integer datapath.
//!
//! Every butterfly mode funnels its multiplications through [`mul16`]: the
//! 32-bit multiplier is a Karatsuba arrangement of three 16-bit multipliers,
//! and signed products wrap it with two's-complement converters. 32-bit
//! additions are composed from two 16-bit adders with carry propagation.
//!
//! Multiplier activations are tallied in thread-local counters so tests can
//! check how much of the shared pool each mode uses (see [`counters`]).

use std::cell::Cell;
use std::fmt;

thread_local! {
    static MUL16_CALLS: Cell<u64> = const { Cell::new(0) };
    static KARATSUBA_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Snapshot of the calling thread's multiplier activation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MulCounters {
    pub mul16: u64,
    pub karatsuba32: u64,
}

impl std::ops::Sub for MulCounters {
    type Output = MulCounters;
    fn sub(self, rhs: MulCounters) -> MulCounters {
        MulCounters {
            mul16: self.mul16 - rhs.mul16,
            karatsuba32: self.karatsuba32 - rhs.karatsuba32,
        }
    }
}

/// Reads the current thread's counters. Take a snapshot before and after a
/// region and subtract.
pub fn counters() -> MulCounters {
    MulCounters {
        mul16: MUL16_CALLS.with(Cell::get),
        karatsuba32: KARATSUBA_CALLS.with(Cell::get),
    }
}

/// Signed 32-bit word with 15 fractional bits.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Q16_15(pub i32);

/// Signed 32-bit word with 30 fractional bits.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Q1_30(pub i32);

impl Q16_15 {
    pub const FRAC_BITS: u32 = 15;
    pub const ONE: Q16_15 = Q16_15(1 << 15);
    pub const ZERO: Q16_15 = Q16_15(0);
    pub const MIN_VALUE: f64 = -65536.0;
    pub const MAX_VALUE: f64 = 65536.0 - 1.0 / 32768.0;

    pub fn from_bits(bits: u32) -> Self {
        Q16_15(bits as i32)
    }

    pub fn to_bits(self) -> u32 {
        self.0 as u32
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / f64::from(1u32 << Self::FRAC_BITS)
    }

    /// Nearest representable value (ties away from zero), saturating at the
    /// ends of the range.
    pub fn from_f64(value: f64) -> Self {
        let scaled = (value * f64::from(1u32 << Self::FRAC_BITS)).round();
        Q16_15(scaled.clamp(f64::from(i32::MIN), f64::from(i32::MAX)) as i32)
    }
}

impl Q1_30 {
    pub const FRAC_BITS: u32 = 30;
    pub const ONE: Q1_30 = Q1_30(1 << 30);
    pub const NEG_ONE: Q1_30 = Q1_30(-(1 << 30));
    pub const ZERO: Q1_30 = Q1_30(0);

    pub fn to_bits(self) -> u32 {
        self.0 as u32
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / f64::from(1u32 << Self::FRAC_BITS)
    }

    pub fn from_f64(value: f64) -> Self {
        let scaled = (value * f64::from(1u32 << Self::FRAC_BITS)).round();
        Q1_30(scaled.clamp(f64::from(i32::MIN), f64::from(i32::MAX)) as i32)
    }
}

impl fmt::Debug for Q16_15 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q16_15({:#010x} = {})", self.0 as u32, self.to_f64())
    }
}

impl fmt::Debug for Q1_30 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q1_30({:#010x} = {})", self.0 as u32, self.to_f64())
    }
}

/// Complex sample with Q16.15 parts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FixedComplex {
    pub re: Q16_15,
    pub im: Q16_15,
}

impl FixedComplex {
    pub const ZERO: FixedComplex = FixedComplex {
        re: Q16_15::ZERO,
        im: Q16_15::ZERO,
    };

    pub fn new(re: Q16_15, im: Q16_15) -> Self {
        FixedComplex { re, im }
    }

    pub fn from_bits(re: u32, im: u32) -> Self {
        FixedComplex::new(Q16_15::from_bits(re), Q16_15::from_bits(im))
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        FixedComplex::new(Q16_15::from_f64(re), Q16_15::from_f64(im))
    }

    pub fn to_f64(self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Complex twiddle with Q1.30 parts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TwiddleComplex {
    pub re: Q1_30,
    pub im: Q1_30,
}

impl TwiddleComplex {
    pub const ONE: TwiddleComplex = TwiddleComplex {
        re: Q1_30::ONE,
        im: Q1_30::ZERO,
    };

    pub fn new(re: Q1_30, im: Q1_30) -> Self {
        TwiddleComplex { re, im }
    }

    pub fn conj(self) -> Self {
        TwiddleComplex::new(self.re, Q1_30(self.im.0.wrapping_neg()))
    }
}

/// The 16x16 multiplier primitive every wider product is built from.
#[inline]
pub fn mul16(a: u16, b: u16) -> u32 {
    MUL16_CALLS.with(|c| c.set(c.get() + 1));
    u32::from(a) * u32::from(b)
}

/// 32x32 -> 64 unsigned product from exactly three [`mul16`] activations.
///
/// The middle operands `a_hi + a_lo` and `b_hi + b_lo` are 17 bits wide. Their
/// low 16 bits go through the multiplier; each carry bit contributes the
/// opposite 16-bit operand shifted left by 16.
pub fn karatsuba32(a: u32, b: u32) -> u64 {
    KARATSUBA_CALLS.with(|c| c.set(c.get() + 1));
    let (a_hi, a_lo) = ((a >> 16) as u16, a as u16);
    let (b_hi, b_lo) = ((b >> 16) as u16, b as u16);

    let high = u64::from(mul16(a_hi, b_hi));
    let low = u64::from(mul16(a_lo, b_lo));

    let sum_a = u32::from(a_hi) + u32::from(a_lo);
    let sum_b = u32::from(b_hi) + u32::from(b_lo);
    let (carry_a, sum_a_lo) = (sum_a >> 16, sum_a as u16);
    let (carry_b, sum_b_lo) = (sum_b >> 16, sum_b as u16);

    let mut middle = u64::from(mul16(sum_a_lo, sum_b_lo));
    if carry_a != 0 {
        middle += u64::from(sum_b_lo) << 16;
    }
    if carry_b != 0 {
        middle += u64::from(sum_a_lo) << 16;
    }
    if carry_a & carry_b != 0 {
        middle += 1 << 32;
    }
    let cross = middle - high - low;

    (high << 32) + (cross << 16) + low
}

/// Signed 32x32 -> 64 product: magnitudes through [`karatsuba32`], sign
/// restored by a 64-bit two's-complement converter.
pub fn signed_mul32(a: i32, b: i32) -> i64 {
    let magnitude = karatsuba32(a.unsigned_abs(), b.unsigned_abs());
    if (a < 0) != (b < 0) {
        magnitude.wrapping_neg() as i64
    } else {
        magnitude as i64
    }
}

/// How overflow is judged by the split adders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signedness {
    Signed,
    Unsigned,
}

/// Result of a split 32-bit add or subtract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddResult {
    pub value: u32,
    /// Signed overflow (signed mode) or carry/borrow out (unsigned mode).
    pub overflow: bool,
}

/// 32-bit add built from two 16-bit adders; the low half's carry feeds the
/// high half.
pub fn add32_split(a: u32, b: u32, mode: Signedness) -> AddResult {
    let lo = (a & 0xFFFF) + (b & 0xFFFF);
    let carry = lo >> 16;
    let hi = (a >> 16) + (b >> 16) + carry;
    let value = (hi << 16) | (lo & 0xFFFF);
    let overflow = match mode {
        Signedness::Unsigned => hi >> 16 != 0,
        Signedness::Signed => {
            let (sa, sb, sr) = (a >> 31, b >> 31, value >> 31);
            sa == sb && sr != sa
        }
    };
    AddResult { value, overflow }
}

/// 32-bit subtract built from two 16-bit subtractors with borrow
/// propagation.
pub fn sub32_split(a: u32, b: u32, mode: Signedness) -> AddResult {
    let (lo, borrow_lo) = ((a & 0xFFFF) as u16).overflowing_sub(b as u16);
    let (hi, borrow_a) = ((a >> 16) as u16).overflowing_sub((b >> 16) as u16);
    let (hi, borrow_b) = hi.overflowing_sub(u16::from(borrow_lo));
    let value = (u32::from(hi) << 16) | u32::from(lo);
    let overflow = match mode {
        Signedness::Unsigned => borrow_a || borrow_b,
        Signedness::Signed => {
            let (sa, sb, sr) = (a >> 31, b >> 31, value >> 31);
            sa != sb && sr != sa
        }
    };
    AddResult { value, overflow }
}

/// Renormalizes a Q16.15 x Q1.30 product (45 fractional bits) back to
/// Q16.15 by an arithmetic shift of 30. Truncates toward negative infinity;
/// bits above 32 are dropped.
#[inline]
pub fn quantize_product(product: i64) -> Q16_15 {
    Q16_15((product >> Q1_30::FRAC_BITS) as i32)
}
