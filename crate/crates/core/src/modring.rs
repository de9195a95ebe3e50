//! Arithmetic modulo the two NTT primes.
//!
//! Products are reduced with Barrett reduction; sums and differences need at
//! most one conditional subtraction or addition of `q`.

use crate::error::{Error, Result};

/// Parameters of one prime field and its Barrett reducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModulusConfig {
    pub q: u32,
    /// Barrett shift: `2 * width`, wide enough to cover any product of two
    /// reduced coefficients.
    pub k: u32,
    /// `floor(2^k / q)`
    pub m: u64,
    /// Coefficient width in bits.
    pub width: u32,
}

impl ModulusConfig {
    pub const KYBER: ModulusConfig = ModulusConfig::new(3329, 12);
    pub const DILITHIUM: ModulusConfig = ModulusConfig::new(8_380_417, 23);

    const fn new(q: u32, width: u32) -> Self {
        let k = 2 * width;
        ModulusConfig {
            q,
            k,
            m: (1u64 << k) / q as u64,
            width,
        }
    }

    /// `floor(x * m / 2^k)`, the quotient estimate. At most two below the
    /// true quotient.
    #[inline]
    pub fn barrett_quotient(&self, x: u64) -> u64 {
        ((u128::from(x) * u128::from(self.m)) >> self.k) as u64
    }

    /// Barrett reduction of a product of two reduced coefficients. Inputs
    /// wider than `2 * width` bits are a caller bug.
    #[inline]
    pub fn reduce_product(&self, x: u64) -> u32 {
        debug_assert!(x >> self.k == 0, "Barrett input {x} too wide");
        let q = u64::from(self.q);
        let mut r = x - self.barrett_quotient(x) * q;
        if r >= q {
            r -= q;
        }
        if r >= q {
            r -= q;
        }
        r as u32
    }

    /// One conditional subtraction; `x < 2q`.
    #[inline]
    pub fn correct_sum(&self, x: u32) -> u32 {
        if x >= self.q {
            x - self.q
        } else {
            x
        }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.correct_sum(a + b)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a < b {
            a + self.q - b
        } else {
            a - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce_product(u64::from(a) * u64::from(b))
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        let mut base = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

/// Which of the two NTT fields a residue lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulus {
    Kyber,
    Dilithium,
}

impl Modulus {
    pub fn config(self) -> &'static ModulusConfig {
        match self {
            Modulus::Kyber => &ModulusConfig::KYBER,
            Modulus::Dilithium => &ModulusConfig::DILITHIUM,
        }
    }

    pub fn q(self) -> u32 {
        self.config().q
    }
}

/// A reduced element of `Z_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u32,
    modulus: Modulus,
}

impl Residue {
    pub fn new(value: u32, modulus: Modulus) -> Result<Self> {
        if value >= modulus.q() {
            return Err(Error::Unreduced { value, modulus });
        }
        Ok(Residue { value, modulus })
    }

    pub fn zero(modulus: Modulus) -> Self {
        Residue { value: 0, modulus }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    fn same_field(self, other: Residue) -> Result<&'static ModulusConfig> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Ok(self.modulus.config())
    }
}

/// Coefficient vector over one of the NTT fields; every entry is reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    modulus: Modulus,
    coeffs: Vec<u32>,
}

impl Polynomial {
    pub const DEGREE: usize = 256;

    pub fn new(modulus: Modulus, coeffs: Vec<u32>) -> Result<Self> {
        if let Some(&value) = coeffs.iter().find(|&&c| c >= modulus.q()) {
            return Err(Error::Unreduced { value, modulus });
        }
        Ok(Polynomial { modulus, coeffs })
    }

    pub fn zero(modulus: Modulus) -> Self {
        Polynomial {
            modulus,
            coeffs: vec![0; Self::DEGREE],
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn into_coeffs(self) -> Vec<u32> {
        self.coeffs
    }
}

/// Reduces a product of two reduced coefficients.
pub fn barrett_reduce(x: u64, modulus: Modulus) -> Result<Residue> {
    let cfg = modulus.config();
    if x >> cfg.k != 0 {
        return Err(Error::BarrettRange {
            value: x,
            bits: cfg.k,
        });
    }
    Ok(Residue {
        value: cfg.reduce_product(x),
        modulus,
    })
}

pub fn mod_add(a: Residue, b: Residue) -> Result<Residue> {
    let cfg = a.same_field(b)?;
    Ok(Residue {
        value: cfg.add(a.value, b.value),
        modulus: a.modulus,
    })
}

pub fn mod_sub(a: Residue, b: Residue) -> Result<Residue> {
    let cfg = a.same_field(b)?;
    Ok(Residue {
        value: cfg.sub(a.value, b.value),
        modulus: a.modulus,
    })
}
