use thiserror::Error;

use crate::butterfly::Mode;
use crate::modring::Modulus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("residue {value} is not reduced modulo {}", .modulus.q())]
    Unreduced { value: u32, modulus: Modulus },

    #[error("operands belong to different moduli ({left:?} vs {right:?})")]
    ModulusMismatch { left: Modulus, right: Modulus },

    #[error("Barrett input {value} exceeds {bits} bits")]
    BarrettRange { value: u64, bits: u32 },

    #[error("expected {expected} elements for {mode:?}, got {actual}")]
    Length {
        mode: Mode,
        expected: usize,
        actual: usize,
    },

    #[error("malformed {mode:?} lane packing: {reason}")]
    Packing { mode: Mode, reason: String },

    #[error("port conflict at cycle {cycle}: bank {bank} saw {reads} reads and {writes} writes")]
    PortConflict {
        cycle: u64,
        bank: usize,
        reads: u8,
        writes: u8,
    },

    #[error("twiddle ROM port conflict at cycle {cycle}: {rows} distinct rows requested")]
    RomPortConflict { cycle: u64, rows: usize },

    #[error("twiddle ROM is read-only (write to row {row})")]
    RomReadOnly { row: usize },

    #[error("twiddle ROM holds the {actual} image, {expected} image required")]
    RomImage {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("{what} is not available in {mode:?} mode")]
    Unsupported { mode: Mode, what: &'static str },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
