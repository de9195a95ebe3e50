//! Stage-wise validation: run the engine, compare every stage snapshot with
//! the golden trace, and check the final result against the end-to-end
//! oracle.

use std::fmt;
use std::ops::Range;

use crate::butterfly::Mode;
use crate::engine::{CycleReport, Engine, Fault};
use crate::error::Result;
use crate::fixed_point::FixedComplex;
use crate::memory::{bit_reverse_load, pack, unpack, MemoryImage, Signal};
use crate::par::{self, Execution};
use crate::reference::{self, golden_trace, stage_compare, CompareReport, Complex64};
use crate::rng::random_signal;
use crate::twiddle;

/// Largest tolerated `|X_engine - X_oracle|` for a 512-point FFT of inputs
/// with both parts in [-1, 1]: accumulated truncation bounded by
/// `N * 2^-14`, rounded up.
pub const FFT_MAX_ABS_ERROR: f64 = 0.032;

/// Initial data RAM image for a mode: bit-reversed for the FFT, natural
/// order for the NTTs.
pub fn load(mode: Mode, input: &Signal) -> Result<MemoryImage> {
    match (mode, input) {
        (Mode::Fft, Signal::Complex(x)) => bit_reverse_load(x),
        _ => pack(mode, input),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleCheck {
    /// NTT: exact equality with the O(N^2) evaluation.
    Exact { matched: bool },
    /// FFT: maximum deviation from the double-precision transform.
    Tolerance { max_error: f64, bound: f64 },
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        match *self {
            OracleCheck::Exact { matched } => matched,
            OracleCheck::Tolerance { max_error, bound } => max_error <= bound,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub mode: Mode,
    pub seed: Option<u64>,
    pub report: Option<CycleReport>,
    pub compare: CompareReport,
    pub oracle: Option<OracleCheck>,
    /// Set when the engine rejected corrupted data mid-run.
    pub engine_error: Option<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.engine_error.is_none()
            && self.compare.is_match()
            && self.oracle.as_ref().is_some_and(OracleCheck::passed)
    }
}

impl fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mode)?;
        if let Some(seed) = self.seed {
            write!(f, " seed {seed}")?;
        }
        write!(f, ": {}", if self.passed() { "PASS" } else { "FAIL" })?;
        if let Some(err) = &self.engine_error {
            write!(f, "; engine error: {err}")?;
        }
        write!(f, "; {}", self.compare)?;
        match &self.oracle {
            Some(OracleCheck::Exact { matched }) => write!(
                f,
                "; oracle {}",
                if *matched { "match" } else { "MISMATCH" }
            )?,
            Some(OracleCheck::Tolerance { max_error, bound }) => {
                write!(f, "; oracle max error {max_error:.3e} (bound {bound})")?
            }
            None => {}
        }
        if let Some(r) = &self.report {
            write!(f, "; cycles {}", r.total_cycles)?;
        }
        Ok(())
    }
}

/// Largest complex deviation of the fixed-point spectrum from the
/// double-precision one.
pub fn fft_max_error(input: &[FixedComplex], output: &[FixedComplex]) -> f64 {
    let x: Vec<Complex64> = input.iter().map(|&c| c.into()).collect();
    reference::float_fft(&x)
        .iter()
        .zip(output)
        .map(|(want, &got)| {
            let got = Complex64::from(got);
            ((got.re - want.re).powi(2) + (got.im - want.im).powi(2)).sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn verify_signal(mode: Mode, input: &Signal, engine: &Engine) -> Result<VerifyOutcome> {
    let trace = golden_trace(mode, input)?;
    let image = load(mode, input)?;
    let rom = twiddle::rom_for(mode);

    let mut snapshots = Vec::new();
    let out = match engine.run_traced_into(mode, image, &rom, &mut snapshots) {
        Ok(out) => out,
        Err(err) => {
            // the stages that did finish still localize the divergence
            return Ok(VerifyOutcome {
                mode,
                seed: None,
                report: None,
                compare: stage_compare(&snapshots, &trace),
                oracle: None,
                engine_error: Some(err.to_string()),
            });
        }
    };
    let compare = stage_compare(&snapshots, &trace);

    let oracle = match (unpack(mode, &out.image), input) {
        (Ok(Signal::Complex(spectrum)), Signal::Complex(x)) => Some(OracleCheck::Tolerance {
            max_error: fft_max_error(x, &spectrum),
            bound: FFT_MAX_ABS_ERROR,
        }),
        (Ok(Signal::Poly(hat)), Signal::Poly(p)) => Some(OracleCheck::Exact {
            matched: hat == reference::naive_ntt(p),
        }),
        _ => Some(OracleCheck::Exact { matched: false }),
    };

    Ok(VerifyOutcome {
        mode,
        seed: None,
        report: Some(out.report),
        compare,
        oracle,
        engine_error: None,
    })
}

pub fn verify_seed(mode: Mode, seed: u64, fault: Option<Fault>) -> Result<VerifyOutcome> {
    let engine = Engine {
        fault,
        ..Engine::default()
    };
    let mut outcome = verify_signal(mode, &random_signal(mode, seed), &engine)?;
    outcome.seed = Some(seed);
    Ok(outcome)
}

/// Verifies every seed in `seeds`, each with its own engine instance.
pub fn verify_sweep(
    mode: Mode,
    seeds: Range<u64>,
    fault: Option<Fault>,
    exec: Execution,
) -> Vec<Result<VerifyOutcome>> {
    par::map_range(exec, seeds, |seed| verify_seed(mode, seed, fault))
}
