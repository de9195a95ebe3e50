//! Transform scheduler and cycle accounting.
//!
//! Each stage streams its issues through the butterfly unit one per cycle and
//! drains completely before the next stage starts, which keeps the in-place
//! dataflow free of read-after-write hazards. The per-stage overhead is
//!
//! ```text
//!   1  address generation
//! + 2  data RAM / ROM read latency
//! + 9  butterfly pipeline
//! + 1  write-back register
//! + 1  stage turnaround
//! = 14 cycles
//! ```
//!
//! so a stage with `n` issues takes `n + 14` cycles: 2430 for the FFT,
//! 624 for ML-DSA and 322 for ML-KEM.

use std::collections::VecDeque;

use crate::butterfly::{issue, LaneBundle, Mode, PipelineModel, IN_LANES};
use crate::error::{Error, Result};
use crate::fixed_point::FixedComplex;
use crate::memory::{
    bit_reverse_load, pack, unpack, MemoryImage, PortLedger, PortPolicy, RomImage, Signal,
    TwiddleRom,
};
use crate::modring::{Modulus, Polynomial};
use crate::twiddle::{self, TwiddleTable};

pub const ADDRESS_CYCLES: u64 = 1;
pub const READ_LATENCY: u64 = 2;
pub const WRITEBACK_CYCLES: u64 = 1;
pub const TURNAROUND_CYCLES: u64 = 1;

/// Cycles a stage spends beyond one per issue.
pub const STAGE_OVERHEAD: u64 = ADDRESS_CYCLES
    + READ_LATENCY
    + PipelineModel::UNIFIED.depth
    + WRITEBACK_CYCLES
    + TURNAROUND_CYCLES;

pub fn stage_count(mode: Mode) -> usize {
    match mode {
        Mode::Fft => 9,
        Mode::MlDsa => 8,
        Mode::MlKem => 7,
    }
}

pub fn butterflies_per_stage(mode: Mode) -> usize {
    match mode {
        Mode::Fft => 256,
        Mode::MlDsa | Mode::MlKem => 128,
    }
}

pub fn issues_per_stage(mode: Mode) -> usize {
    butterflies_per_stage(mode) / mode.parallelism()
}

/// One issue: the logical data words feeding lanes 0..4 and 4..8, and the
/// twiddle index of each butterfly in the issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Issue {
    pub a_words: [usize; 4],
    pub b_words: [usize; 4],
    pub twiddles: [usize; 4],
}

impl Issue {
    pub fn words(&self) -> impl Iterator<Item = usize> + '_ {
        self.a_words.iter().chain(&self.b_words).copied()
    }

    /// Distinct ROM rows this issue reads.
    pub fn rom_rows(&self, mode: Mode) -> Vec<usize> {
        let mut rows: Vec<usize> = self.twiddles[..mode.parallelism()]
            .iter()
            .flat_map(|&t| twiddle::rom_rows(mode, t))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    pub mode: Mode,
    pub stage: usize,
    pub issues: Vec<Issue>,
}

/// `(top, bottom, zeta index)` for every butterfly of one NTT layer, in the
/// standards' loop order.
fn ntt_layer(stage: usize) -> Vec<(usize, usize, usize)> {
    let len = 128 >> stage;
    let first_zeta = 1usize << stage;
    let mut out = Vec::with_capacity(128);
    for (block, start) in (0..256).step_by(2 * len).enumerate() {
        for j in start..start + len {
            out.push((j, j + len, first_zeta + block));
        }
    }
    out
}

/// Decimation-in-time pairing for stage `stage`. FFT stage `s` pairs packed
/// positions `p` and `p + 2^s` with twiddle `(p mod 2^s) * 2^(8 - s)`. NTT
/// stages follow the standards' layer order, grouping consecutive
/// butterflies two (ML-DSA) or four (ML-KEM) to an issue.
pub fn plan_stage(mode: Mode, stage: usize) -> StagePlan {
    assert!(
        stage < stage_count(mode),
        "stage {stage} out of range for {mode}"
    );
    let issues = match mode {
        Mode::Fft => {
            let half = 1usize << stage;
            let stride = 256 >> stage;
            (0..512)
                .filter(|p| p & half == 0)
                .map(|p| {
                    let q = p + half;
                    Issue {
                        a_words: std::array::from_fn(|i| 4 * p + i),
                        b_words: std::array::from_fn(|i| 4 * q + i),
                        twiddles: [(p % half) * stride, 0, 0, 0],
                    }
                })
                .collect()
        }
        Mode::MlDsa => ntt_layer(stage)
            .chunks_exact(2)
            .map(|pair| {
                let [(a0, b0, z0), (a1, b1, z1)] = [pair[0], pair[1]];
                Issue {
                    a_words: [2 * a0, 2 * a0 + 1, 2 * a1, 2 * a1 + 1],
                    b_words: [2 * b0, 2 * b0 + 1, 2 * b1, 2 * b1 + 1],
                    twiddles: [z0, z1, 0, 0],
                }
            })
            .collect(),
        Mode::MlKem => ntt_layer(stage)
            .chunks_exact(4)
            .map(|quad| Issue {
                a_words: std::array::from_fn(|i| quad[i].0),
                b_words: std::array::from_fn(|i| quad[i].1),
                twiddles: std::array::from_fn(|i| quad[i].2),
            })
            .collect(),
    };
    StagePlan {
        mode,
        stage,
        issues,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageCycles {
    pub issues: u64,
    pub overhead: u64,
    pub cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    pub mode: Mode,
    pub stages: Vec<StageCycles>,
    pub total_cycles: u64,
    pub port_conflicts: u64,
    /// Issues in which an FFT adder overflowed and wrapped.
    pub overflow_events: u64,
}

impl CycleReport {
    pub fn issues(&self) -> u64 {
        self.stages.iter().map(|s| s.issues).sum()
    }

    pub fn butterflies(&self) -> u64 {
        self.issues() * self.mode.parallelism() as u64
    }
}

/// Predicted cycle count: `stages * (issues_per_stage + 14)`.
pub fn cycle_model(mode: Mode) -> CycleReport {
    let issues = issues_per_stage(mode) as u64;
    let stage = StageCycles {
        issues,
        overhead: STAGE_OVERHEAD,
        cycles: issues + STAGE_OVERHEAD,
    };
    let stages = vec![stage; stage_count(mode)];
    CycleReport {
        mode,
        total_cycles: stages.iter().map(|s| s.cycles).sum(),
        stages,
        port_conflicts: 0,
        overflow_events: 0,
    }
}

/// Flips one bit of one output lane of one issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub stage: usize,
    pub issue: usize,
    pub lane: usize,
    pub bit: u32,
}

impl Fault {
    /// The lowest bit of the first output lane of the stage's first issue.
    pub fn at_stage(stage: usize) -> Self {
        Fault {
            stage,
            issue: 0,
            lane: 0,
            bit: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub image: MemoryImage,
    pub report: CycleReport,
    pub ledger: PortLedger,
}

struct InFlight {
    write_cycle: u64,
    issue: Issue,
    lanes: [u16; 8],
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Engine {
    pub fault: Option<Fault>,
    pub policy: PortPolicy,
}

impl Engine {
    pub fn new() -> Self {
        Engine::default()
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn with_policy(mut self, policy: PortPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn run(&self, mode: Mode, image: MemoryImage, rom: &TwiddleRom) -> Result<RunOutput> {
        self.execute(mode, image, rom, None)
    }

    /// Like [`Engine::run`], also returning the memory contents after every
    /// stage.
    pub fn run_traced(
        &self,
        mode: Mode,
        image: MemoryImage,
        rom: &TwiddleRom,
    ) -> Result<(RunOutput, Vec<MemoryImage>)> {
        let mut snapshots = Vec::with_capacity(stage_count(mode));
        let out = self.run_traced_into(mode, image, rom, &mut snapshots)?;
        Ok((out, snapshots))
    }

    /// Like [`Engine::run_traced`], but snapshots of the stages that did
    /// complete survive an error.
    pub fn run_traced_into(
        &self,
        mode: Mode,
        image: MemoryImage,
        rom: &TwiddleRom,
        snapshots: &mut Vec<MemoryImage>,
    ) -> Result<RunOutput> {
        self.execute(mode, image, rom, Some(snapshots))
    }

    fn execute(
        &self,
        mode: Mode,
        mut image: MemoryImage,
        rom: &TwiddleRom,
        mut snapshots: Option<&mut Vec<MemoryImage>>,
    ) -> Result<RunOutput> {
        let wanted = RomImage::for_mode(mode);
        if rom.image() != wanted {
            return Err(Error::RomImage {
                expected: wanted.name(),
                actual: rom.image().name(),
            });
        }

        let map = image.map();
        let mut ledger = PortLedger::new(self.policy);
        let mut stages = Vec::with_capacity(stage_count(mode));
        let mut overflow_events = 0;
        let mut cycle = 0u64;
        let pipeline = PipelineModel::UNIFIED;
        let write_delay = READ_LATENCY + pipeline.depth + WRITEBACK_CYCLES;

        for stage in 0..stage_count(mode) {
            let plan = plan_stage(mode, stage);
            let start = cycle;
            let mut next = 0usize;
            let mut in_flight: VecDeque<InFlight> = VecDeque::new();
            cycle += ADDRESS_CYCLES;

            while next < plan.issues.len() || !in_flight.is_empty() {
                let mut reads = Vec::new();
                let mut writes = Vec::new();

                let retiring = in_flight.front().is_some_and(|f| f.write_cycle == cycle);
                if retiring {
                    let done = in_flight.pop_front().expect("front exists");
                    for (lane, word) in done.issue.words().enumerate() {
                        let (bank, row) = map.locate(word);
                        writes.push((bank, row, done.lanes[lane]));
                    }
                }

                let issuing = plan.issues.get(next).copied();
                if let Some(ref iss) = issuing {
                    reads.extend(iss.words().map(|w| map.locate(w)));
                }

                let data = image.access(&mut ledger, cycle, &reads, &writes)?;

                if let Some(iss) = issuing {
                    let mut bundle = LaneBundle::default();
                    bundle.lanes[..8].copy_from_slice(&data);
                    self.load_twiddles(mode, &iss, rom, &mut ledger, cycle, &mut bundle)?;
                    let mut out = issue(mode, &bundle)?;
                    if out.overflow {
                        overflow_events += 1;
                    }
                    if let Some(f) = self.fault {
                        if f.stage == stage && f.issue == next {
                            out.lanes[f.lane] ^= 1 << f.bit;
                        }
                    }
                    in_flight.push_back(InFlight {
                        write_cycle: cycle + write_delay,
                        issue: iss,
                        lanes: out.lanes,
                    });
                    next += 1;
                }
                cycle += 1;
            }
            cycle += TURNAROUND_CYCLES;

            let issues = plan.issues.len() as u64;
            let cycles = cycle - start;
            stages.push(StageCycles {
                issues,
                overhead: cycles - issues,
                cycles,
            });
            if let Some(s) = snapshots.as_deref_mut() {
                s.push(image.clone());
            }
        }

        Ok(RunOutput {
            image,
            report: CycleReport {
                mode,
                stages,
                total_cycles: cycle,
                port_conflicts: ledger.violations(),
                overflow_events,
            },
            ledger,
        })
    }

    fn load_twiddles(
        &self,
        mode: Mode,
        iss: &Issue,
        rom: &TwiddleRom,
        ledger: &mut PortLedger,
        cycle: u64,
        bundle: &mut LaneBundle,
    ) -> Result<()> {
        let rows = iss.rom_rows(mode);
        let words = rom.read(ledger, cycle, &rows)?;
        let fetch = |row: usize| words[rows.iter().position(|&r| r == row).expect("row read")];
        let lanes = &mut bundle.lanes[8..IN_LANES];
        for (slot, &index) in iss.twiddles[..mode.parallelism()].iter().enumerate() {
            let [r0, r1] = twiddle::rom_rows(mode, index);
            let (lo, hi) = twiddle::decode(mode, index, [fetch(r0), fetch(r1)]);
            match mode {
                Mode::Fft => {
                    lanes[0] = lo as u16;
                    lanes[1] = (lo >> 16) as u16;
                    lanes[2] = hi as u16;
                    lanes[3] = (hi >> 16) as u16;
                }
                Mode::MlDsa => {
                    lanes[2 * slot] = lo as u16;
                    lanes[2 * slot + 1] = (lo >> 16) as u16;
                }
                Mode::MlKem => lanes[slot] = lo as u16,
            }
        }
        Ok(())
    }
}

pub fn run(mode: Mode, image: MemoryImage, rom: &TwiddleRom) -> Result<(MemoryImage, CycleReport)> {
    let out = Engine::new().run(mode, image, rom)?;
    Ok((out.image, out.report))
}

/// 512-point FFT of natural-order input; the spectrum comes back in natural
/// order.
pub fn fft(input: &[FixedComplex]) -> Result<(Vec<FixedComplex>, CycleReport)> {
    let image = bit_reverse_load(input)?;
    let (image, report) = run(Mode::Fft, image, &twiddle::fft_rom())?;
    let Signal::Complex(out) = unpack(Mode::Fft, &image)? else {
        unreachable!()
    };
    Ok((out, report))
}

pub fn mode_for(modulus: Modulus) -> Mode {
    match modulus {
        Modulus::Kyber => Mode::MlKem,
        Modulus::Dilithium => Mode::MlDsa,
    }
}

/// Forward NTT of a natural-order polynomial; output in the standards'
/// NTT-domain order.
pub fn ntt(poly: &Polynomial) -> Result<(Polynomial, CycleReport)> {
    let mode = mode_for(poly.modulus());
    let image = pack(mode, &Signal::Poly(poly.clone()))?;
    let (image, report) = run(mode, image, &twiddle::ntt_rom())?;
    let Signal::Poly(out) = unpack(mode, &image)? else {
        unreachable!()
    };
    Ok((out, report))
}

/// Inverse NTT over a packed image (Gentleman-Sande layers, inverse zetas,
/// final scaling by `n^-1`). Exists to round-trip forward results.
pub fn inverse_ntt(mode: Mode, image: &MemoryImage) -> Result<MemoryImage> {
    let (cfg, zetas, layers, n_inv) = match mode {
        Mode::MlKem => {
            let TwiddleTable::MlKem(z) = twiddle::gen_kyber_zetas() else {
                unreachable!()
            };
            (Modulus::Kyber.config(), z, 7usize, 3303u32)
        }
        Mode::MlDsa => {
            let TwiddleTable::MlDsa(z) = twiddle::gen_dilithium_zetas() else {
                unreachable!()
            };
            (Modulus::Dilithium.config(), z, 8, 8_347_681)
        }
        Mode::Fft => {
            return Err(Error::Unsupported {
                mode,
                what: "inverse transform",
            })
        }
    };
    let Signal::Poly(poly) = unpack(mode, image)? else {
        unreachable!()
    };
    let mut f = poly.into_coeffs();
    let mut k = zetas.len() - 1;
    let first_len = 256 >> layers;
    let mut len = first_len;
    while len <= 128 {
        for start in (0..256).step_by(2 * len) {
            let zeta = zetas[k];
            k -= 1;
            for j in start..start + len {
                let t = f[j];
                f[j] = cfg.add(t, f[j + len]);
                f[j + len] = cfg.mul(zeta, cfg.sub(f[j + len], t));
            }
        }
        len <<= 1;
    }
    for c in &mut f {
        *c = cfg.mul(*c, n_inv);
    }
    let modulus = mode.modulus().expect("NTT mode");
    pack(mode, &Signal::Poly(Polynomial::new(modulus, f)?))
}
