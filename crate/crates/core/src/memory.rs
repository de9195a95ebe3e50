//! Data RAM bank and twiddle ROM.
//!
//! The data store is eight 256 x 16-bit true-dual-port banks. Port A of
//! every bank only reads, port B only writes, so one bank sustains one read
//! and one write per cycle. All three modes share the same 2048 logical
//! 16-bit words:
//!
//! * FFT: element `i` is words `4i..4i+4` (re lo, re hi, im lo, im hi).
//! * ML-DSA: coefficient `i` zero-padded to 32 bits in words `2i, 2i+1`.
//! * ML-KEM: coefficient `i` zero-padded to 16 bits in word `i`, so each
//!   pair `(a[2i], a[2i+1])` fills the 32 bits of one FFT word pair.
//!
//! Logical word `w` lives in row `w / 8`. Its bank is `w % 8` XOR-ed with 4
//! when the row index has odd parity ([`BankMap::Skewed`]). Butterfly
//! partners differ in exactly one bit of their element index, so the skew
//! puts them in complementary bank halves at every stage. The plain
//! `w % 8` interleave ([`BankMap::Interleaved`]) is kept for comparison; it
//! collides on every FFT stage after the first.

use crate::butterfly::Mode;
use crate::error::{Error, Result};
use crate::fixed_point::FixedComplex;
use crate::modring::Polynomial;

pub const BANKS: usize = 8;
pub const ROWS: usize = 256;
pub const WORDS: usize = BANKS * ROWS;
pub const ROM_ROWS: usize = 1024;

pub const FFT_POINTS: usize = 512;
pub const NTT_POINTS: usize = 256;

/// Placement of logical words onto physical banks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum BankMap {
    #[default]
    Skewed,
    Interleaved,
}

impl BankMap {
    #[inline]
    pub fn locate(self, word: usize) -> (usize, usize) {
        let row = word / BANKS;
        let lane = word % BANKS;
        let bank = match self {
            BankMap::Interleaved => lane,
            BankMap::Skewed => lane ^ ((row.count_ones() as usize & 1) << 2),
        };
        (bank, row)
    }

    #[inline]
    pub fn word_at(self, bank: usize, row: usize) -> usize {
        let lane = match self {
            BankMap::Interleaved => bank,
            BankMap::Skewed => bank ^ ((row.count_ones() as usize & 1) << 2),
        };
        row * BANKS + lane
    }
}

/// Reverses the low `bits` bits of `x`.
#[inline]
pub fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        return 0;
    }
    x.reverse_bits() >> (usize::BITS - bits)
}

/// Payload of a transform, in whichever representation its mode uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Signal {
    Complex(Vec<FixedComplex>),
    Poly(Polynomial),
}

impl Signal {
    pub fn as_complex(&self) -> Option<&[FixedComplex]> {
        match self {
            Signal::Complex(v) => Some(v),
            Signal::Poly(_) => None,
        }
    }

    pub fn as_poly(&self) -> Option<&Polynomial> {
        match self {
            Signal::Poly(p) => Some(p),
            Signal::Complex(_) => None,
        }
    }
}

/// Contents of the data RAM bank.
#[derive(Clone, PartialEq, Eq)]
pub struct MemoryImage {
    banks: Box<[[u16; ROWS]; BANKS]>,
    map: BankMap,
}

impl std::fmt::Debug for MemoryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let nonzero = self.banks.iter().flatten().filter(|&&w| w != 0).count();
        f.debug_struct("MemoryImage")
            .field("map", &self.map)
            .field("nonzero_words", &nonzero)
            .finish()
    }
}

impl Default for MemoryImage {
    fn default() -> Self {
        MemoryImage::new(BankMap::default())
    }
}

impl MemoryImage {
    pub fn new(map: BankMap) -> Self {
        MemoryImage {
            banks: Box::new([[0; ROWS]; BANKS]),
            map,
        }
    }

    pub fn map(&self) -> BankMap {
        self.map
    }

    /// Same logical contents under another bank map.
    pub fn remapped(&self, map: BankMap) -> MemoryImage {
        let mut out = MemoryImage::new(map);
        for w in 0..WORDS {
            out.set_word(w, self.word(w));
        }
        out
    }

    #[inline]
    pub fn word(&self, word: usize) -> u16 {
        let (bank, row) = self.map.locate(word);
        self.banks[bank][row]
    }

    #[inline]
    pub fn set_word(&mut self, word: usize, value: u16) {
        let (bank, row) = self.map.locate(word);
        self.banks[bank][row] = value;
    }

    #[inline]
    pub fn get(&self, bank: usize, row: usize) -> u16 {
        self.banks[bank][row]
    }

    /// Direct write that bypasses the port model (loading and fault
    /// injection).
    pub fn poke(&mut self, bank: usize, row: usize, value: u16) {
        self.banks[bank][row] = value;
    }

    fn word32(&self, word: usize) -> u32 {
        u32::from(self.word(word)) | (u32::from(self.word(word + 1)) << 16)
    }

    fn set_word32(&mut self, word: usize, value: u32) {
        self.set_word(word, value as u16);
        self.set_word(word + 1, (value >> 16) as u16);
    }

    /// One cycle of port activity: all reads observe the contents before any
    /// write of the same cycle lands.
    pub fn access(
        &mut self,
        ledger: &mut PortLedger,
        cycle: u64,
        reads: &[(usize, usize)],
        writes: &[(usize, usize, u16)],
    ) -> Result<Vec<u16>> {
        let mut read_counts = [0u8; BANKS];
        let mut write_counts = [0u8; BANKS];
        for &(bank, _) in reads {
            read_counts[bank] += 1;
        }
        for &(bank, _, _) in writes {
            write_counts[bank] += 1;
        }
        ledger.record(cycle, read_counts, write_counts)?;

        let data = reads
            .iter()
            .map(|&(bank, row)| self.banks[bank][row])
            .collect();
        for &(bank, row, value) in writes {
            self.banks[bank][row] = value;
        }
        Ok(data)
    }

    /// Dump format: one word per line, 4 lowercase hex digits, bank-major
    /// then row order.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(WORDS * 5);
        for bank in self.banks.iter() {
            for word in bank {
                out.push_str(&format!("{word:04x}\n"));
            }
        }
        out
    }

    pub fn from_hex(text: &str, map: BankMap) -> Result<MemoryImage> {
        let mut image = MemoryImage::new(map);
        let words = parse_hex_lines(text, 4, WORDS)?;
        for (i, w) in words.into_iter().enumerate() {
            image.banks[i / ROWS][i % ROWS] = w as u16;
        }
        Ok(image)
    }
}

fn parse_hex_lines(text: &str, digits: usize, expected: usize) -> Result<Vec<u32>> {
    let mut values = Vec::with_capacity(expected);
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.len() != digits {
            return Err(Error::Parse {
                line: idx + 1,
                reason: format!("expected {digits} hex digits, found `{line}`"),
            });
        }
        let value = u32::from_str_radix(line, 16).map_err(|e| Error::Parse {
            line: idx + 1,
            reason: format!("`{line}`: {e}"),
        })?;
        values.push(value);
    }
    if values.len() != expected {
        return Err(Error::Parse {
            line: text.lines().count(),
            reason: format!("expected {expected} words, found {}", values.len()),
        });
    }
    Ok(values)
}

fn expect_len(mode: Mode, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Length {
            mode,
            expected,
            actual,
        });
    }
    Ok(())
}

fn expect_modulus(mode: Mode, poly: &Polynomial) -> Result<()> {
    let modulus = mode.modulus().expect("NTT mode");
    if poly.modulus() != modulus {
        return Err(Error::ModulusMismatch {
            left: modulus,
            right: poly.modulus(),
        });
    }
    Ok(())
}

fn pack_complex_at(image: &mut MemoryImage, position: usize, value: FixedComplex) {
    image.set_word32(4 * position, value.re.to_bits());
    image.set_word32(4 * position + 2, value.im.to_bits());
}

/// Lays a typed sequence out in natural order.
pub fn pack(mode: Mode, data: &Signal) -> Result<MemoryImage> {
    pack_with(mode, data, BankMap::default())
}

pub fn pack_with(mode: Mode, data: &Signal, map: BankMap) -> Result<MemoryImage> {
    let mut image = MemoryImage::new(map);
    match (mode, data) {
        (Mode::Fft, Signal::Complex(values)) => {
            expect_len(mode, FFT_POINTS, values.len())?;
            for (i, &v) in values.iter().enumerate() {
                pack_complex_at(&mut image, i, v);
            }
        }
        (Mode::MlDsa, Signal::Poly(poly)) => {
            expect_modulus(mode, poly)?;
            expect_len(mode, NTT_POINTS, poly.len())?;
            for (i, &c) in poly.coeffs().iter().enumerate() {
                image.set_word32(2 * i, c);
            }
        }
        (Mode::MlKem, Signal::Poly(poly)) => {
            expect_modulus(mode, poly)?;
            expect_len(mode, NTT_POINTS, poly.len())?;
            for (i, &c) in poly.coeffs().iter().enumerate() {
                image.set_word(i, c as u16);
            }
        }
        _ => {
            return Err(Error::Packing {
                mode,
                reason: "payload kind does not match mode".into(),
            })
        }
    }
    Ok(image)
}

/// Loads FFT input so element `i` sits at packed position `brv9(i)`; the
/// decimation-in-time schedule then leaves the spectrum in natural order.
pub fn bit_reverse_load(data: &[FixedComplex]) -> Result<MemoryImage> {
    bit_reverse_load_with(data, BankMap::default())
}

pub fn bit_reverse_load_with(data: &[FixedComplex], map: BankMap) -> Result<MemoryImage> {
    expect_len(Mode::Fft, FFT_POINTS, data.len())?;
    let mut image = MemoryImage::new(map);
    for (i, &v) in data.iter().enumerate() {
        pack_complex_at(&mut image, bit_reverse(i, 9), v);
    }
    Ok(image)
}

/// Reads a natural-order image back. NTT padding bits must be zero and every
/// coefficient reduced.
pub fn unpack(mode: Mode, image: &MemoryImage) -> Result<Signal> {
    match mode {
        Mode::Fft => Ok(Signal::Complex(
            (0..FFT_POINTS)
                .map(|i| FixedComplex::from_bits(image.word32(4 * i), image.word32(4 * i + 2)))
                .collect(),
        )),
        Mode::MlDsa | Mode::MlKem => {
            let modulus = mode.modulus().expect("NTT mode");
            let coeffs = (0..NTT_POINTS)
                .map(|i| match mode {
                    Mode::MlDsa => image.word32(2 * i),
                    _ => u32::from(image.word(i)),
                })
                .collect::<Vec<_>>();
            if let Some((i, &c)) = coeffs.iter().enumerate().find(|(_, &c)| c >= modulus.q()) {
                return Err(Error::Packing {
                    mode,
                    reason: format!("coefficient {i} holds {c:#x}: padding or range violation"),
                });
            }
            let unused = match mode {
                Mode::MlDsa => 2 * NTT_POINTS..WORDS,
                _ => NTT_POINTS..WORDS,
            };
            if let Some(w) = unused.into_iter().find(|&w| image.word(w) != 0) {
                return Err(Error::Packing {
                    mode,
                    reason: format!("word {w} outside the coefficient area is non-zero"),
                });
            }
            Ok(Signal::Poly(Polynomial::new(modulus, coeffs)?))
        }
    }
}

/// Whether an over-subscribed port stops the run or is only counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PortPolicy {
    #[default]
    Strict,
    Audit,
}

/// Port activity of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleRecord {
    pub cycle: u64,
    pub reads: [u8; BANKS],
    pub writes: [u8; BANKS],
    pub rom_rows: u8,
}

/// Per-cycle, per-bank access counts. A bank may see at most one read
/// (port A) and one write (port B) per cycle; the ROM at most two distinct
/// rows.
#[derive(Debug, Clone, Default)]
pub struct PortLedger {
    policy: PortPolicy,
    records: Vec<CycleRecord>,
    violations: u64,
}

impl PortLedger {
    pub fn new(policy: PortPolicy) -> Self {
        PortLedger {
            policy,
            ..Default::default()
        }
    }

    fn slot(&mut self, cycle: u64) -> &mut CycleRecord {
        let fresh = self.records.last().is_none_or(|r| r.cycle != cycle);
        if fresh {
            self.records.push(CycleRecord {
                cycle,
                reads: [0; BANKS],
                writes: [0; BANKS],
                rom_rows: 0,
            });
        }
        self.records.last_mut().expect("slot exists")
    }

    fn flag(&mut self, err: Error) -> Result<()> {
        self.violations += 1;
        match self.policy {
            PortPolicy::Strict => Err(err),
            PortPolicy::Audit => Ok(()),
        }
    }

    pub fn record(&mut self, cycle: u64, reads: [u8; BANKS], writes: [u8; BANKS]) -> Result<()> {
        let slot = self.slot(cycle);
        for bank in 0..BANKS {
            slot.reads[bank] += reads[bank];
            slot.writes[bank] += writes[bank];
        }
        let slot = *slot;
        for bank in 0..BANKS {
            if slot.reads[bank] > 1 || slot.writes[bank] > 1 {
                self.flag(Error::PortConflict {
                    cycle,
                    bank,
                    reads: slot.reads[bank],
                    writes: slot.writes[bank],
                })?;
            }
        }
        Ok(())
    }

    pub fn record_rom(&mut self, cycle: u64, distinct_rows: usize) -> Result<()> {
        let slot = self.slot(cycle);
        slot.rom_rows += distinct_rows as u8;
        let rows = slot.rom_rows as usize;
        if rows > 2 {
            self.flag(Error::RomPortConflict { cycle, rows })?;
        }
        Ok(())
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }

    pub fn records(&self) -> &[CycleRecord] {
        &self.records
    }

    pub fn total_reads(&self) -> u64 {
        self.records
            .iter()
            .flat_map(|r| r.reads)
            .map(u64::from)
            .sum()
    }

    pub fn total_writes(&self) -> u64 {
        self.records
            .iter()
            .flat_map(|r| r.writes)
            .map(u64::from)
            .sum()
    }
}

/// Which table set a ROM holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RomImage {
    Fft,
    Ntt,
}

impl RomImage {
    pub fn for_mode(mode: Mode) -> RomImage {
        match mode {
            Mode::Fft => RomImage::Fft,
            Mode::MlKem | Mode::MlDsa => RomImage::Ntt,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RomImage::Fft => "fft",
            RomImage::Ntt => "ntt",
        }
    }
}

/// 1024 x 32-bit twiddle ROM, immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwiddleRom {
    image: RomImage,
    rows: Box<[u32; ROM_ROWS]>,
    populated: usize,
}

impl TwiddleRom {
    pub(crate) fn from_rows(image: RomImage, contents: &[u32]) -> TwiddleRom {
        assert!(contents.len() <= ROM_ROWS);
        let mut rows = Box::new([0u32; ROM_ROWS]);
        rows[..contents.len()].copy_from_slice(contents);
        TwiddleRom {
            image,
            rows,
            populated: contents.len(),
        }
    }

    pub fn image(&self) -> RomImage {
        self.image
    }

    /// Rows holding table data; the rest of the ROM is zero.
    pub fn populated(&self) -> usize {
        self.populated
    }

    #[inline]
    pub fn row(&self, row: usize) -> u32 {
        self.rows[row]
    }

    pub fn write(&mut self, row: usize, _value: u32) -> Result<()> {
        Err(Error::RomReadOnly { row })
    }

    /// Reads up to two rows in one cycle through the two ROM ports.
    pub fn read(&self, ledger: &mut PortLedger, cycle: u64, rows: &[usize]) -> Result<Vec<u32>> {
        let mut distinct = rows.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        ledger.record_rom(cycle, distinct.len())?;
        Ok(rows.iter().map(|&r| self.rows[r]).collect())
    }

    /// Dump of the populated rows, 8 lowercase hex digits per line.
    pub fn to_hex(&self) -> String {
        self.rows[..self.populated]
            .iter()
            .map(|r| format!("{r:08x}\n"))
            .collect()
    }
}
