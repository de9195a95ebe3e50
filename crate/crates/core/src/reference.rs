//! Golden models.
//!
//! Everything here is written in a deliberately plain style using native
//! integer and floating-point arithmetic. None of it calls into the
//! butterfly, Barrett, Karatsuba or engine code it is used to check; only
//! the memory layout (packing) and the ROM twiddle values are shared.

use std::f64::consts::PI;

use crate::butterfly::Mode;
use crate::error::{Error, Result};
use crate::fixed_point::FixedComplex;
use crate::memory::{pack, MemoryImage, Signal, BANKS, ROWS};
use crate::modring::{Modulus, Polynomial};
use crate::twiddle::{gen_fft_twiddles, TwiddleTable};

fn pow_mod(base: u64, mut exp: u64, q: u64) -> u64 {
    let mut result = 1 % q;
    let mut b = base % q;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % q;
        }
        b = b * b % q;
        exp >>= 1;
    }
    result
}

fn reverse_bits(mut x: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}

/// Evaluation points of the NTT: output slot `i` (or pair `i` for Kyber)
/// evaluates at `root^(2*brv(i) + 1)`.
fn evaluation_points(modulus: Modulus) -> (u64, Vec<u64>) {
    match modulus {
        Modulus::Kyber => (
            3329,
            (0..128)
                .map(|i| pow_mod(17, 2 * reverse_bits(i, 7) as u64 + 1, 3329))
                .collect(),
        ),
        Modulus::Dilithium => (
            8_380_417,
            (0..256)
                .map(|i| pow_mod(1753, 2 * reverse_bits(i, 8) as u64 + 1, 8_380_417))
                .collect(),
        ),
    }
}

/// `sum_j coeffs[j] * x^j mod q`, term by term.
fn evaluate(coeffs: &[u64], x: u64, q: u64) -> u64 {
    let mut acc = 0;
    let mut power = 1;
    for &c in coeffs {
        acc = (acc + c * power) % q;
        power = power * x % q;
    }
    acc
}

/// Direct O(N^2) NTT in the standards' output convention. ML-KEM treats
/// the even and odd coefficients as two 128-term polynomials evaluated at
/// the same points; ML-DSA evaluates all 256 coefficients.
pub fn naive_ntt(poly: &Polynomial) -> Polynomial {
    let (q, points) = evaluation_points(poly.modulus());
    let a: Vec<u64> = poly.coeffs().iter().map(|&c| u64::from(c)).collect();
    let out: Vec<u64> = match poly.modulus() {
        Modulus::Kyber => {
            let even: Vec<u64> = a.iter().step_by(2).copied().collect();
            let odd: Vec<u64> = a.iter().skip(1).step_by(2).copied().collect();
            points
                .iter()
                .flat_map(|&x| [evaluate(&even, x, q), evaluate(&odd, x, q)])
                .collect()
        }
        Modulus::Dilithium => points.iter().map(|&x| evaluate(&a, x, q)).collect(),
    };
    Polynomial::new(poly.modulus(), out.into_iter().map(|v| v as u32).collect())
        .expect("reduced by construction")
}

/// Interpolation inverse of [`naive_ntt`]: `a_j = n^-1 * sum_i a_hat_i * x_i^-j`.
pub fn naive_intt(poly: &Polynomial) -> Polynomial {
    let (q, points) = evaluation_points(poly.modulus());
    let n = points.len() as u64;
    let n_inv = pow_mod(n, q - 2, q);
    let hat: Vec<u64> = poly.coeffs().iter().map(|&c| u64::from(c)).collect();
    let stride = hat.len() / points.len();
    let mut out = vec![0u64; hat.len()];
    for lane in 0..stride {
        for j in 0..points.len() {
            let mut acc = 0;
            for (i, &x) in points.iter().enumerate() {
                let x_inv_j = pow_mod(pow_mod(x, q - 2, q), j as u64, q);
                acc = (acc + hat[stride * i + lane] * x_inv_j) % q;
            }
            out[stride * j + lane] = acc * n_inv % q;
        }
    }
    Polynomial::new(poly.modulus(), out.into_iter().map(|v| v as u32).collect())
        .expect("reduced by construction")
}

/// Double-precision complex value for the floating-point oracles.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Complex64 {
    pub re: f64,
    pub im: f64,
}

impl Complex64 {
    pub fn new(re: f64, im: f64) -> Self {
        Complex64 { re, im }
    }

    fn add(self, o: Self) -> Self {
        Complex64::new(self.re + o.re, self.im + o.im)
    }

    fn sub(self, o: Self) -> Self {
        Complex64::new(self.re - o.re, self.im - o.im)
    }

    fn mul(self, o: Self) -> Self {
        Complex64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    fn expj(angle: f64) -> Self {
        Complex64::new(angle.cos(), angle.sin())
    }
}

impl From<FixedComplex> for Complex64 {
    fn from(c: FixedComplex) -> Self {
        let (re, im) = c.to_f64();
        Complex64::new(re, im)
    }
}

/// Textbook recursive radix-2 FFT, `X_k = sum_m x_m exp(-2 pi j m k / N)`.
pub fn float_fft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    if n == 1 {
        return x.to_vec();
    }
    let even: Vec<Complex64> = x.iter().step_by(2).copied().collect();
    let odd: Vec<Complex64> = x.iter().skip(1).step_by(2).copied().collect();
    let (e, o) = (float_fft(&even), float_fft(&odd));
    let mut out = vec![Complex64::default(); n];
    for k in 0..n / 2 {
        let t = Complex64::expj(-2.0 * PI * k as f64 / n as f64).mul(o[k]);
        out[k] = e[k].add(t);
        out[k + n / 2] = e[k].sub(t);
    }
    out
}

/// Direct O(N^2) DFT.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .fold(Complex64::default(), |acc, (m, &v)| {
                    let angle = -2.0 * PI * ((m * k) % n) as f64 / n as f64;
                    acc.add(v.mul(Complex64::expj(angle)))
                })
        })
        .collect()
}

/// Expected data RAM contents after every stage of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenTrace {
    pub mode: Mode,
    pub snapshots: Vec<MemoryImage>,
}

/// Replays the transform stage by stage with straightforward loops over a
/// plain array, packing a snapshot after each stage.
pub fn golden_trace(mode: Mode, input: &Signal) -> Result<GoldenTrace> {
    let snapshots = match (mode, input) {
        (Mode::Fft, Signal::Complex(x)) => fft_trace(x)?,
        (Mode::MlKem | Mode::MlDsa, Signal::Poly(p)) if Some(p.modulus()) == mode.modulus() => {
            ntt_trace(mode, p)?
        }
        _ => {
            return Err(Error::Packing {
                mode,
                reason: "payload kind does not match mode".into(),
            })
        }
    };
    Ok(GoldenTrace { mode, snapshots })
}

fn fft_trace(x: &[FixedComplex]) -> Result<Vec<MemoryImage>> {
    if x.len() != 512 {
        return Err(Error::Length {
            mode: Mode::Fft,
            expected: 512,
            actual: x.len(),
        });
    }
    let TwiddleTable::Fft(w) = gen_fft_twiddles() else {
        unreachable!()
    };
    let mut re = vec![0i32; 512];
    let mut im = vec![0i32; 512];
    for (m, v) in x.iter().enumerate() {
        let pos = reverse_bits(m, 9);
        re[pos] = v.re.0;
        im[pos] = v.im.0;
    }
    let product = |w: i32, b: i32| ((i64::from(w) * i64::from(b)) >> 30) as i32;

    let mut snapshots = Vec::with_capacity(9);
    for s in 0..9 {
        let half = 1 << s;
        for p in 0..512 {
            if p & half != 0 {
                continue;
            }
            let k = (p % half) * (256 >> s);
            let (wr, wi) = (w[k].re.0, w[k].im.0);
            let (br, bi) = (re[p + half], im[p + half]);
            let tr = product(wr, br).wrapping_sub(product(wi, bi));
            let ti = product(wr, bi).wrapping_add(product(wi, br));
            let (ar, ai) = (re[p], im[p]);
            re[p] = ar.wrapping_add(tr);
            im[p] = ai.wrapping_add(ti);
            re[p + half] = ar.wrapping_sub(tr);
            im[p + half] = ai.wrapping_sub(ti);
        }
        let positions = (0..512)
            .map(|p| FixedComplex::from_bits(re[p] as u32, im[p] as u32))
            .collect();
        snapshots.push(pack(Mode::Fft, &Signal::Complex(positions))?);
    }
    Ok(snapshots)
}

fn ntt_trace(mode: Mode, poly: &Polynomial) -> Result<Vec<MemoryImage>> {
    let (q, root, bits, last_len) = match mode {
        Mode::MlKem => (3329u64, 17u64, 7u32, 2usize),
        _ => (8_380_417, 1753, 8, 1),
    };
    let mut f: Vec<u64> = poly.coeffs().iter().map(|&c| u64::from(c)).collect();
    if f.len() != 256 {
        return Err(Error::Length {
            mode,
            expected: 256,
            actual: f.len(),
        });
    }
    let mut snapshots = Vec::new();
    let mut k = 1;
    let mut len = 128;
    while len >= last_len {
        for start in (0..256).step_by(2 * len) {
            let zeta = pow_mod(root, reverse_bits(k, bits) as u64, q);
            k += 1;
            for j in start..start + len {
                let t = zeta * f[j + len] % q;
                f[j + len] = (f[j] + q - t) % q;
                f[j] = (f[j] + t) % q;
            }
        }
        let coeffs = f.iter().map(|&c| c as u32).collect();
        let snap = Polynomial::new(poly.modulus(), coeffs)?;
        snapshots.push(pack(mode, &Signal::Poly(snap))?);
        len /= 2;
    }
    Ok(snapshots)
}

/// One mismatching memory word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    pub stage: usize,
    pub bank: usize,
    pub row: usize,
    pub expected: u16,
    pub actual: u16,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompareReport {
    pub stages_compared: usize,
    pub divergences: Vec<Divergence>,
}

impl CompareReport {
    pub fn is_match(&self) -> bool {
        self.divergences.is_empty()
    }

    pub fn first(&self) -> Option<&Divergence> {
        self.divergences.first()
    }
}

impl std::fmt::Display for CompareReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.first() {
            None => write!(f, "{} stages match", self.stages_compared),
            Some(d) => write!(
                f,
                "first divergence at stage {} bank {} row {}: expected {:04x}, found {:04x} ({} words differ)",
                d.stage,
                d.bank,
                d.row,
                d.expected,
                d.actual,
                self.divergences.len()
            ),
        }
    }
}

/// Row-wise comparison of engine snapshots against the golden trace, stage
/// by stage. A missing stage on either side counts as a stage-level
/// divergence at row 0 of bank 0.
pub fn stage_compare(actual: &[MemoryImage], trace: &GoldenTrace) -> CompareReport {
    let mut report = CompareReport {
        stages_compared: trace.snapshots.len().max(actual.len()),
        divergences: Vec::new(),
    };
    for stage in 0..report.stages_compared {
        let (Some(got), Some(want)) = (actual.get(stage), trace.snapshots.get(stage)) else {
            report.divergences.push(Divergence {
                stage,
                bank: 0,
                row: 0,
                expected: 0,
                actual: 0,
            });
            continue;
        };
        for row in 0..ROWS {
            for bank in 0..BANKS {
                let (expected, actual) = (want.get(bank, row), got.get(bank, row));
                if expected != actual {
                    report.divergences.push(Divergence {
                        stage,
                        bank,
                        row,
                        expected,
                        actual,
                    });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(modulus: Modulus, f: impl Fn(usize) -> u32) -> Polynomial {
        Polynomial::new(modulus, (0..256).map(f).collect()).unwrap()
    }

    #[test]
    fn constant_polynomial() {
        let kyber = naive_ntt(&poly(Modulus::Kyber, |i| if i == 0 { 7 } else { 0 }));
        for (i, &c) in kyber.coeffs().iter().enumerate() {
            assert_eq!(c, if i % 2 == 0 { 7 } else { 0 });
        }
        let dil = naive_ntt(&poly(Modulus::Dilithium, |i| if i == 0 { 99 } else { 0 }));
        assert!(dil.coeffs().iter().all(|&c| c == 99));
    }

    #[test]
    fn zero_polynomial() {
        for m in [Modulus::Kyber, Modulus::Dilithium] {
            assert_eq!(naive_ntt(&Polynomial::zero(m)), Polynomial::zero(m));
        }
    }

    #[test]
    fn linear_kyber_polynomial_by_hand() {
        // a(x) = 1 + x^2: the even half is 1 + y, odd half is 0, so slot 2i
        // is 1 + 17^(2 brv7(i) + 1). For i = 0 that is 1 + 17 = 18; for
        // i = 1, brv7(1) = 64 and 17^129 = -17 mod 3329, giving 1 - 17.
        let a = poly(Modulus::Kyber, |i| u32::from(i == 0 || i == 2));
        let hat = naive_ntt(&a);
        assert_eq!(hat.coeffs()[0], 18);
        assert_eq!(hat.coeffs()[1], 0);
        assert_eq!(hat.coeffs()[2], 3329 + 1 - 17);
    }

    #[test]
    fn interpolation_inverts_evaluation() {
        for m in [Modulus::Kyber, Modulus::Dilithium] {
            let q = m.q();
            let a = poly(m, |i| ((i as u64 * 2_654_435_761) % u64::from(q)) as u32);
            assert_eq!(naive_intt(&naive_ntt(&a)), a);
        }
    }

    #[test]
    fn float_fft_basics() {
        let mut impulse = vec![Complex64::default(); 512];
        impulse[0] = Complex64::new(1.0, 0.0);
        assert!(float_fft(&impulse)
            .iter()
            .all(|c| (c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-12));

        let ones = vec![Complex64::new(1.0, 0.0); 512];
        let out = float_fft(&ones);
        assert!((out[0].re - 512.0).abs() < 1e-9);
        assert!(out[1..].iter().all(|c| c.norm_sqr() < 1e-18));
    }

    #[test]
    fn single_tone_lands_in_one_bin() {
        // x_m = exp(+2 pi j 5 m / 512) correlates with bin 5
        let x: Vec<Complex64> = (0..512)
            .map(|m| Complex64::expj(2.0 * PI * 5.0 * m as f64 / 512.0))
            .collect();
        let out = float_fft(&x);
        for (k, c) in out.iter().enumerate() {
            let expected = if k == 5 { 512.0 } else { 0.0 };
            assert!((c.norm_sqr().sqrt() - expected).abs() < 1e-9, "bin {k}");
        }
    }

    #[test]
    fn recursive_fft_matches_direct_dft() {
        let x: Vec<Complex64> = (0..64)
            .map(|m| Complex64::new((m as f64 * 0.37).sin(), (m as f64 * 1.3).cos()))
            .collect();
        for (a, b) in float_fft(&x).iter().zip(naive_dft(&x)) {
            assert!((a.re - b.re).abs() < 1e-10 && (a.im - b.im).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval() {
        let x: Vec<Complex64> = (0..512)
            .map(|m| {
                Complex64::new(
                    ((m * 7919) % 101) as f64 / 50.0 - 1.0,
                    ((m * 104_729) % 97) as f64 / 48.0 - 1.0,
                )
            })
            .collect();
        let time: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        let freq: f64 = float_fft(&x).iter().map(|c| c.norm_sqr()).sum();
        assert!((freq - 512.0 * time).abs() <= 1e-9 * freq);
    }

    #[test]
    fn trace_of_zero_is_zero() {
        let trace =
            golden_trace(Mode::Fft, &Signal::Complex(vec![FixedComplex::ZERO; 512])).unwrap();
        assert_eq!(trace.snapshots.len(), 9);
        assert!(trace.snapshots.iter().all(|s| *s == MemoryImage::default()));
        let trace =
            golden_trace(Mode::MlKem, &Signal::Poly(Polynomial::zero(Modulus::Kyber))).unwrap();
        assert_eq!(trace.snapshots.len(), 7);
        let trace = golden_trace(
            Mode::MlDsa,
            &Signal::Poly(Polynomial::zero(Modulus::Dilithium)),
        )
        .unwrap();
        assert_eq!(trace.snapshots.len(), 8);
    }

    #[test]
    fn trace_final_snapshot_is_oracle_output() {
        for m in [Modulus::Kyber, Modulus::Dilithium] {
            let mode = if m == Modulus::Kyber {
                Mode::MlKem
            } else {
                Mode::MlDsa
            };
            let a = poly(m, |i| (i as u32 * 31 + 5) % m.q());
            let trace = golden_trace(mode, &Signal::Poly(a.clone())).unwrap();
            let expected = pack(mode, &Signal::Poly(naive_ntt(&a))).unwrap();
            assert_eq!(trace.snapshots.last(), Some(&expected));
        }
    }

    #[test]
    fn compare_localizes_a_flip() {
        let a = poly(Modulus::Dilithium, |i| i as u32);
        let trace = golden_trace(Mode::MlDsa, &Signal::Poly(a)).unwrap();
        assert!(stage_compare(&trace.snapshots, &trace).is_match());

        let mut corrupted = trace.snapshots.clone();
        for snap in &mut corrupted[3..] {
            let v = snap.get(2, 5);
            snap.poke(2, 5, v ^ 0x10);
        }
        let report = stage_compare(&corrupted, &trace);
        let first = report.first().unwrap();
        assert_eq!((first.stage, first.bank, first.row), (3, 2, 5));
    }

    #[test]
    fn compare_flags_missing_stage() {
        let trace =
            golden_trace(Mode::MlKem, &Signal::Poly(Polynomial::zero(Modulus::Kyber))).unwrap();
        let report = stage_compare(&trace.snapshots[..6], &trace);
        assert_eq!(report.first().map(|d| d.stage), Some(6));
    }
}
