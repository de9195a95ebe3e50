//! Transform input/output files.
//!
//! One value per line. FFT lines hold two 8-digit hex words, the real and
//! imaginary Q16.15 bit patterns (`00008000 ffff8000` is `1.0 - 1.0j`). NTT
//! lines hold one decimal residue. Blank lines and lines starting with `#`
//! are ignored.

use crate::butterfly::Mode;
use crate::error::{Error, Result};
use crate::fixed_point::FixedComplex;
use crate::memory::{Signal, FFT_POINTS, NTT_POINTS};
use crate::modring::Polynomial;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_hex_word(line: usize, field: &str) -> Result<u32> {
    if field.is_empty() || field.len() > 8 {
        return Err(Error::Parse {
            line,
            reason: format!("`{field}` is not a 32-bit hex word"),
        });
    }
    u32::from_str_radix(field, 16).map_err(|e| Error::Parse {
        line,
        reason: format!("`{field}`: {e}"),
    })
}

pub fn parse_signal(mode: Mode, text: &str) -> Result<Signal> {
    let mut last_line = 0;
    let signal = match mode.modulus() {
        None => {
            let mut values = Vec::with_capacity(FFT_POINTS);
            for (line, content) in content_lines(text) {
                last_line = line;
                let fields: Vec<&str> = content.split_whitespace().collect();
                let [re, im] = fields[..] else {
                    return Err(Error::Parse {
                        line,
                        reason: format!("expected two hex words, found {}", fields.len()),
                    });
                };
                values.push(FixedComplex::from_bits(
                    parse_hex_word(line, re)?,
                    parse_hex_word(line, im)?,
                ));
            }
            Signal::Complex(values)
        }
        Some(modulus) => {
            let mut coeffs = Vec::with_capacity(NTT_POINTS);
            for (line, content) in content_lines(text) {
                last_line = line;
                let value: u32 = content.parse().map_err(|e| Error::Parse {
                    line,
                    reason: format!("`{content}`: {e}"),
                })?;
                if value >= modulus.q() {
                    return Err(Error::Parse {
                        line,
                        reason: format!("residue {value} is not below q = {}", modulus.q()),
                    });
                }
                coeffs.push(value);
            }
            Signal::Poly(Polynomial::new(modulus, coeffs)?)
        }
    };
    let (expected, actual) = match &signal {
        Signal::Complex(v) => (FFT_POINTS, v.len()),
        Signal::Poly(p) => (NTT_POINTS, p.len()),
    };
    if expected != actual {
        return Err(Error::Parse {
            line: last_line,
            reason: format!("expected {expected} values for {mode}, found {actual}"),
        });
    }
    Ok(signal)
}

pub fn format_signal(signal: &Signal) -> String {
    match signal {
        Signal::Complex(values) => values
            .iter()
            .map(|c| format!("{:08x} {:08x}\n", c.re.to_bits(), c.im.to_bits()))
            .collect(),
        Signal::Poly(p) => p.coeffs().iter().map(|c| format!("{c}\n")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::Modulus;

    #[test]
    fn round_trip() {
        let fft = Signal::Complex(crate::rng::random_fft_input(1));
        assert_eq!(parse_signal(Mode::Fft, &format_signal(&fft)).unwrap(), fft);
        let poly = Signal::Poly(crate::rng::random_poly(Modulus::Dilithium, 1));
        assert_eq!(
            parse_signal(Mode::MlDsa, &format_signal(&poly)).unwrap(),
            poly
        );
    }

    #[test]
    fn errors_name_the_line() {
        let mut text = "0\n".repeat(255);
        text.push_str("3329\n");
        assert_eq!(
            parse_signal(Mode::MlKem, &text),
            Err(Error::Parse {
                line: 256,
                reason: "residue 3329 is not below q = 3329".into()
            })
        );
        let text = "# header\n00008000 0000000g\n";
        assert!(matches!(
            parse_signal(Mode::Fft, text),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "12\n".repeat(10);
        assert!(matches!(
            parse_signal(Mode::MlDsa, &text),
            Err(Error::Parse { line: 10, .. })
        ));
        assert!(matches!(
            parse_signal(Mode::Fft, "1 2 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
