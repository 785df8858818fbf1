use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// A point of the unit-energy Gray-mapped QPSK alphabet.
///
/// | bits | symbol          |
/// |------|-----------------|
/// | 00   | `( 1 + j)/sqrt2` |
/// | 01   | `( 1 - j)/sqrt2` |
/// | 10   | `(-1 + j)/sqrt2` |
/// | 11   | `(-1 - j)/sqrt2` |
///
/// The first bit selects the sign of the real part, the second the sign of
/// the imaginary part, so neighbours at 90 degrees differ in one bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QpskSymbol(u8);

impl QpskSymbol {
    pub const ALPHABET: [QpskSymbol; 4] = [QpskSymbol(0), QpskSymbol(1), QpskSymbol(2), QpskSymbol(3)];

    pub fn from_bits(b0: bool, b1: bool) -> Self {
        QpskSymbol(((b0 as u8) << 1) | b1 as u8)
    }

    pub fn bits(self) -> (bool, bool) {
        (self.0 & 2 != 0, self.0 & 1 != 0)
    }

    /// Two-bit label in `0..4`.
    pub fn index(self) -> u8 {
        self.0
    }

    pub fn from_index(i: u8) -> Self {
        QpskSymbol(i & 3)
    }

    pub fn value(self) -> Complex64 {
        let (b0, b1) = self.bits();
        let re = if b0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
        let im = if b1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
        Complex64::new(re, im)
    }
}

impl From<QpskSymbol> for Complex64 {
    fn from(s: QpskSymbol) -> Self {
        s.value()
    }
}

/// Maps a bit stream onto QPSK symbols, two bits per symbol.
pub fn qpsk_map(bits: &[bool]) -> Result<Vec<QpskSymbol>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Framing(format!("odd bit count {}", bits.len())));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| QpskSymbol::from_bits(p[0], p[1]))
        .collect())
}

/// Nearest alphabet point. A component that is exactly zero decides `+`.
pub fn qpsk_slice(s: Complex64) -> QpskSymbol {
    QpskSymbol::from_bits(s.re < 0.0, s.im < 0.0)
}

pub fn symbol_to_bits(s: QpskSymbol) -> [bool; 2] {
    let (a, b) = s.bits();
    [a, b]
}

pub fn bits_to_symbols(bits: &[bool]) -> Result<Vec<Complex64>> {
    Ok(qpsk_map(bits)?.into_iter().map(QpskSymbol::value).collect())
}
