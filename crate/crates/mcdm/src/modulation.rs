//! Gray-coded constellation mapping and demapping.
//!
//! All alphabets are normalised to unit average symbol energy. The bit
//! conventions below are normative — captures written by one implementation
//! must be decodable by another, so the tables are part of the external
//! interface. Bits within a symbol are taken MSB first.
//!
//! - **BPSK** (1 bit): `0 → +1`, `1 → −1`.
//! - **QPSK** (2 bits `b1 b0`): `b1` selects the real sign, `b0` the
//!   imaginary sign, `0 → +`; scaled by `1/√2`. So `00 → (1+j)/√2`.
//! - **8PSK** (3 bits): point `e^{j2πi/8}` (counter-clockwise from angle 0)
//!   carries the Gray label `i ^ (i >> 1)`.
//! - **16QAM** (4 bits `b3 b2 | b1 b0`): each axis is a Gray-coded 4-PAM,
//!   `00 → +3`, `01 → +1`, `11 → −1`, `10 → −3`, real axis from the high
//!   bit pair; scaled by `1/√10`.
//! - **32QAM** (5 bits `b4 b3 b2 | b1 b0`): cross constellation. Start from
//!   the 8×4 rectangle whose real axis is a Gray-coded 8-PAM
//!   (`000 → +7, 001 → +5, 011 → +3, 010 → +1, 110 → −1, 111 → −3,
//!   101 → −5, 100 → −7`) and whose imaginary axis is the 4-PAM above; then
//!   fold the outer columns into the cross wings:
//!   `|I| = 7 ⇒ (I, Q) → (sign(I)·|Q|, sign(Q)·5)`; scaled by `1/√20`.
//!   A perfect Gray map does not exist for the cross; this fold leaves only
//!   the eight wing-to-body edges at two bit flips (average neighbour
//!   distance 60/52 ≈ 1.154 bits).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Supported modulation alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationScheme {
    Bpsk,
    Qpsk,
    Psk8,
    Qam16,
    Qam32,
}

impl ModulationScheme {
    /// All schemes, in bit-rate order.
    pub const ALL: [ModulationScheme; 5] = [
        ModulationScheme::Bpsk,
        ModulationScheme::Qpsk,
        ModulationScheme::Psk8,
        ModulationScheme::Qam16,
        ModulationScheme::Qam32,
    ];

    /// log2 of the alphabet size.
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModulationScheme::Bpsk => 1,
            ModulationScheme::Qpsk => 2,
            ModulationScheme::Psk8 => 3,
            ModulationScheme::Qam16 => 4,
            ModulationScheme::Qam32 => 5,
        }
    }

    /// Alphabet size D.
    pub fn alphabet_size(self) -> usize {
        1 << self.bits_per_symbol()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModulationScheme::Bpsk => "bpsk",
            ModulationScheme::Qpsk => "qpsk",
            ModulationScheme::Psk8 => "8psk",
            ModulationScheme::Qam16 => "16qam",
            ModulationScheme::Qam32 => "32qam",
        }
    }
}

impl std::fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModulationScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(ModulationScheme::Bpsk),
            "qpsk" | "4qam" => Ok(ModulationScheme::Qpsk),
            "8psk" | "psk8" => Ok(ModulationScheme::Psk8),
            "16qam" | "qam16" => Ok(ModulationScheme::Qam16),
            "32qam" | "qam32" => Ok(ModulationScheme::Qam32),
            other => Err(Error::InvalidConfig(format!(
                "unknown modulation scheme `{other}`"
            ))),
        }
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// A concrete alphabet: `points[label]` is the constellation point whose
/// bit pattern (MSB first) equals `label`.
#[derive(Debug, Clone)]
pub struct Constellation<T> {
    scheme: ModulationScheme,
    points: Vec<Complex<T>>,
}

impl<T: Scalar> Constellation<T> {
    pub fn new(scheme: ModulationScheme) -> Self {
        let points = match scheme {
            ModulationScheme::Bpsk => vec![
                Complex::new(T::one(), T::zero()),
                Complex::new(-T::one(), T::zero()),
            ],
            ModulationScheme::Qpsk => {
                let s = cast::<T>(1.0 / 2.0f64.sqrt());
                let mut pts = vec![Complex::new(T::zero(), T::zero()); 4];
                for b1 in 0..2usize {
                    for b0 in 0..2usize {
                        let re = if b1 == 0 { s } else { -s };
                        let im = if b0 == 0 { s } else { -s };
                        pts[(b1 << 1) | b0] = Complex::new(re, im);
                    }
                }
                pts
            }
            ModulationScheme::Psk8 => {
                let mut pts = vec![Complex::new(T::zero(), T::zero()); 8];
                for i in 0..8usize {
                    let ang = cast::<T>(2.0 * std::f64::consts::PI * i as f64 / 8.0);
                    pts[gray(i)] = Complex::from_polar(T::one(), ang);
                }
                pts
            }
            ModulationScheme::Qam16 => {
                let s = cast::<T>(1.0 / 10.0f64.sqrt());
                let mut pts = vec![Complex::new(T::zero(), T::zero()); 16];
                for ci in 0..4usize {
                    for ri in 0..4usize {
                        let re = cast::<T>((3 - 2 * ci as i32) as f64) * s;
                        let im = cast::<T>((3 - 2 * ri as i32) as f64) * s;
                        pts[(gray(ci) << 2) | gray(ri)] = Complex::new(re, im);
                    }
                }
                pts
            }
            ModulationScheme::Qam32 => {
                let s = cast::<T>(1.0 / 20.0f64.sqrt());
                let mut pts = vec![Complex::new(T::zero(), T::zero()); 32];
                for ci in 0..8usize {
                    for ri in 0..4usize {
                        let mut i_coord = 7 - 2 * ci as i32;
                        let mut q_coord = 3 - 2 * ri as i32;
                        if i_coord.abs() == 7 {
                            let (si, sq) = (i_coord.signum(), q_coord.signum());
                            i_coord = si * q_coord.abs();
                            q_coord = sq * 5;
                        }
                        pts[(gray(ci) << 2) | gray(ri)] = Complex::new(
                            cast::<T>(i_coord as f64) * s,
                            cast::<T>(q_coord as f64) * s,
                        );
                    }
                }
                pts
            }
        };
        Constellation { scheme, points }
    }

    pub fn scheme(&self) -> ModulationScheme {
        self.scheme
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.scheme.bits_per_symbol()
    }

    /// Alphabet points indexed by bit label.
    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    /// Maps `0/1` bits (MSB first per symbol) to constellation points.
    ///
    /// Fails unless the bit count is a multiple of `bits_per_symbol`.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex<T>>> {
        let bps = self.bits_per_symbol();
        if !bits.len().is_multiple_of(bps) {
            return Err(Error::LengthMismatch {
                expected: bits.len().div_ceil(bps) * bps,
                got: bits.len(),
            });
        }
        Ok(bits
            .chunks_exact(bps)
            .map(|chunk| self.points[label_of(chunk)])
            .collect())
    }

    /// Hard demap: nearest alphabet point, lowest label on ties.
    pub fn demap_symbols(&self, symbols: &[Complex<T>]) -> Vec<u8> {
        let bps = self.bits_per_symbol();
        let mut bits = Vec::with_capacity(symbols.len() * bps);
        for s in symbols {
            let label = self.nearest_label(*s);
            push_label_bits(label, bps, &mut bits);
        }
        bits
    }

    /// Label of the alphabet point nearest to `s`.
    pub fn nearest_label(&self, s: Complex<T>) -> usize {
        let mut best = 0usize;
        let mut best_d = T::infinity();
        for (label, p) in self.points.iter().enumerate() {
            let d = (s - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

/// Bit chunk (MSB first) to integer label.
pub fn label_of(bits: &[u8]) -> usize {
    bits.iter()
        .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Appends a label's bits (MSB first) to `out`.
pub fn push_label_bits(label: usize, bps: usize, out: &mut Vec<u8>) {
    for i in (0..bps).rev() {
        out.push(((label >> i) & 1) as u8);
    }
}
