//! Maximal-length antipodal training sequences.
//!
//! Chips come from a Fibonacci LFSR over a primitive polynomial, mapped
//! `{0,1} → {+1,−1}`. The generator degree is the smallest one whose period
//! `2^r − 1` covers the requested length (capped at 16; longer requests
//! cycle the sequence), so a request for exactly `2^r − 1` chips yields one
//! full m-sequence period with its balance and correlation properties.

use crate::error::{Error, Result};

/// Primitive polynomial tap positions (1-based), degrees 2..=16.
const TAPS: [&[u32]; 15] = [
    &[2, 1],
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 6, 4, 1],
    &[13, 4, 3, 1],
    &[14, 5, 3, 1],
    &[15, 14],
    &[16, 15, 13, 4],
];

const MAX_DEGREE: u32 = 16;

fn degree_for(length: usize) -> u32 {
    for r in 2..=MAX_DEGREE {
        if ((1u64 << r) - 1) as usize >= length {
            return r;
        }
    }
    MAX_DEGREE
}

fn tap_mask(degree: u32) -> u64 {
    TAPS[(degree - 2) as usize]
        .iter()
        .fold(0u64, |m, &pos| m | 1u64 << (pos - 1))
}

/// One Fibonacci LFSR step (left shift, feedback into the LSB); returns the
/// output chip (0/1) shifted out of the MSB.
fn step(state: &mut u64, degree: u32, mask: u64) -> u8 {
    let out = ((*state >> (degree - 1)) & 1) as u8;
    let fb = ((*state & mask).count_ones() & 1) as u64;
    *state = ((*state << 1) | fb) & ((1u64 << degree) - 1);
    out
}

/// Generates a deterministic antipodal PN sequence of `length` chips.
///
/// `seed` selects the starting phase of the m-sequence; it must be nonzero
/// (the all-zero shift-register state is absorbing). Identical
/// `(length, seed)` always produce the identical sequence.
pub fn gen_pn(length: usize, seed: u64) -> Result<Vec<i8>> {
    if length == 0 {
        return Err(Error::InvalidParams("PN length must be positive".into()));
    }
    if seed == 0 {
        return Err(Error::ZeroSeed);
    }
    let degree = degree_for(length);
    let period = (1u64 << degree) - 1;
    let mask = tap_mask(degree);
    // Fold the full seed into a nonzero r-bit state.
    let mut state = 1 + seed % period;
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let chip = step(&mut state, degree, mask);
        out.push(if chip == 0 { 1i8 } else { -1i8 });
    }
    Ok(out)
}
