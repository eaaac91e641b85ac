//! Comb-pilot subcarrier layout and frequency-frame assembly.
//!
//! A layout partitions the `K` subcarriers into pilots, nulls, and data:
//!
//! - pilots sit on the uniform comb `{0, L, 2L, …, (K_p−1)L}` with
//!   `L = K/K_p`, fixed over time, carrying antipodal `±1` symbols drawn
//!   once from the PN generator;
//! - nulls take the `⌊K_n/2⌋` lowest and remaining highest *non-pilot*
//!   indices (edge guard bands that leave the pilot comb intact);
//! - every remaining index carries data, in ascending order.

use num_complex::Complex;

use crate::chirp::Spectrum;
use crate::error::{Error, Result};
use crate::pn::gen_pn;
use crate::scalar::Scalar;

/// Seed for the fixed pilot pattern; part of the wire format.
pub const DEFAULT_PILOT_SEED: u64 = 0x4d43_444d; // "MCDM"

/// What a given subcarrier index carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcarrierRole {
    Pilot,
    Data,
    Null,
}

/// Fixed pilot/null/data partition of the `K` subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayout {
    subcarriers: usize,
    pilot_spacing: usize,
    pilot_indices: Vec<usize>,
    null_indices: Vec<usize>,
    data_indices: Vec<usize>,
    pilot_symbols: Vec<i8>,
    roles: Vec<SubcarrierRole>,
}

impl FrameLayout {
    /// Builds a layout with `pilot_count` comb pilots and `null_count` edge
    /// nulls. `pilot_count` may be zero (no pilots: calibration layouts that
    /// assume a known channel); otherwise it must divide `subcarriers`.
    pub fn new(
        subcarriers: usize,
        pilot_count: usize,
        null_count: usize,
        pilot_seed: u64,
    ) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::InvalidParams("layout needs subcarriers".into()));
        }
        if pilot_count + null_count > subcarriers {
            return Err(Error::InvalidParams(format!(
                "pilots ({pilot_count}) + nulls ({null_count}) exceed K = {subcarriers}"
            )));
        }
        let (pilot_spacing, pilot_indices, pilot_symbols) = if pilot_count > 0 {
            if !subcarriers.is_multiple_of(pilot_count) {
                return Err(Error::InvalidParams(format!(
                    "pilot count {pilot_count} must divide K = {subcarriers}"
                )));
            }
            let spacing = subcarriers / pilot_count;
            let indices: Vec<usize> = (0..pilot_count).map(|i| i * spacing).collect();
            (spacing, indices, gen_pn(pilot_count, pilot_seed)?)
        } else {
            (0, Vec::new(), Vec::new())
        };

        let mut roles = vec![SubcarrierRole::Data; subcarriers];
        for &p in &pilot_indices {
            roles[p] = SubcarrierRole::Pilot;
        }

        let non_pilot: Vec<usize> = (0..subcarriers)
            .filter(|i| roles[*i] != SubcarrierRole::Pilot)
            .collect();
        let low = null_count / 2;
        let high = null_count - low;
        let mut null_indices: Vec<usize> = non_pilot[..low].to_vec();
        null_indices.extend_from_slice(&non_pilot[non_pilot.len() - high..]);
        null_indices.sort_unstable();
        for &i in &null_indices {
            roles[i] = SubcarrierRole::Null;
        }

        let data_indices: Vec<usize> = (0..subcarriers)
            .filter(|i| roles[*i] == SubcarrierRole::Data)
            .collect();

        Ok(FrameLayout {
            subcarriers,
            pilot_spacing,
            pilot_indices,
            null_indices,
            data_indices,
            pilot_symbols,
            roles,
        })
    }

    /// Layout with the default pilot pattern seed.
    pub fn with_default_pilots(
        subcarriers: usize,
        pilot_count: usize,
        null_count: usize,
    ) -> Result<Self> {
        Self::new(subcarriers, pilot_count, null_count, DEFAULT_PILOT_SEED)
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn pilot_count(&self) -> usize {
        self.pilot_indices.len()
    }

    pub fn null_count(&self) -> usize {
        self.null_indices.len()
    }

    pub fn data_count(&self) -> usize {
        self.data_indices.len()
    }

    /// Pilot comb spacing `L`; zero when the layout has no pilots.
    pub fn pilot_spacing(&self) -> usize {
        self.pilot_spacing
    }

    pub fn pilot_indices(&self) -> &[usize] {
        &self.pilot_indices
    }

    pub fn null_indices(&self) -> &[usize] {
        &self.null_indices
    }

    pub fn data_indices(&self) -> &[usize] {
        &self.data_indices
    }

    /// Antipodal pilot values, one per pilot index.
    pub fn pilot_symbols(&self) -> &[i8] {
        &self.pilot_symbols
    }

    pub fn role(&self, index: usize) -> SubcarrierRole {
        self.roles[index]
    }

    /// Pulls the data-subcarrier values out of a length-`K` vector.
    pub fn extract_data<T: Copy>(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        self.data_indices.iter().map(|&i| values[i]).collect()
    }
}

/// One assembled frequency-domain MCDM symbol: pilots on the comb, data in
/// ascending index order, zeros on the nulls.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFrame<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> FrequencyFrame<T> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn into_spectrum(self) -> Spectrum<T> {
        self.coeffs.into()
    }

    pub fn spectrum(&self) -> Spectrum<T> {
        self.coeffs.clone().into()
    }

    pub fn energy(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }
}

/// Places `data_symbols` into a frame per `layout`.
///
/// Exactly `layout.data_count()` symbols are required.
pub fn build_frame<T: Scalar>(
    data_symbols: &[Complex<T>],
    layout: &FrameLayout,
) -> Result<FrequencyFrame<T>> {
    if data_symbols.len() != layout.data_count() {
        return Err(Error::LengthMismatch {
            expected: layout.data_count(),
            got: data_symbols.len(),
        });
    }
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); layout.subcarriers()];
    for (&idx, &value) in layout.pilot_indices().iter().zip(layout.pilot_symbols()) {
        coeffs[idx] = Complex::new(T::from_i8(value).unwrap(), T::zero());
    }
    for (&idx, &value) in layout.data_indices().iter().zip(data_symbols) {
        coeffs[idx] = value;
    }
    Ok(FrequencyFrame { coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn small_layout_matches_hand_derivation() {
        // K=8, K_p=2 (L=4), K_n=2: pilots {0,4}, nulls on the edge-most
        // non-pilot indices {1,7}, data {2,3,5,6}.
        let l = FrameLayout::with_default_pilots(8, 2, 2).unwrap();
        assert_eq!(l.pilot_spacing(), 4);
        assert_eq!(l.pilot_indices(), &[0, 4]);
        assert_eq!(l.null_indices(), &[1, 7]);
        assert_eq!(l.data_indices(), &[2, 3, 5, 6]);
    }

    #[test]
    fn simulation_layout_counts() {
        let l = FrameLayout::with_default_pilots(1024, 256, 56).unwrap();
        assert_eq!(l.pilot_spacing(), 4);
        assert_eq!(l.data_count(), 712);
        assert_eq!(l.pilot_count() + l.null_count() + l.data_count(), 1024);
    }

    #[test]
    fn layout_validation() {
        assert!(FrameLayout::with_default_pilots(8, 3, 0).is_err()); // 3 ∤ 8
        assert!(FrameLayout::with_default_pilots(8, 4, 5).is_err()); // overfull
        assert!(FrameLayout::new(8, 2, 0, 0).is_err()); // zero pilot seed
        assert!(FrameLayout::with_default_pilots(0, 0, 0).is_err());
    }

    #[test]
    fn no_pilot_layout() {
        let l = FrameLayout::with_default_pilots(16, 0, 4).unwrap();
        assert_eq!(l.pilot_count(), 0);
        assert_eq!(l.pilot_spacing(), 0);
        assert_eq!(l.data_count(), 12);
        assert_eq!(l.null_indices(), &[0, 1, 14, 15]);
    }

    #[test]
    fn pilot_only_frame_energy() {
        let l = FrameLayout::with_default_pilots(8, 2, 2).unwrap();
        let zeros = vec![Complex64::new(0.0, 0.0); l.data_count()];
        let frame = build_frame(&zeros, &l).unwrap();
        // antipodal pilots carry unit energy each
        assert!((frame.energy() - l.pilot_count() as f64).abs() < 1e-12);
    }

    #[test]
    fn data_round_trip_through_frame() {
        let l = FrameLayout::with_default_pilots(16, 4, 4).unwrap();
        let data: Vec<Complex64> = (0..l.data_count())
            .map(|i| Complex64::new(i as f64, -(i as f64)))
            .collect();
        let frame = build_frame(&data, &l).unwrap();
        assert_eq!(l.extract_data(frame.as_slice()), data);
    }

    #[test]
    fn wrong_data_count_rejected() {
        let l = FrameLayout::with_default_pilots(8, 2, 2).unwrap();
        let d = vec![Complex64::new(0.0, 0.0); 3];
        assert!(build_frame(&d, &l).is_err());
    }

    proptest! {
        #[test]
        fn roles_partition_the_band(
            k_exp in 2u32..8,
            pilots_exp in 0u32..5,
            nulls in 0usize..10,
        ) {
            let k = 1usize << k_exp;
            let pilot_count = if pilots_exp == 0 { 0 } else { 1usize << (pilots_exp - 1) };
            prop_assume!(pilot_count <= k && pilot_count + nulls <= k);
            let l = FrameLayout::with_default_pilots(k, pilot_count, nulls).unwrap();
            prop_assert_eq!(l.pilot_count() + l.null_count() + l.data_count(), k);
            let mut seen = vec![0u8; k];
            for &i in l.pilot_indices() { seen[i] += 1; }
            for &i in l.null_indices() { seen[i] += 1; }
            for &i in l.data_indices() { seen[i] += 1; }
            prop_assert!(seen.iter().all(|&c| c == 1));
            for i in 0..k {
                let expected = if l.pilot_indices().contains(&i) {
                    SubcarrierRole::Pilot
                } else if l.null_indices().contains(&i) {
                    SubcarrierRole::Null
                } else {
                    SubcarrierRole::Data
                };
                prop_assert_eq!(l.role(i), expected);
            }
        }
    }
}
