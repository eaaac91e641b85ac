//! Transmit chain: symbol synthesis and packet assembly.
//!
//! A packet is `[PN | PN | pause | symbol+guard | … | symbol+guard]`: two
//! identical antipodal training halves (the repetition is what the CFO
//! estimator relies on), a zero pause, then the MCDM symbols, each followed
//! by a zero-padded guard that absorbs multipath echoes.

use num_complex::Complex;

use crate::chirp::ChirpBasis;
use crate::error::{Error, Result};
use crate::frame::{build_frame, FrameLayout, FrequencyFrame};
use crate::modulation::{Constellation, ModulationScheme};
use crate::pn::gen_pn;
use crate::scalar::Scalar;

/// Complex baseband sample stream with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal<T> {
    samples: Vec<Complex<T>>,
    sample_rate: T,
}

impl<T: Scalar> BasebandSignal<T> {
    pub fn new(samples: Vec<Complex<T>>, sample_rate: T) -> Self {
        BasebandSignal {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    /// Mean power over the occupied span (samples with nonzero magnitude),
    /// the pre-detection SNR reference. `None` if nothing is occupied.
    pub fn occupied_mean_power(&self) -> Option<T> {
        let mut power = T::zero();
        let mut count = 0usize;
        for c in &self.samples {
            let p = c.norm_sqr();
            if p > T::zero() {
                power += p;
                count += 1;
            }
        }
        if count == 0 {
            None
        } else {
            Some(power / T::from_usize(count).unwrap())
        }
    }
}

/// Packet framing parameters. Durations are whole sample counts; the
/// training block is two identical halves of `pn_len` samples each.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    pub pn_len: usize,
    pub pn_seed: u64,
    pub pause_len: usize,
    pub guard_len: usize,
    pub n_symbols: usize,
    pub layout: FrameLayout,
    pub scheme: ModulationScheme,
}

impl PacketSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pn_len == 0 {
            return Err(Error::InvalidParams("training half must be nonempty".into()));
        }
        if self.pn_seed == 0 {
            return Err(Error::ZeroSeed);
        }
        if self.n_symbols == 0 {
            return Err(Error::InvalidParams("packet needs at least one symbol".into()));
        }
        Ok(())
    }

    /// Payload bits one packet carries.
    pub fn payload_bits(&self) -> usize {
        self.n_symbols * self.layout.data_count() * self.scheme.bits_per_symbol()
    }

    /// Training samples (both halves).
    pub fn training_len(&self) -> usize {
        2 * self.pn_len
    }

    /// Total packet length in samples for a given symbol body length.
    pub fn packet_len(&self, body_len: usize) -> usize {
        self.training_len() + self.pause_len + self.n_symbols * (body_len + self.guard_len)
    }

    /// The transmitted training block: one PN half repeated twice.
    pub fn training_chips(&self) -> Result<Vec<i8>> {
        let half = gen_pn(self.pn_len, self.pn_seed)?;
        let mut both = half.clone();
        both.extend_from_slice(&half);
        Ok(both)
    }
}

/// Expands one frequency frame into a time-domain symbol body plus
/// `guard_len` zero samples.
pub fn synthesize_symbol<T: Scalar>(
    frame: &FrequencyFrame<T>,
    basis: &ChirpBasis<T>,
    guard_len: usize,
) -> Result<BasebandSignal<T>> {
    let mut samples = basis.ioct_inverse(&frame.spectrum())?;
    samples.resize(
        samples.len() + guard_len,
        Complex::new(T::zero(), T::zero()),
    );
    Ok(BasebandSignal::new(samples, basis.params().sample_rate()))
}

/// Builds the full transmit packet from payload bits, scaled by `amplitude`
/// (the `√E` factor, applied uniformly to training and symbols).
pub fn build_packet<T: Scalar>(
    payload_bits: &[u8],
    spec: &PacketSpec,
    basis: &ChirpBasis<T>,
    amplitude: T,
) -> Result<BasebandSignal<T>> {
    spec.validate()?;
    if spec.layout.subcarriers() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: spec.layout.subcarriers(),
        });
    }
    if payload_bits.len() != spec.payload_bits() {
        return Err(Error::LengthMismatch {
            expected: spec.payload_bits(),
            got: payload_bits.len(),
        });
    }

    let constellation = Constellation::<T>::new(spec.scheme);
    let zero = Complex::new(T::zero(), T::zero());
    let body_len = basis.len();
    let mut samples = Vec::with_capacity(spec.packet_len(body_len));

    for &chip in &spec.training_chips()? {
        samples.push(Complex::new(amplitude * T::from_i8(chip).unwrap(), T::zero()));
    }
    samples.resize(samples.len() + spec.pause_len, zero);

    let bits_per_symbol = spec.layout.data_count() * spec.scheme.bits_per_symbol();
    for chunk in payload_bits.chunks_exact(bits_per_symbol) {
        let data = constellation.map_bits(chunk)?;
        let frame = build_frame(&data, &spec.layout)?;
        let body = basis.ioct_inverse(&frame.spectrum())?;
        samples.extend(body.into_iter().map(|c| c * amplitude));
        samples.resize(samples.len() + spec.guard_len, zero);
    }

    Ok(BasebandSignal::new(samples, basis.params().sample_rate()))
}
