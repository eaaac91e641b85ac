//! Multipath fading channel, CFO/timing impairments, and AWGN.
//!
//! The channel is a tapped delay line with integer-sample delays. Tap gains
//! are either fixed (`√power`, for calibration) or drawn once per packet as
//! circularly-symmetric complex Gaussians (Rayleigh magnitude, uniform
//! phase) — block fading over the whole packet. Any carrier-phase factor a
//! real front end would add per path is statistically absorbed by the
//! uniform tap phase, so everything here stays at complex baseband.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::tx::BasebandSignal;

/// Tap-gain model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// Deterministic real gains `√power` (repeatable calibration channel).
    Fixed,
    /// Complex Gaussian gains redrawn per packet, constant within a packet.
    RayleighBlock,
}

/// Mean tap powers and delays describing the propagation environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile<T> {
    delays: Vec<usize>,
    powers: Vec<T>,
    fading: Fading,
}

impl<T: Scalar> ChannelProfile<T> {
    /// Validates delays (strictly ascending, first tap at zero) and powers
    /// (positive, summing to one).
    pub fn new(delays: Vec<usize>, powers: Vec<T>, fading: Fading) -> Result<Self> {
        if delays.is_empty() || delays.len() != powers.len() {
            return Err(Error::InvalidParams(
                "profile needs matching, nonempty delay and power lists".into(),
            ));
        }
        if delays[0] != 0 {
            return Err(Error::InvalidParams("first tap delay must be 0".into()));
        }
        if delays.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("tap delays must be strictly ascending".into()));
        }
        if powers.iter().any(|p| !p.is_finite() || *p <= T::zero()) {
            return Err(Error::InvalidParams("tap powers must be positive".into()));
        }
        let sum = powers.iter().fold(T::zero(), |a, &p| a + p);
        if (sum - T::one()).abs() > cast::<T>(1e-12) {
            return Err(Error::InvalidParams(format!(
                "tap powers must sum to 1, got {}",
                sum.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(ChannelProfile {
            delays,
            powers,
            fading,
        })
    }

    /// Ideal single-tap channel.
    pub fn identity() -> Self {
        ChannelProfile {
            delays: vec![0],
            powers: vec![T::one()],
            fading: Fading::Fixed,
        }
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn powers(&self) -> &[T] {
        &self.powers
    }

    pub fn fading(&self) -> Fading {
        self.fading
    }

    pub fn max_delay(&self) -> usize {
        *self.delays.last().unwrap()
    }
}

/// One draw of the propagation environment for a packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub taps: Vec<Complex<T>>,
    pub delays: Vec<usize>,
    pub cfo_hz: T,
    pub timing_offset: usize,
    pub snr_db: T,
}

impl<T: Scalar> ChannelRealization<T> {
    pub fn max_delay(&self) -> usize {
        self.delays.iter().copied().max().unwrap_or(0)
    }
}

/// Seeded, splittable random stream (counter-based ChaCha under the hood).
///
/// Identical `(seed, stream)` pairs reproduce identical draws; distinct
/// stream indices give statistically independent streams, so Monte-Carlo
/// trials can be keyed `(cell, trial)` and run in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Instantiates the generator positioned at this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Draws one block-fading realization from a profile.
pub fn draw_realization<T: Scalar, R: Rng + ?Sized>(
    profile: &ChannelProfile<T>,
    rng: &mut R,
    snr_db: T,
    cfo_hz: T,
    timing_offset: usize,
) -> ChannelRealization<T> {
    let half = cast::<T>(0.5);
    let taps = profile
        .powers
        .iter()
        .map(|&p| match profile.fading {
            Fading::Fixed => Complex::new(p.sqrt(), T::zero()),
            Fading::RayleighBlock => {
                let s = (p * half).sqrt();
                Complex::new(T::standard_normal(rng) * s, T::standard_normal(rng) * s)
            }
        })
        .collect();
    ChannelRealization {
        taps,
        delays: profile.delays.clone(),
        cfo_hz,
        timing_offset,
        snr_db,
    }
}

/// Runs a signal through the tapped delay line, then delays it by the
/// timing offset, then rotates it by the CFO.
///
/// Output length is `input + max_delay + timing_offset`; the CFO phase ramp
/// is indexed from the start of the output stream.
pub fn apply_channel<T: Scalar>(
    signal: &BasebandSignal<T>,
    real: &ChannelRealization<T>,
) -> BasebandSignal<T> {
    let fs = signal.sample_rate();
    let x = signal.samples();
    if x.is_empty() {
        return BasebandSignal::new(Vec::new(), fs);
    }
    let out_len = x.len() + real.max_delay() + real.timing_offset;
    let mut out = vec![Complex::new(T::zero(), T::zero()); out_len];
    for (&tap, &delay) in real.taps.iter().zip(real.delays.iter()) {
        let base = delay + real.timing_offset;
        for (n, &s) in x.iter().enumerate() {
            out[base + n] += tap * s;
        }
    }
    if !real.cfo_hz.is_zero() {
        let step = cast::<T>(2.0) * T::PI() * real.cfo_hz / fs;
        for (n, s) in out.iter_mut().enumerate() {
            *s *= Complex::from_polar(T::one(), step * cast::<T>(n as f64));
        }
    }
    BasebandSignal::new(out, fs)
}

/// Adds complex white Gaussian noise at the given pre-detection SNR.
///
/// The per-sample noise variance is `P / 10^(snr_db/10)` with `P` the mean
/// power over the signal's occupied (nonzero) span, split evenly between
/// the quadratures. `snr_db = +∞` is the noiseless sentinel.
pub fn add_awgn<T: Scalar, R: Rng + ?Sized>(
    signal: &BasebandSignal<T>,
    snr_db: T,
    rng: &mut R,
) -> Result<BasebandSignal<T>> {
    if snr_db == T::infinity() {
        return Ok(signal.clone());
    }
    let p_sig = signal
        .occupied_mean_power()
        .ok_or(Error::ZeroPowerSignal)?;
    let variance = p_sig / cast::<T>(10.0).powf(snr_db / cast::<T>(10.0));
    let s = (variance * cast::<T>(0.5)).sqrt();
    let samples = signal
        .samples()
        .iter()
        .map(|&x| {
            x + Complex::new(T::standard_normal(rng) * s, T::standard_normal(rng) * s)
        })
        .collect();
    Ok(BasebandSignal::new(samples, signal.sample_rate()))
}
