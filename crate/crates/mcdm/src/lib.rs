//! Multicarrier chirp-division multiplexing (MCDM) modem and link-level
//! simulator.
//!
//! MCDM carries one constellation symbol per orthogonal *chirp* subcarrier:
//! the subcarriers share a common quadratic phase (the chirp) on top of the
//! usual complex-exponential spacing, so the whole waveform sweeps in
//! frequency while keeping subcarriers mutually orthogonal. Modulation and
//! demodulation go through the orthogonal chirp transform (OCT) pair, which
//! factors into a dechirp multiply plus an FFT. With the chirp rate set to
//! zero the entire pipeline degenerates to plain ZP-OFDM, which serves as
//! the comparison baseline throughout.
//!
//! The crate is organised as a small DSP library plus a Monte-Carlo harness:
//!
//! - [`chirp`] — waveform parameters, chirp basis, OCT/IOCT.
//! - [`modulation`] — gray-coded PSK/QAM constellations.
//! - [`pn`] — maximal-length antipodal training sequences.
//! - [`frame`] — comb-pilot subcarrier layout and frame assembly.
//! - [`tx`] — symbol synthesis and packet construction.
//! - [`channel`] — tapped-delay-line fading, CFO, timing offset, AWGN.
//! - [`rx`] — synchronization, CFO correction, demodulation, channel
//!   estimation, detection.
//! - [`theory`] — closed-form uncoded BER references and SNR conversions.
//! - [`sweep`] — BER sweep engine and rate reporting.
//! - [`config`] — plain-text sweep configuration and named presets.
//! - [`io`] — result emission (CSV/JSONL) and raw I/Q file interop.
//!
//! All core DSP is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the harness instantiates `f64`.

pub mod channel;
pub mod chirp;
pub mod config;
pub mod error;
pub mod frame;
pub mod io;
pub mod modulation;
pub mod pn;
pub mod rx;
pub mod scalar;
pub mod sweep;
pub mod theory;
pub mod tx;

pub use num_complex::Complex;

pub use channel::{ChannelProfile, ChannelRealization, Fading, RngStream};
pub use chirp::{ChirpBasis, Spectrum, WaveformParams};
pub use config::SweepConfig;
pub use error::{Error, Result};
pub use frame::{FrameLayout, FrequencyFrame, SubcarrierRole};
pub use modulation::{Constellation, ModulationScheme};
pub use rx::{CfoEstimate, ChannelEstimate, DetectionResult, RxOptions, SyncResult};
pub use scalar::Scalar;
pub use sweep::{BerRecord, System};
pub use tx::{BasebandSignal, PacketSpec};

/// Single-precision complex sample.
pub type C32 = Complex<f32>;
/// Double-precision complex sample.
pub type C64 = Complex<f64>;

/// Single-precision chirp basis.
pub type ChirpBasis32 = ChirpBasis<f32>;
/// Double-precision chirp basis (used by the simulation harness).
pub type ChirpBasis64 = ChirpBasis<f64>;

/// Single-precision waveform parameters.
pub type WaveformParams32 = WaveformParams<f32>;
/// Double-precision waveform parameters.
pub type WaveformParams64 = WaveformParams<f64>;

/// Single-precision baseband signal.
pub type BasebandSignal32 = BasebandSignal<f32>;
/// Double-precision baseband signal.
pub type BasebandSignal64 = BasebandSignal<f64>;

/// Single-precision frequency-domain coefficient vector.
pub type Spectrum32 = Spectrum<f32>;
/// Double-precision frequency-domain coefficient vector.
pub type Spectrum64 = Spectrum<f64>;
