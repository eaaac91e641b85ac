//! Orthogonal chirp basis and the OCT/IOCT transform pair.
//!
//! The `k`-th subcarrier is a linear chirp with an extra complex-exponential
//! offset of `k·Δf`:
//!
//! ```text
//! ψ_k[n] = (1/√N) · exp(j·(2π·k·Δf·t_n + π·μ·t_n²)),   t_n = n / f_s
//! ```
//!
//! With the spacing criterion `Δf = 1/T` and critical sampling
//! (`f_s = K·Δf`, `N = K`) the sampled subcarriers form an orthonormal basis
//! of `C^N`: the quadratic chirp phase is common to all `k` and cancels in
//! every pairwise inner product, leaving the DFT orthogonality relation.
//!
//! Projection onto the basis (the orthogonal chirp transform, OCT) therefore
//! factors into an elementwise *dechirp* multiply followed by a DFT, and the
//! inverse (IOCT) into an inverse DFT followed by a re-chirp. Both run in
//! `O(N log N)`; the direct `O(N²)` inner-product form exists only as a test
//! oracle. At `μ = 0` the pair reduces exactly to the unitary DFT, which is
//! how the OFDM baseline shares this code path.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Waveform parameters for one chirp basis.
///
/// The symbol duration is always derived as `T = 1/Δf` and the sample grid is
/// critically sampled (`f_s = K·Δf`, `N = K` samples per symbol body), so the
/// orthogonality criterion holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformParams<T> {
    subcarriers: usize,
    delta_f: T,
    chirp_rate: T,
}

impl<T: Scalar> WaveformParams<T> {
    /// Validates and builds a parameter set.
    ///
    /// `chirp_rate` (μ, Hz/s) is signed: positive sweeps up, negative down,
    /// zero is plain OFDM.
    pub fn new(subcarriers: usize, delta_f: T, chirp_rate: T) -> Result<Self> {
        if subcarriers < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 subcarriers, got {subcarriers}"
            )));
        }
        if !delta_f.is_finite() || delta_f <= T::zero() {
            return Err(Error::InvalidParams(
                "subcarrier spacing must be positive and finite".into(),
            ));
        }
        if !chirp_rate.is_finite() {
            return Err(Error::InvalidParams("chirp rate must be finite".into()));
        }
        Ok(Self {
            subcarriers,
            delta_f,
            chirp_rate,
        })
    }

    /// Number of subcarriers `K`.
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// Subcarrier spacing `Δf` in Hz.
    pub fn delta_f(&self) -> T {
        self.delta_f
    }

    /// Chirp rate `μ` in Hz/s.
    pub fn chirp_rate(&self) -> T {
        self.chirp_rate
    }

    /// Symbol body duration `T = 1/Δf` in seconds.
    pub fn symbol_duration(&self) -> T {
        self.delta_f.recip()
    }

    /// Sample rate `f_s = K·Δf` in Hz (critical sampling).
    pub fn sample_rate(&self) -> T {
        cast::<T>(self.subcarriers as f64) * self.delta_f
    }

    /// Samples per symbol body, `N = K`.
    pub fn samples_per_symbol(&self) -> usize {
        self.subcarriers
    }

    /// Frequency span swept by the chirp over one symbol, `B_c = μ·T`.
    pub fn chirp_span(&self) -> T {
        self.chirp_rate * self.symbol_duration()
    }

    /// Occupied bandwidth `K·Δf` in Hz.
    pub fn bandwidth(&self) -> T {
        self.sample_rate()
    }
}

/// Frequency-domain coefficient vector of length `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T>(Vec<Complex<T>>);

impl<T: Scalar> Spectrum<T> {
    /// All-zero spectrum of length `k`.
    pub fn zeros(k: usize) -> Self {
        Spectrum(vec![Complex::new(T::zero(), T::zero()); k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.0
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> T {
        self.0
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }
}

impl<T> From<Vec<Complex<T>>> for Spectrum<T> {
    fn from(v: Vec<Complex<T>>) -> Self {
        Spectrum(v)
    }
}

impl<T> std::ops::Deref for Spectrum<T> {
    type Target = [Complex<T>];
    fn deref(&self) -> &[Complex<T>] {
        &self.0
    }
}

impl<T> std::ops::DerefMut for Spectrum<T> {
    fn deref_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.0
    }
}

/// Precomputed sampled chirp basis for one parameter set.
///
/// Stores the unit-norm dechirp vector `(1/√N)·e^{-jπμt_n²}` and FFT plans;
/// subcarrier sample vectors are derived on demand. Immutable after
/// construction and shareable across threads.
pub struct ChirpBasis<T> {
    params: WaveformParams<T>,
    dechirp: Vec<Complex<T>>,
    fft_fwd: Arc<dyn Fft<T>>,
    fft_inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> ChirpBasis<T> {
    /// Builds the basis for `params`.
    pub fn new(params: WaveformParams<T>) -> Self {
        let n = params.samples_per_symbol();
        let scale = cast::<T>(1.0 / (n as f64).sqrt());
        let fs = params.sample_rate();
        let mu = params.chirp_rate();
        let dechirp = (0..n)
            .map(|i| {
                let t = cast::<T>(i as f64) / fs;
                Complex::from_polar(scale, -T::PI() * mu * t * t)
            })
            .collect();
        let mut planner = FftPlanner::new();
        ChirpBasis {
            params,
            dechirp,
            fft_fwd: planner.plan_fft_forward(n),
            fft_inv: planner.plan_fft_inverse(n),
        }
    }

    /// Validates parameters and builds the basis.
    pub fn from_parts(subcarriers: usize, delta_f: T, chirp_rate: T) -> Result<Self> {
        Ok(Self::new(WaveformParams::new(subcarriers, delta_f, chirp_rate)?))
    }

    pub fn params(&self) -> &WaveformParams<T> {
        &self.params
    }

    /// Samples per symbol body.
    pub fn len(&self) -> usize {
        self.dechirp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dechirp.is_empty()
    }

    /// Unit-norm dechirp vector `(1/√N)·e^{-jπμt_n²}`.
    pub fn dechirp(&self) -> &[Complex<T>] {
        &self.dechirp
    }

    /// Sampled subcarrier `ψ_k`, unit norm.
    ///
    /// The exponential part is evaluated as `2π·((k·n) mod N)/N` so that the
    /// `μ = 0` case stays bit-compatible with the unitary DFT columns.
    pub fn subcarrier(&self, k: usize) -> Result<Vec<Complex<T>>> {
        let n = self.len();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        let two_pi_over_n = cast::<T>(2.0) * T::PI() / cast::<T>(n as f64);
        Ok(self
            .dechirp
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let tone = Complex::from_polar(
                    T::one(),
                    two_pi_over_n * cast::<T>(((k * i) % n) as f64),
                );
                // conj(dechirp) carries the 1/√N scale and +jπμt² phase.
                d.conj() * tone
            })
            .collect())
    }

    /// Discrete cross-correlation coefficient `ρ_mn = Σ_i ψ_m[i]·conj(ψ_n[i])`.
    ///
    /// Equals 1 for `m == n` and 0 otherwise, up to rounding.
    pub fn cross_correlation(&self, m: usize, n: usize) -> Result<Complex<T>> {
        let a = self.subcarrier(m)?;
        let b = self.subcarrier(n)?;
        Ok(a.iter()
            .zip(b.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
                acc + x * y.conj()
            }))
    }

    /// Forward OCT: projects `N` time samples onto the chirp basis.
    ///
    /// `coeffs[k]` equals the inner product of the input with `ψ_k`,
    /// computed as dechirp-multiply followed by an FFT.
    pub fn oct_forward(&self, time_samples: &[Complex<T>]) -> Result<Spectrum<T>> {
        let n = self.len();
        if time_samples.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: time_samples.len(),
            });
        }
        let mut buf: Vec<Complex<T>> = time_samples
            .iter()
            .zip(self.dechirp.iter())
            .map(|(x, d)| x * d)
            .collect();
        self.fft_fwd.process(&mut buf);
        Ok(Spectrum(buf))
    }

    /// Inverse OCT: expands `K` coefficients into `N` time samples.
    ///
    /// Returns `Σ_k coeffs[k]·ψ_k[n]`; exact inverse of [`Self::oct_forward`].
    pub fn ioct_inverse(&self, spectrum: &Spectrum<T>) -> Result<Vec<Complex<T>>> {
        let n = self.len();
        if spectrum.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: spectrum.len(),
            });
        }
        let mut buf = spectrum.0.clone();
        self.fft_inv.process(&mut buf);
        // The unnormalised inverse FFT times conj(dechirp) restores both the
        // chirp phase and the 1/√N basis scale.
        for (x, d) in buf.iter_mut().zip(self.dechirp.iter()) {
            *x *= d.conj();
        }
        Ok(buf)
    }

    /// Off-diagonal energy of the effective subcarrier channel for an
    /// integer path delay, in dB relative to total received energy.
    ///
    /// A delay `d` within the guard becomes, after zero-padding overlap-add,
    /// a circular shift of the symbol body. For `μ = 0` that is an exact
    /// per-subcarrier phase and the channel matrix stays diagonal; for
    /// `μ ≠ 0` the shifted chirp leaks into neighbouring bins. The result is
    /// averaged over all `K` subcarriers (one FFT each).
    pub fn delay_leakage_db(&self, delay: usize) -> Result<T> {
        let n = self.len();
        let d = delay % n;
        let mut off = T::zero();
        let mut total = T::zero();
        for k in 0..n {
            let psi = self.subcarrier(k)?;
            let mut shifted = vec![Complex::new(T::zero(), T::zero()); n];
            for (i, s) in shifted.iter_mut().enumerate() {
                *s = psi[(i + n - d) % n];
            }
            let response = self.oct_forward(&shifted)?;
            for (m, c) in response.iter().enumerate() {
                let e = c.norm_sqr();
                total += e;
                if m != k {
                    off += e;
                }
            }
        }
        if total <= T::zero() {
            return Ok(T::neg_infinity());
        }
        Ok(cast::<T>(10.0) * (off / total).log10())
    }
}

impl<T: Scalar> std::fmt::Debug for ChirpBasis<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChirpBasis")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}
