//! Receive chain: synchronization, CFO correction, demodulation, channel
//! estimation, detection.
//!
//! The pipeline mirrors the transmitter in reverse. Packet timing comes from
//! correlating the known antipodal training against the capture; the CFO is
//! the phase drift between the two identical training halves; each symbol is
//! restored to circularity by overlap-adding its zero-padded guard tail onto
//! the body before the OCT; the per-subcarrier channel is least-squares
//! estimated on the pilot comb and linearly interpolated in between; and
//! detection is an independent minimum-distance decision per data
//! subcarrier, which for the diagonal channel model equals the joint
//! maximum-likelihood search at `O(K·D)` instead of `O(D^K)` cost.

use num_complex::Complex;

use crate::chirp::{ChirpBasis, Spectrum};
use crate::error::{Error, Result};
use crate::frame::FrameLayout;
use crate::modulation::{push_label_bits, Constellation};
use crate::scalar::{cast, Scalar};
use crate::tx::{BasebandSignal, PacketSpec};

/// Packet timing decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult<T> {
    /// Detected packet start (sample index of the correlation peak).
    pub t_hat: usize,
    /// Normalised correlation magnitude at the peak, in `[0, 1]`.
    pub peak_metric: T,
    /// Whether the peak cleared the detection threshold.
    pub detected: bool,
}

/// Carrier frequency offset estimate in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoEstimate<T> {
    pub delta_f_hat: T,
}

/// Per-subcarrier channel estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate<T> {
    /// Interpolated gain for every subcarrier.
    pub h_hat: Vec<Complex<T>>,
    /// Raw least-squares estimates at the pilot positions.
    pub pilot_estimates: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelEstimate<T> {
    /// Flat unit-gain estimate (used when a layout carries no pilots).
    pub fn unit(subcarriers: usize) -> Self {
        ChannelEstimate {
            h_hat: vec![Complex::new(T::one(), T::zero()); subcarriers],
            pilot_estimates: Vec::new(),
        }
    }
}

/// Hard detection output for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult<T> {
    /// Detected constellation points, one per data subcarrier.
    pub symbols: Vec<Complex<T>>,
    /// Alphabet labels of the detected points.
    pub labels: Vec<usize>,
    /// Demapped payload bits.
    pub bits: Vec<u8>,
    /// Per-data-subcarrier flag for near-zero channel gains.
    pub erasure_flags: Vec<bool>,
}

/// Multiply/add counts of an instrumented detection pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectorOps {
    pub mults: u64,
    pub adds: u64,
}

/// Receiver knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RxOptions<T> {
    /// Normalised sync peak needed to declare a packet (default 0.5).
    pub sync_threshold: T,
    /// Number of candidate lags to search; default covers every position
    /// where a whole packet still fits.
    pub sync_window: Option<usize>,
    /// Estimate and remove CFO from the training (default on).
    pub correct_cfo: bool,
    /// `|h| below this flags an erasure during detection.
    pub erasure_eps: T,
    /// Keep per-symbol channel estimates in the report.
    pub collect_channel_estimates: bool,
}

impl<T: Scalar> Default for RxOptions<T> {
    fn default() -> Self {
        RxOptions {
            sync_threshold: cast::<T>(0.5),
            sync_window: None,
            correct_cfo: true,
            erasure_eps: cast::<T>(1e-8),
            collect_channel_estimates: false,
        }
    }
}

/// Full-packet receive report.
#[derive(Debug, Clone)]
pub struct RxReport<T> {
    pub sync: SyncResult<T>,
    pub cfo: Option<CfoEstimate<T>>,
    /// Decoded payload; empty when no packet was detected.
    pub bits: Vec<u8>,
    /// Bit errors per symbol, when a reference payload was supplied.
    pub symbol_bit_errors: Option<Vec<u64>>,
    /// Per-symbol interpolated channel estimates, when requested.
    pub channel_estimates: Option<Vec<Vec<Complex<T>>>>,
    /// Total erasure flags raised across the packet.
    pub erasures: u64,
}

/// Correlation of an antipodal reference against the capture at one lag:
/// `R(τ) = Σ_n pn[n]·conj(rx[τ+n])`.
pub fn pn_correlation<T: Scalar>(pn: &[i8], rx: &[Complex<T>], lag: usize) -> Complex<T> {
    pn.iter()
        .zip(&rx[lag..lag + pn.len()])
        .fold(Complex::new(T::zero(), T::zero()), |acc, (&c, &s)| {
            if c > 0 {
                acc + s.conj()
            } else {
                acc - s.conj()
            }
        })
}

/// Scans `window` candidate lags for the training correlation peak.
///
/// The peak position is the raw `|R(τ)|` argmax (first index wins ties);
/// the reported metric is normalised by the segment and reference energies
/// so it lands in `[0, 1]` regardless of scaling.
pub fn synchronize<T: Scalar>(
    rx: &BasebandSignal<T>,
    pn: &[i8],
    window: usize,
    threshold: T,
) -> Result<SyncResult<T>> {
    let samples = rx.samples();
    if window == 0 || pn.is_empty() {
        return Err(Error::InvalidParams("empty sync window or reference".into()));
    }
    if window + pn.len() > samples.len() + 1 {
        return Err(Error::WindowTooLarge {
            window,
            needed: window + pn.len() - 1,
            len: samples.len(),
        });
    }
    let mut best_lag = 0usize;
    let mut best_mag = T::neg_infinity();
    for lag in 0..window {
        let mag = pn_correlation(pn, samples, lag).norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best_lag = lag;
        }
    }
    let seg_energy: T = samples[best_lag..best_lag + pn.len()]
        .iter()
        .fold(T::zero(), |a, c| a + c.norm_sqr());
    let pn_energy = T::from_usize(pn.len()).unwrap();
    let denom = (seg_energy * pn_energy).sqrt();
    let peak_metric = if denom > T::zero() {
        best_mag.sqrt() / denom
    } else {
        T::zero()
    };
    Ok(SyncResult {
        t_hat: best_lag,
        peak_metric,
        detected: peak_metric >= threshold,
    })
}

/// Estimates the CFO from the two identical training halves.
///
/// `pn_rx` holds both halves back to back. The phase of
/// `Σ conj(r[n])·r[n + half]` divided by `π·T_pn` is the offset in Hz; the
/// unambiguous range is `|Δf| < 1/T_pn`.
pub fn estimate_cfo<T: Scalar>(pn_rx: &[Complex<T>], sample_rate: T) -> Result<CfoEstimate<T>> {
    let half = pn_rx.len() / 2;
    if half == 0 || !pn_rx.len().is_multiple_of(2) {
        return Err(Error::InvalidParams(
            "CFO training must hold two equal halves".into(),
        ));
    }
    let corr = (0..half).fold(Complex::new(T::zero(), T::zero()), |acc, n| {
        acc + pn_rx[n].conj() * pn_rx[n + half]
    });
    if corr.norm_sqr() == T::zero() {
        return Err(Error::NoCfoSignal);
    }
    let t_pn = T::from_usize(pn_rx.len()).unwrap() / sample_rate;
    Ok(CfoEstimate {
        delta_f_hat: corr.arg() / (T::PI() * t_pn),
    })
}

/// Removes an estimated CFO: sample `n` is rotated by `e^{-j2π·Δf̂·n/f_s}`.
pub fn compensate_cfo<T: Scalar>(
    rx: &BasebandSignal<T>,
    est: &CfoEstimate<T>,
) -> BasebandSignal<T> {
    if est.delta_f_hat.is_zero() {
        return rx.clone();
    }
    let step = -cast::<T>(2.0) * T::PI() * est.delta_f_hat / rx.sample_rate();
    let samples = rx
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &s)| s * Complex::from_polar(T::one(), step * cast::<T>(n as f64)))
        .collect();
    BasebandSignal::new(samples, rx.sample_rate())
}

/// Demodulates one symbol segment: overlap-adds the zero-padding guard tail
/// onto the body head (restoring circularity for in-guard echoes), then
/// applies the forward OCT.
pub fn demodulate_symbol<T: Scalar>(
    segment: &[Complex<T>],
    basis: &ChirpBasis<T>,
    guard_len: usize,
) -> Result<Spectrum<T>> {
    let n = basis.len();
    if segment.len() < n + guard_len {
        return Err(Error::SegmentTooShort {
            needed: n + guard_len,
            got: segment.len(),
        });
    }
    let mut body = segment[..n].to_vec();
    for i in 0..guard_len {
        body[i] += segment[n + i];
    }
    basis.oct_forward(&body)
}

/// Least-squares channel estimates at the pilot positions:
/// `ĥ_p = s_p·y_p` (the antipodal pilot is its own inverse).
pub fn estimate_channel_pilots<T: Scalar>(
    y: &Spectrum<T>,
    layout: &FrameLayout,
) -> Result<Vec<Complex<T>>> {
    if y.len() != layout.subcarriers() {
        return Err(Error::LengthMismatch {
            expected: layout.subcarriers(),
            got: y.len(),
        });
    }
    Ok(layout
        .pilot_indices()
        .iter()
        .zip(layout.pilot_symbols())
        .map(|(&idx, &s)| {
            let sign = T::from_i8(s).unwrap();
            y[idx] * sign
        })
        .collect())
}

/// Linear interpolation of the pilot estimates across all `K` subcarriers.
///
/// Between pilots `k_p·L` and `(k_p+1)·L` the estimate is the convex blend
/// with weight `l/L`, `l = k mod L`; past the last pilot the estimate is
/// held (clamped), which under the edge-null layout only affects carriers
/// that rarely hold data.
pub fn interpolate_channel<T: Scalar>(
    pilot_estimates: &[Complex<T>],
    layout: &FrameLayout,
) -> Result<ChannelEstimate<T>> {
    let kp = pilot_estimates.len();
    if kp < 2 || kp != layout.pilot_count() {
        return Err(Error::TooFewPilots(kp));
    }
    let spacing = layout.pilot_spacing();
    let l_inv = cast::<T>(1.0 / spacing as f64);
    let mut h_hat = Vec::with_capacity(layout.subcarriers());
    for k in 0..layout.subcarriers() {
        let seg = k / spacing;
        let l = k % spacing;
        let h = if l == 0 {
            pilot_estimates[seg]
        } else if seg + 1 < kp {
            let w = cast::<T>(l as f64) * l_inv;
            pilot_estimates[seg] * (T::one() - w) + pilot_estimates[seg + 1] * w
        } else {
            pilot_estimates[kp - 1]
        };
        h_hat.push(h);
    }
    Ok(ChannelEstimate {
        h_hat,
        pilot_estimates: pilot_estimates.to_vec(),
    })
}

fn detect_inner<T: Scalar>(
    y: &Spectrum<T>,
    est: &ChannelEstimate<T>,
    layout: &FrameLayout,
    constellation: &Constellation<T>,
    erasure_eps: T,
    mut ops: Option<&mut DetectorOps>,
) -> DetectionResult<T> {
    let points = constellation.points();
    let bps = constellation.bits_per_symbol();
    let mut symbols = Vec::with_capacity(layout.data_count());
    let mut labels = Vec::with_capacity(layout.data_count());
    let mut bits = Vec::with_capacity(layout.data_count() * bps);
    let mut erasure_flags = Vec::with_capacity(layout.data_count());

    for &k in layout.data_indices() {
        let h = est.h_hat[k];
        let yk = y[k];
        erasure_flags.push(h.norm_sqr() < erasure_eps * erasure_eps);
        let mut best = 0usize;
        let mut best_d = T::infinity();
        for (label, &p) in points.iter().enumerate() {
            // one candidate: h·s (complex mult), y - h·s (add), |·|² (mult+add)
            let d = (yk - h * p).norm_sqr();
            if let Some(counter) = ops.as_deref_mut() {
                counter.mults += 2;
                counter.adds += 2;
            }
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        symbols.push(points[best]);
        labels.push(best);
        push_label_bits(best, bps, &mut bits);
    }
    DetectionResult {
        symbols,
        labels,
        bits,
        erasure_flags,
    }
}

/// Per-subcarrier minimum-distance detection: for every data subcarrier the
/// alphabet point minimising `|y_k − ĥ_k·s|²` (lowest label wins ties).
/// Near-zero `ĥ_k` flags an erasure; the decision still uses the raw metric.
pub fn detect_symbols<T: Scalar>(
    y: &Spectrum<T>,
    est: &ChannelEstimate<T>,
    layout: &FrameLayout,
    constellation: &Constellation<T>,
    erasure_eps: T,
) -> DetectionResult<T> {
    detect_inner(y, est, layout, constellation, erasure_eps, None)
}

/// [`detect_symbols`] with multiply/add instrumentation; the decision is
/// identical to the uninstrumented path.
pub fn detect_symbols_counted<T: Scalar>(
    y: &Spectrum<T>,
    est: &ChannelEstimate<T>,
    layout: &FrameLayout,
    constellation: &Constellation<T>,
    erasure_eps: T,
) -> (DetectionResult<T>, DetectorOps) {
    let mut ops = DetectorOps::default();
    let result = detect_inner(y, est, layout, constellation, erasure_eps, Some(&mut ops));
    (result, ops)
}

/// Runs the full receive pipeline over a capture that contains (at least)
/// one packet: synchronize, estimate/compensate CFO, then per symbol
/// demodulate, re-estimate the channel from its pilots, detect, and demap.
///
/// A failed sync is not an error: the report comes back with
/// `sync.detected == false` and no bits.
pub fn receive_packet<T: Scalar>(
    rx: &BasebandSignal<T>,
    spec: &PacketSpec,
    basis: &ChirpBasis<T>,
    opts: &RxOptions<T>,
    reference: Option<&[u8]>,
) -> Result<RxReport<T>> {
    spec.validate()?;
    let n = basis.len();
    let needed = spec.packet_len(n);
    if let Some(r) = reference {
        if r.len() != spec.payload_bits() {
            return Err(Error::LengthMismatch {
                expected: spec.payload_bits(),
                got: r.len(),
            });
        }
    }
    if rx.len() < needed {
        return Err(Error::SegmentTooShort {
            needed,
            got: rx.len(),
        });
    }

    let training = spec.training_chips()?;
    let window = opts.sync_window.unwrap_or(rx.len() - needed + 1);
    let sync = synchronize(rx, &training, window, opts.sync_threshold)?;
    if !sync.detected {
        return Ok(RxReport {
            sync,
            cfo: None,
            bits: Vec::new(),
            symbol_bit_errors: None,
            channel_estimates: None,
            erasures: 0,
        });
    }
    if sync.t_hat + needed > rx.len() {
        return Err(Error::SegmentTooShort {
            needed: sync.t_hat + needed,
            got: rx.len(),
        });
    }

    let packet = BasebandSignal::new(
        rx.samples()[sync.t_hat..sync.t_hat + needed].to_vec(),
        rx.sample_rate(),
    );
    let (packet, cfo) = if opts.correct_cfo {
        let est = estimate_cfo(&packet.samples()[..spec.training_len()], rx.sample_rate())?;
        (compensate_cfo(&packet, &est), Some(est))
    } else {
        (packet, None)
    };

    let constellation = Constellation::<T>::new(spec.scheme);
    let base = spec.training_len() + spec.pause_len;
    let stride = n + spec.guard_len;
    let mut bits = Vec::with_capacity(spec.payload_bits());
    let mut symbol_bit_errors = reference.map(|_| Vec::with_capacity(spec.n_symbols));
    let mut channel_estimates = opts
        .collect_channel_estimates
        .then(|| Vec::with_capacity(spec.n_symbols));
    let mut erasures = 0u64;
    let bits_per_symbol = spec.layout.data_count() * spec.scheme.bits_per_symbol();

    for i in 0..spec.n_symbols {
        let seg = &packet.samples()[base + i * stride..base + (i + 1) * stride];
        let y = demodulate_symbol(seg, basis, spec.guard_len)?;
        let est = if spec.layout.pilot_count() == 0 {
            ChannelEstimate::unit(spec.layout.subcarriers())
        } else {
            let pilots = estimate_channel_pilots(&y, &spec.layout)?;
            interpolate_channel(&pilots, &spec.layout)?
        };
        let det = detect_symbols(&y, &est, &spec.layout, &constellation, opts.erasure_eps);
        erasures += det.erasure_flags.iter().filter(|&&e| e).count() as u64;
        if let Some(errs) = symbol_bit_errors.as_mut() {
            let want = &reference.unwrap()[i * bits_per_symbol..(i + 1) * bits_per_symbol];
            errs.push(
                det.bits
                    .iter()
                    .zip(want)
                    .filter(|(a, b)| a != b)
                    .count() as u64,
            );
        }
        if let Some(dump) = channel_estimates.as_mut() {
            dump.push(est.h_hat.clone());
        }
        bits.extend_from_slice(&det.bits);
    }

    Ok(RxReport {
        sync,
        cfo,
        bits,
        symbol_bit_errors,
        channel_estimates,
        erasures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{add_awgn, apply_channel, ChannelRealization};
    use crate::frame::build_frame;
    use crate::modulation::ModulationScheme;
    use crate::pn::gen_pn;
    use crate::tx::build_packet;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FS: f64 = 499_712.0; // 1024 × 488 Hz

    fn embed(pn: &[i8], offset: usize, tail: usize) -> BasebandSignal<f64> {
        let mut samples = vec![Complex64::new(0.0, 0.0); offset + pn.len() + tail];
        for (i, &c) in pn.iter().enumerate() {
            samples[offset + i] = Complex64::new(c as f64, 0.0);
        }
        BasebandSignal::new(samples, FS)
    }

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn pn_self_correlation_at_zero_lag() {
        let pn = gen_pn(128, 7).unwrap();
        let sig = embed(&pn, 0, 0);
        let r = pn_correlation(&pn, sig.samples(), 0);
        assert_eq!(r, Complex64::new(128.0, 0.0));
    }

    #[test]
    fn sync_finds_noiseless_offset() {
        let pn = gen_pn(128, 7).unwrap();
        let sig = embed(&pn, 137, 64);
        let sync = synchronize(&sig, &pn, 200, 0.5).unwrap();
        assert_eq!(sync.t_hat, 137);
        assert!((sync.peak_metric - 1.0).abs() < 1e-6);
        assert!(sync.detected);
    }

    #[test]
    fn sync_window_validation() {
        let pn = gen_pn(64, 7).unwrap();
        let sig = embed(&pn, 0, 0);
        assert!(synchronize(&sig, &pn, 2, 0.5).is_err()); // 2 lags need 65 samples
        assert!(synchronize(&sig, &pn, 0, 0.5).is_err());
        assert!(synchronize(&sig, &pn, 1, 0.5).is_ok());
    }

    #[test]
    fn sync_rejects_pure_noise() {
        let pn = gen_pn(128, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let mut false_alarms = 0;
        for _ in 0..1000 {
            let noise: Vec<Complex64> = (0..328)
                .map(|_| {
                    Complex64::new(f64::standard_normal(&mut rng), f64::standard_normal(&mut rng))
                        * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect();
            let sig = BasebandSignal::new(noise, FS);
            let sync = synchronize(&sig, &pn, 200, 0.5).unwrap();
            if sync.detected {
                false_alarms += 1;
            }
        }
        assert!(false_alarms <= 10, "{false_alarms}/1000 false alarms");
    }

    #[test]
    fn sync_exact_at_10db() {
        let pn = gen_pn(64, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut exact = 0;
        for _ in 0..1000 {
            // two identical halves as transmitted
            let mut train = pn.clone();
            train.extend_from_slice(&pn);
            let clean = embed(&train, 50, 100);
            let noisy = add_awgn(&clean, 10.0, &mut rng).unwrap();
            let sync = synchronize(&noisy, &train, 100, 0.5).unwrap();
            if sync.t_hat == 50 {
                exact += 1;
            }
        }
        assert!(exact >= 990, "exact sync in {exact}/1000 trials");
    }

    #[test]
    fn cfo_estimate_is_exact_without_noise() {
        let pn = gen_pn(64, 7).unwrap();
        let mut train = pn.clone();
        train.extend_from_slice(&pn);
        let clean = embed(&train, 0, 0);
        let real = ChannelRealization {
            taps: vec![Complex64::new(1.0, 0.0)],
            delays: vec![0],
            cfo_hz: 50.0,
            timing_offset: 0,
            snr_db: 0.0,
        };
        let shifted = apply_channel(&clean, &real);
        let est = estimate_cfo(shifted.samples(), FS).unwrap();
        assert!(
            (est.delta_f_hat - 50.0).abs() / 50.0 < 1e-6,
            "{}",
            est.delta_f_hat
        );

        let est0 = estimate_cfo(clean.samples(), FS).unwrap();
        assert!(est0.delta_f_hat.abs() < 1e-9);
    }

    #[test]
    fn cfo_aliases_beyond_unambiguous_range() {
        // The half-spacing correlation phase wraps modulo 2π, so estimates
        // alias modulo 2/T_pn into (−1/T_pn, 1/T_pn].
        let pn = gen_pn(64, 7).unwrap();
        let mut train = pn.clone();
        train.extend_from_slice(&pn);
        let clean = embed(&train, 0, 0);
        let t_pn = 128.0 / FS;
        let run = |injected: f64| {
            let real = ChannelRealization {
                taps: vec![Complex64::new(1.0, 0.0)],
                delays: vec![0],
                cfo_hz: injected,
                timing_offset: 0,
                snr_db: 0.0,
            };
            let shifted = apply_channel(&clean, &real);
            estimate_cfo(shifted.samples(), FS).unwrap().delta_f_hat
        };
        // one full alias period away lands back on 10 Hz exactly
        let est = run(2.0 / t_pn + 10.0);
        assert!((est - 10.0).abs() < 1e-6, "{est}");
        // half a period away wraps to the negative side of the range
        let est = run(1.0 / t_pn + 10.0);
        assert!((est - (10.0 - 1.0 / t_pn)).abs() < 1e-6, "{est}");
        assert!(est.abs() <= 1.0 / t_pn + 1e-9);
    }

    #[test]
    fn cfo_errors_on_silence() {
        let z = vec![Complex64::new(0.0, 0.0); 64];
        assert!(matches!(estimate_cfo(&z, FS), Err(Error::NoCfoSignal)));
        assert!(estimate_cfo(&z[..63], FS).is_err()); // odd length
    }

    #[test]
    fn cfo_estimator_is_unbiased_at_20db() {
        let pn = gen_pn(64, 7).unwrap();
        let mut train = pn.clone();
        train.extend_from_slice(&pn);
        let clean = embed(&train, 0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        for &cfo in &[-100.0f64, 0.0, 100.0] {
            let real = ChannelRealization {
                taps: vec![Complex64::new(1.0, 0.0)],
                delays: vec![0],
                cfo_hz: cfo,
                timing_offset: 0,
                snr_db: 0.0,
            };
            let shifted = apply_channel(&clean, &real);
            let mut sum = 0.0;
            for _ in 0..1000 {
                let noisy = add_awgn(&shifted, 20.0, &mut rng).unwrap();
                sum += estimate_cfo(noisy.samples(), FS).unwrap().delta_f_hat;
            }
            let bias = sum / 1000.0 - cfo;
            assert!(bias.abs() < 2.0, "cfo {cfo}: bias {bias} Hz");
        }
    }

    #[test]
    fn compensation_inverts_injected_cfo() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let samples: Vec<Complex64> = (0..256)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let sig = BasebandSignal::new(samples, FS);
        let real = ChannelRealization {
            taps: vec![Complex64::new(1.0, 0.0)],
            delays: vec![0],
            cfo_hz: 123.4,
            timing_offset: 0,
            snr_db: 0.0,
        };
        let shifted = apply_channel(&sig, &real);
        let back = compensate_cfo(&shifted, &CfoEstimate { delta_f_hat: 123.4 });
        for (a, e) in back.samples().iter().zip(sig.samples()) {
            assert!((a - e).norm() < 1e-10);
        }
        // zero estimate is the identity
        let same = compensate_cfo(&sig, &CfoEstimate { delta_f_hat: 0.0 });
        assert_eq!(same.samples(), sig.samples());
    }

    #[test]
    fn quarter_rate_compensation_rotates_backwards() {
        let sig = BasebandSignal::new(vec![Complex64::new(1.0, 0.0); 4], FS);
        let est = CfoEstimate {
            delta_f_hat: FS / 4.0,
        };
        let out = compensate_cfo(&sig, &est);
        for (n, s) in out.samples().iter().enumerate() {
            let expected =
                Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * n as f64);
            assert!((s - expected).norm() < 1e-10, "n={n}");
        }
    }

    fn frame_for(layout: &FrameLayout, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, Spectrum<f64>) {
        let constellation = Constellation::<f64>::new(ModulationScheme::Qpsk);
        let bits = random_bits(rng, layout.data_count() * 2);
        let data = constellation.map_bits(&bits).unwrap();
        let frame = build_frame(&data, layout).unwrap();
        (data, frame.into_spectrum())
    }

    #[test]
    fn demodulation_inverts_synthesis() {
        let basis = ChirpBasis::from_parts(64, 488.0, 2.38e5).unwrap();
        let layout = FrameLayout::with_default_pilots(64, 16, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        let (_, frame) = frame_for(&layout, &mut rng);
        let mut time = basis.ioct_inverse(&frame).unwrap();
        time.resize(64 + 16, Complex64::new(0.0, 0.0));
        let y = demodulate_symbol(&time, &basis, 16).unwrap();
        for (a, e) in y.iter().zip(frame.iter()) {
            assert!((a - e).norm() < 1e-9);
        }
        // scalar channel: y = g·frame
        let g = Complex64::new(0.3, -0.8);
        let scaled: Vec<Complex64> = time.iter().map(|&s| s * g).collect();
        let y = demodulate_symbol(&scaled, &basis, 16).unwrap();
        for (a, e) in y.iter().zip(frame.iter()) {
            assert!((a - e * g).norm() < 1e-9);
        }
        assert!(demodulate_symbol(&time[..70], &basis, 16).is_err());
    }

    #[test]
    fn in_guard_delay_is_a_phase_ramp_at_mu_zero() {
        let n = 64usize;
        let basis = ChirpBasis::from_parts(n, 488.0, 0.0).unwrap();
        let layout = FrameLayout::with_default_pilots(n, 16, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(105);
        let (_, frame) = frame_for(&layout, &mut rng);
        let mut time = basis.ioct_inverse(&frame).unwrap();
        let guard = 16usize;
        time.resize(n + guard, Complex64::new(0.0, 0.0));
        let d = 5usize;
        let mut delayed = vec![Complex64::new(0.0, 0.0); n + guard];
        for (i, &s) in time.iter().enumerate() {
            if i + d < n + guard {
                delayed[i + d] = s;
            }
        }
        let y = demodulate_symbol(&delayed, &basis, guard).unwrap();
        for (k, (a, e)) in y.iter().zip(frame.iter()).enumerate() {
            let ramp = Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (k * d) as f64 / n as f64,
            );
            assert!((a - e * ramp).norm() < 1e-9, "bin {k}");
        }
    }

    #[test]
    fn pilot_ls_examples() {
        // the antipodal pilot is its own inverse: ĥ_p = s_p · y_p
        let layout = FrameLayout::with_default_pilots(32, 8, 0).unwrap();
        let signs = layout.pilot_symbols().to_vec();
        assert!(signs.contains(&1) && signs.contains(&-1), "want both signs");
        let mut y = Spectrum::<f64>::zeros(32);
        let values = [Complex64::new(1.0, 1.0), Complex64::new(2.0, -1.0)];
        for (i, &idx) in layout.pilot_indices().iter().enumerate() {
            y[idx] = values[i % 2];
        }
        let est = estimate_channel_pilots(&y, &layout).unwrap();
        for (i, &s) in signs.iter().enumerate() {
            let expected = values[i % 2] * s as f64;
            assert_eq!(est[i], expected);
            if s == 1 && i % 2 == 0 {
                assert_eq!(est[i], Complex64::new(1.0, 1.0));
            }
            if s == -1 && i % 2 == 1 {
                assert_eq!(est[i], Complex64::new(-2.0, 1.0));
            }
        }
        assert!(estimate_channel_pilots(&Spectrum::<f64>::zeros(9), &layout).is_err());
    }

    #[test]
    fn flat_channel_pilot_estimates_are_exact() {
        let n = 64usize;
        let basis = ChirpBasis::from_parts(n, 488.0, 2.38e5).unwrap();
        let layout = FrameLayout::with_default_pilots(n, 16, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(106);
        let (_, frame) = frame_for(&layout, &mut rng);
        let h = Complex64::from_polar(0.3, std::f64::consts::FRAC_PI_4);
        let time: Vec<Complex64> = basis
            .ioct_inverse(&frame)
            .unwrap()
            .into_iter()
            .map(|s| s * h)
            .collect();
        let y = basis.oct_forward(&time).unwrap();
        let pilots = estimate_channel_pilots(&y, &layout).unwrap();
        for p in &pilots {
            assert!((p - h).norm() < 1e-12);
        }
        // interpolation of a constant is the constant, at every subcarrier
        let est = interpolate_channel(&pilots, &layout).unwrap();
        for hk in &est.h_hat {
            assert!((hk - h).norm() < 1e-10);
        }
    }

    #[test]
    fn interpolation_formula_and_clamp() {
        let layout = FrameLayout::with_default_pilots(8, 2, 0).unwrap();
        // L = 4, pilots at 0 and 4
        let p = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 4.0)];
        let est = interpolate_channel(&p, &layout).unwrap();
        assert_eq!(est.h_hat[0], p[0]);
        assert!((est.h_hat[1] - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        assert!((est.h_hat[2] - Complex64::new(1.0, 2.0)).norm() < 1e-15);
        assert_eq!(est.h_hat[4], p[1]);
        // beyond the last pilot: clamp
        assert_eq!(est.h_hat[5], p[1]);
        assert_eq!(est.h_hat[6], p[1]);
        assert_eq!(est.h_hat[7], p[1]);
        assert!(interpolate_channel(&p[..1], &layout).is_err());
    }

    #[test]
    fn detection_recovers_exact_symbols_for_all_schemes() {
        let layout = FrameLayout::with_default_pilots(8, 0, 0).unwrap();
        let h = Complex64::new(0.4, -1.1);
        let est = ChannelEstimate {
            h_hat: vec![h; 8],
            pilot_estimates: vec![],
        };
        for scheme in ModulationScheme::ALL {
            let constellation = Constellation::<f64>::new(scheme);
            for (label, &p) in constellation.points().iter().enumerate() {
                let y: Spectrum<f64> = vec![h * p; 8].into();
                let det = detect_symbols(&y, &est, &layout, &constellation, 1e-8);
                assert!(det.labels.iter().all(|&l| l == label), "{scheme} {label}");
                assert!(det.erasure_flags.iter().all(|&e| !e));
            }
        }
    }

    #[test]
    fn bpsk_nearest_point_and_erasure_flag() {
        let layout = FrameLayout::with_default_pilots(2, 0, 0).unwrap();
        let constellation = Constellation::<f64>::new(ModulationScheme::Bpsk);
        let est = ChannelEstimate {
            h_hat: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            pilot_estimates: vec![],
        };
        let y: Spectrum<f64> =
            vec![Complex64::new(-0.1, 0.0), Complex64::new(0.7, 0.0)].into();
        let det = detect_symbols(&y, &est, &layout, &constellation, 1e-8);
        assert_eq!(det.symbols[0], Complex64::new(-1.0, 0.0));
        assert_eq!(det.bits[0], 1);
        assert!(!det.erasure_flags[0]);
        // dead subcarrier: flagged, decision falls to the lowest label
        assert!(det.erasure_flags[1]);
        assert_eq!(det.labels[1], 0);
    }

    #[test]
    fn subcarrierwise_equals_joint_minimisation() {
        // exhaustive joint search over all D^K candidate vectors
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for scheme in [
            ModulationScheme::Bpsk,
            ModulationScheme::Qpsk,
            ModulationScheme::Psk8,
        ] {
            let constellation = Constellation::<f64>::new(scheme);
            let d = constellation.points().len();
            for k in [2usize, 4] {
                let layout = FrameLayout::with_default_pilots(k, 0, 0).unwrap();
                for _ in 0..100 {
                    let y: Spectrum<f64> = (0..k)
                        .map(|_| {
                            Complex64::new(
                                2.0 * rng.random::<f64>() - 1.0,
                                2.0 * rng.random::<f64>() - 1.0,
                            )
                        })
                        .collect::<Vec<_>>()
                        .into();
                    let est = ChannelEstimate {
                        h_hat: (0..k)
                            .map(|_| {
                                Complex64::new(
                                    2.0 * rng.random::<f64>() - 1.0,
                                    2.0 * rng.random::<f64>() - 1.0,
                                )
                            })
                            .collect(),
                        pilot_estimates: vec![],
                    };
                    let det = detect_symbols(&y, &est, &layout, &constellation, 1e-8);

                    let mut best = vec![0usize; k];
                    let mut best_cost = f64::INFINITY;
                    for joint in 0..d.pow(k as u32) {
                        let mut labels = Vec::with_capacity(k);
                        let mut idx = joint;
                        for _ in 0..k {
                            labels.push(idx % d);
                            idx /= d;
                        }
                        let cost: f64 = (0..k)
                            .map(|i| {
                                (y[i] - est.h_hat[i] * constellation.points()[labels[i]])
                                    .norm_sqr()
                            })
                            .sum();
                        if cost < best_cost {
                            best_cost = cost;
                            best = labels;
                        }
                    }
                    assert_eq!(det.labels, best, "{scheme} K={k}");
                }
            }
        }
    }

    #[test]
    fn detector_cost_is_linear_in_subcarriers() {
        let mut rng = ChaCha8Rng::seed_from_u64(108);
        let constellation = Constellation::<f64>::new(ModulationScheme::Qam16);
        let mut counts = Vec::new();
        for k in [1024usize, 2048] {
            let layout = FrameLayout::with_default_pilots(k, k / 4, k * 56 / 1024).unwrap();
            let y: Spectrum<f64> = (0..k)
                .map(|_| Complex64::new(rng.random::<f64>(), rng.random::<f64>()))
                .collect::<Vec<_>>()
                .into();
            let est = ChannelEstimate {
                h_hat: vec![Complex64::new(1.0, 0.0); k],
                pilot_estimates: vec![],
            };
            let (_, ops) = detect_symbols_counted(&y, &est, &layout, &constellation, 1e-8);
            counts.push(ops);
        }
        let ratio = counts[1].mults as f64 / counts[0].mults as f64;
        assert!((1.9..=2.1).contains(&ratio), "mult ratio {ratio}");
        let ratio = counts[1].adds as f64 / counts[0].adds as f64;
        assert!((1.9..=2.1).contains(&ratio), "add ratio {ratio}");
    }

    fn loopback_spec(scheme: ModulationScheme) -> (ChirpBasis<f64>, PacketSpec) {
        let basis = ChirpBasis::from_parts(256, 488.0, 2.38e5).unwrap();
        let spec = PacketSpec {
            pn_len: 64,
            pn_seed: 7,
            pause_len: 64,
            guard_len: 64,
            n_symbols: 3,
            layout: FrameLayout::with_default_pilots(256, 64, 16).unwrap(),
            scheme,
        };
        (basis, spec)
    }

    #[test]
    fn loopback_is_error_free_for_all_schemes() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        for scheme in ModulationScheme::ALL {
            let (basis, spec) = loopback_spec(scheme);
            let bits = random_bits(&mut rng, spec.payload_bits());
            let pkt = build_packet(&bits, &spec, &basis, 1.0).unwrap();
            let report =
                receive_packet(&pkt, &spec, &basis, &RxOptions::default(), Some(&bits))
                    .unwrap();
            assert!(report.sync.detected);
            assert_eq!(report.sync.t_hat, 0);
            assert_eq!(report.bits, bits, "{scheme}");
            assert_eq!(report.symbol_bit_errors, Some(vec![0, 0, 0]));
        }
    }

    #[test]
    fn flat_complex_channel_is_error_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(110);
        let (basis, spec) = loopback_spec(ModulationScheme::Qam16);
        let bits = random_bits(&mut rng, spec.payload_bits());
        let pkt = build_packet(&bits, &spec, &basis, 1.0).unwrap();
        let real = ChannelRealization {
            taps: vec![Complex64::from_polar(0.5, 1.0)],
            delays: vec![0],
            cfo_hz: 0.0,
            timing_offset: 0,
            snr_db: 0.0,
        };
        let rx_sig = apply_channel(&pkt, &real);
        let report =
            receive_packet(&rx_sig, &spec, &basis, &RxOptions::default(), Some(&bits)).unwrap();
        assert_eq!(report.bits, bits);
    }

    #[test]
    fn cfo_and_timing_offset_are_error_free_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(111);
        let (basis, spec) = loopback_spec(ModulationScheme::Qpsk);
        let bits = random_bits(&mut rng, spec.payload_bits());
        let pkt = build_packet(&bits, &spec, &basis, 1.0).unwrap();
        let real = ChannelRealization {
            taps: vec![Complex64::new(1.0, 0.0)],
            delays: vec![0],
            cfo_hz: 100.0,
            timing_offset: 137,
            snr_db: 0.0,
        };
        let rx_sig = apply_channel(&pkt, &real);
        let report =
            receive_packet(&rx_sig, &spec, &basis, &RxOptions::default(), Some(&bits)).unwrap();
        assert_eq!(report.sync.t_hat, 137);
        let cfo = report.cfo.unwrap().delta_f_hat;
        assert!((cfo - 100.0).abs() < 1e-3, "cfo {cfo}");
        assert_eq!(report.bits, bits);
    }

    #[test]
    fn undetected_packet_reports_empty() {
        let (basis, spec) = loopback_spec(ModulationScheme::Bpsk);
        let mut rng = ChaCha8Rng::seed_from_u64(112);
        let n = spec.packet_len(256) + 10;
        let noise: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    f64::standard_normal(&mut rng),
                    f64::standard_normal(&mut rng),
                )
            })
            .collect();
        let sig = BasebandSignal::new(noise, FS);
        let report = receive_packet(&sig, &spec, &basis, &RxOptions::default(), None).unwrap();
        assert!(!report.sync.detected);
        assert!(report.bits.is_empty());
    }
}
