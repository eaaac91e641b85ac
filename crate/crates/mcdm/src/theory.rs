//! Closed-form uncoded-AWGN BER references and SNR bookkeeping.
//!
//! These formulas validate the simulator; they are not part of the modem.
//! BPSK and QPSK are exact Gaussian-tail results; 8PSK, 16QAM, and 32QAM use
//! the usual nearest-neighbour approximations, good to a few percent for
//! Eb/N0 above roughly 6 dB and increasingly optimistic below.

use statrs::function::erf::erfc;

use crate::frame::FrameLayout;
use crate::modulation::ModulationScheme;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Theoretical uncoded BER over AWGN at the given per-bit SNR.
///
/// `ebn0_db = +∞` returns 0.
pub fn theoretical_ber(scheme: ModulationScheme, ebn0_db: f64) -> f64 {
    if ebn0_db == f64::INFINITY {
        return 0.0;
    }
    let gb = 10f64.powf(ebn0_db / 10.0);
    match scheme {
        // exact for Gray coding
        ModulationScheme::Bpsk | ModulationScheme::Qpsk => q_function((2.0 * gb).sqrt()),
        // P_s ≈ 2·Q(√(2·γ_s)·sin(π/8)), γ_s = 3·γ_b, one bit per nearest-
        // neighbour symbol error under Gray mapping
        ModulationScheme::Psk8 => {
            2.0 / 3.0 * q_function((6.0 * gb).sqrt() * (std::f64::consts::PI / 8.0).sin())
        }
        // square-QAM nearest-neighbour: (4/log2 M)(1−1/√M)·Q(√(3·log2 M·γ_b/(M−1)))
        ModulationScheme::Qam16 => 0.75 * q_function((0.8 * gb).sqrt()),
        // cross-32: d_min²/(4σ²) = γ_s/10 with γ_s = 5·γ_b; 3.25 average
        // nearest neighbours × 60/52 bits per symbol error / 5 bits ≈ 0.75
        ModulationScheme::Qam32 => 0.75 * q_function((0.5 * gb).sqrt()),
    }
}

/// Converts the pre-detection SNR into the detection-referenced per-bit SNR.
///
/// With the occupied-span power convention, the per-data-subcarrier symbol
/// SNR is the pre-detection SNR corrected for two effects:
///
/// - power dilution by null subcarriers: active bins carry
///   `K/(K_p + K_s)` times the average occupied power;
/// - guard-noise folding: the zero-padding overlap-add accumulates
///   `N + guard` noise samples into `N` body samples, scaling the
///   per-bin noise by `(N + guard)/N`.
///
/// so `Eb/N0 = SNR · K/((K_p+K_s)·bits_per_symbol) · N/(N+guard)`.
/// Pilot estimation noise is a receiver loss, not an SNR offset, and is
/// deliberately not modelled here.
pub fn snr_to_ebn0(
    snr_db: f64,
    layout: &FrameLayout,
    scheme: ModulationScheme,
    guard_len: usize,
) -> f64 {
    snr_db + conversion_offset_db(layout, scheme, guard_len)
}

/// Inverse of [`snr_to_ebn0`].
pub fn ebn0_to_snr(
    ebn0_db: f64,
    layout: &FrameLayout,
    scheme: ModulationScheme,
    guard_len: usize,
) -> f64 {
    ebn0_db - conversion_offset_db(layout, scheme, guard_len)
}

fn conversion_offset_db(layout: &FrameLayout, scheme: ModulationScheme, guard_len: usize) -> f64 {
    let k = layout.subcarriers() as f64;
    let active = (layout.pilot_count() + layout.data_count()) as f64;
    let bps = scheme.bits_per_symbol() as f64;
    let n = layout.subcarriers() as f64;
    let factor = k / (active * bps) * n / (n + guard_len as f64);
    10.0 * factor.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_reference_points() {
        // Q(√2) at 0 dB
        let b0 = theoretical_ber(ModulationScheme::Bpsk, 0.0);
        assert!((b0 - 0.0786496).abs() < 1e-6, "{b0}");
        // ≈ 1.9e-4 at 8 dB
        let b8 = theoretical_ber(ModulationScheme::Bpsk, 8.0);
        assert!((b8 - 1.909e-4).abs() < 2e-6, "{b8}");
        assert_eq!(theoretical_ber(ModulationScheme::Bpsk, f64::INFINITY), 0.0);
    }

    #[test]
    fn qpsk_equals_bpsk_per_bit() {
        for ebn0 in [0.0, 4.0, 8.0, 12.0] {
            assert_eq!(
                theoretical_ber(ModulationScheme::Qpsk, ebn0),
                theoretical_ber(ModulationScheme::Bpsk, ebn0)
            );
        }
    }

    #[test]
    fn higher_orders_are_worse_at_fixed_ebn0() {
        let at = |s| theoretical_ber(s, 10.0);
        assert!(at(ModulationScheme::Qpsk) < at(ModulationScheme::Psk8));
        assert!(at(ModulationScheme::Qam16) < at(ModulationScheme::Qam32));
    }

    #[test]
    fn zero_overhead_bpsk_conversion_is_identity() {
        // no pilots, no nulls, no guard: Eb/N0 == SNR
        let layout = FrameLayout::with_default_pilots(64, 0, 0).unwrap();
        let e = snr_to_ebn0(7.0, &layout, ModulationScheme::Bpsk, 0);
        assert!((e - 7.0).abs() < 1e-12);
    }

    #[test]
    fn simulation_preset_offset_hand_check() {
        // K=1024, K_p+K_s=968, 32QAM (5 bits), N=1024, guard=256:
        // 1/factor = (968·5/1024)·(1280/1024) = 4.7265625·1.25 = 5.908203125
        let layout = FrameLayout::with_default_pilots(1024, 256, 56).unwrap();
        let offset = snr_to_ebn0(0.0, &layout, ModulationScheme::Qam32, 256);
        let expected = -10.0 * 5.908203125f64.log10();
        assert!((offset - expected).abs() < 1e-12, "{offset} vs {expected}");
        // round trip
        let snr = ebn0_to_snr(offset, &layout, ModulationScheme::Qam32, 256);
        assert!(snr.abs() < 1e-12);
    }

    #[test]
    fn doubling_guard_shifts_offset_predictably() {
        let layout = FrameLayout::with_default_pilots(1024, 256, 56).unwrap();
        let scheme = ModulationScheme::Qpsk;
        let g = 256usize;
        let e1 = snr_to_ebn0(0.0, &layout, scheme, g);
        let e2 = snr_to_ebn0(0.0, &layout, scheme, 2 * g);
        let n = 1024.0;
        let expected = 10.0 * ((n + g as f64) / (n + 2.0 * g as f64)).log10();
        assert!((e2 - e1 - expected).abs() < 1e-12);
    }
}
