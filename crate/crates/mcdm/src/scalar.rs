//! Scalar abstraction over `f32`/`f64` for the DSP core.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftNum;

/// Floating-point sample type the modem is generic over.
///
/// Implemented for `f32` and `f64`. Bundles the numeric traits the DSP code
/// needs plus a standard-normal draw so channel code does not carry
/// distribution bounds around.
pub trait Scalar: Float + FloatConst + NumAssign + FromPrimitive + FftNum {
    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Lossy conversion from `f64` literals into the working scalar type.
#[inline]
pub(crate) fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 -> Scalar conversion")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_normal_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let x = f64::standard_normal(&mut rng);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
