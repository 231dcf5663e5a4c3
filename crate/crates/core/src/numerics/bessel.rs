//! Modified Bessel function of the first kind, order zero.
//!
//! Chebyshev expansions on `[0, 8]` and `(8, inf)` (Cephes coefficients).
//! Relative error is below `1e-15` over the whole domain.
//!
//! `I0(x)` overflows an `f64` just above `x = 713`. Anything that multiplies
//! `I0` by a decaying exponential (the Rician density, the Marcum integrand)
//! should call [`bessel_i0_scaled`] and fold the `exp(-x)` into its own
//! exponent instead.

use super::NumericsError;

const COEFFS_A: [f64; 30] = [
    -4.415_341_646_479_339_5E-18,
    3.330_794_518_822_238_4E-17,
    -2.431_279_846_547_955E-16,
    1.715_391_285_555_133E-15,
    -1.168_533_287_799_345_1E-14,
    7.676_185_498_604_936E-14,
    -4.856_446_783_111_929E-13,
    2.955_052_663_129_64E-12,
    -1.726_826_291_441_556E-11,
    9.675_809_035_373_237E-11,
    -5.189_795_601_635_263E-10,
    2.659_823_724_682_386_6E-9,
    -1.300_025_009_986_248E-8,
    6.046_995_022_541_919E-8,
    -2.670_793_853_940_612E-7,
    1.117_387_539_120_103_7E-6,
    -4.416_738_358_458_750_5E-6,
    1.644_844_807_072_889_6E-5,
    -5.754_195_010_082_104E-5,
    1.885_028_850_958_416_5E-4,
    -5.763_755_745_385_824E-4,
    1.639_475_616_941_335_7E-3,
    -4.324_309_995_050_576E-3,
    1.054_646_039_459_499_8E-2,
    -2.373_741_480_589_947E-2,
    4.930_528_423_967_071E-2,
    -9.490_109_704_804_764E-2,
    1.716_209_015_222_087_7E-1,
    -3.046_826_723_431_984E-1,
    6.767_952_744_094_761E-1,
];

const COEFFS_B: [f64; 25] = [
    -7.233_180_487_874_754E-18,
    -4.830_504_485_944_182E-18,
    4.465_621_420_296_76E-17,
    3.461_222_867_697_461E-17,
    -2.827_623_980_516_583_6E-16,
    -3.425_485_619_677_219E-16,
    1.772_560_133_056_526_3E-15,
    3.811_680_669_352_622_4E-15,
    -9.554_846_698_828_307E-15,
    -4.150_569_347_287_222E-14,
    1.540_086_217_521_41E-14,
    3.852_778_382_742_142_6E-13,
    7.180_124_451_383_666E-13,
    -1.794_178_531_506_806_2E-12,
    -1.321_581_184_044_771_3E-11,
    -3.149_916_527_963_241_6E-11,
    1.188_914_710_784_643_9E-11,
    4.940_602_388_224_97E-10,
    3.396_232_025_708_386_5E-9,
    2.266_668_990_498_178E-8,
    2.048_918_589_469_063_8E-7,
    2.891_370_520_834_756_7E-6,
    6.889_758_346_916_825E-5,
    3.369_116_478_255_694_3E-3,
    8.044_904_110_141_088E-1,
];

fn chbevl(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in &coeffs[1..] {
        b2 = b1;
        b1 = b0;
        b0 = x * b1 - b2 + c;
    }
    0.5 * (b0 - b2)
}

fn check_arg(x: f64) -> Result<(), NumericsError> {
    if !x.is_finite() || x < 0.0 {
        return Err(NumericsError::Domain(format!(
            "bessel_i0 requires a finite non-negative argument, got {x}"
        )));
    }
    Ok(())
}

/// `exp(-x) * I0(x)` for `x >= 0`. Finite for every finite input.
pub fn bessel_i0_scaled(x: f64) -> Result<f64, NumericsError> {
    check_arg(x)?;
    Ok(i0_scaled_unchecked(x))
}

/// `I0(x)` for `x >= 0`. Returns `+inf` once the true value exceeds `f64::MAX`
/// (around `x = 713.98`); use [`bessel_i0_scaled`] there.
pub fn bessel_i0(x: f64) -> Result<f64, NumericsError> {
    check_arg(x)?;
    if x <= 8.0 {
        Ok(x.exp() * chbevl(x / 2.0 - 2.0, &COEFFS_A))
    } else {
        // split the exponential so the product does not overflow early
        let half = (0.5 * x).exp();
        Ok(half * (half * chbevl(32.0 / x - 2.0, &COEFFS_B) / x.sqrt()))
    }
}

#[inline]
pub(crate) fn i0_scaled_unchecked(x: f64) -> f64 {
    if x <= 8.0 {
        chbevl(x / 2.0 - 2.0, &COEFFS_A)
    } else {
        chbevl(32.0 / x - 2.0, &COEFFS_B) / x.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 40-term power series: sum (x/2)^{2k} / (k!)^2.
    fn series_oracle(x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    /// Large-argument expansion e^x / sqrt(2 pi x) * sum ((2k-1)!!)^2 / (k! (8x)^k).
    fn asymptotic_oracle(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            let odd = (2 * k - 1) as f64;
            term *= odd * odd / (k as f64 * 8.0 * x);
            sum += term;
        }
        x.exp() / (2.0 * std::f64::consts::PI * x).sqrt() * sum
    }

    #[test]
    fn value_at_zero_is_one() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert_eq!(bessel_i0_scaled(0.0).unwrap(), 1.0);
    }

    #[test]
    fn value_at_one_matches_series() {
        let got = bessel_i0(1.0).unwrap();
        let want = series_oracle(1.0);
        assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
        assert!((got - 1.266_065_877_752_008_4).abs() < 1e-12);
        // 2.2796 is I0 at 2, not at 1
        assert!((bessel_i0(2.0).unwrap() - 2.279_585_302_336_067).abs() < 1e-12);
    }

    #[test]
    fn large_argument_uses_scaled_form() {
        let x = 50.0;
        let direct = bessel_i0(x).unwrap();
        let via_scaled = x.exp() * bessel_i0_scaled(x).unwrap();
        assert!((direct - via_scaled).abs() / via_scaled < 1e-10);
        let asym = asymptotic_oracle(x);
        assert!((direct - asym).abs() / asym < 1e-10, "{direct} vs {asym}");
    }

    #[test]
    fn series_agreement_on_grid() {
        for i in 0..=400 {
            let x = i as f64 * 0.05;
            let got = bessel_i0(x).unwrap();
            let want = series_oracle(x);
            assert!((got - want).abs() / want < 1e-10, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn scaled_stays_finite_past_overflow() {
        assert!(bessel_i0(800.0).unwrap().is_infinite());
        let s = bessel_i0_scaled(800.0).unwrap();
        let approx = 1.0 / (2.0 * std::f64::consts::PI * 800.0).sqrt();
        assert!((s - approx).abs() / approx < 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_i0(-1.0).is_err());
        assert!(bessel_i0(f64::NAN).is_err());
        assert!(bessel_i0_scaled(f64::INFINITY).is_err());
    }
}
