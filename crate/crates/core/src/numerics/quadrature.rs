//! Adaptive Gauss–Kronrod (10/21-point) quadrature with global bisection of
//! the worst interval, in the style of QUADPACK's QAG.
//!
//! Semi-infinite ranges `[lo, inf)` are folded onto `[0, 1)` by
//! `t = lo + c * u / (1 - u)`, so tails are integrated rather than clipped.

use super::NumericsError;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_864,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod abscissae XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// How a `[lo, +inf)` range is turned into a finite one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperTruncation {
    /// `t = lo + scale * u / (1 - u)`; `scale` should sit near the width of
    /// the integrand's bulk.
    Substitution { scale: f64 },
    /// Integrate `[lo, lo + length]` only.
    Truncate { length: f64 },
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
    pub upper_truncation: UpperTruncation,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            absolute_tolerance: 1e-12,
            max_subdivisions: 200,
            upper_truncation: UpperTruncation::Substitution { scale: 1.0 },
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(relative: f64, absolute: f64) -> Self {
        Self {
            relative_tolerance: relative,
            absolute_tolerance: absolute,
            ..Self::default()
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.upper_truncation = UpperTruncation::Substitution { scale };
        self
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let tol_ok = |t: f64| t.is_finite() && t > 0.0;
        if !tol_ok(self.relative_tolerance) || !tol_ok(self.absolute_tolerance) {
            return Err(NumericsError::Domain(
                "quadrature tolerances must be strictly positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(NumericsError::Domain("max_subdivisions must be at least 1".into()));
        }
        match self.upper_truncation {
            UpperTruncation::Substitution { scale } if !(scale.is_finite() && scale > 0.0) => {
                Err(NumericsError::Domain(format!("substitution scale must be positive, got {scale}")))
            }
            UpperTruncation::Truncate { length } if !(length.is_finite() && length > 0.0) => {
                Err(NumericsError::Domain(format!("truncation length must be positive, got {length}")))
            }
            _ => Ok(()),
        }
    }
}

/// Converged quadrature result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > e {
            e = min_err;
        }
    }
    e
}

fn gk21<E, F>(f: &mut F, a: f64, b: f64) -> Result<Segment, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, E> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFinite { at: x, value: v }.into())
        }
    };

    let f_center = eval(center)?;
    let mut res_g = 0.0;
    let mut res_k = f_center * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    #[allow(clippy::needless_range_loop)]
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let width = half.abs();
    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * width, res_asc * width),
    })
}

fn adaptive<E, F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Quadrature, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let mut segments = vec![gk21(&mut f, a, b)?];
    let mut evaluations = 21;
    let tolerance = |value: f64| spec.absolute_tolerance.max(spec.relative_tolerance * value.abs());
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tolerance(value) {
            return Ok(Quadrature { value, error_estimate: error, evaluations });
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(NumericsError::NotConverged { estimate: value, error_bound: error }.into());
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        // interval can no longer be split in floating point
        if mid <= seg.a || mid >= seg.b {
            return Err(NumericsError::NotConverged { estimate: value, error_bound: error }.into());
        }
        let left = gk21(&mut f, seg.a, mid)?;
        let right = gk21(&mut f, mid, seg.b)?;
        evaluations += 42;
        segments[worst] = left;
        segments.push(right);
    }
}

/// Integrate a fallible integrand over `[lo, hi]`, `hi` possibly `+inf`.
///
/// Errors raised by the integrand short-circuit the whole integration.
pub fn try_integrate<E, F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Quadrature, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    spec.validate()?;
    if !lo.is_finite() || hi.is_nan() {
        return Err(NumericsError::Domain(format!("invalid integration range [{lo}, {hi}]")).into());
    }
    if hi < lo {
        return Err(NumericsError::Domain(format!("lower limit {lo} exceeds upper limit {hi}")).into());
    }
    if hi == lo {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }
    if hi.is_finite() {
        return adaptive(f, lo, hi, spec);
    }
    match spec.upper_truncation {
        UpperTruncation::Truncate { length } => adaptive(f, lo, lo + length, spec),
        UpperTruncation::Substitution { scale } => adaptive(
            |u: f64| {
                let one_minus = 1.0 - u;
                let t = lo + scale * u / one_minus;
                Ok(f(t)? * scale / (one_minus * one_minus))
            },
            0.0,
            1.0,
            spec,
        ),
    }
}

/// Integrate `f` over `[lo, hi]`, `hi` possibly `+inf`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Quadrature, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|t| Ok::<f64, NumericsError>(f(t)), lo, hi, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_on_unit_interval() {
        let q = integrate(|_| 1.0, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_tail_closed_form() {
        // antiderivative of t exp(-pi t^2) is -exp(-pi t^2) / (2 pi)
        let q = integrate(|t| t * (-PI * t * t).exp(), 0.0, f64::INFINITY, &QuadratureSpec::default())
            .unwrap();
        assert!((q.value - 1.0 / (2.0 * PI)).abs() < 1e-12, "{}", q.value);
    }

    #[test]
    fn polynomial_tail() {
        // int_1^inf t^-3 dt = 1/2
        let q = integrate(|t| t.powi(-3), 1.0, f64::INFINITY, &QuadratureSpec::default()).unwrap();
        assert!((q.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn truncate_policy_clips() {
        let spec = QuadratureSpec {
            upper_truncation: UpperTruncation::Truncate { length: 1.0 },
            ..QuadratureSpec::default()
        };
        let q = integrate(|t| (-t).exp(), 0.0, f64::INFINITY, &spec).unwrap();
        assert!((q.value - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn nan_is_reported() {
        let err = integrate(|t| if t > 0.5 { f64::NAN } else { t }, 0.0, 1.0, &QuadratureSpec::default())
            .unwrap_err();
        assert!(matches!(err, NumericsError::NonFinite { .. }));
    }

    #[test]
    fn non_convergence_carries_estimate() {
        let spec = QuadratureSpec { max_subdivisions: 2, ..QuadratureSpec::default() };
        let err = integrate(|t| (1.0 / t).sin(), 1e-6, 1.0, &spec).unwrap_err();
        match err {
            NumericsError::NotConverged { estimate, error_bound } => {
                assert!(estimate.is_finite());
                assert!(error_bound > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_specs_rejected() {
        let spec = QuadratureSpec { max_subdivisions: 0, ..QuadratureSpec::default() };
        assert!(integrate(|t| t, 0.0, 1.0, &spec).is_err());
        assert!(integrate(|t| t, 1.0, 0.0, &QuadratureSpec::default()).is_err());
        let spec = QuadratureSpec::default().with_scale(-1.0);
        assert!(integrate(|t| t, 0.0, f64::INFINITY, &spec).is_err());
    }
}
