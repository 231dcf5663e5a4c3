//! Nearest-BS laws, association probabilities, and serving / interferer
//! distance laws under both association policies.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::{ClusterKernel, DistanceLaw};
use crate::numerics::{try_integrate, QuadratureSpec};
use crate::params::{AssociationPolicy, NetworkParams, Tier};

/// Interferer laws are refused when the conditioning event has less mass than this.
pub const DEGENERATE_SURVIVAL: f64 = 1e-12;

// exp(-40): mass of the nearest-macro law beyond the integration cap
const MACRO_TAIL_EXPONENT: f64 = 40.0;

/// Distance to the nearest point of a PPP of density `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestMacroLaw {
    pub lambda: f64,
}

impl NearestMacroLaw {
    pub fn sf(&self, r: f64) -> f64 {
        (-PI * self.lambda * r * r).exp()
    }

    /// Typical scale `1/sqrt(pi lambda)` of the law.
    pub fn scale(&self) -> f64 {
        1.0 / (PI * self.lambda).sqrt()
    }

    /// Density without the `Result` wrapper of [`DistanceLaw::pdf`].
    pub fn density(&self, r: f64) -> f64 {
        2.0 * PI * self.lambda * r * self.sf(r)
    }
}

impl DistanceLaw for NearestMacroLaw {
    fn pdf(&self, r: f64) -> Result<f64> {
        Ok(if r < 0.0 { 0.0 } else { self.density(r) })
    }
    fn cdf(&self, r: f64) -> Result<f64> {
        Ok(if r <= 0.0 { 0.0 } else { -(-PI * self.lambda * r * r).exp_m1() })
    }
}

pub fn nearest_macro_law(params: &NetworkParams) -> NearestMacroLaw {
    NearestMacroLaw { lambda: params.lambda_m() }
}

/// `P(R_s > r | nu0) = (1 - F_U(r|nu0))^n_s0`.
pub fn nearest_sbs_sf(params: &NetworkParams, kernel: &ClusterKernel, r: f64, nu0: f64) -> Result<f64> {
    Ok(kernel.distance_sf(r, nu0)?.powi(params.n_s0() as i32))
}

/// CDF of the distance to the nearest of the `n_s0` representative SBSs.
pub fn nearest_sbs_cdf(params: &NetworkParams, kernel: &ClusterKernel, r: f64, nu0: f64) -> Result<f64> {
    let n = params.n_s0() as i32;
    let sf = kernel.distance_sf(r, nu0)?;
    if sf > 0.5 {
        // 1 - sf^n without cancellation
        Ok(-(n as f64 * sf.ln()).exp_m1())
    } else {
        Ok(1.0 - sf.powi(n))
    }
}

pub fn nearest_sbs_pdf(params: &NetworkParams, kernel: &ClusterKernel, r: f64, nu0: f64) -> Result<f64> {
    let n = params.n_s0();
    let f = kernel.distance_pdf(r, nu0)?;
    if f == 0.0 {
        return Ok(0.0);
    }
    let sf = if n > 1 { kernel.distance_sf(r, nu0)?.powi(n as i32 - 1) } else { 1.0 };
    Ok(n as f64 * sf * f)
}

/// Law of `R_s` given `nu0`.
#[derive(Debug, Clone, Copy)]
pub struct NearestSbsLaw<'a> {
    pub params: &'a NetworkParams,
    pub kernel: &'a ClusterKernel,
    pub nu0: f64,
}

impl DistanceLaw for NearestSbsLaw<'_> {
    fn pdf(&self, t: f64) -> Result<f64> {
        nearest_sbs_pdf(self.params, self.kernel, t, self.nu0)
    }
    fn cdf(&self, t: f64) -> Result<f64> {
        nearest_sbs_cdf(self.params, self.kernel, t, self.nu0)
    }
}

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-10, 1e-14)
}

/// Policy 1 macro-association probability for a user `nu0` from its cluster
/// centre: `∫ P(R_s > ξ_sm r | nu0) f_Rm(r) dr`.
fn assoc_macro_p1(params: &NetworkParams, kernel: &ClusterKernel, nu0: f64) -> Result<f64> {
    let macro_law = nearest_macro_law(params);
    let xi = params.xi_sm();
    let (lo, hi) = kernel.distance_support(nu0);
    // below lo/xi the small tier cannot win, above hi/xi it always does
    // and beyond `macro_cap` the macro tier itself has no mass left
    let macro_cap = (MACRO_TAIL_EXPONENT / (PI * params.lambda_m())).sqrt();
    let r_lo = (lo / xi).min(macro_cap);
    let r_hi = (hi / xi).min(macro_cap);
    let head = macro_law.cdf(r_lo)?;
    let body = try_integrate(
        |r| Ok::<f64, Error>(nearest_sbs_sf(params, kernel, xi * r, nu0)? * macro_law.density(r)),
        r_lo,
        r_hi,
        &quad_spec(),
    )?;
    Ok((head + body.value).clamp(0.0, 1.0))
}

/// Probability that a user `nu0` from its cluster centre associates with `tier`
/// under Policy 1 (maximum average received power).
pub fn assoc_prob_policy1(params: &NetworkParams, kernel: &ClusterKernel, nu0: f64, tier: Tier) -> Result<f64> {
    check_nonneg("nu0", nu0)?;
    let am = assoc_macro_p1(params, kernel, nu0)?;
    Ok(match tier {
        Tier::Macro => am,
        Tier::Small => 1.0 - am,
    })
}

/// Policy 2 association probability: small iff `R_s ≤ D`.
pub fn assoc_prob_policy2(params: &NetworkParams, kernel: &ClusterKernel, nu0: f64, tier: Tier) -> Result<f64> {
    check_nonneg("nu0", nu0)?;
    let d = params.distance_threshold();
    Ok(match tier {
        Tier::Small => nearest_sbs_cdf(params, kernel, d, nu0)?,
        Tier::Macro => nearest_sbs_sf(params, kernel, d, nu0)?,
    })
}

pub fn assoc_prob(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    nu0: f64,
    tier: Tier,
) -> Result<f64> {
    match policy {
        AssociationPolicy::MaxPower => assoc_prob_policy1(params, kernel, nu0, tier),
        AssociationPolicy::Threshold => assoc_prob_policy2(params, kernel, nu0, tier),
    }
}

/// Support of the serving distance for `tier` (km); the upper end may be infinite.
pub fn serving_support(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    tier: Tier,
    nu0: f64,
) -> (f64, f64) {
    let (_, hi) = kernel.distance_support(nu0);
    match (policy, tier) {
        (_, Tier::Macro) => (0.0, f64::INFINITY),
        (AssociationPolicy::MaxPower, Tier::Small) => (0.0, hi),
        (AssociationPolicy::Threshold, Tier::Small) => (0.0, hi.min(params.distance_threshold())),
    }
}

/// Joint density `P(S_j | nu0) f_Xj(x | nu0)` of associating with `tier`
/// at serving distance `x`. Integrates to the association probability.
/// For Policy 2 macro, `assoc_macro` must be `A_m(nu0)` (the serving
/// distance is independent of the association event there).
pub fn serving_weight(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    tier: Tier,
    x: f64,
    nu0: f64,
    assoc_macro_p2: Option<f64>,
) -> Result<f64> {
    check_nonneg("x", x)?;
    let macro_law = nearest_macro_law(params);
    match (policy, tier) {
        (AssociationPolicy::MaxPower, Tier::Macro) => {
            Ok(nearest_sbs_sf(params, kernel, params.xi_sm() * x, nu0)? * macro_law.density(x))
        }
        (AssociationPolicy::MaxPower, Tier::Small) => {
            let r = params.xi_ms() * x;
            let f = nearest_sbs_pdf(params, kernel, x, nu0)?;
            Ok(if f == 0.0 { 0.0 } else { macro_law.sf(r) * f })
        }
        (AssociationPolicy::Threshold, Tier::Small) => {
            if x > params.distance_threshold() {
                Ok(0.0)
            } else {
                nearest_sbs_pdf(params, kernel, x, nu0)
            }
        }
        (AssociationPolicy::Threshold, Tier::Macro) => {
            let am = match assoc_macro_p2 {
                Some(a) => a,
                None => assoc_prob_policy2(params, kernel, nu0, Tier::Macro)?,
            };
            Ok(am * macro_law.density(x))
        }
    }
}

/// Density of the serving distance given association with `tier`.
pub fn serving_distance_pdf(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    tier: Tier,
    x: f64,
    nu0: f64,
) -> Result<f64> {
    check_nonneg("x", x)?;
    check_nonneg("nu0", nu0)?;
    match (policy, tier) {
        (AssociationPolicy::Threshold, Tier::Macro) => nearest_macro_law(params).pdf(x),
        (AssociationPolicy::Threshold, Tier::Small) => {
            let d = params.distance_threshold();
            if x > d {
                return Err(Error::Domain(format!("serving distance {x} km exceeds the threshold D = {d} km")));
            }
            let a = assoc_prob_policy2(params, kernel, nu0, Tier::Small)?;
            degenerate_guard(a, d)?;
            Ok(nearest_sbs_pdf(params, kernel, x, nu0)? / a)
        }
        (AssociationPolicy::MaxPower, _) => {
            let a = assoc_prob_policy1(params, kernel, nu0, tier)?;
            degenerate_guard(a, x)?;
            Ok(serving_weight(params, kernel, policy, tier, x, nu0, None)? / a)
        }
    }
}

/// Radius inside which no open-access interferer can lie.
pub fn exclusion_radius(params: &NetworkParams, policy: AssociationPolicy, tier: Tier, x: f64) -> f64 {
    match (policy, tier) {
        (AssociationPolicy::MaxPower, Tier::Macro) => params.xi_sm() * x,
        (AssociationPolicy::Threshold, Tier::Macro) => params.distance_threshold(),
        (_, Tier::Small) => x,
    }
}

/// Density of the distance to one open-access interfering SBS: the member
/// law truncated below the exclusion radius and renormalised. `x` is ignored
/// for Policy 2 macro.
pub fn interferer_distance_pdf(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    tier: Tier,
    w: f64,
    nu0: f64,
    x: f64,
) -> Result<f64> {
    check_nonneg("w", w)?;
    let e = exclusion_radius(params, policy, tier, x);
    let sf = interferer_survival(kernel, e, nu0)?;
    if w < e {
        return Ok(0.0);
    }
    Ok(kernel.distance_pdf(w, nu0)? / sf)
}

/// `1 - F_U(e | nu0)`, refusing degenerate conditioning.
pub fn interferer_survival(kernel: &ClusterKernel, e: f64, nu0: f64) -> Result<f64> {
    let sf = kernel.distance_sf(e, nu0)?;
    if sf < DEGENERATE_SURVIVAL {
        return Err(Error::DegenerateConditioning { radius: e, survival: sf });
    }
    Ok(sf)
}

fn degenerate_guard(prob: f64, at: f64) -> Result<()> {
    if prob < DEGENERATE_SURVIVAL {
        Err(Error::DegenerateConditioning { radius: at, survival: prob })
    } else {
        Ok(())
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and non-negative, got {v}")))
    }
}

/// `∫ pdf` over `[lo, hi)` for normalisation checks.
pub fn total_mass(pdf: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, scale: f64) -> Result<f64> {
    let spec = quad_spec().with_scale(scale);
    Ok(try_integrate(pdf, lo, hi, &spec)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::marcum_q1;

    fn baseline() -> (NetworkParams, ClusterKernel) {
        let p = NetworkParams::baseline();
        let k = ClusterKernel::gaussian(p.sigma_s()).unwrap();
        (p, k)
    }

    #[test]
    fn macro_law_median() {
        let law = NearestMacroLaw { lambda: 1.0 };
        assert_eq!(law.cdf(0.0).unwrap(), 0.0);
        let r = (2f64.ln() / PI).sqrt();
        assert!((law.cdf(r).unwrap() - 0.5).abs() < 1e-15);
        let m = total_mass(|t| law.pdf(t), 0.0, f64::INFINITY, law.scale()).unwrap();
        assert!((m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_sbs_is_member_law() {
        let (p, k) = baseline();
        let p1 = p.with(|r| r.n_s0 = 1).unwrap();
        for r in [0.01, 0.05, 0.1] {
            let a = nearest_sbs_cdf(&p1, &k, r, 0.03).unwrap();
            let b = k.distance_cdf(r, 0.03).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn order_statistic_closed_form() {
        let p = NetworkParams::baseline().with(|r| r.sigma_s = 1.0).unwrap();
        let k = ClusterKernel::gaussian(1.0).unwrap();
        let want = 1.0 - marcum_q1(1.0, 0.5).unwrap().powi(10);
        assert!((nearest_sbs_cdf(&p, &k, 0.5, 1.0).unwrap() - want).abs() < 1e-14);
        assert!((nearest_sbs_cdf(&p, &k, 50.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn policy2_rayleigh_reduction() {
        let (p, k) = baseline();
        let sigma = p.sigma_s();
        let p = p.with_distance_threshold(2.0 * sigma).unwrap();
        let got = assoc_prob_policy2(&p, &k, 0.0, Tier::Small).unwrap();
        assert!((got - (1.0 - (-20.0f64).exp())).abs() < 1e-12);
        let tiny = p.with_distance_threshold(1e-9).unwrap();
        assert!(assoc_prob_policy2(&tiny, &k, 0.0, Tier::Small).unwrap() < 1e-12);
        let huge = p.with_distance_threshold(1e3).unwrap();
        assert_eq!(assoc_prob_policy2(&huge, &k, 0.0, Tier::Small).unwrap(), 1.0);
    }

    #[test]
    fn policy1_complement_and_silent_small_cells() {
        let (p, k) = baseline();
        for nu0 in [0.0, 0.03, 0.1, 0.5] {
            let m = assoc_prob_policy1(&p, &k, nu0, Tier::Macro).unwrap();
            let s = assoc_prob_policy1(&p, &k, nu0, Tier::Small).unwrap();
            assert!((m + s - 1.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&m));
        }
        let silent = p.with(|r| r.p_s = 1e-30).unwrap();
        assert!((assoc_prob_policy1(&silent, &k, 0.05, Tier::Macro).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn policy1_macro_probability_matches_small_side_integral() {
        // A_s computed from the small-tier side must equal 1 - A_m
        let (p, k) = baseline();
        let nu0 = 0.05;
        let (_, hi) = k.distance_support(nu0);
        let a_s = total_mass(
            |x| serving_weight(&p, &k, AssociationPolicy::MaxPower, Tier::Small, x, nu0, None),
            0.0,
            hi,
            1.0,
        )
        .unwrap();
        let a_m = assoc_prob_policy1(&p, &k, nu0, Tier::Macro).unwrap();
        assert!((a_s + a_m - 1.0).abs() < 1e-8, "{a_s} + {a_m}");
    }

    #[test]
    fn serving_pdfs_normalise() {
        let (p, k) = baseline();
        let nu0 = 0.05;
        for policy in AssociationPolicy::BOTH {
            for tier in Tier::BOTH {
                let (lo, hi) = serving_support(&p, &k, policy, tier, nu0);
                let scale = if tier == Tier::Macro { 0.5 } else { 0.05 };
                let m = total_mass(|x| serving_distance_pdf(&p, &k, policy, tier, x, nu0), lo, hi, scale).unwrap();
                assert!((m - 1.0).abs() < 1e-6, "{policy} {tier}: {m}");
            }
        }
        let law = nearest_macro_law(&p);
        let x = 0.37;
        assert_eq!(
            serving_distance_pdf(&p, &k, AssociationPolicy::Threshold, Tier::Macro, x, nu0).unwrap(),
            law.pdf(x).unwrap()
        );
        let d = p.distance_threshold();
        assert!(serving_distance_pdf(&p, &k, AssociationPolicy::Threshold, Tier::Small, d * 1.01, nu0).is_err());
    }

    #[test]
    fn interferer_laws() {
        let (p, k) = baseline();
        let nu0 = 0.05;
        // zero exclusion radius gives the member law back
        let w = 0.07;
        let a = interferer_distance_pdf(&p, &k, AssociationPolicy::MaxPower, Tier::Small, w, nu0, 0.0).unwrap();
        assert_eq!(a, k.distance_pdf(w, nu0).unwrap());
        for policy in AssociationPolicy::BOTH {
            for tier in Tier::BOTH {
                let x = 0.03;
                let e = exclusion_radius(&p, policy, tier, x);
                assert_eq!(interferer_distance_pdf(&p, &k, policy, tier, e * 0.5, nu0, x).unwrap(), 0.0);
                let (_, hi) = k.distance_support(nu0);
                let m = total_mass(|w| interferer_distance_pdf(&p, &k, policy, tier, w, nu0, x), e, hi, 0.05).unwrap();
                assert!((m - 1.0).abs() < 1e-6, "{policy} {tier}: {m}");
            }
        }
        let far = interferer_distance_pdf(&p, &k, AssociationPolicy::MaxPower, Tier::Small, 2.0, nu0, 1.0);
        assert!(matches!(far, Err(Error::DegenerateConditioning { .. })));
    }
}
