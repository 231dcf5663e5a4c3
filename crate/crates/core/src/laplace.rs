//! Laplace transforms `E[exp(-s I)]` of the three interference fields seen
//! by the typical user: open-access SBSs of its own cluster (intra), SBSs of
//! other clusters (inter), and macro BSs.
//!
//! `s` is in mW⁻¹·km^α; the coverage integrals use `s = β x^α / P_j`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::activity::active_count_weights;
use crate::association::{exclusion_radius, interferer_survival};
use crate::error::{Error, Result};
use crate::kernel::ClusterKernel;
use crate::numerics::{integrate, sinc_alpha, try_integrate, QuadratureSpec};
use crate::params::{AssociationPolicy, NetworkParams, Tier};

/// Largest `n_s0` for which the exact truncated sum is offered.
pub const EXACT_SUM_MAX_N: u32 = 30;

/// How the intra-cluster transform averages over the active-SBS count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum IntraMode {
    /// Finite sum over the truncated (weighted) Poisson count law.
    #[serde(rename = "exact")]
    ExactTruncatedSum,
    /// `exp(-n̄ p)`: the untruncated Poisson average, accurate for `n̄ ≪ n_s0`.
    #[default]
    #[serde(rename = "simplified")]
    SimplifiedExponential,
}

impl std::fmt::Display for IntraMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IntraMode::ExactTruncatedSum => "exact",
            IntraMode::SimplifiedExponential => "simplified",
        })
    }
}

impl IntraMode {
    /// Checks the mode's preconditions against `params`, warning when the
    /// simplified form is used outside the regime it approximates.
    pub fn check(self, params: &NetworkParams) -> Result<()> {
        match self {
            IntraMode::ExactTruncatedSum if params.n_s0() > EXACT_SUM_MAX_N => Err(Error::invalid(
                "n_s0",
                format!("exact intra-cluster sum supports n_s0 ≤ {EXACT_SUM_MAX_N}, got {}", params.n_s0()),
            )),
            IntraMode::SimplifiedExponential if params.nbar_as() > params.n_s0() as f64 / 3.0 => {
                log::warn!(
                    "simplified intra-cluster transform used with n̄_as = {} > n_s0/3 = {:.3}; expect bias",
                    params.nbar_as(),
                    params.n_s0() as f64 / 3.0
                );
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Conditioning for the intra-cluster transform.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceContext<'a> {
    pub params: &'a NetworkParams,
    pub kernel: &'a ClusterKernel,
    pub policy: AssociationPolicy,
    pub tier: Tier,
    /// Distance from the user to its cluster centre (km).
    pub nu0: f64,
    /// Serving distance (km); unused for Policy 2 macro.
    pub x: Option<f64>,
    pub mode: IntraMode,
}

impl LaplaceContext<'_> {
    fn serving_distance(&self) -> Result<f64> {
        match (self.policy, self.tier, self.x) {
            (AssociationPolicy::Threshold, Tier::Macro, _) => Ok(0.0),
            (_, _, Some(x)) if x.is_finite() && x >= 0.0 => Ok(x),
            (_, _, Some(x)) => Err(Error::Domain(format!("serving distance must be non-negative, got {x}"))),
            _ => Err(Error::Domain(format!(
                "{} {} intra-cluster transform needs the serving distance",
                self.policy, self.tier
            ))),
        }
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-10, 1e-15)
}

/// Probability that one open-access interferer, drawn from the truncated
/// member law beyond `exclusion`, is "hit" by fading: `E[sP/(sP + W^α)]`.
/// `None` when no interferer can lie beyond `exclusion`.
pub fn intra_hit_probability(
    kernel: &ClusterKernel,
    p_s: f64,
    alpha: f64,
    nu0: f64,
    exclusion: f64,
    s: f64,
) -> Result<Option<f64>> {
    let survival = match interferer_survival(kernel, exclusion, nu0) {
        Ok(v) => v,
        Err(Error::DegenerateConditioning { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if s == 0.0 {
        return Ok(Some(0.0));
    }
    let sp = s * p_s;
    let (lo, hi) = kernel.distance_support(nu0);
    let lo = lo.max(exclusion);
    if hi <= lo {
        return Ok(Some(0.0));
    }
    let q = try_integrate(
        |w| Ok::<f64, Error>(sp / (sp + w.powf(alpha)) * kernel.distance_pdf(w, nu0)?),
        lo,
        hi,
        &spec(),
    )?;
    Ok(Some((q.value / survival).clamp(0.0, 1.0)))
}

/// Combines the per-interferer hit probability `p` into the intra transform.
pub fn intra_from_hit_probability(params: &NetworkParams, tier: Tier, mode: IntraMode, p: f64) -> f64 {
    let nbar = params.nbar_as();
    match mode {
        IntraMode::SimplifiedExponential => (-nbar * p).exp(),
        IntraMode::ExactTruncatedSum => {
            let served_by_small = tier == Tier::Small;
            let w = active_count_weights(nbar, params.n_s0(), served_by_small);
            let keep = 1.0 - p;
            // macro-served: all l active SBSs interfere; small-served: l - 1 of them
            let shift = i32::from(served_by_small);
            w.iter()
                .enumerate()
                .map(|(l, &pi)| if pi == 0.0 { 0.0 } else { pi * keep.powi(l as i32 - shift) })
                .sum::<f64>()
                .min(1.0)
        }
    }
}

/// Laplace transform of the intra-cluster interference at `s`.
pub fn laplace_intra(ctx: &LaplaceContext<'_>, s: f64) -> Result<f64> {
    check_s(s)?;
    if ctx.mode == IntraMode::ExactTruncatedSum && ctx.params.n_s0() > EXACT_SUM_MAX_N {
        ctx.mode.check(ctx.params)?;
    }
    let x = ctx.serving_distance()?;
    if s == 0.0 {
        return Ok(1.0);
    }
    let e = exclusion_radius(ctx.params, ctx.policy, ctx.tier, x);
    match intra_hit_probability(ctx.kernel, ctx.params.p_s(), ctx.params.alpha(), ctx.nu0, e, s)? {
        None => Ok(1.0),
        Some(p) => Ok(intra_from_hit_probability(ctx.params, ctx.tier, ctx.mode, p)),
    }
}

/// Outer-integral strategy for the inter-cluster transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterOuter {
    /// Finite head plus a mapped semi-infinite tail.
    #[default]
    Substitution,
    /// Finite range ending where the integrand drops below `1e-12` of its peak.
    Truncated,
}

/// Expected hit probability `φ(ν)` for one closed-access SBS of a cluster centred `nu` away.
fn inter_hit(kernel: &ClusterKernel, sp: f64, alpha: f64, nu: f64) -> Result<f64> {
    let (lo, hi) = kernel.distance_support(nu);
    let q = try_integrate(
        |t| Ok::<f64, Error>(sp / (sp + t.powf(alpha)) * kernel.intercluster_distance_pdf(t, nu)?),
        lo,
        hi,
        &spec(),
    )?;
    Ok(q.value.clamp(0.0, 1.0))
}

/// Exponent `c` with `L_inter(s) = exp(-c)`.
pub fn inter_exponent(params: &NetworkParams, kernel: &ClusterKernel, s: f64, outer: InterOuter) -> Result<f64> {
    check_s(s)?;
    let nbar = params.nbar_as();
    if s == 0.0 || nbar == 0.0 {
        return Ok(0.0);
    }
    let sp = s * params.p_s();
    let alpha = params.alpha();
    let bracket = |nu: f64| -> Result<f64> { Ok(-(-nbar * inter_hit(kernel, sp, alpha, nu)?).exp_m1() * nu) };
    let reach = sp.powf(1.0 / alpha);
    let nu_c = 2.0 * (reach + kernel.extent());
    let outer_spec = QuadratureSpec::with_tolerances(1e-9, 1e-300);

    let head = try_integrate(bracket, 0.0, nu_c, &outer_spec)?.value;
    let tail = match outer {
        InterOuter::Substitution => try_integrate(bracket, nu_c, f64::INFINITY, &outer_spec.with_scale(nu_c))?.value,
        InterOuter::Truncated => {
            let peak = head / nu_c;
            let mut end = nu_c;
            while bracket(end)? > 1e-12 * peak.max(bracket(nu_c)?) {
                end *= 2.0;
                if end > nu_c * 1e9 {
                    return Err(Error::Domain("inter-cluster integrand does not decay".into()));
                }
            }
            try_integrate(bracket, nu_c, end, &outer_spec)?.value
        }
    };
    Ok(2.0 * PI * params.lambda_p() * (head + tail))
}

/// Laplace transform of the interference from SBSs of all other clusters.
/// It does not depend on the association policy or the serving tier.
pub fn laplace_inter(params: &NetworkParams, kernel: &ClusterKernel, s: f64) -> Result<f64> {
    Ok((-inter_exponent(params, kernel, s, InterOuter::Substitution)?).exp())
}

/// `∫_b^∞ v / (1 + v^α) dv`.
pub fn macro_tail_integral(alpha: f64, b: f64) -> Result<f64> {
    if b.is_nan() || b < 0.0 {
        return Err(Error::Domain(format!("lower limit must be non-negative, got {b}")));
    }
    if alpha == 4.0 {
        return Ok(0.5 * (0.5 * PI - (b * b).atan()));
    }
    let full = 1.0 / (2.0 * sinc_alpha(alpha)?);
    if b == 0.0 {
        return Ok(full);
    }
    if b < 1.0 {
        let head = integrate(|v| v / (1.0 + v.powf(alpha)), 0.0, b, &spec())?.value;
        Ok(full - head)
    } else {
        let q = integrate(
            |v| v.powf(1.0 - alpha) / (1.0 + v.powf(-alpha)),
            b,
            f64::INFINITY,
            &spec().with_scale(b),
        )?;
        Ok(q.value)
    }
}

/// Exponent of the macro transform with no interferer closer than `lower` (km).
pub fn macro_exponent(params: &NetworkParams, s: f64, lower: f64) -> Result<f64> {
    check_s(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let r0 = (s * params.p_m()).powf(1.0 / params.alpha());
    Ok(2.0 * PI * params.lambda_m() * r0 * r0 * macro_tail_integral(params.alpha(), lower / r0)?)
}

/// Laplace transform of the macro-tier interference. `x` is the serving
/// distance; Policy 2 small-served users see an unconstrained macro PPP.
pub fn laplace_macro(
    params: &NetworkParams,
    policy: AssociationPolicy,
    tier: Tier,
    s: f64,
    x: Option<f64>,
) -> Result<f64> {
    check_s(s)?;
    let lower = match (policy, tier) {
        (AssociationPolicy::Threshold, Tier::Small) => {
            if s == 0.0 {
                return Ok(1.0);
            }
            let c = PI * params.lambda_m() * (s * params.p_m()).powf(2.0 / params.alpha()) / sinc_alpha(params.alpha())?;
            return Ok((-c).exp());
        }
        (_, tier) => {
            let x = x.ok_or_else(|| Error::Domain(format!("{policy} {tier} macro transform needs the serving distance")))?;
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::Domain(format!("serving distance must be non-negative, got {x}")));
            }
            match tier {
                Tier::Macro => x,
                Tier::Small => params.xi_ms() * x,
            }
        }
    };
    Ok((-macro_exponent(params, s, lower)?).exp())
}

fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("s must be finite and non-negative, got {s}")))
    }
}
