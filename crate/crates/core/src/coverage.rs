//! Per-tier and total coverage probability, throughput, and the Policy 2
//! threshold search.
//!
//! Coverage of tier `j` is a double integral over the user's distance `nu0`
//! to its cluster centre and the serving distance `x`:
//! `∫ f_V0(nu0) ∫ A_j f_Xj(x|nu0) L_intra L_inter L_macro dx dnu0`, all
//! transforms evaluated at `s = β x^α / P_j`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{assoc_prob, exclusion_radius, nearest_macro_law, serving_support, serving_weight};
use crate::error::{Context, Error, Result};
use crate::laplace::{
    inter_exponent, intra_from_hit_probability, intra_hit_probability, laplace_macro, IntraMode, InterOuter,
};
use crate::numerics::{try_integrate, GaussLegendre, MonotoneCubic, QuadratureSpec};
use crate::params::{AssociationPolicy, Model, NetworkParams, Tier};

/// Nodes of the fixed outer rule over `nu0`.
pub const OUTER_NODES: usize = 64;
/// Knots of the inter-cluster transform cache.
pub const INTER_CACHE_KNOTS: usize = 256;
// Cache covers exponents c of L = exp(-c) in this range.
const INTER_CACHE_C_MIN: f64 = 1e-9;
const INTER_CACHE_C_MAX: f64 = 50.0;
// Nearest-macro mass beyond sqrt(40 / (pi lambda_m)) is e^-40.
const MACRO_TAIL_EXPONENT: f64 = 40.0;

/// A pair of per-tier values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerTier {
    #[serde(rename = "macro")]
    pub macro_tier: f64,
    #[serde(rename = "small")]
    pub small_tier: f64,
}

impl PerTier {
    pub fn get(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.macro_tier,
            Tier::Small => self.small_tier,
        }
    }

    pub fn sum(&self) -> f64 {
        self.macro_tier + self.small_tier
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum Provenance {
    Analytic { mode: IntraMode },
    Simulated {
        trials: u64,
        /// 95% half-width of the total coverage.
        half_width_95: f64,
        /// 95% half-widths of the per-tier coverages.
        tier_half_width_95: PerTier,
    },
}

impl Provenance {
    pub fn half_width(&self, tier: Option<Tier>) -> Option<f64> {
        match self {
            Provenance::Analytic { .. } => None,
            Provenance::Simulated { half_width_95, tier_half_width_95, .. } => {
                Some(tier.map_or(*half_width_95, |t| tier_half_width_95.get(t)))
            }
        }
    }
}

/// Coverage, association and throughput for one policy at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub policy: AssociationPolicy,
    pub per_tier_coverage: PerTier,
    pub total_coverage: f64,
    /// Association probabilities averaged over the user's offset from its cluster centre.
    pub assoc_prob_avg: PerTier,
    /// bit/s/Hz/km².
    pub throughput: f64,
    pub provenance: Provenance,
}

/// Area throughput `(λ_m P_cm + λ_p n̄_as P_cs) log2(1 + β)`; the same
/// arithmetic holds for both policies.
pub fn throughput(params: &NetworkParams, pc_macro: f64, pc_small: f64, _policy: AssociationPolicy) -> f64 {
    (params.lambda_m() * pc_macro + params.lambda_p() * params.nbar_as() * pc_small) * (1.0 + params.beta()).log2()
}

/// Single-tier PPP coverage at α = 4 with Rayleigh fading: `1 / (1 + √β atan √β)`.
pub fn classical_ppp_coverage(beta: f64) -> f64 {
    let r = beta.sqrt();
    1.0 / (1.0 + r * r.atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterRule {
    /// Gauss–Legendre over the user-offset support.
    #[default]
    Fixed,
    /// Adaptive quadrature in both variables (slow; for verification).
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageOptions {
    pub mode: IntraMode,
    pub outer: OuterRule,
    /// Interpolate the inter-cluster transform from a cached grid in `s`.
    pub inter_cache: bool,
    pub inner: QuadratureSpec,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        Self {
            mode: IntraMode::default(),
            outer: OuterRule::Fixed,
            inter_cache: true,
            inner: QuadratureSpec::with_tolerances(1e-8, 1e-13),
        }
    }
}

impl CoverageOptions {
    pub fn with_mode(mut self, mode: IntraMode) -> Self {
        self.mode = mode;
        self
    }
}

/// `c(s)` with `L_inter(s) = exp(-c)`, interpolated on `(ln s, ln c)`.
#[derive(Debug, Clone)]
pub struct InterCache {
    curve: MonotoneCubic,
}

impl InterCache {
    pub fn build(params: &NetworkParams, model: &Model) -> Result<Option<Self>> {
        if params.nbar_as() == 0.0 {
            return Ok(None);
        }
        let c = |s: f64| inter_exponent(params, &model.sbs_kernel, s, InterOuter::Substitution);
        // bracket the s-range where c runs from C_MIN to C_MAX
        let reference = 1.0 / params.p_s();
        let mut lo = reference;
        while c(lo)? > INTER_CACHE_C_MIN {
            lo *= 1e-2;
        }
        let mut hi = reference;
        while c(hi)? < INTER_CACHE_C_MAX {
            hi *= 1e2;
        }
        let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
        let xs: Vec<f64> = (0..INTER_CACHE_KNOTS)
            .map(|i| ln_lo + (ln_hi - ln_lo) * i as f64 / (INTER_CACHE_KNOTS - 1) as f64)
            .collect();
        let ys = xs
            .par_iter()
            .map(|&ls| c(ls.exp()).map(f64::ln))
            .collect::<Result<Vec<f64>>>()
            .context(|| "tabulating the inter-cluster transform".into())?;
        Ok(Some(Self { curve: MonotoneCubic::new(xs, ys) }))
    }

    pub fn exponent(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        // outside the table ln c is extended linearly; c grows like s^(2/α) for large s
        self.curve.eval(s.ln()).exp()
    }

    pub fn domain(&self) -> (f64, f64) {
        let (a, b) = self.curve.domain();
        (a.exp(), b.exp())
    }
}

/// Analytic coverage engine for one model. The inter-cluster cache depends
/// only on the SBS field, so it is shared across policies and thresholds.
pub struct CoverageEvaluator {
    model: Model,
    options: CoverageOptions,
    inter: OnceLock<Option<InterCache>>,
}

impl CoverageEvaluator {
    pub fn new(model: Model, options: CoverageOptions) -> Result<Self> {
        options.inner.validate()?;
        options.mode.check(&model.params)?;
        Ok(Self { model, options, inter: OnceLock::new() })
    }

    /// Same model under different options; a built inter-cluster table is kept.
    pub fn with_options(&self, options: CoverageOptions) -> Result<Self> {
        let next = Self::new(self.model.clone(), options)?;
        if let Some(built) = self.inter.get() {
            let _ = next.inter.set(built.clone());
        }
        Ok(next)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn options(&self) -> &CoverageOptions {
        &self.options
    }

    fn inter_cache(&self) -> Result<Option<&InterCache>> {
        if !self.options.inter_cache {
            return Ok(None);
        }
        if self.inter.get().is_none() {
            let built = InterCache::build(&self.model.params, &self.model)?;
            let _ = self.inter.set(built);
        }
        Ok(self.inter.get().and_then(Option::as_ref))
    }

    fn inter_exponent(&self, params: &NetworkParams, s: f64) -> Result<f64> {
        match self.inter_cache()? {
            Some(cache) => Ok(cache.exponent(s)),
            None => inter_exponent(params, &self.model.sbs_kernel, s, InterOuter::Substitution),
        }
    }

    /// Coverage report for `policy` at the evaluator's parameters.
    pub fn coverage(&self, policy: AssociationPolicy) -> Result<CoverageReport> {
        self.coverage_at(&self.model.params, policy)
    }

    /// Policy 2 report with the distance threshold replaced by `d` (km).
    pub fn coverage_with_threshold(&self, d: f64) -> Result<CoverageReport> {
        let params = self.model.params.with_distance_threshold(d)?;
        self.coverage_at(&params, AssociationPolicy::Threshold)
    }

    /// Report at `params`, reusing this evaluator's kernels and inter-cluster
    /// cache. Only parameters that leave the SBS field untouched may differ
    /// (λ_m, P_m, P_0, β, n_s0); anything else is refused.
    pub fn coverage_for(&self, params: &NetworkParams, policy: AssociationPolicy) -> Result<CoverageReport> {
        if !self.shares_field(params) {
            return Err(Error::invalid(
                "params",
                "λ_p, n̄_as, σ_s, σ_u, P_s and α must match the evaluator's model",
            ));
        }
        self.options.mode.check(params)?;
        self.coverage_at(params, policy)
    }

    /// Whether [`Self::coverage_for`] accepts `params`.
    pub fn shares_field(&self, params: &NetworkParams) -> bool {
        let m = &self.model.params;
        m.lambda_p() == params.lambda_p()
            && m.nbar_as() == params.nbar_as()
            && m.sigma_s() == params.sigma_s()
            && m.sigma_u() == params.sigma_u()
            && m.p_s() == params.p_s()
            && m.alpha() == params.alpha()
    }

    fn coverage_at(&self, params: &NetworkParams, policy: AssociationPolicy) -> Result<CoverageReport> {
        // warm the cache outside the parallel region
        self.inter_cache()?;
        let outer_hi = self.model.user_kernel.extent();
        let node = |nu0: f64| -> Result<[f64; 4]> {
            let weight = self.model.user_kernel.user_center_distance_pdf(nu0)?;
            if weight == 0.0 {
                return Ok([0.0; 4]);
            }
            let am = assoc_prob(params, &self.model.sbs_kernel, policy, nu0, Tier::Macro)?;
            let cm = self.tier_inner(params, policy, Tier::Macro, nu0, am)?;
            let cs = self.tier_inner(params, policy, Tier::Small, nu0, am)?;
            Ok([weight * cm, weight * cs, weight * am, weight * (1.0 - am)])
        };

        let sums = match self.options.outer {
            OuterRule::Fixed => {
                let rule = GaussLegendre::new(OUTER_NODES).on_interval(0.0, outer_hi);
                let parts = rule
                    .par_iter()
                    .map(|&(nu0, w)| node(nu0).map(|v| v.map(|c| c * w)))
                    .collect::<Result<Vec<_>>>()?;
                // fixed-order reduction keeps results independent of thread count
                parts.iter().fold([0.0; 4], |acc, v| std::array::from_fn(|i| acc[i] + v[i]))
            }
            OuterRule::Adaptive => {
                let spec = self.options.inner;
                let mut out = [0.0; 4];
                for (i, slot) in out.iter_mut().enumerate() {
                    *slot = try_integrate(|nu0| node(nu0).map(|v| v[i]), 0.0, outer_hi, &spec)
                        .context(|| format!("outer integral over nu0 (component {i})"))?
                        .value;
                }
                out
            }
        };

        let per_tier = PerTier { macro_tier: sums[0].clamp(0.0, 1.0), small_tier: sums[1].clamp(0.0, 1.0) };
        Ok(CoverageReport {
            policy,
            per_tier_coverage: per_tier,
            total_coverage: per_tier.sum(),
            assoc_prob_avg: PerTier { macro_tier: sums[2], small_tier: sums[3] },
            throughput: throughput(params, per_tier.macro_tier, per_tier.small_tier, policy),
            provenance: Provenance::Analytic { mode: self.options.mode },
        })
    }

    /// `∫ A_j f_Xj(x|nu0) L_intra L_inter L_macro dx` for one outer node.
    fn tier_inner(
        &self,
        params: &NetworkParams,
        policy: AssociationPolicy,
        tier: Tier,
        nu0: f64,
        assoc_macro: f64,
    ) -> Result<f64> {
        let kernel = &self.model.sbs_kernel;
        if tier == Tier::Macro && assoc_macro == 0.0 || tier == Tier::Small && assoc_macro == 1.0 {
            return Ok(0.0);
        }
        let (lo, mut hi) = serving_support(params, kernel, policy, tier, nu0);
        let macro_cap = (MACRO_TAIL_EXPONENT / (PI * params.lambda_m())).sqrt();
        if tier == Tier::Macro {
            hi = macro_cap;
        }
        if hi <= lo {
            return Ok(0.0);
        }
        let power = params.power(tier);
        let alpha = params.alpha();
        let beta = params.beta();
        let mode = self.options.mode;
        let p2_macro = (policy, tier) == (AssociationPolicy::Threshold, Tier::Macro);

        let integrand = |x: f64| -> Result<f64> {
            let weight = if p2_macro {
                // the association factor is applied once, outside the integral
                nearest_macro_law(params).density(x)
            } else {
                serving_weight(params, kernel, policy, tier, x, nu0, None)?
            };
            if weight == 0.0 {
                return Ok(0.0);
            }
            let s = beta * x.powf(alpha) / power;
            let exclusion = exclusion_radius(params, policy, tier, x);
            let intra = match intra_hit_probability(kernel, params.p_s(), alpha, nu0, exclusion, s)? {
                None => 1.0,
                Some(p) => intra_from_hit_probability(params, tier, mode, p),
            };
            let inter = (-self.inter_exponent(params, s)?).exp();
            let mac = laplace_macro(params, policy, tier, s, Some(x))?;
            Ok(weight * intra * inter * mac)
        };
        let q = try_integrate(integrand, lo, hi, &self.options.inner).context(|| {
            format!("inner serving-distance integral ({policy} {tier}, nu0 = {nu0:.6} km)")
        })?;
        Ok(if p2_macro { assoc_macro * q.value } else { q.value })
    }
}

/// Policy 1 coverage report for `model`.
pub fn coverage_policy1(model: &Model, mode: IntraMode) -> Result<CoverageReport> {
    CoverageEvaluator::new(model.clone(), CoverageOptions::default().with_mode(mode))?.coverage(AssociationPolicy::MaxPower)
}

/// Policy 2 report for `model` at its own distance threshold.
pub fn coverage_policy2(model: &Model, mode: IntraMode) -> Result<CoverageReport> {
    CoverageEvaluator::new(model.clone(), CoverageOptions::default().with_mode(mode))?.coverage(AssociationPolicy::Threshold)
}

/// Result of [`optimal_threshold`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub d_star: f64,
    pub coverage: f64,
    /// Total coverage at each grid point, in grid order.
    pub grid_coverage: Vec<f64>,
    pub refined: bool,
}

const GOLDEN_ITERATIONS: usize = 14;

/// Distance threshold maximising Policy 2 total coverage: grid argmax (ties
/// toward smaller D), then a golden-section pass between the grid neighbours
/// of an interior maximum.
pub fn optimal_threshold(evaluator: &CoverageEvaluator, d_grid: &[f64]) -> Result<ThresholdSearch> {
    if d_grid.is_empty() {
        return Err(Error::invalid("d_grid", "must not be empty"));
    }
    if !d_grid.windows(2).all(|w| w[1] > w[0]) || d_grid[0] <= 0.0 {
        return Err(Error::invalid("d_grid", "must be positive and strictly increasing"));
    }
    let cov = |d: f64| evaluator.coverage_with_threshold(d).map(|r| r.total_coverage);
    let grid_coverage = d_grid.iter().map(|&d| cov(d)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &c) in grid_coverage.iter().enumerate() {
        if c > grid_coverage[best] {
            best = i;
        }
    }
    let mut result = ThresholdSearch {
        d_star: d_grid[best],
        coverage: grid_coverage[best],
        grid_coverage,
        refined: false,
    };
    if best == 0 || best + 1 == d_grid.len() {
        return Ok(result);
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (d_grid[best - 1], d_grid[best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (cov(c)?, cov(d)?);
    for _ in 0..GOLDEN_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cov(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cov(d)?;
        }
    }
    let (d_ref, f_ref) = if fc >= fd { (c, fc) } else { (d, fd) };
    if f_ref > result.coverage {
        result.d_star = d_ref;
        result.coverage = f_ref;
        result.refined = true;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn throughput_arithmetic() {
        let p = NetworkParams::baseline();
        let t = throughput(&p, 0.4, 0.3, AssociationPolicy::MaxPower);
        assert!((t - (0.4 + 10.0 * 3.0 * 0.3)).abs() < 1e-12);
        assert_eq!(throughput(&p, 0.0, 0.0, AssociationPolicy::Threshold), 0.0);
    }

    #[test]
    fn classical_value() {
        assert!((classical_ppp_coverage(1.0) - 1.0 / (1.0 + PI / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn threshold_grid_validation() {
        let model = Model::thomas(NetworkParams::baseline()).unwrap();
        let ev = CoverageEvaluator::new(model, CoverageOptions::default()).unwrap();
        assert!(optimal_threshold(&ev, &[]).is_err());
        assert!(optimal_threshold(&ev, &[0.2, 0.1]).is_err());
    }
}
