//! Brute-force samplers for the individual distance laws and interference
//! transforms. Everything here is built from planar offsets and literal
//! rejection on the association event, never from the closed forms, so it
//! can serve as an independent check of the analytic layer.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use super::geometry::{path_gain, sample_ppp_disk};
use super::trial_rng;
use crate::activity::{active_count_weights, sample_from_weights};
use crate::error::{Error, Result};
use crate::kernel::ClusterKernel;
use crate::numerics::{GaussLegendre, MonotoneCubic};
use crate::params::{AssociationPolicy, NetworkParams, Tier};

/// Distance from the origin of a point drawn from `kernel` (the user-to-cluster-centre law).
pub fn sample_v0<R: Rng + ?Sized>(kernel: &ClusterKernel, rng: &mut R) -> f64 {
    let (a, b) = kernel.sample_offset(rng);
    a.hypot(b)
}

/// Distance from the origin to a cluster member when the centre sits at `(nu0, 0)`.
pub fn sample_member_distance<R: Rng + ?Sized>(kernel: &ClusterKernel, nu0: f64, rng: &mut R) -> f64 {
    let (a, b) = kernel.sample_offset(rng);
    (nu0 + a).hypot(b)
}

pub fn sample_nearest_sbs_distance<R: Rng + ?Sized>(kernel: &ClusterKernel, nu0: f64, n: u32, rng: &mut R) -> f64 {
    (0..n).map(|_| sample_member_distance(kernel, nu0, rng)).fold(f64::INFINITY, f64::min)
}

/// Nearest point of a PPP drawn on a disk; infinite if the disk is empty.
pub fn sample_nearest_macro_distance<R: Rng + ?Sized>(lambda: f64, window: f64, rng: &mut R) -> f64 {
    let mut pts = Vec::new();
    sample_ppp_disk(lambda, window, rng, &mut pts);
    pts.iter().map(|&(x, y)| x.hypot(y)).fold(f64::INFINITY, f64::min)
}

/// Draws one association outcome for a user whose cluster centre sits at
/// distance `nu0`: returns the serving tier and serving distance.
pub fn sample_association<R: Rng + ?Sized>(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    nu0: f64,
    macro_window: f64,
    rng: &mut R,
) -> (Tier, f64) {
    let rs = sample_nearest_sbs_distance(kernel, nu0, params.n_s0(), rng);
    let rm = sample_nearest_macro_distance(params.lambda_m(), macro_window, rng);
    let small = match policy {
        AssociationPolicy::MaxPower => rs < params.xi_sm() * rm,
        AssociationPolicy::Threshold => rs <= params.distance_threshold(),
    };
    if small {
        (Tier::Small, rs)
    } else {
        (Tier::Macro, rm)
    }
}

/// Distances of the representative cluster's non-serving SBSs given that
/// the user associates with `tier` at serving distance `x`.
///
/// Macro-served: all `n_s0` members, rejected jointly until every one lies
/// beyond the exclusion radius implied by the policy. Small-served: the
/// serving SBS sits at `x`, so the remaining `n_s0 - 1` members are
/// rejected jointly until they all lie beyond `x`.
#[allow(clippy::too_many_arguments)]
pub fn sample_conditioned_members<R: Rng + ?Sized>(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    tier: Tier,
    nu0: f64,
    x: f64,
    max_attempts: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let (count, e) = match (policy, tier) {
        (AssociationPolicy::MaxPower, Tier::Macro) => (params.n_s0(), params.xi_sm() * x),
        (AssociationPolicy::Threshold, Tier::Macro) => (params.n_s0(), params.distance_threshold()),
        (_, Tier::Small) => (params.n_s0() - 1, x),
    };
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..max_attempts {
        out.clear();
        for _ in 0..count {
            let u = sample_member_distance(kernel, nu0, rng);
            if u <= e {
                break;
            }
            out.push(u);
        }
        if out.len() == count as usize {
            return Ok(out);
        }
    }
    Err(Error::Simulation(format!(
        "conditioning event ({policy} {tier}, nu0 = {nu0}, x = {x}) not hit in {max_attempts} attempts"
    )))
}

/// Sample mean of `exp(-s I)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceEstimate {
    pub s: f64,
    pub mean: f64,
    pub standard_error: f64,
}

struct Accumulator {
    s: Vec<f64>,
    sum: Vec<f64>,
    sum2: Vec<f64>,
    n: u64,
}

impl Accumulator {
    fn new(s: &[f64]) -> Self {
        Self { s: s.to_vec(), sum: vec![0.0; s.len()], sum2: vec![0.0; s.len()], n: 0 }
    }

    fn push(&mut self, interference: f64) {
        for (i, &s) in self.s.iter().enumerate() {
            let v = (-s * interference).exp();
            self.sum[i] += v;
            self.sum2[i] += v * v;
        }
        self.n += 1;
    }

    fn finish(self) -> Vec<LaplaceEstimate> {
        let n = self.n as f64;
        self.s
            .iter()
            .zip(self.sum.iter().zip(&self.sum2))
            .map(|(&s, (&a, &b))| {
                let mean = a / n;
                let var = ((b / n - mean * mean) * n / (n - 1.0)).max(0.0);
                LaplaceEstimate { s, mean, standard_error: (var / n).sqrt() }
            })
            .collect()
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    Ok(())
}

/// Empirical transform of the intra-cluster interference seen by a user with
/// centre distance `nu0` served by `tier` at distance `x`. The active count
/// follows the truncated law of the representative cluster (shifted by one
/// when the serving SBS is a member), so this targets the exact sum.
#[allow(clippy::too_many_arguments)]
pub fn empirical_intra_laplace(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    policy: AssociationPolicy,
    tier: Tier,
    nu0: f64,
    x: f64,
    s_values: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<LaplaceEstimate>> {
    check_samples(samples)?;
    let mut rng = trial_rng(seed, 0);
    let small = tier == Tier::Small;
    let weights = active_count_weights(params.nbar_as(), params.n_s0(), small);
    let mut acc = Accumulator::new(s_values);
    for _ in 0..samples {
        let members = sample_conditioned_members(params, kernel, policy, tier, nu0, x, 1_000_000, &mut rng)?;
        let active = sample_from_weights(&weights, &mut rng) as usize;
        let interferers = if small { active.saturating_sub(1) } else { active };
        // members are exchangeable, so the first `interferers` form a uniform subset
        let i: f64 = members[..interferers]
            .iter()
            .map(|&w| {
                let h: f64 = Exp1.sample(&mut rng);
                h * params.p_s() * path_gain(w * w, params.alpha())
            })
            .sum();
        acc.push(i);
    }
    Ok(acc.finish())
}

/// Empirical transform of the interference from all other clusters, with
/// parents drawn on a disk of radius `window` around the user.
pub fn empirical_inter_laplace(
    params: &NetworkParams,
    kernel: &ClusterKernel,
    window: f64,
    s_values: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<LaplaceEstimate>> {
    check_samples(samples)?;
    let mut rng = trial_rng(seed, 0);
    let poisson = if params.nbar_as() > 0.0 {
        Some(Poisson::new(params.nbar_as()).map_err(|e| Error::Simulation(e.to_string()))?)
    } else {
        None
    };
    let mut parents = Vec::new();
    let mut acc = Accumulator::new(s_values);
    for _ in 0..samples {
        parents.clear();
        sample_ppp_disk(params.lambda_p(), window, &mut rng, &mut parents);
        let mut i = 0.0;
        for &(px, py) in &parents {
            let k = poisson.as_ref().map_or(0, |d| d.sample(&mut rng) as u64);
            for _ in 0..k {
                let (a, b) = kernel.sample_offset(&mut rng);
                let (x, y) = (px + a, py + b);
                let h: f64 = Exp1.sample(&mut rng);
                i += h * params.p_s() * path_gain(x * x + y * y, params.alpha());
            }
        }
        acc.push(i);
    }
    Ok(acc.finish())
}

/// Empirical transform of the macro-tier interference. Macros are drawn on a
/// disk of radius `window`; those closer than the exclusion radius implied by
/// the policy (for the serving distance `x`) are discarded, which is the
/// conditional law of the rest of a PPP given its nearest point.
#[allow(clippy::too_many_arguments)]
pub fn empirical_macro_laplace(
    params: &NetworkParams,
    policy: AssociationPolicy,
    tier: Tier,
    x: f64,
    window: f64,
    s_values: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<LaplaceEstimate>> {
    check_samples(samples)?;
    let lower = match (policy, tier) {
        (AssociationPolicy::Threshold, Tier::Small) => 0.0,
        (_, Tier::Macro) => x,
        (AssociationPolicy::MaxPower, Tier::Small) => params.xi_ms() * x,
    };
    let mut rng = trial_rng(seed, 0);
    let mut pts = Vec::new();
    let mut acc = Accumulator::new(s_values);
    for _ in 0..samples {
        pts.clear();
        sample_ppp_disk(params.lambda_m(), window, &mut rng, &mut pts);
        let mut i = 0.0;
        for &(a, b) in &pts {
            let d2 = a * a + b * b;
            if d2 <= lower * lower {
                continue;
            }
            let h: f64 = Exp1.sample(&mut rng);
            i += h * params.p_m() * path_gain(d2, params.alpha());
        }
        acc.push(i);
    }
    Ok(acc.finish())
}

/// CDF tabulated from a density on `[lo, hi]` (Gauss–Legendre per segment,
/// monotone cubic between knots), used as the reference law in KS tests.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    curve: MonotoneCubic,
    lo: f64,
    hi: f64,
    mass: f64,
}

impl TabulatedCdf {
    pub fn from_pdf(pdf: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, segments: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) || segments == 0 {
            return Err(Error::Domain(format!("bad tabulation range [{lo}, {hi}] with {segments} segments")));
        }
        let gl = GaussLegendre::new(8);
        let h = (hi - lo) / segments as f64;
        let mut xs = Vec::with_capacity(segments + 1);
        let mut cs = Vec::with_capacity(segments + 1);
        let mut acc = 0.0;
        xs.push(lo);
        cs.push(0.0);
        for k in 0..segments {
            let (a, b) = (lo + k as f64 * h, lo + (k + 1) as f64 * h);
            for (t, w) in gl.on_interval(a, b) {
                acc += w * pdf(t)?;
            }
            xs.push(b);
            cs.push(acc);
        }
        if !(acc.is_finite() && acc > 0.0) {
            return Err(Error::Domain(format!("density has no mass on [{lo}, {hi}]")));
        }
        cs.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { curve: MonotoneCubic::new(xs, cs), lo, hi, mass: acc })
    }

    /// Integral of the density before normalisation.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            0.0
        } else if x >= self.hi {
            1.0
        } else {
            self.curve.eval(x).clamp(0.0, 1.0)
        }
    }
}
