use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{path_gain, sample_ppp_disk};
use super::realization::{active_poisson, sample_into, NetworkRealization};
use super::{derive_seed, trial_rng, SimConfig};
use crate::association::exclusion_radius;
use crate::coverage::{throughput, CoverageReport, PerTier, Provenance};
use crate::error::{Error, Result};
use crate::params::{AssociationPolicy, Model, Tier};
use crate::stats::wilson_half_width;

// Relative slack on exclusion-zone comparisons (squared distances).
const EXCLUSION_SLACK: f64 = 1e-12;
/// Ring share of the mean interference above which the window is reported as too small.
pub const WINDOW_WARN_FRACTION: f64 = 1e-3;
const WINDOW_CHECK_REALIZATIONS: u64 = 256;

/// Signal and interference at the typical user for one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirSample {
    pub tier: Tier,
    pub serving_distance: f64,
    pub signal: f64,
    pub macro_interference: f64,
    pub intra_interference: f64,
    pub inter_interference: f64,
}

impl SirSample {
    pub fn interference(&self) -> f64 {
        self.macro_interference + self.intra_interference + self.inter_interference
    }

    pub fn sir(&self) -> f64 {
        let i = self.interference();
        if i == 0.0 {
            f64::INFINITY
        } else {
            self.signal / i
        }
    }
}

#[inline]
fn fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

fn exclusion_violation(what: &str, d2: f64, limit: f64) -> Error {
    Error::Simulation(format!(
        "association bug: {what} at {:.6} km lies inside the exclusion radius {limit:.6} km",
        d2.sqrt()
    ))
}

/// Draws unit-mean exponential fading for every link and sums the three
/// interference fields. Fails if an open-access interferer sits inside the
/// exclusion zone implied by the association decision.
pub fn evaluate_sir<R: Rng + ?Sized>(
    r: &NetworkRealization,
    model: &Model,
    policy: AssociationPolicy,
    rng: &mut R,
) -> Result<SirSample> {
    let p = &model.params;
    let alpha = p.alpha();
    let serving = r.serving.ok_or_else(|| Error::Simulation("realization has no serving BS".into()))?;
    let x = serving.distance;
    let tier = serving.tier;
    let signal = p.power(tier) * fading(rng) * path_gain(x * x, alpha);

    // macro tier: under Policy 1 a small-served user has no macro within ξ_ms x
    let macro_floor = match (policy, tier) {
        (AssociationPolicy::MaxPower, Tier::Small) => p.xi_ms() * x,
        (_, Tier::Macro) => x,
        (AssociationPolicy::Threshold, Tier::Small) => 0.0,
    };
    let macro_floor2 = macro_floor * macro_floor * (1.0 - EXCLUSION_SLACK);
    let mut i_macro = 0.0;
    for (i, &d2) in r.macro_distances2().iter().enumerate() {
        if tier == Tier::Macro && i == serving.index {
            continue;
        }
        if d2 < macro_floor2 {
            return Err(exclusion_violation("a macro BS", d2, macro_floor));
        }
        i_macro += fading(rng) * path_gain(d2, alpha);
    }

    let e = exclusion_radius(p, policy, tier, x);
    let e2 = e * e * (1.0 - EXCLUSION_SLACK);
    let rep = r.representative_distances2();
    let mut i_intra = 0.0;
    for &j in &r.representative_active {
        if tier == Tier::Small && j == serving.index {
            continue;
        }
        let d2 = rep[j];
        if d2 < e2 {
            return Err(exclusion_violation("an open-access SBS", d2, e));
        }
        i_intra += fading(rng) * path_gain(d2, alpha);
    }

    let mut i_inter = 0.0;
    for (a, b) in r.other_cluster_positions() {
        i_inter += fading(rng) * path_gain(a * a + b * b, alpha);
    }

    Ok(SirSample {
        tier,
        serving_distance: x,
        signal,
        macro_interference: p.p_m() * i_macro,
        intra_interference: p.p_s() * i_intra,
        inter_interference: p.p_s() * i_inter,
    })
}

fn policy_seed(seed: u64, policy: AssociationPolicy) -> u64 {
    derive_seed(seed, policy as u64)
}

fn chunks(sim: &SimConfig) -> Vec<(u64, u64)> {
    (0..sim.trials.div_ceil(sim.batch_size))
        .map(|c| (c * sim.batch_size, ((c + 1) * sim.batch_size).min(sim.trials)))
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    assoc: [u64; 2],
    covered: [u64; 2],
}

fn tier_slot(t: Tier) -> usize {
    match t {
        Tier::Macro => 0,
        Tier::Small => 1,
    }
}

/// Estimates per-tier coverage by simulating `sim.trials` independent networks.
pub fn simulate_coverage(model: &Model, policy: AssociationPolicy, sim: &SimConfig) -> Result<CoverageReport> {
    sim.validate()?;
    let check = window_check(model, sim)?;
    if check.exceeds(WINDOW_WARN_FRACTION) {
        log::warn!(
            "simulation window may be too small: outer ring carries {:.2e} (macro) and {:.2e} (clusters) of the mean interference",
            check.macro_ring_fraction,
            check.cluster_ring_fraction
        );
    }

    let seed = policy_seed(sim.seed, policy);
    let beta = model.params.beta();
    let poisson = active_poisson(model.params.nbar_as());
    let parts = chunks(sim)
        .into_par_iter()
        .map(|(start, end)| {
            let mut buf = NetworkRealization::default();
            let mut c = Counts::default();
            for t in start..end {
                let mut rng = trial_rng(seed, t);
                sample_into(&mut buf, model, policy, sim, None, poisson.as_ref(), &mut rng)?;
                let s = evaluate_sir(&buf, model, policy, &mut rng)?;
                let k = tier_slot(s.tier);
                c.assoc[k] += 1;
                if s.sir() > beta {
                    c.covered[k] += 1;
                }
            }
            Ok(c)
        })
        .collect::<Result<Vec<Counts>>>()?;
    let total = parts.iter().fold(Counts::default(), |mut acc, c| {
        for k in 0..2 {
            acc.assoc[k] += c.assoc[k];
            acc.covered[k] += c.covered[k];
        }
        acc
    });

    let n = sim.trials;
    let frac = |k: u64| k as f64 / n as f64;
    let per_tier = PerTier { macro_tier: frac(total.covered[0]), small_tier: frac(total.covered[1]) };
    let covered_all = total.covered[0] + total.covered[1];
    Ok(CoverageReport {
        policy,
        per_tier_coverage: per_tier,
        total_coverage: frac(covered_all),
        assoc_prob_avg: PerTier { macro_tier: frac(total.assoc[0]), small_tier: frac(total.assoc[1]) },
        throughput: throughput(&model.params, per_tier.macro_tier, per_tier.small_tier, policy),
        provenance: Provenance::Simulated {
            trials: n,
            half_width_95: wilson_half_width(covered_all, n),
            tier_half_width_95: PerTier {
                macro_tier: wilson_half_width(total.covered[0], n),
                small_tier: wilson_half_width(total.covered[1], n),
            },
        },
    })
}

/// Per-trial summary kept by [`simulate_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub v0: f64,
    pub tier: Tier,
    pub serving_distance: f64,
    pub nearest_macro: f64,
    pub nearest_sbs: f64,
    pub active_count: u32,
    pub sir: f64,
}

/// Runs the same trials as [`simulate_coverage`] (or with the user's offset
/// from its cluster centre pinned to `fixed_v0`) and keeps per-trial records.
pub fn simulate_trace(
    model: &Model,
    policy: AssociationPolicy,
    sim: &SimConfig,
    fixed_v0: Option<f64>,
) -> Result<Vec<TrialRecord>> {
    sim.validate()?;
    let seed = policy_seed(sim.seed, policy);
    let poisson = active_poisson(model.params.nbar_as());
    let parts = chunks(sim)
        .into_par_iter()
        .map(|(start, end)| {
            let mut buf = NetworkRealization::default();
            let mut out = Vec::with_capacity((end - start) as usize);
            for t in start..end {
                let mut rng = trial_rng(seed, t);
                sample_into(&mut buf, model, policy, sim, fixed_v0, poisson.as_ref(), &mut rng)?;
                let s = evaluate_sir(&buf, model, policy, &mut rng)?;
                out.push(TrialRecord {
                    v0: buf.representative_center.0,
                    tier: s.tier,
                    serving_distance: s.serving_distance,
                    nearest_macro: buf.nearest_macro_distance(),
                    nearest_sbs: buf.nearest_sbs_distance(),
                    active_count: buf.representative_active_count() as u32,
                    sir: s.sir(),
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Median (over realizations) share of the interference contributed by the
/// ring between the configured window and a window of twice the radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub macro_ring_fraction: f64,
    pub cluster_ring_fraction: f64,
    pub realizations: u64,
}

impl WindowCheck {
    pub fn exceeds(&self, limit: f64) -> bool {
        self.macro_ring_fraction > limit || self.cluster_ring_fraction > limit
    }
}

/// Doubling-window spot check: samples macro and cluster fields on disks of
/// twice the configured radii and measures how much of the interference
/// (fading averaged out, nearest macro excluded) comes from the outer ring.
/// Medians are used because near-field terms make the mean heavy-tailed.
pub fn window_check(model: &Model, sim: &SimConfig) -> Result<WindowCheck> {
    let p = &model.params;
    let alpha = p.alpha();
    let (rm, rc) = (sim.macro_window_radius, sim.window_radius);
    let poisson = active_poisson(p.nbar_as());
    let seed = derive_seed(sim.seed, u64::MAX);
    let mut macros = Vec::new();
    let mut parents = Vec::new();
    let mut fm = Vec::with_capacity(WINDOW_CHECK_REALIZATIONS as usize);
    let mut fc = Vec::with_capacity(WINDOW_CHECK_REALIZATIONS as usize);
    for t in 0..WINDOW_CHECK_REALIZATIONS {
        let (mut total, mut ring_m, mut ring_c) = (0.0, 0.0, 0.0);
        let mut rng = trial_rng(seed, t);
        macros.clear();
        parents.clear();
        sample_ppp_disk(p.lambda_m(), 2.0 * rm, &mut rng, &mut macros);
        sample_ppp_disk(p.lambda_p(), 2.0 * rc, &mut rng, &mut parents);
        let d2: Vec<f64> = macros.iter().map(|&(x, y)| x * x + y * y).collect();
        let nearest = d2.iter().cloned().fold(f64::INFINITY, f64::min);
        for &d in &d2 {
            if d == nearest {
                continue;
            }
            let g = p.p_m() * path_gain(d, alpha);
            total += g;
            if d > rm * rm {
                ring_m += g;
            }
        }
        for &(px, py) in &parents {
            let outer = px * px + py * py > rc * rc;
            let k = poisson.as_ref().map_or(0, |d| rand_distr::Distribution::sample(d, &mut rng) as usize);
            for _ in 0..k {
                let (a, b) = model.sbs_kernel.sample_offset(&mut rng);
                let (x, y) = (px + a, py + b);
                let g = p.p_s() * path_gain(x * x + y * y, alpha);
                total += g;
                if outer {
                    ring_c += g;
                }
            }
        }
        let frac = |v: f64| if total > 0.0 { v / total } else { 0.0 };
        fm.push(frac(ring_m));
        fc.push(frac(ring_c));
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    Ok(WindowCheck {
        macro_ring_fraction: median(&mut fm),
        cluster_ring_fraction: median(&mut fc),
        realizations: WINDOW_CHECK_REALIZATIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NetworkParams;

    fn small_sim(trials: u64) -> SimConfig {
        SimConfig { trials, batch_size: 97, ..SimConfig::default() }
    }

    #[test]
    fn deterministic_and_batch_independent() {
        let model = Model::thomas(NetworkParams::baseline()).unwrap();
        let a = simulate_coverage(&model, AssociationPolicy::MaxPower, &small_sim(500)).unwrap();
        let b = simulate_coverage(&model, AssociationPolicy::MaxPower, &small_sim(500)).unwrap();
        let c = simulate_coverage(&model, AssociationPolicy::MaxPower, &SimConfig { batch_size: 13, ..small_sim(500) }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!((a.total_coverage - a.per_tier_coverage.sum()).abs() < 1e-15);
        match a.provenance {
            Provenance::Simulated { trials, half_width_95, .. } => {
                assert_eq!(trials, 500);
                assert!(half_width_95.is_finite() && half_width_95 > 0.0);
            }
            _ => panic!("wrong provenance"),
        }
    }

    #[test]
    fn vanishing_threshold_covers_everyone() {
        let params = NetworkParams::baseline().with(|r| r.beta = 1e-9).unwrap();
        let model = Model::thomas(params).unwrap();
        let r = simulate_coverage(&model, AssociationPolicy::Threshold, &small_sim(300)).unwrap();
        assert_eq!(r.total_coverage, 1.0);
    }

    #[test]
    fn trace_matches_coverage_run() {
        let model = Model::thomas(NetworkParams::baseline()).unwrap();
        let sim = small_sim(300);
        let report = simulate_coverage(&model, AssociationPolicy::Threshold, &sim).unwrap();
        let trace = simulate_trace(&model, AssociationPolicy::Threshold, &sim, None).unwrap();
        let covered = trace.iter().filter(|t| t.sir > model.params.beta()).count();
        assert!((covered as f64 / 300.0 - report.total_coverage).abs() < 1e-15);
        let d = model.params.distance_threshold();
        for t in &trace {
            assert_eq!(t.tier == Tier::Small, t.nearest_sbs <= d);
        }
    }

    #[test]
    fn default_windows_pass_the_spot_check() {
        let model = Model::thomas(NetworkParams::baseline()).unwrap();
        let check = window_check(&model, &SimConfig::default()).unwrap();
        assert!(!check.exceeds(WINDOW_WARN_FRACTION), "{check:?}");
        let tiny = SimConfig { macro_window_radius: 1.0, ..SimConfig::default() };
        assert!(window_check(&model, &tiny).unwrap().exceeds(WINDOW_WARN_FRACTION));
    }
}
