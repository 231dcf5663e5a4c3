use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::geometry::sample_ppp_disk;
use super::SimConfig;
use crate::activity::{active_count_weights, sample_from_weights};
use crate::error::Result;
use crate::params::{AssociationPolicy, Model, Tier};

/// Which base station serves the typical user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Serving {
    pub tier: Tier,
    /// Index into `macro_points` or `representative_sbs_offsets`.
    pub index: usize,
    /// Serving distance (km).
    pub distance: f64,
}

/// One sampled network around the typical user at the origin.
///
/// Fading is not stored; it is drawn per link when the SIR is evaluated.
#[derive(Debug, Clone, Default)]
pub struct NetworkRealization {
    pub macro_points: Vec<(f64, f64)>,
    pub parent_points: Vec<(f64, f64)>,
    /// Centre of the user's own cluster, at distance V0 from the origin.
    pub representative_center: (f64, f64),
    /// Offsets of all `n_s0` SBSs of the representative cluster from its centre.
    pub representative_sbs_offsets: Vec<(f64, f64)>,
    /// Indices of the active representative SBSs (the serving SBS included).
    pub representative_active: Vec<usize>,
    pub serving: Option<Serving>,
    /// Offsets of the active SBSs of every other cluster, concatenated.
    other_offsets: Vec<(f64, f64)>,
    /// `other_offsets[other_ranges[i]..other_ranges[i + 1]]` belong to parent `i`.
    other_ranges: Vec<usize>,
    rep_dist2: Vec<f64>,
    macro_dist2: Vec<f64>,
    scratch: Vec<usize>,
}

impl NetworkRealization {
    pub fn representative_active_count(&self) -> usize {
        self.representative_active.len()
    }

    /// Active SBS offsets of the `i`-th non-representative cluster.
    pub fn other_cluster_active_offsets(&self, i: usize) -> &[(f64, f64)] {
        &self.other_offsets[self.other_ranges[i]..self.other_ranges[i + 1]]
    }

    /// Absolute positions of every active SBS outside the representative cluster.
    pub fn other_cluster_positions(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.parent_points.len()).flat_map(move |i| {
            let (px, py) = self.parent_points[i];
            self.other_cluster_active_offsets(i).iter().map(move |&(a, b)| (px + a, py + b))
        })
    }

    /// Squared distances from the origin to the representative SBSs.
    pub fn representative_distances2(&self) -> &[f64] {
        &self.rep_dist2
    }

    /// Squared distances from the origin to the macro BSs.
    pub fn macro_distances2(&self) -> &[f64] {
        &self.macro_dist2
    }

    pub fn nearest_macro_distance(&self) -> f64 {
        self.macro_dist2.iter().cloned().fold(f64::INFINITY, f64::min).sqrt()
    }

    pub fn nearest_sbs_distance(&self) -> f64 {
        self.rep_dist2.iter().cloned().fold(f64::INFINITY, f64::min).sqrt()
    }

    fn clear(&mut self) {
        self.macro_points.clear();
        self.parent_points.clear();
        self.representative_sbs_offsets.clear();
        self.representative_active.clear();
        self.serving = None;
        self.other_offsets.clear();
        self.other_ranges.clear();
        self.rep_dist2.clear();
        self.macro_dist2.clear();
    }
}

/// Draws one realization and applies `policy`.
pub fn sample_realization<R: Rng + ?Sized>(
    model: &Model,
    policy: AssociationPolicy,
    sim: &SimConfig,
    rng: &mut R,
) -> Result<NetworkRealization> {
    let mut out = NetworkRealization::default();
    let poisson = active_poisson(model.params.nbar_as());
    sample_into(&mut out, model, policy, sim, None, poisson.as_ref(), rng)?;
    Ok(out)
}

pub(crate) fn active_poisson(nbar: f64) -> Option<Poisson<f64>> {
    (nbar > 0.0).then(|| Poisson::new(nbar).expect("positive finite mean"))
}

/// Refills `out` in place. `fixed_v0` pins the user's offset from its
/// cluster centre instead of drawing it.
pub(crate) fn sample_into<R: Rng + ?Sized>(
    out: &mut NetworkRealization,
    model: &Model,
    policy: AssociationPolicy,
    sim: &SimConfig,
    fixed_v0: Option<f64>,
    active: Option<&Poisson<f64>>,
    rng: &mut R,
) -> Result<()> {
    let p = &model.params;
    out.clear();

    // the user's own cluster: centre at distance V0, exactly n_s0 SBSs
    let v0 = match fixed_v0 {
        Some(v) => v,
        None => {
            let (a, b) = model.user_kernel.sample_offset(rng);
            a.hypot(b)
        }
    };
    out.representative_center = (v0, 0.0);
    for _ in 0..p.n_s0() {
        let (a, b) = model.sbs_kernel.sample_offset(rng);
        out.representative_sbs_offsets.push((a, b));
        let (x, y) = (v0 + a, b);
        out.rep_dist2.push(x * x + y * y);
    }

    sample_ppp_disk(p.lambda_m(), sim.macro_window_radius, rng, &mut out.macro_points);
    out.macro_dist2.extend(out.macro_points.iter().map(|&(x, y)| x * x + y * y));

    // other clusters: Poisson(n̄_as) active SBSs each, offsets not clipped to the window
    sample_ppp_disk(p.lambda_p(), sim.window_radius, rng, &mut out.parent_points);
    out.other_ranges.push(0);
    for _ in 0..out.parent_points.len() {
        let k = active.map_or(0, |d| d.sample(rng) as usize);
        for _ in 0..k {
            let off = model.sbs_kernel.sample_offset(rng);
            out.other_offsets.push(off);
        }
        out.other_ranges.push(out.other_offsets.len());
    }

    // association
    let (m_idx, m_d2) = argmin(&out.macro_dist2);
    let (s_idx, s_d2) = argmin(&out.rep_dist2);
    let (r_m, r_s) = (m_d2.sqrt(), s_d2.sqrt());
    let small = match policy {
        AssociationPolicy::MaxPower => r_s < p.xi_sm() * r_m,
        AssociationPolicy::Threshold => r_s <= p.distance_threshold(),
    };
    let serving = if small {
        Serving { tier: Tier::Small, index: s_idx, distance: r_s }
    } else {
        Serving { tier: Tier::Macro, index: m_idx, distance: r_m }
    };
    out.serving = Some(serving);

    // active subset of the representative cluster
    let n = p.n_s0() as usize;
    let weights = active_count_weights(p.nbar_as(), p.n_s0(), small);
    let count = sample_from_weights(&weights, rng) as usize;
    out.scratch.clear();
    out.scratch.extend(0..n);
    let first = if small {
        out.scratch.swap(0, s_idx);
        1
    } else {
        0
    };
    for i in first..count {
        let j = rng.random_range(i..n);
        out.scratch.swap(i, j);
    }
    out.representative_active.extend_from_slice(&out.scratch[..count]);
    Ok(())
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter()
        .enumerate()
        .fold((usize::MAX, f64::INFINITY), |best, (i, &d)| if d < best.1 { (i, d) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NetworkParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn representative_cluster_shape() {
        let model = Model::thomas(NetworkParams::baseline()).unwrap();
        let sim = SimConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for policy in AssociationPolicy::BOTH {
            for _ in 0..200 {
                let r = sample_realization(&model, policy, &sim, &mut rng).unwrap();
                assert_eq!(r.representative_sbs_offsets.len(), 10);
                let serving = r.serving.unwrap();
                let count = r.representative_active_count();
                assert!(count <= 10);
                match serving.tier {
                    Tier::Small => {
                        assert!(count >= 1);
                        assert!(r.representative_active.contains(&serving.index));
                    }
                    Tier::Macro => assert!((serving.distance - r.nearest_macro_distance()).abs() < 1e-15),
                }
                let mut seen = r.representative_active.clone();
                seen.sort_unstable();
                seen.dedup();
                assert_eq!(seen.len(), count);
                for &(x, y) in r.macro_points.iter().chain(&r.parent_points) {
                    assert!(x.hypot(y) <= sim.macro_window_radius);
                }
                assert!((r.representative_center.0.hypot(r.representative_center.1) - r.representative_center.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn other_clusters_are_listed_per_parent() {
        let model = Model::thomas(NetworkParams::baseline()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = sample_realization(&model, AssociationPolicy::MaxPower, &SimConfig::default(), &mut rng).unwrap();
        let total: usize = (0..r.parent_points.len()).map(|i| r.other_cluster_active_offsets(i).len()).sum();
        assert_eq!(total, r.other_cluster_positions().count());
        // about λ_p π R² n̄ = 10 π 9 3 ≈ 848 active SBSs
        assert!(total > 600 && total < 1100, "{total}");
    }
}
