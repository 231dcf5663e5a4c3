//! Cross-checks inside the analytic engine: cached vs direct inter-cluster
//! transform, simplified vs exact intra-cluster mode, and the single-tier limit.

use hetnet_pcp::coverage::{classical_ppp_coverage, CoverageEvaluator, CoverageOptions, InterCache, OuterRule};
use hetnet_pcp::laplace::{laplace_inter, IntraMode};
use hetnet_pcp::{AssociationPolicy, Model, NetworkParams};

#[test]
fn cached_inter_transform_matches_direct_evaluation() {
    for sigma in [0.02, 0.04] {
        let p = NetworkParams::baseline().with(|r| {
            r.sigma_s = sigma;
            r.sigma_u = sigma;
        }).unwrap();
        let model = Model::thomas(p).unwrap();
        let cache = InterCache::build(&p, &model).unwrap().expect("active SBSs");
        // off-knot points across nine decades around the coverage-relevant s
        for k in 0..37 {
            let s = 10f64.powf(-4.5 + 0.25 * k as f64) / p.p_s();
            let direct = laplace_inter(&p, &model.sbs_kernel, s).unwrap();
            let cached = (-cache.exponent(s)).exp();
            assert!((direct - cached).abs() < 1e-6, "sigma {sigma} s {s:e}: direct {direct} cached {cached}");
        }
    }
}

#[test]
fn coverage_with_and_without_inter_cache_agree() {
    let model = Model::thomas(NetworkParams::baseline()).unwrap();
    let cached = CoverageEvaluator::new(model.clone(), CoverageOptions::default()).unwrap();
    let direct = CoverageEvaluator::new(model, CoverageOptions { inter_cache: false, ..CoverageOptions::default() }).unwrap();
    // both policies read the inter-cluster transform the same way; one is enough
    let a = cached.coverage(AssociationPolicy::MaxPower).unwrap().total_coverage;
    let b = direct.coverage(AssociationPolicy::MaxPower).unwrap().total_coverage;
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn adaptive_outer_rule_confirms_fixed_rule() {
    let model = Model::thomas(NetworkParams::baseline()).unwrap();
    let fixed = CoverageEvaluator::new(model.clone(), CoverageOptions::default()).unwrap();
    let adaptive = fixed.with_options(CoverageOptions { outer: OuterRule::Adaptive, ..CoverageOptions::default() }).unwrap();
    let a = fixed.coverage(AssociationPolicy::MaxPower).unwrap().total_coverage;
    let b = adaptive.coverage(AssociationPolicy::MaxPower).unwrap().total_coverage;
    assert!((a - b).abs() < 1e-5, "{a} vs {b}");
}

#[test]
fn simplified_mode_tracks_exact_mode_for_sparse_activity() {
    // n̄ ≤ n_s0 / 3 is where the untruncated approximation is meant to hold
    let n_s0 = NetworkParams::baseline().n_s0() as f64;
    for nbar in [0.5, 1.0, 2.0, n_s0 / 3.0] {
        let p = NetworkParams::baseline().with(|r| r.nbar_as = nbar).unwrap();
        let simplified = CoverageEvaluator::new(Model::thomas(p).unwrap(), CoverageOptions::default()).unwrap();
        let exact = simplified.with_options(CoverageOptions::default().with_mode(IntraMode::ExactTruncatedSum)).unwrap();
        for policy in AssociationPolicy::BOTH {
            let a = simplified.coverage(policy).unwrap().total_coverage;
            let b = exact.coverage(policy).unwrap().total_coverage;
            assert!((a - b).abs() <= 0.01, "nbar {nbar} {policy}: {a} vs {b}");
        }
    }
}

#[test]
fn silent_small_cells_reduce_to_a_single_tier_ppp() {
    for beta_db in [-5.0f64, 0.0, 5.0] {
        let p = NetworkParams::baseline().with(|r| {
            r.p_s = 1e-30;
            r.nbar_as = 0.0;
            r.beta = 10f64.powf(beta_db / 10.0);
        }).unwrap();
        let ev = CoverageEvaluator::new(Model::thomas(p).unwrap(), CoverageOptions::default()).unwrap();
        let want = classical_ppp_coverage(p.beta());
        for policy in AssociationPolicy::BOTH {
            let got = ev.coverage(policy).unwrap().total_coverage;
            assert!((got - want).abs() < 1e-4, "{beta_db} dB {policy}: {got} vs {want}");
        }
    }
}
