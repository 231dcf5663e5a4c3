//! Property tests: special-function bounds, transform shape, association
//! bookkeeping and configuration round-trips.

use hetnet_pcp::association::assoc_prob;
use hetnet_pcp::cli::Config;
use hetnet_pcp::laplace::{laplace_intra, laplace_macro, IntraMode, LaplaceContext};
use hetnet_pcp::numerics::{marcum_q1, marcum_q1_complement};
use hetnet_pcp::{AssociationPolicy, Model, NetworkParams, Tier};
use proptest::prelude::*;

fn policy() -> impl Strategy<Value = AssociationPolicy> {
    prop_oneof![Just(AssociationPolicy::MaxPower), Just(AssociationPolicy::Threshold)]
}

fn tier() -> impl Strategy<Value = Tier> {
    prop_oneof![Just(Tier::Macro), Just(Tier::Small)]
}

fn mode() -> impl Strategy<Value = IntraMode> {
    prop_oneof![Just(IntraMode::ExactTruncatedSum), Just(IntraMode::SimplifiedExponential)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn marcum_is_a_survival_function(a in 0.0..25.0f64, b in 0.0..40.0f64, db in 0.0..5.0f64) {
        let q = marcum_q1(a, b).unwrap();
        let c = marcum_q1_complement(a, b).unwrap();
        prop_assert!((0.0..=1.0).contains(&q) && (0.0..=1.0).contains(&c));
        prop_assert!((q + c - 1.0).abs() < 1e-12);
        // decreasing in b, increasing in a
        prop_assert!(marcum_q1(a, b + db).unwrap() <= q + 1e-15);
        prop_assert!(marcum_q1(a + db, b).unwrap() >= q - 1e-15);
    }

    #[test]
    fn macro_transform_is_a_decreasing_probability(
        policy in policy(), tier in tier(), x in 0.01..1.0f64, s in 0.0..1e-5f64, k in 1.0..100.0f64,
    ) {
        let p = NetworkParams::baseline();
        let l1 = laplace_macro(&p, policy, tier, s, Some(x)).unwrap();
        let l2 = laplace_macro(&p, policy, tier, s * k, Some(x)).unwrap();
        prop_assert!(l1 > 0.0 && l1 <= 1.0);
        prop_assert!(l2 <= l1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn intra_transform_is_a_decreasing_probability(
        policy in policy(), tier in tier(), mode in mode(),
        nu0 in 0.0..0.12f64, x in 0.005..0.3f64, s in 0.0..1e-4f64, k in 1.0..100.0f64,
    ) {
        let p = NetworkParams::baseline();
        let model = Model::thomas(p).unwrap();
        let ctx = LaplaceContext { params: &p, kernel: &model.sbs_kernel, policy, tier, nu0, x: Some(x), mode };
        let l1 = laplace_intra(&ctx, s).unwrap();
        let l2 = laplace_intra(&ctx, s * k).unwrap();
        prop_assert!(l1 > 0.0 && l1 <= 1.0, "{l1}");
        prop_assert!(l2 <= l1 + 1e-12, "{l2} > {l1}");
    }

    #[test]
    fn association_probabilities_are_complementary(
        policy in policy(), nu0 in 0.0..0.3f64, sigma in 0.01..0.08f64, d in 0.005..0.3f64,
    ) {
        let p = NetworkParams::baseline().with(|r| { r.sigma_s = sigma; r.sigma_u = sigma; }).unwrap().with_distance_threshold(d).unwrap();
        let model = Model::thomas(p).unwrap();
        let m = assoc_prob(&p, &model.sbs_kernel, policy, nu0, Tier::Macro).unwrap();
        let s = assoc_prob(&p, &model.sbs_kernel, policy, nu0, Tier::Small).unwrap();
        prop_assert!((0.0..=1.0).contains(&m) && (0.0..=1.0).contains(&s));
        prop_assert!((m + s - 1.0).abs() < 1e-9, "{m} + {s}");
    }

    #[test]
    fn threshold_policy_small_share_grows_with_d(nu0 in 0.0..0.2f64, d in 0.005..0.3f64, k in 1.0..4.0f64) {
        let p = NetworkParams::baseline();
        let model = Model::thomas(p).unwrap();
        let a = |d: f64| {
            let q = p.with_distance_threshold(d).unwrap();
            assoc_prob(&q, &model.sbs_kernel, AssociationPolicy::Threshold, nu0, Tier::Small).unwrap()
        };
        prop_assert!(a(d * k) >= a(d) - 1e-12);
    }

    #[test]
    fn config_round_trips_through_toml(
        nbar in 0.0..9.0f64, sigma in 0.005..0.1f64, d in 0.005..0.5f64, beta_db in -10.0..10.0f64,
        lambda_m in 0.1..5.0f64, trials in 1u64..1_000_000, seed in any::<u64>(),
        values in prop::collection::vec(0.5..9.0f64, 1..6),
    ) {
        let text = format!(
            "format_version = 1\nnbar_as = {nbar:?}\nsigma_s_km = {sigma:?}\nsigma_u_km = {sigma:?}\nD_km = {d:?}\n\
             beta_db = {beta_db:?}\nlambda_m_per_km2 = {lambda_m:?}\ntrials = {trials}\nseed = {seed}\n\
             sweep_variable = \"nbar_as\"\nsweep_values = {values:?}\n"
        );
        let c = Config::parse(&text).unwrap();
        let again = Config::parse(&c.to_toml().unwrap()).unwrap();
        prop_assert_eq!(c, again);
    }
}
