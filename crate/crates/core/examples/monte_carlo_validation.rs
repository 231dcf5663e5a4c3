//! Analytic coverage next to the Monte Carlo estimate, per policy.
//!
//! `cargo run --release --example monte_carlo_validation -- [trials] [nbar] [sigma_km] [exact]`

use std::time::Instant;

use hetnet_pcp::coverage::{CoverageEvaluator, CoverageOptions};
use hetnet_pcp::laplace::IntraMode;
use hetnet_pcp::montecarlo::{simulate_coverage, SimConfig};
use hetnet_pcp::{AssociationPolicy, Model, NetworkParams};

fn main() -> hetnet_pcp::Result<()> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let exact = raw.iter().any(|a| a == "exact");
    let args: Vec<f64> = raw.iter().filter_map(|a| a.parse().ok()).collect();
    let trials = args.first().copied().unwrap_or(20_000.0) as u64;
    let nbar = args.get(1).copied().unwrap_or(3.0);
    let sigma = args.get(2).copied().unwrap_or(0.04);
    let params = NetworkParams::baseline().with(|r| {
        r.nbar_as = nbar;
        r.sigma_s = sigma;
        r.sigma_u = sigma;
    })?;
    let model = Model::thomas(params)?;
    let mode = if exact { IntraMode::ExactTruncatedSum } else { IntraMode::SimplifiedExponential };
    let evaluator = CoverageEvaluator::new(model.clone(), CoverageOptions::default().with_mode(mode))?;
    let sim = SimConfig { trials, ..SimConfig::default() };
    for policy in AssociationPolicy::BOTH {
        let analytic = evaluator.coverage(policy)?;
        let t = Instant::now();
        let simulated = simulate_coverage(&model, policy, &sim)?;
        let hw = simulated.provenance.half_width(None).unwrap_or(f64::NAN);
        println!(
            "{policy}: analytic {:.4} (m {:.4}, s {:.4})  simulated {:.4} ± {:.4} (m {:.4}, s {:.4})  Δ = {:+.4}  [{:.1?}]",
            analytic.total_coverage,
            analytic.per_tier_coverage.macro_tier,
            analytic.per_tier_coverage.small_tier,
            simulated.total_coverage,
            hw,
            simulated.per_tier_coverage.macro_tier,
            simulated.per_tier_coverage.small_tier,
            simulated.total_coverage - analytic.total_coverage,
            t.elapsed()
        );
    }
    Ok(())
}
