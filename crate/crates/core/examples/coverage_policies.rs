//! Analytic coverage, association and throughput for both policies at the
//! baseline, plus the single-tier reduction check.

use std::time::Instant;

use hetnet_pcp::coverage::{classical_ppp_coverage, CoverageEvaluator, CoverageOptions};
use hetnet_pcp::{AssociationPolicy, Model, NetworkParams};

fn main() -> hetnet_pcp::Result<()> {
    let params = NetworkParams::baseline();
    let evaluator = CoverageEvaluator::new(Model::thomas(params)?, CoverageOptions::default())?;
    for policy in AssociationPolicy::BOTH {
        let t = Instant::now();
        let r = evaluator.coverage(policy)?;
        println!(
            "{policy}: Pc_m = {:.4}  Pc_s = {:.4}  total = {:.4}  A_m = {:.4}  A_s = {:.4}  T = {:.3}  ({:.2?})",
            r.per_tier_coverage.macro_tier,
            r.per_tier_coverage.small_tier,
            r.total_coverage,
            r.assoc_prob_avg.macro_tier,
            r.assoc_prob_avg.small_tier,
            r.throughput,
            t.elapsed()
        );
    }

    // silent small cells and no active SBSs: a plain PPP macro network
    let reduced = params.with(|r| {
        r.p_s = 1e-30;
        r.nbar_as = 0.0;
    })?;
    let r = CoverageEvaluator::new(Model::thomas(reduced)?, CoverageOptions::default())?.coverage(AssociationPolicy::MaxPower)?;
    println!(
        "single-tier reduction: {:.6} (closed form {:.6})",
        r.total_coverage,
        classical_ppp_coverage(reduced.beta())
    );
    Ok(())
}
