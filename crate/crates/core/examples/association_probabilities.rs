//! Tier association probabilities for both policies: per user offset, and
//! how the Policy 2 split moves with the distance threshold.

use hetnet_pcp::association::assoc_prob;
use hetnet_pcp::{AssociationPolicy, Model, NetworkParams, Tier};

fn main() -> hetnet_pcp::Result<()> {
    let params = NetworkParams::baseline();
    let model = Model::thomas(params)?;
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "nu0 (km)", "P1 macro", "P1 small", "P2 macro", "P2 small");
    for nu0 in [0.0, 0.02, 0.04, 0.08, 0.16] {
        let a = |policy, tier| assoc_prob(&params, &model.sbs_kernel, policy, nu0, tier);
        println!(
            "{nu0:>10} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            a(AssociationPolicy::MaxPower, Tier::Macro)?,
            a(AssociationPolicy::MaxPower, Tier::Small)?,
            a(AssociationPolicy::Threshold, Tier::Macro)?,
            a(AssociationPolicy::Threshold, Tier::Small)?
        );
    }

    println!("\nPolicy 2 small-cell association at nu0 = 0.04 km:");
    for d in [0.01, 0.02, 0.05, 0.1, 0.2] {
        let p = params.with_distance_threshold(d)?;
        println!("  D = {d:>5} km: {:.5}", assoc_prob(&p, &model.sbs_kernel, AssociationPolicy::Threshold, 0.04, Tier::Small)?);
    }
    Ok(())
}
