//! Interference Laplace transforms of the three interferer populations,
//! analytic next to sampled estimates, for a macro-served Policy 1 user.

use hetnet_pcp::laplace::{laplace_inter, laplace_intra, laplace_macro, IntraMode, LaplaceContext};
use hetnet_pcp::montecarlo::empirical::{empirical_inter_laplace, empirical_intra_laplace, empirical_macro_laplace};
use hetnet_pcp::{AssociationPolicy, Model, NetworkParams, Tier};

fn main() -> hetnet_pcp::Result<()> {
    let params = NetworkParams::baseline();
    let model = Model::thomas(params)?;
    let kernel = &model.sbs_kernel;
    let (policy, tier) = (AssociationPolicy::MaxPower, Tier::Macro);
    let (nu0, x) = (0.03, 0.3);
    let ctx = LaplaceContext { params: &params, kernel, policy, tier, nu0, x: Some(x), mode: IntraMode::ExactTruncatedSum };

    // s as the coverage integrand builds it: beta x^alpha / P_m, and a few multiples
    let base = params.beta() * x.powf(params.alpha()) / params.p_m();
    let s: Vec<f64> = [0.1, 1.0, 10.0].iter().map(|k| k * base).collect();
    let intra = empirical_intra_laplace(&params, kernel, policy, tier, nu0, x, &s, 50_000, 1)?;
    let inter = empirical_inter_laplace(&params, kernel, 4.0, &s, 5_000, 2)?;
    let macros = empirical_macro_laplace(&params, policy, tier, x, 20.0, &s, 10_000, 3)?;

    println!("{:>10} {:>18} {:>18} {:>18}", "s/base", "intra", "inter", "macro");
    for (i, &si) in s.iter().enumerate() {
        let cell = |a: f64, e: &hetnet_pcp::montecarlo::empirical::LaplaceEstimate| format!("{a:.4} ({:.4}±{:.4})", e.mean, e.standard_error);
        println!(
            "{:>10} {:>18} {:>18} {:>18}",
            si / base,
            cell(laplace_intra(&ctx, si)?, &intra[i]),
            cell(laplace_inter(&params, kernel, si)?, &inter[i]),
            cell(laplace_macro(&params, policy, tier, si, Some(x))?, &macros[i])
        );
    }
    Ok(())
}
