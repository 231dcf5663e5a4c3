//! Distance laws of the clustered model: member distance to a typical user,
//! nearest SBS in the user's cluster, nearest macro BS, and a sampled check
//! of each.

use hetnet_pcp::association::{nearest_macro_law, nearest_sbs_cdf};
use hetnet_pcp::montecarlo::empirical::{sample_member_distance, sample_nearest_macro_distance, sample_nearest_sbs_distance};
use hetnet_pcp::montecarlo::trial_rng;
use hetnet_pcp::{Model, NetworkParams};

fn main() -> hetnet_pcp::Result<()> {
    let params = NetworkParams::baseline();
    let model = Model::thomas(params)?;
    let kernel = &model.sbs_kernel;
    let nu0 = 0.03; // user 30 m from its cluster centre
    let n = params.n_s0();
    let macro_law = nearest_macro_law(&params);

    let mut rng = trial_rng(7, 0);
    let samples = 50_000;
    let members: Vec<f64> = (0..samples).map(|_| sample_member_distance(kernel, nu0, &mut rng)).collect();
    let nearest: Vec<f64> = (0..samples).map(|_| sample_nearest_sbs_distance(kernel, nu0, n, &mut rng)).collect();
    let macros: Vec<f64> = (0..samples).map(|_| sample_nearest_macro_distance(params.lambda_m(), 5.0, &mut rng)).collect();
    let frac = |v: &[f64], r: f64| v.iter().filter(|&&d| d <= r).count() as f64 / v.len() as f64;

    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "r (km)", "F_U", "sampled", "F_Rs", "sampled", "F_Rm", "sampled");
    for r in [0.01, 0.02, 0.04, 0.08, 0.3, 0.6] {
        println!(
            "{r:>8} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            kernel.distance_cdf(r, nu0)?,
            frac(&members, r),
            nearest_sbs_cdf(&params, kernel, r, nu0)?,
            frac(&nearest, r),
            1.0 - macro_law.sf(r),
            frac(&macros, r)
        );
    }
    Ok(())
}
