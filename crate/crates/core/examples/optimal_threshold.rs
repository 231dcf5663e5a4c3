//! Policy 2 coverage as a function of the distance threshold D, and the
//! optimal D for several activity levels.

use hetnet_pcp::coverage::{optimal_threshold, CoverageEvaluator, CoverageOptions};
use hetnet_pcp::{Model, NetworkParams};

fn main() -> hetnet_pcp::Result<()> {
    let grid: Vec<f64> = (0..13).map(|i| 0.01 * 1.3f64.powi(i)).collect();
    for nbar in [1.0, 4.0, 7.0] {
        let params = NetworkParams::baseline().with(|r| r.nbar_as = nbar)?;
        let evaluator = CoverageEvaluator::new(Model::thomas(params)?, CoverageOptions::default())?;
        let search = optimal_threshold(&evaluator, &grid)?;
        let curve: Vec<String> = grid
            .iter()
            .zip(&search.grid_coverage)
            .map(|(d, c)| format!("{:.0}m:{c:.4}", d * 1e3))
            .collect();
        println!("n̄_as = {nbar}: {}", curve.join(" "));
        println!("  D* = {:.1} m, coverage {:.4} (refined: {})", search.d_star * 1e3, search.coverage, search.refined);
    }
    Ok(())
}
