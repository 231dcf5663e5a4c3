//! A configured sweep written as CSV plus manifest, re-run from the
//! manifest, and turned into a plot script. Output goes to a temporary
//! directory unless a path is given.

use hetnet_pcp::cli::{run_sweep_with_progress, write_plot_script, Config, Figure, RunManifest};

const CONFIG: &str = r#"
format_version = 1
sweep_variable = "D_km"
sweep_start = 0.01
sweep_stop = 0.25
sweep_count = 9
sweep_spacing = "log"
series_variable = "nbar_as"
series_values = [1.0, 4.0, 7.0]
policy = "P2"
engines = ["analytic"]
"#;

fn main() -> hetnet_pcp::Result<()> {
    let dir = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hetnet-sweep"));
    let config = Config::parse(CONFIG)?;
    let outcome = run_sweep_with_progress(&config, |done, total| eprintln!("point {done}/{total}"))?;
    let paths = outcome.write(&dir)?;
    println!("wrote {} ({} rows, {} failed)", paths.csv.display(), outcome.rows.len(), outcome.failed_rows());

    let manifest = RunManifest::load(&paths.manifest)?;
    let again = run_sweep_with_progress(&manifest.config()?, |_, _| {})?;
    println!("re-run from manifest is identical: {}", again.csv() == outcome.csv());

    let script = write_plot_script(&manifest, &dir, Figure::Fig8, &dir)?;
    println!("plot script: {} (run it with python3 to draw the figure)", script.display());
    Ok(())
}
