//! Configuration files, sweeps, CSV/manifest output and plot scripts: the
//! machinery behind the `hetnet` binary, usable from library code as well.

pub mod config;
pub mod plot;
pub mod sweep;

pub use config::{load_config, Config, ConfigFile, Engine, EngineSelection, PolicySelection, Series, SweepSpec, SweepVariable};
pub use plot::{emit_plot_script, write_plot_script, Figure};
pub use sweep::{render_csv, run_sweep, run_sweep_with_progress, CsvRow, RowTier, RunManifest, SweepOutcome, CSV_HEADER};

/// Prefix of the environment variables that stand in for command-line flags
/// (`PCPHET_CONFIG`, `PCPHET_ENGINE`, `PCPHET_POLICY`, `PCPHET_SEED`,
/// `PCPHET_TRIALS`, `PCPHET_OUT`).
pub const ENV_PREFIX: &str = "PCPHET_";
