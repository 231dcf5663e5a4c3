//! Command-line front end: single-point coverage, sweeps, the validation
//! suite and plot-script emission. Every flag can also be set through a
//! `PCPHET_`-prefixed environment variable; an explicit flag wins.

use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetnet_pcp::cli::{run_sweep_with_progress, write_plot_script, Config, EngineSelection, Figure, PolicySelection, RunManifest, SweepSpec};
use hetnet_pcp::validation::{ValidationOptions, Validator, CRITERIA};

#[derive(Parser)]
#[command(name = "hetnet", version, about = "Coverage of clustered two-tier HetNets: analysis and simulation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true, env = "PCPHET_CONFIG")]
    config: Option<PathBuf>,
    /// Which engine(s) to run: analytic, sim or both.
    #[arg(long, global = true, env = "PCPHET_ENGINE")]
    engine: Option<EngineSelection>,
    /// Association policy: p1, p2 or both.
    #[arg(long, global = true, env = "PCPHET_POLICY")]
    policy: Option<PolicySelection>,
    /// Master seed of the simulation engine.
    #[arg(long, global = true, env = "PCPHET_SEED")]
    seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long, global = true, env = "PCPHET_TRIALS")]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "PCPHET_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Evaluate the configured base point and print per-tier results.
    Coverage,
    /// Run the configured sweep and write sweep.csv and manifest.json.
    Sweep {
        /// Re-run the configuration recorded in an earlier manifest.
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
    },
    /// Run the analytic-vs-simulation validation suite.
    Validate {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        /// Print every detail line, not only those of failed criteria.
        #[arg(long)]
        verbose: bool,
    },
    /// Emit matplotlib scripts for figures from a sweep manifest.
    Plot {
        /// Manifest written by `sweep`.
        manifest: PathBuf,
        /// Figure ids (fig2..fig9); all figures the manifest supports if omitted.
        figures: Vec<Figure>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> hetnet_pcp::Result<ExitCode> {
    let c = &cli.common;
    match cli.verb {
        Verb::Coverage => {
            let mut config = load(c.config.as_deref())?;
            config.sweep = SweepSpec { intra_mode: config.sweep.intra_mode, ..SweepSpec::single_point(&config.params) };
            apply_overrides(&mut config, c);
            let outcome = run_sweep_with_progress(&config, |_, _| {})?;
            println!("engine,policy,tier,coverage,ci_half_width,assoc_prob,throughput,status");
            for r in &outcome.rows {
                let f = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
                println!(
                    "{},{},{},{},{},{},{},{}",
                    r.engine,
                    r.policy,
                    r.tier.name(),
                    f(r.coverage),
                    f(r.ci_half_width),
                    f(r.assoc_prob),
                    f(r.throughput),
                    r.status
                );
            }
            if let Some(dir) = &c.out {
                let paths = outcome.write(dir)?;
                eprintln!("wrote {}", paths.csv.display());
            }
            Ok(exit_for(outcome.failed_rows() == 0))
        }
        Verb::Sweep { manifest } => {
            let mut config = match &manifest {
                Some(path) => RunManifest::load(path)?.config()?,
                None => load(c.config.as_deref())?,
            };
            apply_overrides(&mut config, c);
            let mut stderr = std::io::stderr();
            let tty = stderr.is_terminal();
            let outcome = run_sweep_with_progress(&config, |done, total| {
                let _ = if tty { write!(stderr, "\rpoint {done}/{total}") } else { writeln!(stderr, "point {done}/{total}") };
                if tty && done == total {
                    let _ = writeln!(stderr);
                }
            })?;
            let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let paths = outcome.write(&dir)?;
            let failed = outcome.failed_rows();
            eprintln!("wrote {} and {} ({} rows, {failed} failed)", paths.csv.display(), paths.manifest.display(), outcome.rows.len());
            Ok(exit_for(failed == 0))
        }
        Verb::Validate { criteria, verbose } => {
            let mut opts = ValidationOptions { work_dir: c.out.clone(), ..ValidationOptions::default() };
            if let Some(seed) = c.seed {
                opts.seed = seed;
            }
            if let Some(trials) = c.trials {
                opts.trials = trials;
            }
            let ids: Vec<u8> = if criteria.is_empty() { CRITERIA.iter().map(|(id, _)| *id).collect() } else { criteria };
            let mut validator = Validator::new(opts);
            let mut all_passed = true;
            for id in ids {
                let r = validator.run(id);
                println!("{}", r.line());
                if verbose || !r.passed {
                    for d in &r.details {
                        println!("    {d}");
                    }
                }
                all_passed &= r.passed;
            }
            Ok(exit_for(all_passed))
        }
        Verb::Plot { manifest, figures } => {
            let m = RunManifest::load(&manifest)?;
            let manifest_dir = manifest.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let out = c.out.clone().unwrap_or_else(|| manifest_dir.to_path_buf());
            if figures.is_empty() {
                // emit whatever the manifest supports
                let mut any = false;
                for f in Figure::ALL {
                    if let Ok(path) = write_plot_script(&m, manifest_dir, f, &out) {
                        println!("{}", path.display());
                        any = true;
                    }
                }
                if !any {
                    return Err(hetnet_pcp::Error::Config(format!(
                        "{} supports none of the figures; run `hetnet plot {} fig2` to see what is missing",
                        manifest.display(),
                        manifest.display()
                    )));
                }
            } else {
                for f in figures {
                    println!("{}", write_plot_script(&m, manifest_dir, f, &out)?.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: Option<&Path>) -> hetnet_pcp::Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Config::parse("format_version = 1\n"),
    }
}

fn apply_overrides(config: &mut Config, c: &Common) {
    if let Some(e) = c.engine {
        config.sweep.engines = e.engines();
    }
    if let Some(p) = c.policy {
        config.sweep.policy = p;
    }
    if let Some(s) = c.seed {
        config.sim.seed = s;
    }
    if let Some(t) = c.trials {
        config.sim.trials = t;
    }
}

fn exit_for(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
