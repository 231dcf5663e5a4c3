//! Sweep orchestration, CSV rows and the run manifest.
//!
//! CSV schema (UTF-8, header row, `.` decimals, numbers as `{:.8e}`, i.e.
//! nine significant digits; empty fields mean "not applicable"):
//!
//! | column | meaning |
//! |---|---|
//! | `sweep_var` | swept quantity (`nbar_as`, `sigma_s_km`, `D_km`, `beta_db`, `n_s0`) |
//! | `value` | its value at this point |
//! | `engine` | `analytic` or `simulation` |
//! | `policy` | `P1` or `P2` |
//! | `tier` | `macro`, `small` or `total` |
//! | `coverage` | coverage probability contributed by the tier (or in total) |
//! | `ci_half_width` | 95% Wilson half-width (simulation only) |
//! | `assoc_prob` | average association probability of the tier (1 for total) |
//! | `throughput` | tier contribution to `λ log2(1+β) P_c` (sum for total) |
//! | `series_var` | second swept quantity, if any |
//! | `series_value` | its value |
//! | `status` | `ok`, or `error: <message>` when the point failed |
//!
//! Rows are ordered by series value, sweep value, engine, policy, then tier.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{Config, ConfigFile, Engine, SweepVariable};
use crate::coverage::{CoverageEvaluator, CoverageOptions, CoverageReport};
use crate::error::{Error, Result};
use crate::montecarlo::{derive_seed, simulate_coverage, SimConfig};
use crate::params::{AssociationPolicy, Model, NetworkParams, Tier};

pub const CSV_HEADER: &str =
    "sweep_var,value,engine,policy,tier,coverage,ci_half_width,assoc_prob,throughput,series_var,series_value,status";
pub const CSV_FILE: &str = "sweep.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowTier {
    Macro,
    Small,
    Total,
}

impl RowTier {
    pub const ALL: [RowTier; 3] = [RowTier::Macro, RowTier::Small, RowTier::Total];

    pub fn tier(self) -> Option<Tier> {
        match self {
            RowTier::Macro => Some(Tier::Macro),
            RowTier::Small => Some(Tier::Small),
            RowTier::Total => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RowTier::Macro => "macro",
            RowTier::Small => "small",
            RowTier::Total => "total",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub sweep_var: SweepVariable,
    pub value: f64,
    pub engine: Engine,
    pub policy: AssociationPolicy,
    pub tier: RowTier,
    pub coverage: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub assoc_prob: Option<f64>,
    pub throughput: Option<f64>,
    pub series_var: Option<SweepVariable>,
    pub series_value: Option<f64>,
    pub status: String,
}

impl CsvRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_csv_line(&self) -> String {
        let num = |v: Option<f64>| v.map(|v| format!("{v:.8e}")).unwrap_or_default();
        let status: String = self.status.chars().map(|c| if matches!(c, ',' | '\n' | '\r' | '"') { ' ' } else { c }).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.sweep_var,
            num(Some(self.value)),
            self.engine,
            self.policy,
            self.tier.name(),
            num(self.coverage),
            num(self.ci_half_width),
            num(self.assoc_prob),
            num(self.throughput),
            self.series_var.map(|v| v.name()).unwrap_or_default(),
            num(self.series_value),
            status,
        )
    }
}

/// Renders rows (with header) exactly as written to disk.
pub fn render_csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv_line());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub value: f64,
    pub series_value: Option<f64>,
    /// Simulation seed of this point.
    pub seed: u64,
    pub status: String,
}

/// Everything needed to reproduce a sweep: re-running `config` gives the
/// same CSV byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub library_version: String,
    pub config: ConfigFile,
    pub seed: u64,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    /// CSV file name, relative to the manifest.
    pub csv_file: String,
    pub points: Vec<PointRecord>,
    pub rows: Vec<CsvRow>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest {}: {e}", path.display())))
    }

    pub fn config(&self) -> Result<Config> {
        Config::from_file(&self.config)
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<CsvRow>,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

impl SweepOutcome {
    pub fn csv(&self) -> String {
        render_csv(&self.rows)
    }

    pub fn failed_rows(&self) -> usize {
        self.manifest.failed_rows()
    }

    /// Writes the CSV and then the manifest into `dir` (created if needed).
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<OutputPaths> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(&self.manifest.csv_file);
        std::fs::write(&csv, self.csv())?;
        let manifest = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&self.manifest).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(&manifest, json + "\n")?;
        Ok(OutputPaths { csv, manifest })
    }
}

/// Seed of one sweep point, derived from the point's coordinates rather than
/// its position so that adding points never perturbs existing ones.
pub fn point_seed(master: u64, value: f64, series_value: Option<f64>) -> u64 {
    derive_seed(derive_seed(master, value.to_bits()), series_value.map_or(0, f64::to_bits))
}

pub fn run_sweep(config: &Config) -> Result<SweepOutcome> {
    run_sweep_with_progress(config, |_, _| {})
}

/// Runs every point in order; `progress(done, total)` fires after each one.
/// Failing points are recorded in their rows and the run carries on.
pub fn run_sweep_with_progress(config: &Config, mut progress: impl FnMut(usize, usize)) -> Result<SweepOutcome> {
    config.sweep.validate()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let spec = &config.sweep;
    let mut engines = spec.engines.clone();
    engines.sort();
    engines.dedup();

    let series: Vec<Option<f64>> = match &spec.series {
        Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    let total = series.len() * spec.values.len();
    let mut rows = Vec::new();
    let mut points = Vec::with_capacity(total);
    let mut evaluator: Option<CoverageEvaluator> = None;

    for &sv in &series {
        for &value in &spec.values {
            let index = points.len();
            let seed = point_seed(config.sim.seed, value, sv);
            let template = |engine, policy, tier| CsvRow {
                sweep_var: spec.variable,
                value,
                engine,
                policy,
                tier,
                coverage: None,
                ci_half_width: None,
                assoc_prob: None,
                throughput: None,
                series_var: spec.series.as_ref().map(|s| s.variable),
                series_value: sv,
                status: "ok".into(),
            };
            let params = spec.point_params(&config.params, value, sv);
            let mut point_status = "ok".to_string();
            for &engine in &engines {
                for &policy in spec.policy.policies() {
                    let report = match &params {
                        Err(e) => Err(Error::Config(e.to_string())),
                        Ok(p) => match engine {
                            Engine::Analytic => analytic_point(&mut evaluator, p, policy, config),
                            Engine::Simulation => simulated_point(p, policy, &config.sim, seed),
                        },
                    };
                    match report {
                        Ok(rep) => {
                            let p = params.as_ref().expect("report implies params");
                            rows.extend(RowTier::ALL.iter().map(|&t| fill_row(template(engine, policy, t), &rep, p)));
                        }
                        Err(e) => {
                            let status = format!("error: {e}");
                            point_status = status.clone();
                            rows.extend(RowTier::ALL.iter().map(|&t| CsvRow { status: status.clone(), ..template(engine, policy, t) }));
                        }
                    }
                }
            }
            points.push(PointRecord { index, value, series_value: sv, seed, status: point_status });
            progress(points.len(), total);
        }
    }

    let manifest = RunManifest {
        format_version: super::config::FORMAT_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.to_file(),
        seed: config.sim.seed,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        csv_file: CSV_FILE.to_string(),
        points,
        rows: rows.clone(),
    };
    Ok(SweepOutcome { rows, manifest })
}

fn analytic_point(
    cache: &mut Option<CoverageEvaluator>,
    params: &NetworkParams,
    policy: AssociationPolicy,
    config: &Config,
) -> Result<CoverageReport> {
    // the inter-cluster table only depends on the SBS field; keep it while that is unchanged
    let reusable = cache.as_ref().is_some_and(|ev| ev.shares_field(params));
    if !reusable {
        let options = CoverageOptions::default().with_mode(config.sweep.intra_mode);
        *cache = Some(CoverageEvaluator::new(Model::thomas(*params)?, options)?);
    }
    cache.as_ref().expect("just built").coverage_for(params, policy)
}

fn simulated_point(params: &NetworkParams, policy: AssociationPolicy, sim: &SimConfig, seed: u64) -> Result<CoverageReport> {
    let model = Model::thomas(*params)?;
    simulate_coverage(&model, policy, &SimConfig { seed, ..*sim })
}

fn fill_row(mut row: CsvRow, rep: &CoverageReport, params: &NetworkParams) -> CsvRow {
    let gain = (1.0 + params.beta()).log2();
    match row.tier.tier() {
        Some(t) => {
            row.coverage = Some(rep.per_tier_coverage.get(t));
            row.assoc_prob = Some(rep.assoc_prob_avg.get(t));
            let density = match t {
                Tier::Macro => params.lambda_m(),
                Tier::Small => params.lambda_p() * params.nbar_as(),
            };
            row.throughput = Some(density * rep.per_tier_coverage.get(t) * gain);
        }
        None => {
            row.coverage = Some(rep.total_coverage);
            row.assoc_prob = Some(rep.assoc_prob_avg.sum());
            row.throughput = Some(rep.throughput);
        }
    }
    row.ci_half_width = rep.provenance.half_width(row.tier.tier());
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_analytic_gives_three_rows_per_policy() {
        let c = Config::parse("format_version = 1\nnbar_as = 1.0\nsigma_s_km = 0.02\nsigma_u_km = 0.02\n").unwrap();
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.rows.len(), 6);
        assert_eq!(out.failed_rows(), 0);
        let csv = out.csv();
        assert_eq!(csv.lines().count(), 7);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        for r in out.rows.chunks(3) {
            let sum = r[0].coverage.unwrap() + r[1].coverage.unwrap();
            assert!((sum - r[2].coverage.unwrap()).abs() < 1e-15);
            assert!(r.iter().all(|r| r.ci_half_width.is_none()));
        }
    }

    #[test]
    fn failed_points_are_recorded_in_rows() {
        let mut c = Config::parse("format_version = 1\npolicy = \"P1\"\n").unwrap();
        c.sweep.variable = SweepVariable::NS0;
        c.sweep.values = vec![40.0];
        c.sweep.intra_mode = crate::laplace::IntraMode::ExactTruncatedSum;
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.failed_rows(), 3);
        assert!(out.rows[0].status.starts_with("error:"));
        assert!(out.csv().lines().nth(1).unwrap().contains(",error: "));
        assert_eq!(out.manifest.points[0].status, out.rows[0].status);
    }

    #[test]
    fn point_seeds_depend_on_coordinates_only() {
        assert_eq!(point_seed(1, 0.5, None), point_seed(1, 0.5, None));
        assert_ne!(point_seed(1, 0.5, None), point_seed(1, 0.6, None));
        assert_ne!(point_seed(1, 0.5, Some(1.0)), point_seed(1, 0.5, Some(2.0)));
        assert_ne!(point_seed(1, 0.5, None), point_seed(2, 0.5, None));
    }

    #[test]
    fn number_format_has_nine_significant_digits() {
        let row = CsvRow {
            sweep_var: SweepVariable::D,
            value: 0.05,
            engine: Engine::Simulation,
            policy: AssociationPolicy::Threshold,
            tier: RowTier::Small,
            coverage: Some(2.0 / 3.0),
            ci_half_width: Some(0.0029),
            assoc_prob: None,
            throughput: None,
            series_var: None,
            series_value: None,
            status: "ok".into(),
        };
        assert_eq!(row.to_csv_line(), "D_km,5.00000000e-2,simulation,P2,small,6.66666667e-1,2.90000000e-3,,,,,ok");
    }
}
