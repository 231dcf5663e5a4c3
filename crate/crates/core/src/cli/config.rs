//! Versioned TOML run configuration.
//!
//! The file is flat: every key sits at the top level and carries its unit in
//! the name. Every key except `format_version` is optional and defaults to
//! the evaluation baseline. Powers may be given in dBm or mW, the SINR
//! threshold in dB or linear, and the small-cell threshold as a power
//! (`P_0_*`) or as the equivalent distance `D_km`. At most one form per
//! quantity is allowed.
//!
//! ```toml
//! format_version = 1
//! nbar_as = 3.0
//! sigma_s_km = 0.04
//! sigma_u_km = 0.04
//! P_s_dbm = 23.0
//! D_km = 0.05
//! sweep_variable = "nbar_as"
//! sweep_values = [1.0, 3.0, 5.0, 7.0]
//! engines = ["analytic", "simulation"]
//! policy = "both"
//! trials = 100000
//! seed = 1
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::IntraMode;
use crate::montecarlo::SimConfig;
use crate::params::{db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm, AssociationPolicy, NetworkParams, RawParams};

pub const FORMAT_VERSION: u32 = 1;

/// Raw file contents. Serialising a [`Config`] yields this form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub format_version: u32,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_m_per_km2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_p_per_km2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_s0: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar_as: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_s_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_u_km: Option<f64>,
    #[serde(default, rename = "P_m_dbm", skip_serializing_if = "Option::is_none")]
    pub p_m_dbm: Option<f64>,
    #[serde(default, rename = "P_m_mw", skip_serializing_if = "Option::is_none")]
    pub p_m_mw: Option<f64>,
    #[serde(default, rename = "P_s_dbm", skip_serializing_if = "Option::is_none")]
    pub p_s_dbm: Option<f64>,
    #[serde(default, rename = "P_s_mw", skip_serializing_if = "Option::is_none")]
    pub p_s_mw: Option<f64>,
    #[serde(default, rename = "P_0_dbm", skip_serializing_if = "Option::is_none")]
    pub p_0_dbm: Option<f64>,
    #[serde(default, rename = "P_0_mw", skip_serializing_if = "Option::is_none")]
    pub p_0_mw: Option<f64>,
    #[serde(default, rename = "D_km", skip_serializing_if = "Option::is_none")]
    pub d_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_linear: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_variable: Option<SweepVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_spacing: Option<Spacing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_variable: Option<SweepVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engines: Option<Vec<Engine>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_coupled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intra_mode: Option<IntraMode>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_window_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<u64>,
}

/// Quantity varied along a sweep (or across series). Names carry units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "nbar_as")]
    NbarAs,
    #[serde(rename = "sigma_s_km")]
    SigmaS,
    #[serde(rename = "D_km")]
    D,
    #[serde(rename = "beta_db")]
    BetaDb,
    #[serde(rename = "n_s0")]
    NS0,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NbarAs => "nbar_as",
            SweepVariable::SigmaS => "sigma_s_km",
            SweepVariable::D => "D_km",
            SweepVariable::BetaDb => "beta_db",
            SweepVariable::NS0 => "n_s0",
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = match self {
            SweepVariable::NS0 => v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64,
            SweepVariable::BetaDb => v.is_finite(),
            SweepVariable::NbarAs => v.is_finite() && v >= 0.0,
            SweepVariable::SigmaS | SweepVariable::D => v.is_finite() && v > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(self.name(), format!("unusable sweep value {v}")))
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    #[serde(alias = "sim")]
    Simulation,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Simulation => "simulation",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PolicySelection {
    #[serde(rename = "P1", alias = "p1")]
    P1,
    #[serde(rename = "P2", alias = "p2")]
    P2,
    #[default]
    #[serde(rename = "both")]
    Both,
}

impl PolicySelection {
    pub fn policies(self) -> &'static [AssociationPolicy] {
        match self {
            PolicySelection::P1 => &[AssociationPolicy::MaxPower],
            PolicySelection::P2 => &[AssociationPolicy::Threshold],
            PolicySelection::Both => &AssociationPolicy::BOTH,
        }
    }
}

impl FromStr for PolicySelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(PolicySelection::P1),
            "p2" => Ok(PolicySelection::P2),
            "both" => Ok(PolicySelection::Both),
            _ => Err(Error::invalid("policy", format!("expected p1, p2 or both, got `{s}`"))),
        }
    }
}

/// Engine choice as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineSelection {
    Analytic,
    Simulation,
    Both,
}

impl EngineSelection {
    pub fn engines(self) -> Vec<Engine> {
        match self {
            EngineSelection::Analytic => vec![Engine::Analytic],
            EngineSelection::Simulation => vec![Engine::Simulation],
            EngineSelection::Both => vec![Engine::Analytic, Engine::Simulation],
        }
    }
}

impl FromStr for EngineSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(EngineSelection::Analytic),
            "sim" | "simulation" => Ok(EngineSelection::Simulation),
            "both" => Ok(EngineSelection::Both),
            _ => Err(Error::invalid("engine", format!("expected analytic, sim or both, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// What to evaluate: one variable over a list of values, optionally
/// repeated for each value of a second (series) variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub series: Option<Series>,
    pub engines: Vec<Engine>,
    pub policy: PolicySelection,
    /// Sweeping `sigma_s_km` moves `sigma_u` along with it.
    pub sigma_coupled: bool,
    pub intra_mode: IntraMode,
}

impl SweepSpec {
    /// Single point at the base parameters.
    pub fn single_point(params: &NetworkParams) -> Self {
        Self {
            variable: SweepVariable::NbarAs,
            values: vec![params.nbar_as()],
            series: None,
            engines: vec![Engine::Analytic],
            policy: PolicySelection::Both,
            sigma_coupled: true,
            intra_mode: IntraMode::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep_values", "must not be empty"));
        }
        if self.engines.is_empty() {
            return Err(Error::invalid("engines", "at least one engine is required"));
        }
        for &v in &self.values {
            self.variable.check(v)?;
        }
        if let Some(series) = &self.series {
            if series.values.is_empty() {
                return Err(Error::invalid("series_values", "must not be empty"));
            }
            if series.variable == self.variable {
                return Err(Error::invalid("series_variable", "must differ from sweep_variable"));
            }
            for &v in &series.values {
                series.variable.check(v)?;
            }
        }
        Ok(())
    }

    /// Parameters at one sweep point. The distance threshold is applied last
    /// so that `D_km` keeps its meaning whatever else moves.
    pub fn point_params(&self, base: &NetworkParams, value: f64, series_value: Option<f64>) -> Result<NetworkParams> {
        let mut edits = vec![(self.variable, value)];
        if let (Some(s), Some(v)) = (&self.series, series_value) {
            edits.push((s.variable, v));
        }
        edits.sort_by_key(|(var, _)| *var == SweepVariable::D);
        let mut raw = base.raw();
        for (var, v) in edits {
            var.check(v)?;
            match var {
                SweepVariable::NbarAs => raw.nbar_as = v,
                SweepVariable::SigmaS => {
                    raw.sigma_s = v;
                    if self.sigma_coupled {
                        raw.sigma_u = v;
                    }
                }
                SweepVariable::D => raw.p_0 = raw.p_s * v.powf(-raw.alpha),
                SweepVariable::BetaDb => raw.beta = db_to_linear(v),
                SweepVariable::NS0 => raw.n_s0 = v as u32,
            }
        }
        NetworkParams::new(raw)
    }
}

/// Fully resolved configuration together with the file form it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: NetworkParams,
    pub sweep: SweepSpec,
    pub sim: SimConfig,
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<(NetworkParams, SweepSpec, SimConfig)> {
    let c = Config::load(path)?;
    Ok((c.params, c.sweep, c.sim))
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses TOML text; parse errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_file(f: &ConfigFile) -> Result<Self> {
        if f.format_version != FORMAT_VERSION {
            return Err(Error::invalid(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", f.format_version),
            ));
        }
        let base = RawParams::baseline();
        let p_s = one_of("P_s", [(f.p_s_dbm, dbm_to_mw as fn(f64) -> f64), (f.p_s_mw, identity)])?.unwrap_or(base.p_s);
        let p_m = one_of("P_m", [(f.p_m_dbm, dbm_to_mw as fn(f64) -> f64), (f.p_m_mw, identity)])?
            .unwrap_or(1e3 * p_s);
        let alpha = f.alpha.unwrap_or(base.alpha);
        let d_to_p0 = move |d: f64| p_s * d.powf(-alpha);
        let p_0 = one_of(
            "P_0 / D",
            [
                (f.p_0_dbm, Box::new(dbm_to_mw) as Box<dyn Fn(f64) -> f64>),
                (f.p_0_mw, Box::new(identity)),
                (f.d_km, Box::new(d_to_p0)),
            ],
        )?
        .unwrap_or_else(|| d_to_p0(RawParams::DEFAULT_D_KM));
        let beta = one_of("beta", [(f.beta_db, db_to_linear as fn(f64) -> f64), (f.beta_linear, identity)])?
            .unwrap_or(base.beta);
        let raw = RawParams {
            lambda_m: f.lambda_m_per_km2.unwrap_or(base.lambda_m),
            lambda_p: f.lambda_p_per_km2.unwrap_or(base.lambda_p),
            n_s0: f.n_s0.unwrap_or(base.n_s0),
            nbar_as: f.nbar_as.unwrap_or(base.nbar_as),
            sigma_s: f.sigma_s_km.unwrap_or(base.sigma_s),
            sigma_u: f.sigma_u_km.unwrap_or(base.sigma_u),
            p_m,
            p_s,
            p_0,
            alpha,
            beta,
        };
        let params = NetworkParams::new(raw).map_err(rename_key)?;

        let values = match (&f.sweep_values, f.sweep_start, f.sweep_stop, f.sweep_count) {
            (Some(v), None, None, None) => Some(v.clone()),
            (None, Some(a), Some(b), Some(n)) => Some(grid(a, b, n, f.sweep_spacing.unwrap_or_default())?),
            (None, None, None, None) => None,
            _ => {
                return Err(Error::invalid(
                    "sweep_values",
                    "give either sweep_values or all of sweep_start, sweep_stop, sweep_count",
                ))
            }
        };
        let variable = f.sweep_variable.unwrap_or(SweepVariable::NbarAs);
        let values = match values {
            Some(v) => v,
            None if f.sweep_variable.is_none() => vec![params.nbar_as()],
            None => return Err(Error::invalid("sweep_values", "required when sweep_variable is set")),
        };
        let series = match (f.series_variable, &f.series_values) {
            (Some(variable), Some(values)) => Some(Series { variable, values: values.clone() }),
            (None, None) => None,
            _ => return Err(Error::invalid("series_values", "series_variable and series_values go together")),
        };
        let sweep = SweepSpec {
            variable,
            values,
            series,
            engines: f.engines.clone().unwrap_or_else(|| vec![Engine::Analytic]),
            policy: f.policy.unwrap_or_default(),
            sigma_coupled: f.sigma_coupled.unwrap_or(true),
            intra_mode: f.intra_mode.unwrap_or_default(),
        };
        sweep.validate()?;

        let d = SimConfig::default();
        let sim = SimConfig {
            trials: f.trials.unwrap_or(d.trials),
            seed: f.seed.unwrap_or(d.seed),
            window_radius: f.window_km.unwrap_or(d.window_radius),
            macro_window_radius: f.macro_window_km.unwrap_or(d.macro_window_radius),
            batch_size: f.batch_size.unwrap_or(d.batch_size),
        };
        sim.validate().map_err(rename_key)?;
        Ok(Self { params, sweep, sim })
    }

    /// File form that loads back to exactly this configuration. Human-friendly
    /// units (dBm, dB, km) are used whenever they convert back bit-for-bit.
    pub fn to_file(&self) -> ConfigFile {
        let r = self.params.raw();
        let mut f = ConfigFile {
            format_version: FORMAT_VERSION,
            lambda_m_per_km2: Some(r.lambda_m),
            lambda_p_per_km2: Some(r.lambda_p),
            n_s0: Some(r.n_s0),
            nbar_as: Some(r.nbar_as),
            sigma_s_km: Some(r.sigma_s),
            sigma_u_km: Some(r.sigma_u),
            alpha: Some(r.alpha),
            ..ConfigFile::default()
        };
        let (a, b) = exact_pair(r.p_s, mw_to_dbm, dbm_to_mw);
        (f.p_s_dbm, f.p_s_mw) = (a, b);
        let (a, b) = exact_pair(r.p_m, mw_to_dbm, dbm_to_mw);
        (f.p_m_dbm, f.p_m_mw) = (a, b);
        let d = self.params.distance_threshold();
        if r.p_s * d.powf(-r.alpha) == r.p_0 {
            f.d_km = Some(d);
        } else {
            let (a, b) = exact_pair(r.p_0, mw_to_dbm, dbm_to_mw);
            (f.p_0_dbm, f.p_0_mw) = (a, b);
        }
        let (a, b) = exact_pair(r.beta, linear_to_db, db_to_linear);
        (f.beta_db, f.beta_linear) = (a, b);

        let s = &self.sweep;
        f.sweep_variable = Some(s.variable);
        f.sweep_values = Some(s.values.clone());
        if let Some(series) = &s.series {
            f.series_variable = Some(series.variable);
            f.series_values = Some(series.values.clone());
        }
        f.engines = Some(s.engines.clone());
        f.policy = Some(s.policy);
        f.sigma_coupled = Some(s.sigma_coupled);
        f.intra_mode = Some(s.intra_mode);

        f.trials = Some(self.sim.trials);
        f.seed = Some(self.sim.seed);
        f.window_km = Some(self.sim.window_radius);
        f.macro_window_km = Some(self.sim.macro_window_radius);
        f.batch_size = Some(self.sim.batch_size);
        f
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.to_file()).map_err(|e| Error::Config(e.to_string()))
    }
}

fn identity(v: f64) -> f64 {
    v
}

/// Picks the single present alternative and converts it.
fn one_of<F: Fn(f64) -> f64, const N: usize>(what: &str, options: [(Option<f64>, F); N]) -> Result<Option<f64>> {
    let mut found = None;
    for (v, conv) in options {
        if let Some(v) = v {
            if found.is_some() {
                return Err(Error::invalid(what, "given in more than one form"));
            }
            found = Some(conv(v));
        }
    }
    Ok(found)
}

/// `(Some(friendly), None)` if the friendly unit round-trips exactly, else `(None, Some(raw))`.
fn exact_pair(raw: f64, to: fn(f64) -> f64, back: fn(f64) -> f64) -> (Option<f64>, Option<f64>) {
    let friendly = to(raw);
    if back(friendly) == raw {
        (Some(friendly), None)
    } else {
        (None, Some(raw))
    }
}

fn grid(start: f64, stop: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("sweep_count", "must be at least 1"));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::invalid("sweep_start", "grid ends must be finite"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let t = |i: usize| i as f64 / (count - 1) as f64;
    match spacing {
        Spacing::Linear => Ok((0..count).map(|i| start + (stop - start) * t(i)).collect()),
        Spacing::Log => {
            if start <= 0.0 || stop <= 0.0 {
                return Err(Error::invalid("sweep_spacing", "log spacing needs positive grid ends"));
            }
            let (a, b) = (start.ln(), stop.ln());
            Ok((0..count).map(|i| (a + (b - a) * t(i)).exp()).collect())
        }
    }
}

/// Maps internal parameter names onto config keys in validation errors.
fn rename_key(e: Error) -> Error {
    match e {
        Error::InvalidParameter { key, reason } => {
            let key = match key.as_str() {
                "lambda_m" => "lambda_m_per_km2",
                "lambda_p" => "lambda_p_per_km2",
                "sigma_s" => "sigma_s_km",
                "sigma_u" => "sigma_u_km",
                "p_m" => "P_m",
                "p_s" => "P_s",
                "p_0" => "P_0",
                "beta" => "beta",
                "window_radius" => "window_km",
                "macro_window_radius" => "macro_window_km",
                other => other,
            }
            .to_string();
            Error::InvalidParameter { key, reason }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_baseline_defaults() {
        let c = Config::parse("format_version = 1\n").unwrap();
        assert_eq!(c.params, NetworkParams::baseline());
        assert_eq!(c.sim, SimConfig::default());
        assert_eq!(c.sweep.values, vec![3.0]);
        assert_eq!(c.sweep.engines, vec![Engine::Analytic]);
    }

    #[test]
    fn dbm_is_converted() {
        let c = Config::parse("format_version = 1\nP_s_dbm = 23.0\n").unwrap();
        assert!((c.params.p_s() - 199.526_231_496_887_9).abs() < 1e-9);
        assert!((c.params.p_m() / c.params.p_s() - 1e3).abs() < 1e-9);
    }

    #[test]
    fn alpha_two_is_rejected() {
        let e = Config::parse("format_version = 1\nalpha = 2.0\n").unwrap_err();
        assert!(e.to_string().contains("alpha must exceed 2"), "{e}");
    }

    #[test]
    fn unknown_keys_and_bad_syntax_are_errors() {
        let e = Config::parse("format_version = 1\nlambda_q = 3\n").unwrap_err();
        assert!(e.to_string().contains("lambda_q"), "{e}");
        let e = Config::parse("format_version = 1\nalpha = \n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = Config::parse("format_version = 2\n").unwrap_err();
        assert!(e.to_string().contains("format_version"));
    }

    #[test]
    fn conflicting_forms_are_rejected() {
        assert!(Config::parse("format_version = 1\nP_s_dbm = 23.0\nP_s_mw = 200.0\n").is_err());
        assert!(Config::parse("format_version = 1\nD_km = 0.05\nP_0_dbm = 10.0\n").is_err());
        assert!(Config::parse("format_version = 1\nsweep_variable = \"D_km\"\n").is_err());
    }

    #[test]
    fn validation_errors_name_the_config_key() {
        match Config::parse("format_version = 1\nsigma_s_km = -1.0\n").unwrap_err() {
            Error::InvalidParameter { key, .. } => assert_eq!(key, "sigma_s_km"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn grids_and_series() {
        let c = Config::parse(
            "format_version = 1\nsweep_variable = \"D_km\"\nsweep_start = 0.01\nsweep_stop = 0.25\nsweep_count = 13\nsweep_spacing = \"log\"\nseries_variable = \"nbar_as\"\nseries_values = [1.0, 4.0]\npolicy = \"P2\"\nengines = [\"analytic\", \"sim\"]\n",
        )
        .unwrap();
        assert_eq!(c.sweep.values.len(), 13);
        assert!((c.sweep.values[6] - 0.05).abs() < 1e-12);
        assert_eq!(c.sweep.policy, PolicySelection::P2);
        assert_eq!(c.sweep.engines, vec![Engine::Analytic, Engine::Simulation]);
        let p = c.sweep.point_params(&c.params, 0.1, Some(4.0)).unwrap();
        assert!((p.distance_threshold() - 0.1).abs() < 1e-12);
        assert_eq!(p.nbar_as(), 4.0);
    }

    #[test]
    fn coupled_sigma_moves_both() {
        let c = Config::parse("format_version = 1\nsweep_variable = \"sigma_s_km\"\nsweep_values = [0.02]\n").unwrap();
        let p = c.sweep.point_params(&c.params, 0.02, None).unwrap();
        assert_eq!((p.sigma_s(), p.sigma_u()), (0.02, 0.02));
        let mut s = c.sweep.clone();
        s.sigma_coupled = false;
        let p = s.point_params(&c.params, 0.02, None).unwrap();
        assert_eq!((p.sigma_s(), p.sigma_u()), (0.02, 0.04));
    }

    #[test]
    fn serialised_config_loads_back_exactly() {
        let c = Config::parse("format_version = 1\nP_s_dbm = 21.3\nbeta_db = -3.0\nD_km = 0.037\nseed = 99\n").unwrap();
        let again = Config::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }
}
