//! Network parameters, tiers, association policies and the model bundle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ClusterKernel;

/// Converts a power in dBm to mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// Plain parameter record. Turn it into [`NetworkParams`] to validate it.
///
/// Densities are per km², distances in km, powers in linear mW, `beta` linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub lambda_m: f64,
    pub lambda_p: f64,
    pub n_s0: u32,
    pub nbar_as: f64,
    pub sigma_s: f64,
    pub sigma_u: f64,
    pub p_m: f64,
    pub p_s: f64,
    pub p_0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl RawParams {
    /// Default distance threshold (km) used when only Policy 1 is of interest.
    pub const DEFAULT_D_KM: f64 = 0.05;

    /// Evaluation baseline: λ_m = 1, λ_p = 10, n_s0 = 10, n̄_as = 3,
    /// σ_s = σ_u = 40 m, P_s = 23 dBm, P_m = 10³ P_s, α = 4, β = 0 dB.
    pub fn baseline() -> Self {
        let p_s = dbm_to_mw(23.0);
        let alpha = 4.0;
        Self {
            lambda_m: 1.0,
            lambda_p: 10.0,
            n_s0: 10,
            nbar_as: 3.0,
            sigma_s: 0.04,
            sigma_u: 0.04,
            p_m: 1e3 * p_s,
            p_s,
            p_0: p_s * Self::DEFAULT_D_KM.powf(-alpha),
            alpha,
            beta: 1.0,
        }
    }
}

impl Default for RawParams {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Validated network parameters with derived quantities cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct NetworkParams {
    raw: RawParams,
    xi_sm: f64,
    d: f64,
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("must be finite and positive, got {v}")))
    }
}

impl TryFrom<RawParams> for NetworkParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        positive("lambda_m", raw.lambda_m)?;
        positive("lambda_p", raw.lambda_p)?;
        positive("sigma_s", raw.sigma_s)?;
        positive("sigma_u", raw.sigma_u)?;
        positive("p_m", raw.p_m)?;
        positive("p_s", raw.p_s)?;
        positive("p_0", raw.p_0)?;
        if !(raw.alpha.is_finite() && raw.alpha > 2.0) {
            return Err(Error::invalid("alpha", format!("alpha must exceed 2, got {}", raw.alpha)));
        }
        if !(raw.beta.is_finite() && raw.beta >= 0.0) {
            return Err(Error::invalid("beta", format!("must be finite and non-negative, got {}", raw.beta)));
        }
        if raw.n_s0 == 0 {
            return Err(Error::invalid("n_s0", "must be at least 1"));
        }
        // n̄_as = 0 is allowed: it is the interference-free limit used by reduction checks
        if !(raw.nbar_as.is_finite() && raw.nbar_as >= 0.0) {
            return Err(Error::invalid("nbar_as", format!("must be finite and non-negative, got {}", raw.nbar_as)));
        }
        let xi_sm = (raw.p_s / raw.p_m).powf(1.0 / raw.alpha);
        let d = (raw.p_0 / raw.p_s).powf(-1.0 / raw.alpha);
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::invalid("p_0", format!("gives an unusable distance threshold {d}")));
        }
        Ok(Self { raw, xi_sm, d })
    }
}

impl From<NetworkParams> for RawParams {
    fn from(p: NetworkParams) -> Self {
        p.raw
    }
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self::baseline()
    }
}

impl NetworkParams {
    pub fn new(raw: RawParams) -> Result<Self> {
        Self::try_from(raw)
    }

    pub fn baseline() -> Self {
        Self::new(RawParams::baseline()).expect("baseline parameters are valid")
    }

    pub fn raw(&self) -> RawParams {
        self.raw
    }

    /// Copy with some raw fields changed, revalidated.
    pub fn with(&self, edit: impl FnOnce(&mut RawParams)) -> Result<Self> {
        let mut raw = self.raw;
        edit(&mut raw);
        Self::new(raw)
    }

    /// Copy whose SBS power threshold corresponds to distance threshold `d` (km).
    pub fn with_distance_threshold(&self, d: f64) -> Result<Self> {
        positive("D", d)?;
        self.with(|r| r.p_0 = r.p_s * d.powf(-r.alpha))
    }

    pub fn lambda_m(&self) -> f64 {
        self.raw.lambda_m
    }
    pub fn lambda_p(&self) -> f64 {
        self.raw.lambda_p
    }
    pub fn n_s0(&self) -> u32 {
        self.raw.n_s0
    }
    pub fn nbar_as(&self) -> f64 {
        self.raw.nbar_as
    }
    pub fn sigma_s(&self) -> f64 {
        self.raw.sigma_s
    }
    pub fn sigma_u(&self) -> f64 {
        self.raw.sigma_u
    }
    pub fn p_m(&self) -> f64 {
        self.raw.p_m
    }
    pub fn p_s(&self) -> f64 {
        self.raw.p_s
    }
    pub fn p_0(&self) -> f64 {
        self.raw.p_0
    }
    pub fn alpha(&self) -> f64 {
        self.raw.alpha
    }
    pub fn beta(&self) -> f64 {
        self.raw.beta
    }

    /// `(P_s / P_m)^(1/α)`.
    pub fn xi_sm(&self) -> f64 {
        self.xi_sm
    }

    /// `(P_m / P_s)^(1/α)`.
    pub fn xi_ms(&self) -> f64 {
        1.0 / self.xi_sm
    }

    /// Distance threshold `D = (P_0 / P_s)^(-1/α)` in km.
    pub fn distance_threshold(&self) -> f64 {
        self.d
    }

    pub fn power(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.raw.p_m,
            Tier::Small => self.raw.p_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Macro,
    Small,
}

impl Tier {
    pub const BOTH: [Tier; 2] = [Tier::Macro, Tier::Small];

    pub fn other(self) -> Tier {
        match self {
            Tier::Macro => Tier::Small,
            Tier::Small => Tier::Macro,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Macro => "macro",
            Tier::Small => "small",
        })
    }
}

/// How the typical user picks its serving tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssociationPolicy {
    /// Maximum average received power `P_j R_j^-α`.
    #[serde(rename = "P1")]
    MaxPower,
    /// Small cell iff `P_s R_s^-α ≥ P_0`, i.e. `R_s ≤ D`.
    #[serde(rename = "P2")]
    Threshold,
}

impl AssociationPolicy {
    pub const BOTH: [AssociationPolicy; 2] = [AssociationPolicy::MaxPower, AssociationPolicy::Threshold];
}

impl fmt::Display for AssociationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssociationPolicy::MaxPower => "P1",
            AssociationPolicy::Threshold => "P2",
        })
    }
}

impl std::str::FromStr for AssociationPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" | "1" | "max-power" => Ok(Self::MaxPower),
            "p2" | "2" | "threshold" => Ok(Self::Threshold),
            other => Err(Error::invalid("policy", format!("unknown policy `{other}`"))),
        }
    }
}

/// Parameters plus the two displacement kernels (SBSs and users).
#[derive(Debug, Clone)]
pub struct Model {
    pub params: NetworkParams,
    pub sbs_kernel: ClusterKernel,
    pub user_kernel: ClusterKernel,
}

impl Model {
    /// Thomas-process model with Gaussian kernels of scale `sigma_s`, `sigma_u`.
    pub fn thomas(params: NetworkParams) -> Result<Self> {
        Ok(Self {
            sbs_kernel: ClusterKernel::gaussian(params.sigma_s())?,
            user_kernel: ClusterKernel::gaussian(params.sigma_u())?,
            params,
        })
    }

    pub fn with_params(&self, params: NetworkParams) -> Result<Self> {
        match (self.sbs_kernel.sigma(), self.user_kernel.sigma()) {
            (Some(_), Some(_)) => Self::thomas(params),
            _ => Ok(Self { params, ..self.clone() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_mw(23.0) - 199.526_231_5).abs() < 1e-6);
        assert!((mw_to_dbm(dbm_to_mw(17.3)) - 17.3).abs() < 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
    }

    #[test]
    fn baseline_derived_values() {
        let p = NetworkParams::baseline();
        assert!((p.xi_sm() - 1e-3f64.powf(0.25)).abs() < 1e-15);
        assert!((p.xi_sm() * p.xi_ms() - 1.0).abs() < 1e-15);
        assert!((p.distance_threshold() - RawParams::DEFAULT_D_KM).abs() < 1e-12);
        let q = p.with_distance_threshold(0.2).unwrap();
        assert!((q.distance_threshold() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn alpha_must_exceed_two() {
        let err = NetworkParams::baseline().with(|r| r.alpha = 2.0).unwrap_err();
        assert!(err.to_string().contains("alpha must exceed 2"));
    }

    #[test]
    fn rejects_bad_values() {
        let p = NetworkParams::baseline();
        assert!(p.with(|r| r.lambda_m = 0.0).is_err());
        assert!(p.with(|r| r.n_s0 = 0).is_err());
        assert!(p.with(|r| r.sigma_s = f64::NAN).is_err());
        assert!(p.with(|r| r.nbar_as = -1.0).is_err());
        assert!(p.with(|r| r.nbar_as = 0.0).is_ok());
    }

    #[test]
    fn serde_round_trip_validates() {
        let p = NetworkParams::baseline();
        let s = serde_json::to_string(&p).unwrap();
        let back: NetworkParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
        let bad = s.replace("\"alpha\":4.0", "\"alpha\":1.5");
        assert!(serde_json::from_str::<NetworkParams>(&bad).is_err());
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("p1".parse::<AssociationPolicy>().unwrap(), AssociationPolicy::MaxPower);
        assert_eq!("P2".parse::<AssociationPolicy>().unwrap(), AssociationPolicy::Threshold);
        assert!("p3".parse::<AssociationPolicy>().is_err());
        assert_eq!(AssociationPolicy::Threshold.to_string(), "P2");
    }
}
