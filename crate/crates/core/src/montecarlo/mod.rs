//! Monte Carlo network simulator: draws full network realizations around a
//! typical user at the origin and applies the association policies literally.

mod geometry;
mod realization;
mod simulate;

pub mod empirical;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::activity::sample_truncated_poisson;
pub use geometry::{path_gain, sample_disk_point, sample_ppp_disk};
pub use realization::{sample_realization, NetworkRealization, Serving};
pub use simulate::{
    evaluate_sir, simulate_coverage, simulate_trace, window_check, SirSample, TrialRecord, WindowCheck,
};

/// Simulation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Radius (km) of the disk holding cluster parents.
    pub window_radius: f64,
    /// Radius (km) of the disk holding macro BSs. Far macros matter more
    /// than far clusters because macro powers are much larger.
    pub macro_window_radius: f64,
    /// Trials per work unit; results do not depend on it.
    pub batch_size: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { trials: 100_000, seed: 1, window_radius: 3.0, macro_window_radius: 20.0, batch_size: 2048 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        for (key, r) in [("window_radius", self.window_radius), ("macro_window_radius", self.macro_window_radius)] {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::invalid(key, format!("must be finite and positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finaliser; mixes a master seed with an index into a fresh seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
