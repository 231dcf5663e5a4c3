pub mod activity;
pub mod association;
pub mod cli;
pub mod coverage;
pub mod error;
pub mod kernel;
pub mod laplace;
pub mod montecarlo;
pub mod numerics;
pub mod params;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
pub use kernel::{ClusterKernel, KernelKind};
pub use params::{AssociationPolicy, Model, NetworkParams, RawParams, Tier};
