//! Special functions and quadrature. Nothing in here knows about networks.

mod bessel;
mod interp;
mod legendre;
mod marcum;
mod quadrature;

pub use bessel::{bessel_i0, bessel_i0_scaled};
pub(crate) use bessel::i0_scaled_unchecked;
pub use interp::MonotoneCubic;
pub use legendre::GaussLegendre;
pub use marcum::{marcum_q1, marcum_q1_complement};
pub use quadrature::{integrate, try_integrate, Quadrature, QuadratureSpec, UpperTruncation};

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    NotConverged { estimate: f64, error_bound: f64 },
    #[error("integrand returned {value} at {at}")]
    NonFinite { at: f64, value: f64 },
}

/// `sinc(2/alpha)` with the normalized convention `sinc(x) = sin(pi x) / (pi x)`,
/// i.e. `sin(2 pi / alpha) / (2 pi / alpha)`. `alpha = 4` gives `2 / pi`.
pub fn sinc_alpha(alpha: f64) -> Result<f64, NumericsError> {
    if alpha.is_nan() || alpha <= 2.0 {
        return Err(NumericsError::Domain(format!("path-loss exponent must exceed 2, got {alpha}")));
    }
    if alpha.is_infinite() {
        return Ok(1.0);
    }
    let arg = 2.0 * PI / alpha;
    Ok(arg.sin() / arg)
}
