//! Marcum Q1, the scaled Bessel I0 and the adaptive quadrature that the
//! distance laws are built on.

use hetnet_pcp::numerics::{bessel_i0, bessel_i0_scaled, integrate, marcum_q1, marcum_q1_complement, QuadratureSpec};

fn main() -> Result<(), hetnet_pcp::numerics::NumericsError> {
    println!("{:>6} {:>6} {:>14} {:>14}", "a", "b", "Q1(a,b)", "1 - Q1(a,b)");
    for (a, b) in [(0.0, 1.0), (1.0, 1.0), (2.0, 3.0), (5.0, 1.0), (30.0, 31.0), (40.0, 60.0)] {
        println!("{a:>6} {b:>6} {:>14.6e} {:>14.6e}", marcum_q1(a, b)?, marcum_q1_complement(a, b)?);
    }

    // I0 overflows past x ≈ 713; the scaled form does not
    for x in [0.0, 1.0, 10.0, 700.0, 5000.0] {
        println!("I0({x}) = {:.6e}, e^-x I0({x}) = {:.6e}", bessel_i0(x)?, bessel_i0_scaled(x)?);
    }

    // Rayleigh density on [0, inf): mass 1
    let sigma: f64 = 0.04;
    let q = integrate(|r| r / (sigma * sigma) * (-r * r / (2.0 * sigma * sigma)).exp(), 0.0, f64::INFINITY, &QuadratureSpec::default().with_scale(sigma))?;
    println!("Rayleigh mass = {:.15} (error estimate {:.1e})", q.value, q.error_estimate);
    Ok(())
}
