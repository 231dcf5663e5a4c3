//! Laws of the number of simultaneously active SBSs in the representative
//! cluster, which holds exactly `n_s0` SBSs.

use rand::Rng;

/// Normalised weights `P(|B| = l)` for `l = 0..=n_max`.
///
/// Without serving conditioning this is Poisson(`nbar`) restricted to
/// `0..=n_max`. With it (the user is served by one of these SBSs, which is
/// therefore active) the count is `1 + Poisson(nbar)` restricted to
/// `1..=n_max`, so entry 0 is zero. Weights are formed in log space.
pub fn active_count_weights(nbar: f64, n_max: u32, conditioned_on_serving: bool) -> Vec<f64> {
    assert!(nbar >= 0.0 && nbar.is_finite(), "nbar must be finite and non-negative");
    let n = n_max as usize;
    let shift = usize::from(conditioned_on_serving);
    let mut logw = vec![f64::NEG_INFINITY; n + 1];
    let ln_nbar = nbar.ln();
    let mut ln_fact = 0.0;
    for (k, slot) in logw.iter_mut().enumerate().skip(shift) {
        let j = k - shift;
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        *slot = if j == 0 { 0.0 } else { j as f64 * ln_nbar - ln_fact };
    }
    let peak = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logw.iter().map(|&l| (l - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Inverse-CDF draw from [`active_count_weights`].
pub fn sample_truncated_poisson<R: Rng + ?Sized>(
    nbar: f64,
    n_max: u32,
    conditioned_on_serving: bool,
    rng: &mut R,
) -> u32 {
    let w = active_count_weights(nbar, n_max, conditioned_on_serving);
    sample_from_weights(&w, rng)
}

pub(crate) fn sample_from_weights<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in w.iter().enumerate() {
        acc += p;
        if u < acc {
            return k as u32;
        }
    }
    // rounding: fall back to the last index with positive mass
    w.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    #[test]
    fn matches_direct_formula() {
        let w = active_count_weights(3.0, 10, false);
        let raw: Vec<f64> = (0..=10).map(|l| 3f64.powi(l) / factorial(l as u32)).collect();
        let z: f64 = raw.iter().sum();
        for (a, b) in w.iter().zip(&raw) {
            assert!((a - b / z).abs() < 1e-15);
        }
        let ws = active_count_weights(3.0, 10, true);
        assert_eq!(ws[0], 0.0);
        let raw: Vec<f64> = (1..=10).map(|l| 3f64.powi(l - 1) / factorial(l as u32 - 1)).collect();
        let z: f64 = raw.iter().sum();
        for (a, b) in ws[1..].iter().zip(&raw) {
            assert!((a - b / z).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_mean_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(active_count_weights(0.0, 5, false)[0], 1.0);
        assert_eq!(active_count_weights(0.0, 5, true)[1], 1.0);
        for _ in 0..100 {
            assert_eq!(sample_truncated_poisson(1e-12, 5, false, &mut rng), 0);
            assert_eq!(sample_truncated_poisson(1e-12, 5, true, &mut rng), 1);
        }
    }

    #[test]
    fn stable_for_large_caps() {
        let w = active_count_weights(25.0, 30, false);
        assert!(w.iter().all(|x| x.is_finite()));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let w = active_count_weights(500.0, 200, true);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
