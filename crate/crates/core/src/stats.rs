//! Confidence intervals and goodness-of-fit tests used to compare the
//! simulator with the analytic laws.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval `(lo, hi)` for `successes` out of `n` at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    assert!(n > 0, "empty sample");
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Half-width of the Wilson interval.
pub fn wilson_half_width(successes: u64, n: u64) -> f64 {
    let (lo, hi) = wilson_interval(successes, n);
    0.5 * (hi - lo)
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`. Sorts in place.
pub fn ks_statistic(samples: &mut [f64], mut cdf: impl FnMut(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a one-sample KS statistic `d` from `n` samples.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    kolmogorov_sf(lambda)
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    let dist = ChiSquared::new(dof).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

/// Goodness of fit of observed `counts` to cell probabilities `probs`.
/// Cells with expected count below 5 are pooled into their neighbour.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    let n = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        obs += c as f64;
        exp += p * n;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => cells.push((obs, exp)),
        }
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() as f64 - 1.0).max(1.0);
    ChiSquare { statistic, dof, p_value: chi_square_sf(statistic, dof) }
}

/// Chi-square test of independence for an `r × c` contingency table.
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquare {
    let rows = table.len();
    let cols = table[0].len();
    let row_tot: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_tot: Vec<f64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let n: f64 = row_tot.iter().sum();
    let mut statistic = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let e = row_tot[i] * col_tot[j] / n;
            if e > 0.0 {
                let d = table[i][j] as f64 - e;
                statistic += d * d / e;
            }
        }
    }
    let dof = ((rows - 1) * (cols - 1)) as f64;
    ChiSquare { statistic, dof, p_value: chi_square_sf(statistic, dof) }
}

/// Mean and standard error of a sample.
pub fn mean_and_standard_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_831).abs() < 1e-5 && (hi - 0.596_169).abs() < 1e-5);
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_528).abs() < 1e-5);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // standard critical values
        assert!((kolmogorov_sf(1.358_1) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut xs: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        let d = ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(ks_p_value(d, xs.len()) > 0.01);
        let mut ys: Vec<f64> = xs.iter().map(|x| x * 0.97).collect();
        let d = ks_statistic(&mut ys, |x| x.clamp(0.0, 1.0));
        assert!(ks_p_value(d, ys.len()) < 1e-6);
    }

    #[test]
    fn chi_square_gof_behaviour() {
        let probs = [0.25; 4];
        let fair = chi_square_gof(&[2500, 2490, 2510, 2500], &probs);
        assert!(fair.p_value > 0.5);
        assert_eq!(fair.dof, 3.0);
        let skew = chi_square_gof(&[2800, 2400, 2400, 2400], &probs);
        assert!(skew.p_value < 1e-6);
        // pooled tail
        let pooled = chi_square_gof(&[990, 10, 0], &[0.99, 0.009_9, 0.000_1]);
        assert_eq!(pooled.dof, 1.0);
    }

    #[test]
    fn independence_table() {
        let t = vec![vec![100, 100], vec![100, 100]];
        assert!(chi_square_independence(&t).p_value > 0.99);
        let t = vec![vec![200, 10], vec![10, 200]];
        assert!(chi_square_independence(&t).p_value < 1e-10);
    }
}
