use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Uniform point in the disk of radius `radius`, by rejection from the square.
pub fn sample_disk_point<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> (f64, f64) {
    loop {
        let a = 2.0 * rng.random::<f64>() - 1.0;
        let b = 2.0 * rng.random::<f64>() - 1.0;
        if a * a + b * b <= 1.0 {
            return (radius * a, radius * b);
        }
    }
}

/// Appends a homogeneous PPP of density `lambda` on the disk of radius `radius` to `out`.
pub fn sample_ppp_disk<R: Rng + ?Sized>(lambda: f64, radius: f64, rng: &mut R, out: &mut Vec<(f64, f64)>) {
    let mean = lambda * std::f64::consts::PI * radius * radius;
    if mean <= 0.0 {
        return;
    }
    let n = Poisson::new(mean).expect("finite positive mean").sample(rng) as usize;
    out.reserve(n);
    for _ in 0..n {
        out.push(sample_disk_point(radius, rng));
    }
}

/// `d^-α` from the squared distance `d2`.
#[inline]
pub fn path_gain(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn disk_points_are_uniform_in_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 40_000;
        let inner = (0..n)
            .filter(|_| {
                let (a, b) = sample_disk_point(2.0, &mut rng);
                assert!(a * a + b * b <= 4.0);
                a * a + b * b <= 1.0
            })
            .count();
        // a quarter of the area lies within half the radius
        assert!((inner as f64 / n as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn gain_fast_path_matches_powf() {
        for d2 in [0.01, 1.0, 7.5] {
            assert!((path_gain(d2, 4.0) - d2.powf(-2.0)).abs() <= 1e-12 * path_gain(d2, 4.0));
        }
        assert!((path_gain(4.0, 3.0) - 0.125).abs() < 1e-15);
    }
}
