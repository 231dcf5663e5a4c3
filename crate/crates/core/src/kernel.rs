//! Offspring displacement densities and the distance laws that depend only
//! on cluster geometry.
//!
//! A cluster centred at distance `nu0` from the origin scatters points with
//! a planar density `f_Y`. Everything here is conditioned on the scalar
//! `nu0` only, which is exact for isotropic kernels; anisotropic custom
//! kernels are rejected at construction.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{i0_scaled_unchecked, integrate, marcum_q1, marcum_q1_complement, QuadratureSpec};

/// Planar density `(y1, y2) -> f_Y(y1, y2)` in km^-2.
pub type PlanarDensity = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

// Mass outside the support radius is below this.
const TAIL_MASS: f64 = 1e-14;
const SAMPLER_KNOTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Gaussian { sigma: f64 },
    Custom,
}

#[derive(Clone)]
struct RadialSampler {
    radii: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialSampler {
    fn sample(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (r0, r1) = (self.radii[i - 1], self.radii[i]);
        if c1 > c0 {
            r0 + (r1 - r0) * (u - c0) / (c1 - c0)
        } else {
            r0
        }
    }
}

/// Isotropic displacement density of cluster members around their parent.
#[derive(Clone)]
pub struct ClusterKernel {
    kind: KernelKind,
    pdf: PlanarDensity,
    extent: f64,
    scale: f64,
    sampler: Option<Arc<RadialSampler>>,
}

impl fmt::Debug for ClusterKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClusterKernel")
            .field("kind", &self.kind)
            .field("extent", &self.extent)
            .finish()
    }
}

fn inner_spec() -> QuadratureSpec {
    QuadratureSpec {
        relative_tolerance: 1e-10,
        absolute_tolerance: 1e-14,
        max_subdivisions: 300,
        ..QuadratureSpec::default()
    }
}

impl ClusterKernel {
    /// Thomas-process kernel: isotropic Gaussian with per-axis deviation `sigma` (km).
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        let inv = 1.0 / (2.0 * sigma * sigma);
        let norm = 1.0 / (2.0 * PI * sigma * sigma);
        Ok(Self {
            kind: KernelKind::Gaussian { sigma },
            pdf: Arc::new(move |y1, y2| norm * (-(y1 * y1 + y2 * y2) * inv).exp()),
            extent: sigma * (-2.0 * TAIL_MASS.ln()).sqrt(),
            scale: sigma,
            sampler: None,
        })
    }

    /// Kernel from an arbitrary planar density. The density must be radially
    /// symmetric and integrate to one; both are checked here.
    pub fn custom(pdf: PlanarDensity) -> Result<Self> {
        let radial = |r: f64| 2.0 * PI * r * pdf(r, 0.0);

        // the mode of r f(r) on a log grid gives a working length scale
        let mut scale = 0.0;
        let mut best = 0.0;
        for i in 0..=240 {
            let r = 10f64.powf(-6.0 + i as f64 * 0.05);
            let v = radial(r);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Kernel(format!("density is negative or non-finite at radius {r}")));
            }
            if v > best {
                best = v;
                scale = r;
            }
        }
        if best <= 0.0 {
            return Err(Error::Kernel("density vanishes everywhere".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x15_07_09);
        for _ in 0..256 {
            let r = scale * 4.0 * rng.random::<f64>();
            let a: f64 = rng.random::<f64>() * 2.0 * PI;
            let b: f64 = rng.random::<f64>() * 2.0 * PI;
            let pa = pdf(r * a.cos(), r * a.sin());
            let pb = pdf(r * b.cos(), r * b.sin());
            if (pa - pb).abs() > 1e-6 * pa.abs().max(pb.abs()) + 1e-300 {
                return Err(Error::Kernel(format!(
                    "density is not isotropic: f differs between angles {a:.3} and {b:.3} at radius {r:.4}"
                )));
            }
        }

        let spec = QuadratureSpec::with_tolerances(1e-10, 1e-16).with_scale(scale);
        let total = integrate(radial, 0.0, f64::INFINITY, &spec)?.value;
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Kernel(format!("density integrates to {total}, not 1")));
        }

        let tail = |r: f64| -> Result<f64> { Ok(integrate(radial, r, f64::INFINITY, &spec)?.value) };
        let mut hi = scale;
        while tail(hi)? > TAIL_MASS {
            hi *= 2.0;
            if hi > scale * 1e8 {
                return Err(Error::Kernel("tail mass decays too slowly".into()));
            }
        }
        let mut lo = hi / 2.0;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if tail(mid)? > TAIL_MASS {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let extent = hi;

        let mut radii = Vec::with_capacity(SAMPLER_KNOTS);
        let mut cdf = Vec::with_capacity(SAMPLER_KNOTS);
        let mut acc = 0.0;
        let mut prev = 0.0;
        radii.push(0.0);
        cdf.push(0.0);
        for i in 1..SAMPLER_KNOTS {
            let r = extent * i as f64 / (SAMPLER_KNOTS - 1) as f64;
            acc += integrate(radial, prev, r, &inner_spec())?.value;
            radii.push(r);
            cdf.push(acc);
            prev = r;
        }
        let last = acc;
        cdf.iter_mut().for_each(|c| *c /= last);

        Ok(Self {
            kind: KernelKind::Custom,
            pdf,
            extent,
            scale,
            sampler: Some(Arc::new(RadialSampler { radii, cdf })),
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Gaussian { sigma } => Some(sigma),
            KernelKind::Custom => None,
        }
    }

    /// Radius (km) holding all but `1e-14` of the displacement mass.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Characteristic displacement length (km): `sigma` for Gaussian kernels.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pdf_2d(&self, y1: f64, y2: f64) -> f64 {
        (self.pdf)(y1, y2)
    }

    /// Draws one displacement vector.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match (&self.kind, &self.sampler) {
            (KernelKind::Gaussian { sigma }, _) => {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                (sigma * a, sigma * b)
            }
            (KernelKind::Custom, Some(sampler)) => {
                let r = sampler.sample(rng.random::<f64>());
                let theta = 2.0 * PI * rng.random::<f64>();
                (r * theta.cos(), r * theta.sin())
            }
            (KernelKind::Custom, None) => unreachable!("custom kernels always carry a sampler"),
        }
    }

    /// Range of distances from the origin that a member of a cluster centred
    /// `nu0` away can take, up to the kernel's negligible tail.
    pub fn distance_support(&self, nu0: f64) -> (f64, f64) {
        ((nu0 - self.extent).max(0.0), nu0 + self.extent)
    }

    /// CDF of the member distance `U` given the centre distance, by polar
    /// quadrature of the planar density over the disk of radius `u`.
    pub fn distance_cdf_general(&self, u: f64, nu0: f64) -> Result<f64> {
        check_distance("u", u)?;
        check_distance("nu0", nu0)?;
        let (lo, hi) = self.distance_support(nu0);
        if u <= lo {
            return Ok(0.0);
        }
        let upper = u.min(hi);
        let mut failure = None;
        let q = integrate(
            |rho| match self.distance_pdf_general(rho, nu0) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            lo,
            upper,
            &inner_spec(),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(q.value.clamp(0.0, 1.0))
    }

    /// CDF of `U` as the Cartesian double integral over the disk of radius
    /// `u` with the cluster centre placed at `(nu0, 0)`.
    pub fn distance_cdf_cartesian(&self, u: f64, nu0: f64) -> Result<f64> {
        check_distance("u", u)?;
        check_distance("nu0", nu0)?;
        if u == 0.0 {
            return Ok(0.0);
        }
        let spec = inner_spec();
        let mut failure = None;
        let z1_lo = (-u).max(nu0 - self.extent);
        let z1_hi = u.min(nu0 + self.extent);
        if z1_hi <= z1_lo {
            return Ok(0.0);
        }
        let q = integrate(
            |z1| {
                let half = (u * u - z1 * z1).max(0.0).sqrt().min(self.extent);
                match integrate(|z2| self.pdf_2d(z1 - nu0, z2), -half, half, &spec) {
                    Ok(q) => q.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            z1_lo,
            z1_hi,
            &spec,
        )?;
        if let Some(e) = failure {
            return Err(e.into());
        }
        Ok(q.value.clamp(0.0, 1.0))
    }

    /// Density of `U` from the line integral of the planar density around the
    /// circle of radius `u`, written in the angle `z1 = u cos(theta)`.
    pub fn distance_pdf_general(&self, u: f64, nu0: f64) -> Result<f64> {
        check_distance("u", u)?;
        check_distance("nu0", nu0)?;
        if u == 0.0 {
            return Ok(0.0);
        }
        // only angles whose point lies within `extent` of the centre contribute
        let e = self.extent;
        let theta_max = if nu0 == 0.0 {
            if u > e {
                return Ok(0.0);
            }
            PI
        } else {
            let c = (u * u + nu0 * nu0 - e * e) / (2.0 * u * nu0);
            if c >= 1.0 {
                return Ok(0.0);
            }
            c.max(-1.0).acos()
        };
        let q = integrate(
            |theta| {
                let (s, c) = theta.sin_cos();
                self.pdf_2d(u * c - nu0, u * s) + self.pdf_2d(u * c - nu0, -u * s)
            },
            0.0,
            theta_max,
            &inner_spec(),
        )?;
        Ok((u * q.value).max(0.0))
    }

    /// CDF of the distance `U` from the origin to a member of a cluster
    /// centred `nu0` away. Gaussian kernels use `1 - Q1(nu0/sigma, u/sigma)`.
    pub fn distance_cdf(&self, u: f64, nu0: f64) -> Result<f64> {
        match self.kind {
            KernelKind::Gaussian { sigma } => {
                check_distance("u", u)?;
                check_distance("nu0", nu0)?;
                Ok(marcum_q1_complement(nu0 / sigma, u / sigma)?)
            }
            KernelKind::Custom => self.distance_cdf_general(u, nu0),
        }
    }

    /// `1 - F_U(u | nu0)`, computed directly where it is small.
    pub fn distance_sf(&self, u: f64, nu0: f64) -> Result<f64> {
        match self.kind {
            KernelKind::Gaussian { sigma } => {
                check_distance("u", u)?;
                check_distance("nu0", nu0)?;
                Ok(marcum_q1(nu0 / sigma, u / sigma)?)
            }
            KernelKind::Custom => {
                let cdf = self.distance_cdf_general(u, nu0)?;
                if cdf < 0.5 {
                    return Ok(1.0 - cdf);
                }
                let (_, hi) = self.distance_support(nu0);
                if u >= hi {
                    return Ok(0.0);
                }
                let mut failure = None;
                let q = integrate(
                    |rho| match self.distance_pdf_general(rho, nu0) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    },
                    u,
                    hi,
                    &inner_spec(),
                )?;
                if let Some(e) = failure {
                    return Err(e);
                }
                Ok(q.value.clamp(0.0, 1.0))
            }
        }
    }

    /// Density of `U`. Gaussian kernels use the Rician closed form with a
    /// scaled Bessel factor, finite for any `u nu0 / sigma^2`.
    pub fn distance_pdf(&self, u: f64, nu0: f64) -> Result<f64> {
        match self.kind {
            KernelKind::Gaussian { sigma } => {
                check_distance("u", u)?;
                check_distance("nu0", nu0)?;
                Ok(rician_pdf(u, nu0, sigma))
            }
            KernelKind::Custom => self.distance_pdf_general(u, nu0),
        }
    }

    /// Density of the distance `V0` between the typical user and its own
    /// cluster centre (this kernel plays the role of the user kernel).
    pub fn user_center_distance_pdf(&self, nu0: f64) -> Result<f64> {
        match self.kind {
            KernelKind::Gaussian { sigma } => {
                check_distance("nu0", nu0)?;
                let s2 = sigma * sigma;
                Ok(nu0 / s2 * (-0.5 * nu0 * nu0 / s2).exp())
            }
            KernelKind::Custom => self.distance_pdf_general(nu0, 0.0),
        }
    }

    /// Density of the distance from the origin to a member of a closed-access
    /// cluster centred `nu` away. Same law as [`ClusterKernel::distance_pdf`].
    pub fn intercluster_distance_pdf(&self, t: f64, nu: f64) -> Result<f64> {
        self.distance_pdf(t, nu)
    }
}

#[inline]
pub(crate) fn rician_pdf(u: f64, nu0: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let d = u - nu0;
    u / s2 * (-0.5 * d * d / s2).exp() * i0_scaled_unchecked(u * nu0 / s2)
}

fn check_distance(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be a finite non-negative distance, got {v}")))
    }
}

/// One conditional or unconditional distance law, `t -> (pdf, cdf)`.
pub trait DistanceLaw {
    fn pdf(&self, t: f64) -> Result<f64>;
    fn cdf(&self, t: f64) -> Result<f64>;
}

/// Law of `U` given the centre distance.
#[derive(Debug, Clone, Copy)]
pub struct MemberDistance<'a> {
    pub kernel: &'a ClusterKernel,
    pub nu0: f64,
}

impl DistanceLaw for MemberDistance<'_> {
    fn pdf(&self, t: f64) -> Result<f64> {
        self.kernel.distance_pdf(t, self.nu0)
    }
    fn cdf(&self, t: f64) -> Result<f64> {
        self.kernel.distance_cdf(t, self.nu0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_as_custom(sigma: f64) -> ClusterKernel {
        let inv = 1.0 / (2.0 * sigma * sigma);
        let norm = 1.0 / (2.0 * PI * sigma * sigma);
        ClusterKernel::custom(Arc::new(move |a, b| norm * (-(a * a + b * b) * inv).exp())).unwrap()
    }

    #[test]
    fn cdf_at_zero_radius() {
        let k = ClusterKernel::gaussian(0.5).unwrap();
        assert_eq!(k.distance_cdf_general(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(k.distance_cdf(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(k.distance_cdf_cartesian(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn general_cdf_matches_marcum_closed_form() {
        let k = ClusterKernel::gaussian(1.0).unwrap();
        let general = k.distance_cdf_general(2.0, 1.0).unwrap();
        let closed = 1.0 - marcum_q1(1.0, 2.0).unwrap();
        assert!((general - closed).abs() < 1e-6, "{general} vs {closed}");
        let cart = k.distance_cdf_cartesian(2.0, 1.0).unwrap();
        assert!((cart - closed).abs() < 1e-6, "{cart} vs {closed}");
    }

    #[test]
    fn total_mass_reached() {
        let k = ClusterKernel::gaussian(0.5).unwrap();
        let v = k.distance_cdf_general(20.0 * 0.5 + 1.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rician_reduces_to_rayleigh() {
        let k = ClusterKernel::gaussian(0.7).unwrap();
        for u in [0.1f64, 0.5, 1.3] {
            let want = u / 0.49 * (-u * u / (2.0 * 0.49)).exp();
            assert!((k.distance_pdf(u, 0.0).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rician_at_unit_point() {
        let k = ClusterKernel::gaussian(1.0).unwrap();
        let want = (-1.0f64).exp() * crate::numerics::bessel_i0(1.0).unwrap();
        assert!((k.distance_pdf(1.0, 1.0).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.465_759_607).abs() < 1e-8);
    }

    #[test]
    fn rician_survives_large_product() {
        let k = ClusterKernel::gaussian(0.01).unwrap();
        // u nu0 / sigma^2 = 1e4, far past I0 overflow
        let v = k.distance_pdf(10.0, 10.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let approx = 1.0 / (0.01 * (2.0 * PI).sqrt());
        assert!((v - approx).abs() / approx < 1e-3);
    }

    #[test]
    fn custom_path_matches_gaussian() {
        let fast = ClusterKernel::gaussian(0.6).unwrap();
        let slow = gaussian_as_custom(0.6);
        let a = fast.distance_pdf(1.3, 0.7).unwrap();
        let b = slow.distance_pdf(1.3, 0.7).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        let ca = fast.distance_cdf(1.3, 0.7).unwrap();
        let cb = slow.distance_cdf(1.3, 0.7).unwrap();
        assert!((ca - cb).abs() < 1e-6);
        let sa = fast.distance_sf(2.5, 0.7).unwrap();
        let sb = slow.distance_sf(2.5, 0.7).unwrap();
        assert!((sa - sb).abs() < 1e-8);
        assert!((slow.extent() - fast.extent()).abs() / fast.extent() < 1e-3);
    }

    #[test]
    fn user_distance_is_rayleigh() {
        let k = ClusterKernel::gaussian(1.0).unwrap();
        assert_eq!(k.user_center_distance_pdf(0.0).unwrap(), 0.0);
        assert!((k.user_center_distance_pdf(1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        let q = integrate(
            |v| k.user_center_distance_pdf(v).unwrap(),
            0.0,
            f64::INFINITY,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-8);
        let custom = gaussian_as_custom(1.0);
        assert!((custom.user_center_distance_pdf(1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn intercluster_law_is_member_law() {
        let k = ClusterKernel::gaussian(1.0).unwrap();
        assert_eq!(k.intercluster_distance_pdf(2.0, 3.0).unwrap(), k.distance_pdf(2.0, 3.0).unwrap());
        for nu in [0.1, 1.0, 5.0] {
            let q = integrate(
                |t| k.intercluster_distance_pdf(t, nu).unwrap(),
                0.0,
                f64::INFINITY,
                &QuadratureSpec::default().with_scale(nu + 1.0),
            )
            .unwrap();
            assert!((q.value - 1.0).abs() < 1e-8, "nu={nu}: {}", q.value);
        }
    }

    #[test]
    fn rejects_anisotropic_and_unnormalized() {
        let aniso = ClusterKernel::custom(Arc::new(|a: f64, b: f64| {
            (-(a * a + 4.0 * b * b) / 2.0).exp() / PI
        }));
        assert!(matches!(aniso, Err(Error::Kernel(_))));
        let heavy = ClusterKernel::custom(Arc::new(|a: f64, b: f64| 2.0 * (-(a * a + b * b) / 2.0).exp() / (2.0 * PI)));
        assert!(matches!(heavy, Err(Error::Kernel(_))));
        assert!(ClusterKernel::gaussian(0.0).is_err());
    }

    #[test]
    fn custom_sampler_reproduces_radial_law() {
        let k = gaussian_as_custom(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let mean_r2: f64 = (0..n)
            .map(|_| {
                let (a, b) = k.sample_offset(&mut rng);
                a * a + b * b
            })
            .sum::<f64>()
            / n as f64;
        // E[|Y|^2] = 2 sigma^2
        assert!((mean_r2 - 2.0).abs() < 0.06, "{mean_r2}");
    }

    #[test]
    fn rejects_negative_distances() {
        let k = ClusterKernel::gaussian(1.0).unwrap();
        assert!(k.distance_pdf(-1.0, 0.0).is_err());
        assert!(k.distance_cdf(1.0, -0.1).is_err());
    }
}
