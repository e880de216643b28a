//! Gas model, transport scales and equilibrium sampling.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GasError {
    #[error("invalid gas model: {0}")]
    InvalidModel(String),
    #[error("degenerate state: theta = {theta}, rho = {rho}")]
    Degenerate { theta: f64, rho: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    Maxwell,
    /// Hard spheres, approximated by Maxwell-type relaxation with `mu ~ sqrt(T)`.
    HardSphereApprox,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    pub molecular_mass: f64,
    pub mu0: f64,
    pub t0: f64,
    pub omega: f64,
    pub kb: f64,
    pub interaction: Interaction,
}

impl GasModel {
    pub fn new(
        molecular_mass: f64,
        mu0: f64,
        t0: f64,
        omega: f64,
        kb: f64,
        interaction: Interaction,
    ) -> Result<Self, GasError> {
        let omega = match interaction {
            Interaction::HardSphereApprox => 0.5,
            Interaction::Maxwell => omega,
        };
        let g = GasModel {
            molecular_mass,
            mu0,
            t0,
            omega,
            kb,
            interaction,
        };
        g.validate()?;
        Ok(g)
    }

    /// Nondimensional gas with `m = kB = 1`, so `T` and `theta` coincide.
    pub fn nondimensional(mu0: f64, theta0: f64, interaction: Interaction) -> Self {
        let omega = match interaction {
            Interaction::Maxwell => 1.0,
            Interaction::HardSphereApprox => 0.5,
        };
        GasModel::new(1.0, mu0, theta0, omega, 1.0, interaction).expect("valid nondimensional gas")
    }

    /// Argon in SI units with a hard-sphere viscosity law.
    pub fn argon_si() -> Self {
        GasModel::new(
            6.6335209e-26,
            2.117e-5,
            273.0,
            0.5,
            1.380649e-23,
            Interaction::HardSphereApprox,
        )
        .expect("valid argon model")
    }

    pub fn validate(&self) -> Result<(), GasError> {
        let bad = |m: &str| Err(GasError::InvalidModel(m.to_string()));
        if !(self.mu0 > 0.0) {
            return bad("mu0 must be positive");
        }
        if !(self.t0 > 0.0) {
            return bad("T0 must be positive");
        }
        if !(self.molecular_mass > 0.0) || !(self.kb > 0.0) {
            return bad("molecular mass and kB must be positive");
        }
        if !(0.5..=1.0).contains(&self.omega) {
            return bad("omega must lie in [0.5, 1]");
        }
        if self.interaction == Interaction::HardSphereApprox && self.omega != 0.5 {
            return bad("hard-sphere gas requires omega = 0.5");
        }
        Ok(())
    }

    pub fn temperature(&self, theta: f64) -> f64 {
        self.molecular_mass * theta / self.kb
    }

    pub fn viscosity(&self, theta: f64) -> f64 {
        self.mu0 * (self.temperature(theta) / self.t0).powf(self.omega)
    }

    /// Hard-sphere mean free path `16 mu / (5 rho sqrt(2 pi theta))`.
    pub fn mean_free_path(&self, rho: f64, theta: f64) -> f64 {
        16.0 * self.viscosity(theta) / (5.0 * rho * (2.0 * std::f64::consts::PI * theta).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportScales {
    pub mu: f64,
    pub p: f64,
    pub tau: f64,
}

/// Viscosity, pressure and the relaxation time `tau = 2 mu / p`.
pub fn transport_scales(theta: f64, rho: f64, model: &GasModel) -> Result<TransportScales, GasError> {
    if !(theta > 0.0) || !(rho > 0.0) {
        return Err(GasError::Degenerate { theta, rho });
    }
    let p = rho * theta;
    let mu = model.viscosity(theta);
    Ok(TransportScales {
        mu,
        p,
        tau: 2.0 * mu / p,
    })
}

/// `count` velocities drawn from the Gaussian with mean `u` and covariance `theta I`.
pub fn sample_maxwellian<R: Rng + ?Sized>(
    u: [f64; 3],
    theta: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 3]>, GasError> {
    if !(theta > 0.0) {
        return Err(GasError::Degenerate { theta, rho: 1.0 });
    }
    let s = theta.sqrt();
    Ok((0..count)
        .map(|_| {
            let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            [u[0] + s * z[0], u[1] + s * z[1], u[2] + s * z[2]]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

    #[test]
    fn reference_temperature_gives_mu0() {
        let g = GasModel::argon_si();
        let theta = g.kb * g.t0 / g.molecular_mass;
        let s = transport_scales(theta, 1.0, &g).unwrap();
        assert_relative_eq!(s.mu, g.mu0, max_relative = 1e-14);
    }

    #[test]
    fn nondimensional_scales() {
        let g = GasModel::nondimensional(1.0, 1.0, Interaction::Maxwell);
        let s = transport_scales(1.0, 1.0, &g).unwrap();
        assert_eq!((s.p, s.tau), (1.0, 2.0));
    }

    #[test]
    fn hard_sphere_viscosity_law() {
        let g = GasModel::nondimensional(0.7, 1.0, Interaction::HardSphereApprox);
        assert_relative_eq!(g.viscosity(4.0), 1.4, max_relative = 1e-14);
    }

    #[test]
    fn hard_sphere_forces_omega() {
        let g = GasModel::new(1.0, 1.0, 1.0, 0.8, 1.0, Interaction::HardSphereApprox).unwrap();
        assert_eq!(g.omega, 0.5);
        let mut bad = g;
        bad.omega = 0.7;
        assert!(bad.validate().is_err());
        assert!(GasModel::new(1.0, 1.0, 1.0, 1.2, 1.0, Interaction::Maxwell).is_err());
        assert!(GasModel::new(1.0, 0.0, 1.0, 1.0, 1.0, Interaction::Maxwell).is_err());
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let g = GasModel::nondimensional(1.0, 1.0, Interaction::Maxwell);
        assert!(transport_scales(0.0, 1.0, &g).is_err());
        assert!(transport_scales(1.0, -1.0, &g).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_maxwellian([0.0; 3], 0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn density_scaling() {
        let g = GasModel::nondimensional(1.0, 1.0, Interaction::HardSphereApprox);
        let a = transport_scales(1.3, 0.8, &g).unwrap();
        let b = transport_scales(1.3, 0.8 * 5.0, &g).unwrap();
        assert_relative_eq!(b.p, 5.0 * a.p, max_relative = 1e-14);
        assert_relative_eq!(b.tau, a.tau / 5.0, max_relative = 1e-14);
        assert_eq!(a.mu, b.mu);
    }

    #[test]
    fn maxwellian_sample_moments() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = sample_maxwellian([0.0; 3], 1.0, n, &mut rng).unwrap();
        let nf = n as f64;
        for i in 0..3 {
            let mean = v.iter().map(|x| x[i]).sum::<f64>() / nf;
            let var = v.iter().map(|x| (x[i] - mean).powi(2)).sum::<f64>() / nf;
            assert!(mean.abs() < 4.0 / nf.sqrt());
            assert!((var - 1.0).abs() < 0.05);
        }
        let r2 = |x: &[f64; 3]| x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let m4 = v.iter().map(|x| r2(x).powi(2)).sum::<f64>() / nf;
        let m6 = v.iter().map(|x| r2(x).powi(3)).sum::<f64>() / nf;
        assert!((m4 / 15.0 - 1.0).abs() < 0.05);
        assert!((m6 / 105.0 - 1.0).abs() < 0.10);
    }

    #[test]
    fn maxwellian_chi_square_normality() {
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = sample_maxwellian([0.5, -1.0, 2.0], 2.0, n, &mut rng).unwrap();
        let bins = 50;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let chi = ChiSquared::new((bins - 1) as f64).unwrap();
        for i in 0..3 {
            let mut counts = vec![0usize; bins];
            let u = [0.5, -1.0, 2.0][i];
            for x in &v {
                let p = normal.cdf((x[i] - u) / 2f64.sqrt());
                counts[((p * bins as f64) as usize).min(bins - 1)] += 1;
            }
            let e = n as f64 / bins as f64;
            let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
            assert!(1.0 - chi.cdf(stat) > 1e-3, "component {i}: chi2 = {stat}");
        }
    }
}
