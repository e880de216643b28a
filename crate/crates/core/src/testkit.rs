//! Brute-force oracles: tensor Gauss-Hermite quadrature over Gaussian
//! mixtures, direct weak-form projection of a drift, and rate fitting.
//!
//! Nothing here goes through the moment tables or the polynomial assembler;
//! drifts are evaluated pointwise from their coefficients.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::closure::{CubicCoefficients, DriftCoefficients};
use crate::poly::{mixture_central_moments, GaussianComponent, MomentSet, PolyError, Polynomial};

/// Nodes per axis.
pub const NODES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("polynomial degree {0} exceeds the quadrature bound {max}", max = 2 * NODES - 1)]
    DegreeBound(u32),
    #[error("invalid density: {0}")]
    InvalidDensity(&'static str),
    #[error("series value {value} at index {index} is not positive")]
    NonPositive { index: usize, value: f64 },
    #[error("window needs at least two points")]
    ShortWindow,
}

/// Probabilists' Gauss-Hermite rule (weight `exp(-x^2/2)/sqrt(2 pi)`) by the
/// Golub-Welsch eigenvalue method. Weights sum to one.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(n, n, |i, j| if i + 1 == j || j + 1 == i { (i.max(j) as f64).sqrt() } else { 0.0 });
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x, w / total)).unzip()
}

/// Weighted sum of Gaussians; total mass `rho` is the sum of the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticDensity {
    pub components: Vec<GaussianComponent>,
}

impl AnalyticDensity {
    pub fn gaussian(rho: f64, mean: Vector3<f64>, cov: Matrix3<f64>) -> Result<Self, OracleError> {
        Self::mixture(vec![GaussianComponent { weight: rho, mean, cov }])
    }

    pub fn mixture(components: Vec<GaussianComponent>) -> Result<Self, OracleError> {
        if components.is_empty() || components.iter().any(|c| !(c.weight > 0.0)) {
            return Err(OracleError::InvalidDensity("weights must be positive"));
        }
        if components.iter().any(|c| c.cov.cholesky().is_none()) {
            return Err(OracleError::InvalidDensity("component covariance not SPD"));
        }
        Ok(AnalyticDensity { components })
    }

    pub fn rho(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn mean(&self) -> Vector3<f64> {
        self.components.iter().map(|c| c.mean * c.weight).sum::<Vector3<f64>>() / self.rho()
    }

    /// Analytic central moments up to order 8.
    pub fn moments(&self) -> Result<MomentSet, PolyError> {
        mixture_central_moments(&self.components, 8)
    }

    /// `int g(v - U) f(v) dv` by quadrature; `g` receives the fluctuating velocity.
    pub fn integrate<F: FnMut([f64; 3]) -> f64>(&self, mut g: F) -> f64 {
        let (x, w) = gauss_hermite(NODES);
        let u = self.mean();
        let mut total = 0.0;
        for comp in &self.components {
            let l = comp.cov.cholesky().expect("checked on construction").l();
            let shift = comp.mean - u;
            let mut acc = 0.0;
            for a in 0..NODES {
                for b in 0..NODES {
                    for c in 0..NODES {
                        let z = Vector3::new(x[a], x[b], x[c]);
                        let v = shift + l * z;
                        acc += w[a] * w[b] * w[c] * g([v[0], v[1], v[2]]);
                    }
                }
            }
            total += comp.weight * acc;
        }
        total
    }
}

/// `<P(v'), f>` by quadrature.
pub fn quadrature_expectation(density: &AnalyticDensity, p: &Polynomial) -> Result<f64, OracleError> {
    if p.degree() > 2 * NODES as u32 - 1 {
        return Err(OracleError::DegreeBound(p.degree()));
    }
    Ok(density.integrate(|v| p.eval(v)))
}

/// Drift written out from the model's defining formula, with
/// `c1 = c1_sym / 2` so that `(c1_ij + c1_ji) = c1_sym_ij`.
pub fn reference_drift(c: &DriftCoefficients, v: [f64; 3]) -> [f64; 3] {
    let c1 = c.c1_sym / 2.0;
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    let mut out = [0.0; 3];
    for i in 0..3 {
        let mut a = -v[i] / c.tau + c.c0[i];
        for j in 0..3 {
            a += (c1[(i, j)] + c1[(j, i)]) * v[j] + 2.0 * c.c2[j] * v[i] * v[j];
        }
        a += c.c2[i] * norm2 + 3.0 * c.c3 * v[i] * norm2 - c.c4 * v[i] * norm2.powi(2);
        out[i] = a;
    }
    out
}

/// A drift and its diffusion coefficient, for projections.
pub trait ProjectedDrift {
    fn drift(&self, v: [f64; 3]) -> [f64; 3];
    fn diffusion(&self) -> f64;
}

impl ProjectedDrift for DriftCoefficients {
    fn drift(&self, v: [f64; 3]) -> [f64; 3] {
        reference_drift(self, v)
    }
    fn diffusion(&self) -> f64 {
        self.diffusion
    }
}

impl ProjectedDrift for CubicCoefficients {
    fn drift(&self, v: [f64; 3]) -> [f64; 3] {
        let r2: f64 = v.iter().map(|x| x * x).sum();
        std::array::from_fn(|i| {
            let lin: f64 = (0..3).map(|j| self.c[(i, j)] * v[j]).sum();
            -v[i] / self.tau + lin + self.gamma[i] * (r2 - 3.0 * self.theta)
                + self.lambda * (v[i] * r2 - 2.0 * self.q_over_rho[i])
        })
    }
    fn diffusion(&self) -> f64 {
        self.diffusion
    }
}

/// Weak projection `<H, S[f]> = <grad H . A, f> + D <Lap H, f>`.
pub fn operator_projection<A: ProjectedDrift>(
    density: &AnalyticDensity,
    drift: &A,
    h: &Polynomial,
) -> Result<f64, OracleError> {
    let grad = h.gradient();
    let lap = h.laplacian();
    let bound = grad.iter().map(Polynomial::degree).max().unwrap() + 5;
    if bound > 2 * NODES as u32 - 1 {
        return Err(OracleError::DegreeBound(bound));
    }
    let d = drift.diffusion();
    Ok(density.integrate(|v| {
        let a = drift.drift(v);
        (0..3).map(|i| grad[i].eval(v) * a[i]).sum::<f64>() + d * lap.eval(v)
    }))
}

/// `<div A, f>` through Stein's identity, `E_k[div A] = E_k[A . C_k^-1 (v - mu_k)]`,
/// which needs no derivative of the drift.
pub fn stein_divergence<F: Fn([f64; 3]) -> [f64; 3]>(density: &AnalyticDensity, drift: F) -> f64 {
    let u = density.mean();
    let mut total = 0.0;
    for comp in &density.components {
        let single = AnalyticDensity { components: vec![comp.clone()] };
        let prec = comp.cov.try_inverse().expect("SPD");
        let shift = comp.mean - u;
        // `single` is centred on its own mean; map back to the mixture's fluctuation.
        total += single.integrate(|z| {
            let vp = [z[0] + shift[0], z[1] + shift[1], z[2] + shift[2]];
            let a = Vector3::from(drift(vp));
            a.dot(&(prec * Vector3::from(z)))
        });
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub std_error: f64,
}

/// Exponential rate of a positive series by least squares on `ln y` over
/// `series[window]`, sampled every `dt`.
pub fn fd_rate(series: &[f64], dt: f64, window: std::ops::Range<usize>) -> Result<RateEstimate, OracleError> {
    let pts = &series[window.clone()];
    if pts.len() < 2 {
        return Err(OracleError::ShortWindow);
    }
    if let Some((k, &v)) = pts.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(OracleError::NonPositive { index: window.start + k, value: v });
    }
    let n = pts.len() as f64;
    let t: Vec<f64> = (0..pts.len()).map(|k| k as f64 * dt).collect();
    let y: Vec<f64> = pts.iter().map(|v| v.ln()).collect();
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    let sxy: f64 = t.iter().zip(&y).map(|(x, v)| (x - tm) * (v - ym)).sum();
    let slope = sxy / sxx;
    let resid: f64 = t.iter().zip(&y).map(|(x, v)| (v - ym - slope * (x - tm)).powi(2)).sum();
    let std_error = if pts.len() > 2 { (resid / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateEstimate { rate: slope, std_error })
}

/// Random SPD matrix with eigenvalues in `[lo, hi]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Matrix3<f64> {
    let a = Matrix3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let q = a.qr().q();
    let d = Matrix3::from_diagonal(&Vector3::from_fn(|_, _| rng.random_range(lo..hi)));
    let m = q * d * q.transpose();
    (m + m.transpose()) / 2.0
}

/// Random two- or three-component mixture with `theta` of order one and a
/// non-zero heat flux.
pub fn random_mixture<R: Rng + ?Sized>(rng: &mut R) -> AnalyticDensity {
    let k = rng.random_range(2..=3);
    let components = (0..k)
        .map(|_| GaussianComponent {
            weight: rng.random_range(0.2..1.0),
            mean: Vector3::from_fn(|_, _| rng.random_range(-0.8..0.8)),
            cov: random_spd(rng, 0.4, 1.6),
        })
        .collect();
    AnalyticDensity::mixture(components).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::gaussian_central_moments;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> AnalyticDensity {
        AnalyticDensity::gaussian(1.0, Vector3::zeros(), Matrix3::identity()).unwrap()
    }

    #[test]
    fn gaussian_norm_powers() {
        let d = unit();
        assert_relative_eq!(quadrature_expectation(&d, &Polynomial::norm_pow(4).unwrap()).unwrap(), 15.0, max_relative = 1e-12);
        assert_relative_eq!(quadrature_expectation(&d, &Polynomial::norm_pow(6).unwrap()).unwrap(), 105.0, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_mixture_has_zero_mean() {
        let comps = [-1.0, 1.0].map(|a| GaussianComponent { weight: 0.5, mean: Vector3::new(a, 0.0, 0.0), cov: Matrix3::identity() });
        let d = AnalyticDensity::mixture(comps.to_vec()).unwrap();
        assert!(quadrature_expectation(&d, &Polynomial::var(0)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn agrees_with_wick_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let cov = random_spd(&mut rng, 0.3, 2.0);
            let d = AnalyticDensity::gaussian(1.3, Vector3::zeros(), cov).unwrap();
            let m = gaussian_central_moments(&cov, 1.3, 8).unwrap();
            for a in crate::poly::indices_up_to(8) {
                let p = Polynomial::monomial(*a, 1.0);
                let exact = m.get(*a).unwrap();
                let quad = quadrature_expectation(&d, &p).unwrap();
                assert!((quad - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{a}: {quad} vs {exact}");
            }
        }
    }

    #[test]
    fn agrees_with_mixture_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_mixture(&mut rng);
        let m = d.moments().unwrap();
        for a in crate::poly::indices_up_to(8) {
            let exact = m.get(*a).unwrap();
            let quad = quadrature_expectation(&d, &Polynomial::monomial(*a, 1.0)).unwrap();
            assert!((quad - exact).abs() <= 1e-11 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn projection_of_constant_vanishes() {
        let c = DriftCoefficients::linear(2.0, 1.0);
        assert_eq!(operator_projection(&unit(), &c, &Polynomial::constant(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn linear_stress_relaxation() {
        let mut pi = Matrix3::identity();
        pi[(0, 1)] = 0.1;
        pi[(1, 0)] = 0.1;
        let d = AnalyticDensity::gaussian(1.0, Vector3::zeros(), pi).unwrap();
        let c = DriftCoefficients::linear(2.0, 1.0);
        let h = Polynomial::var(0).times(&Polynomial::var(1)).unwrap();
        assert_relative_eq!(operator_projection(&d, &c, &h).unwrap(), -0.1, max_relative = 1e-12);
    }

    #[test]
    fn stein_matches_analytic_divergence() {
        // div of the linear drift is -3/tau
        let d = random_mixture(&mut ChaCha8Rng::seed_from_u64(5));
        let val = stein_divergence(&d, |v| [-v[0] / 2.0, -v[1] / 2.0, -v[2] / 2.0]);
        assert_relative_eq!(val, -1.5 * d.rho(), max_relative = 1e-12);
    }

    #[test]
    fn fd_rate_examples() {
        let exact: Vec<f64> = (0..200).map(|k| (-(k as f64) * 0.01).exp()).collect();
        assert!((fd_rate(&exact, 0.01, 0..200).unwrap().rate + 1.0).abs() < 1e-6);
        let flat = vec![2.0; 50];
        assert!(fd_rate(&flat, 0.01, 0..50).unwrap().rate.abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noisy: Vec<f64> = (0..200)
            .map(|k| (-(k as f64) * 0.01).exp() * (1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        assert!((fd_rate(&noisy, 0.01, 0..200).unwrap().rate + 1.0).abs() < 0.02);
        assert!(matches!(fd_rate(&[1.0, -1.0], 0.1, 0..2), Err(OracleError::NonPositive { index: 1, .. })));
    }
}
