//! Entropy and Fisher-information surrogates, steady-state averaging and
//! shock-profile metrics.

use nalgebra::Matrix3;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("covariance matrix is not symmetric positive definite")]
    NotSpd,
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyReport {
    /// `<f ln f>` of the Gaussian with the fitted covariance (unit mass).
    pub h: f64,
    /// Fisher information relative to the Maxwellian at `theta_eq`.
    pub fisher: f64,
}

impl EntropyReport {
    /// Entropy rate `-(theta/tau) I` implied by the Fisher identity.
    pub fn predicted_rate(&self, theta: f64, tau: f64) -> f64 {
        -theta / tau * self.fisher
    }
}

/// Gaussian surrogate: `H = -ln((2 pi e)^3 det Pi) / 2`,
/// `I = tr((I/theta_eq - Pi^-1)^2 Pi)`.
pub fn gaussian_entropy_fisher(pi: &Matrix3<f64>, theta_eq: f64) -> Result<EntropyReport, DiagnosticsError> {
    let chol = pi.cholesky().ok_or(DiagnosticsError::NotSpd)?;
    let det = chol.determinant();
    let inv = chol.inverse();
    let a = Matrix3::identity() / theta_eq - inv;
    let h = -0.5 * ((2.0 * std::f64::consts::PI * std::f64::consts::E).powi(3) * det).ln();
    Ok(EntropyReport { h, fisher: (a * a * pi).trace().max(0.0) })
}

/// Running mean and variance (Welford) of a flat field, one slot per value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SteadyAccumulator {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl SteadyAccumulator {
    pub fn new(len: usize) -> Self {
        SteadyAccumulator { count: 0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    pub fn push(&mut self, sample: &[f64]) {
        assert_eq!(sample.len(), self.mean.len(), "field length changed");
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(sample) {
            let d = x - *m;
            *m += d / n;
            *s += d * (x - *m);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Standard error of each mean (zero before two samples).
    pub fn std_error(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShockMetrics {
    /// Peak temperature over the upstream value.
    pub peak_ratio: f64,
    /// Distance between the 10% and 90% points of the upstream rise.
    pub thickness: f64,
    pub x10: f64,
    pub x90: f64,
}

/// Metrics of a temperature profile along increasing `x`, with the free
/// stream at the start of the profile.
pub fn shock_metrics(x: &[f64], t: &[f64]) -> Result<ShockMetrics, DiagnosticsError> {
    if x.len() != t.len() || x.len() < 3 {
        return Err(DiagnosticsError::Undefined("profile too short"));
    }
    let t_up = t[0];
    let (k_peak, &t_peak) = t
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let jump = t_peak - t_up;
    if !(jump > 1e-9 * t_up.abs().max(1e-300)) || k_peak == 0 {
        return Err(DiagnosticsError::Undefined("flat profile"));
    }
    let crossing = |level: f64| -> Option<f64> {
        let target = t_up + level * jump;
        (1..=k_peak).find(|&k| t[k] >= target).map(|k| {
            let (x0, x1, t0, t1) = (x[k - 1], x[k], t[k - 1], t[k]);
            if t1 == t0 { x1 } else { x0 + (target - t0) / (t1 - t0) * (x1 - x0) }
        })
    };
    let x10 = crossing(0.1).ok_or(DiagnosticsError::Undefined("no 10% crossing"))?;
    let x90 = crossing(0.9).ok_or(DiagnosticsError::Undefined("no 90% crossing"))?;
    Ok(ShockMetrics { peak_ratio: t_peak / t_up, thickness: x90 - x10, x10, x90 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equilibrium_has_zero_fisher() {
        let r = gaussian_entropy_fisher(&(Matrix3::identity() * 1.7), 1.7).unwrap();
        assert!(r.fisher.abs() < 1e-15);
    }

    #[test]
    fn anisotropic_fisher_and_trace_identity() {
        let l = [1.5, 1.0, 0.5];
        let r = gaussian_entropy_fisher(&Matrix3::from_diagonal(&Vector3::from(l)), 1.0).unwrap();
        assert_relative_eq!(r.fisher, 2.0 / 3.0, max_relative = 1e-14);
        let boltz: f64 = l.iter().map(|x| 1.0 / x - 1.0).sum();
        assert_relative_eq!(boltz, r.fisher, max_relative = 1e-14);
        assert_relative_eq!(r.predicted_rate(1.0, 2.0), -1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn entropy_of_unit_gaussian() {
        let r = gaussian_entropy_fisher(&Matrix3::identity(), 1.0).unwrap();
        assert_relative_eq!(r.h, -1.5 * (2.0 * std::f64::consts::PI).ln() - 1.5, max_relative = 1e-14);
    }

    #[test]
    fn non_spd_rejected() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 0.0, 1.0));
        assert_eq!(gaussian_entropy_fisher(&m, 1.0), Err(DiagnosticsError::NotSpd));
    }

    #[test]
    fn accumulator_examples() {
        let mut a = SteadyAccumulator::new(2);
        a.push(&[1.0, 2.0]);
        assert_eq!(a.mean(), &[1.0, 2.0]);
        a.push(&[1.0, 2.0]);
        assert_eq!(a.mean(), &[1.0, 2.0]);
        assert_eq!(a.std_error(), vec![0.0, 0.0]);
    }

    #[test]
    fn accumulator_error_shrinks_like_sqrt_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut errs = Vec::new();
        for n in [400, 6400] {
            let mut a = SteadyAccumulator::new(1);
            for _ in 0..n {
                a.push(&[rng.random::<f64>()]);
            }
            errs.push(a.std_error()[0]);
        }
        let slope = (errs[1] / errs[0]).ln() / 16f64.ln();
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    fn tanh_profile(w: f64, amp: f64) -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..4001).map(|k| -10.0 + k as f64 * 0.005).collect();
        let t = x.iter().map(|&x| 1.0 + amp * 0.5 * (1.0 + (x / w).tanh())).collect();
        (x, t)
    }

    #[test]
    fn tanh_thickness() {
        let (x, t) = tanh_profile(0.7, 3.0);
        let m = shock_metrics(&x, &t).unwrap();
        assert_relative_eq!(m.thickness, 0.7 * 9f64.ln(), max_relative = 1e-4);
        assert_relative_eq!(m.peak_ratio, 4.0, max_relative = 1e-4);
    }

    #[test]
    fn amplitude_does_not_change_thickness() {
        let (x, t) = tanh_profile(0.7, 3.0);
        let (_, t2) = tanh_profile(0.7, 0.5);
        let a = shock_metrics(&x, &t).unwrap().thickness;
        let b = shock_metrics(&x, &t2).unwrap().thickness;
        assert_relative_eq!(a, b, max_relative = 1e-4);
    }

    #[test]
    fn flat_profile_is_undefined() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        assert!(matches!(shock_metrics(&x, &[2.0; 4]), Err(DiagnosticsError::Undefined(_))));
    }
}
