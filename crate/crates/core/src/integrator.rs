//! Split-step velocity update and free flight.
//!
//! The linear part of the drift is integrated exactly (Ornstein-Uhlenbeck),
//! the remainder explicitly at the pre-step velocity. Each cell is then
//! projected back onto its pre-step momentum and fluctuation energy.

use crate::closure::{drift_eval, drift_polynomial, CubicCoefficients, DriftCoefficients};
use crate::poly::{identity_field, Polynomial};

/// Per-cell drift used by the velocity update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellClosure {
    Linear { tau: f64, theta: f64 },
    Fefp(DriftCoefficients),
    Cubic(CubicCoefficients),
}

impl CellClosure {
    pub fn tau(&self) -> f64 {
        match self {
            CellClosure::Linear { tau, .. } => *tau,
            CellClosure::Fefp(c) => c.tau,
            CellClosure::Cubic(c) => c.tau,
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            CellClosure::Linear { theta, .. } => *theta,
            CellClosure::Fefp(c) => c.theta(),
            CellClosure::Cubic(c) => c.theta,
        }
    }

    /// Full drift as polynomials in the fluctuating velocity.
    pub fn polynomial(&self) -> [Polynomial; 3] {
        match self {
            CellClosure::Linear { tau, .. } => identity_field().map(|v| v.scale(-1.0 / tau)),
            CellClosure::Fefp(c) => drift_polynomial(c),
            CellClosure::Cubic(c) => c.polynomial(),
        }
    }

    /// Drift minus its linear part, `A(v') + v'/tau`.
    #[inline]
    pub fn nonlinear_drift(&self, v: [f64; 3]) -> [f64; 3] {
        match self {
            CellClosure::Linear { .. } => [0.0; 3],
            CellClosure::Fefp(c) => {
                let a = drift_eval(c, v);
                std::array::from_fn(|i| a[i] + v[i] / c.tau)
            }
            CellClosure::Cubic(c) => {
                let a = c.eval(v);
                std::array::from_fn(|i| a[i] + v[i] / c.tau)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub s: f64,
    pub decay: f64,
    pub noise_std: f64,
}

impl StepParams {
    /// Exact OU decay `e^-s` and noise `sqrt(theta (1 - e^-2s))`, `s = dt/tau`.
    pub fn new(dt: f64, tau: f64, theta: f64) -> Self {
        assert!(dt > 0.0 && tau > 0.0, "dt and tau must be positive");
        let s = dt / tau;
        StepParams {
            dt,
            s,
            decay: (-s).exp(),
            noise_std: (theta * -(-2.0 * s).exp_m1()).sqrt(),
        }
    }
}

/// Advance the velocities of one cell by `dt`.
///
/// `normal(k)` returns three standard normal draws for particle `k` of the
/// cell. Cells with fewer than two particles are left untouched.
pub fn advance_cell_velocities<F: FnMut(usize) -> [f64; 3]>(
    vel: &mut [[f64; 3]],
    closure: &CellClosure,
    dt: f64,
    mut normal: F,
) {
    let n = vel.len();
    if n < 2 {
        return;
    }
    let nf = n as f64;
    let mut u = [0.0; 3];
    for v in vel.iter() {
        for i in 0..3 {
            u[i] += v[i];
        }
    }
    u.iter_mut().for_each(|x| *x /= nf);
    let mut e0 = 0.0;
    for v in vel.iter() {
        e0 += (0..3).map(|i| (v[i] - u[i]).powi(2)).sum::<f64>();
    }

    velocity_half_step(vel, u, closure, dt, &mut normal);
    let mut mh = [0.0; 3];
    for v in vel.iter() {
        for i in 0..3 {
            mh[i] += v[i];
        }
    }
    mh.iter_mut().for_each(|x| *x /= nf);
    let mut eh = 0.0;
    for v in vel.iter() {
        eh += (0..3).map(|i| (v[i] - mh[i]).powi(2)).sum::<f64>();
    }
    let eps = if eh > 0.0 { (e0 / eh).sqrt() } else { 0.0 };
    for v in vel.iter_mut() {
        for i in 0..3 {
            v[i] = u[i] + eps * (v[i] - mh[i]);
        }
    }
}

/// Unprojected update `v <- e^-s v' + (A(v') + v'/tau) dt + sqrt(theta (1 - e^-2s)) xi`,
/// with `v' = v - mean`. The result is a fluctuation (the mean is not added back).
pub fn velocity_half_step<F: FnMut(usize) -> [f64; 3]>(
    vel: &mut [[f64; 3]],
    mean: [f64; 3],
    closure: &CellClosure,
    dt: f64,
    mut normal: F,
) {
    let p = StepParams::new(dt, closure.tau(), closure.theta());
    for (k, v) in vel.iter_mut().enumerate() {
        let vp: [f64; 3] = std::array::from_fn(|i| v[i] - mean[i]);
        let a = closure.nonlinear_drift(vp);
        let xi = normal(k);
        for i in 0..3 {
            v[i] = p.decay * vp[i] + a[i] * dt + p.noise_std * xi[i];
        }
    }}

/// Free flight of in-plane positions: `x += v dt` for the first two components.
pub fn stream(pos: &mut [[f64; 2]], vel: &[[f64; 3]], dt: f64) {
    for (x, v) in pos.iter_mut().zip(vel) {
        x[0] += v[0] * dt;
        x[1] += v[1] * dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::sample_maxwellian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normals(rng: &mut ChaCha8Rng) -> impl FnMut(usize) -> [f64; 3] + '_ {
        move |_| std::array::from_fn(|_| rng.sample(StandardNormal))
    }

    fn momentum_energy(v: &[[f64; 3]]) -> ([f64; 3], f64) {
        let mut m = [0.0; 3];
        let mut e = 0.0;
        for x in v {
            for i in 0..3 {
                m[i] += x[i];
                e += x[i] * x[i];
            }
        }
        (m, e)
    }

    #[test]
    fn step_conserves_momentum_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v = sample_maxwellian([0.3, -1.0, 2.0], 1.4, 500, &mut rng).unwrap();
        let before = momentum_energy(&v);
        let closure = CellClosure::Linear { tau: 2.0, theta: 1.4 };
        advance_cell_velocities(&mut v, &closure, 0.1, normals(&mut rng));
        let after = momentum_energy(&v);
        for i in 0..3 {
            assert!((before.0[i] - after.0[i]).abs() <= 1e-12 * before.1.sqrt() * 500f64.sqrt());
        }
        assert!((before.1 - after.1).abs() <= 1e-12 * before.1);
    }

    #[test]
    fn single_particle_is_untouched() {
        let mut v = vec![[1.0, 2.0, 3.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        advance_cell_velocities(&mut v, &CellClosure::Linear { tau: 1.0, theta: 1.0 }, 0.1, normals(&mut rng));
        assert_eq!(v, vec![[1.0, 2.0, 3.0]]);
    }

    #[test]
    fn small_s_matches_euler_maruyama() {
        // one particle's unprojected update against Euler-Maruyama with the same noise
        let tau = 1.0;
        let theta = 1.0;
        let v0 = 0.8;
        let xi = 0.37;
        let mut errs = Vec::new();
        for dt in [1e-2, 5e-3] {
            let p = StepParams::new(dt, tau, theta);
            let split = p.decay * v0 + p.noise_std * xi;
            let em = v0 - v0 / tau * dt + (2.0 * theta / tau * dt).sqrt() * xi;
            errs.push((split - em).abs());
        }
        // the noise amplitudes differ at O(dt^{3/2}), the drift at O(dt^2)
        assert!(errs[0] / errs[1] > 2.5, "{errs:?}");
    }

    #[test]
    fn stream_examples() {
        let mut x = vec![[0.0, 0.0]];
        stream(&mut x, &[[1.0, 0.0, 0.0]], 0.5);
        assert_eq!(x, vec![[0.5, 0.0]]);
        stream(&mut x, &[[1.0, 0.0, 0.0]], 0.0);
        assert_eq!(x, vec![[0.5, 0.0]]);
        let mut y = vec![[0.1, 0.7]];
        let v = [[0.3, -0.9, 2.0]];
        stream(&mut y, &v, 0.25);
        stream(&mut y, &[[-0.3, 0.9, -2.0]], 0.25);
        assert!((y[0][0] - 0.1).abs() < 1e-15 && (y[0][1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ou_stationary_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v = vec![[0.0; 3]; 20_000];
        let closure = CellClosure::Linear { tau: 1.0, theta: 2.0 };
        for _ in 0..20 {
            velocity_half_step(&mut v, [0.0; 3], &closure, 1.0, normals(&mut rng));
        }
        let n = v.len() as f64;
        for i in 0..3 {
            let var = v.iter().map(|x| x[i] * x[i]).sum::<f64>() / n;
            assert!((var / 2.0 - 1.0).abs() < 0.03, "component {i}: {var}");
        }
    }

    #[test]
    fn anisotropy_relaxes_at_fixed_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut v = sample_maxwellian([0.0; 3], 1.0, 20_000, &mut rng).unwrap();
        for x in v.iter_mut() {
            x[0] *= 1.5;
        }
        let (_, e0) = momentum_energy(&v);
        let closure = CellClosure::Linear { tau: 1.0, theta: e0 / (3.0 * v.len() as f64) };
        for _ in 0..20 {
            advance_cell_velocities(&mut v, &closure, 1.0, normals(&mut rng));
        }
        let n = v.len() as f64;
        let vx = v.iter().map(|x| x[0] * x[0]).sum::<f64>() / n;
        let vy = v.iter().map(|x| x[1] * x[1]).sum::<f64>() / n;
        assert!((vx / vy - 1.0).abs() < 0.05);
    }
}
