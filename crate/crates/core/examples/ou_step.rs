//! The linear part of the update is the exact Ornstein-Uhlenbeck transition:
//! the variance of a cold start follows theta (1 - e^(-2t/tau)) for any dt.

use fefp::integrator::{advance_cell_velocities, velocity_half_step, CellClosure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() {
    let (tau, theta, n) = (1.0, 1.0, 200_000);
    let closure = CellClosure::Linear { tau, theta };
    for dt in [0.05, 0.5, 2.0] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut vel = vec![[0.0; 3]; n];
        let steps = (2.0 / dt) as usize;
        for _ in 0..steps {
            velocity_half_step(&mut vel, [0.0; 3], &closure, dt, |_| std::array::from_fn(|_| rng.sample(StandardNormal)));
        }
        let var = vel.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / (3 * n) as f64;
        let t = steps as f64 * dt;
        println!("dt = {dt:4}: var = {var:.4}, exact {:.4}", theta * (1.0 - (-2.0 * t / tau).exp()));
    }

    // With the projection, momentum and energy are kept exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut vel: Vec<[f64; 3]> = (0..1000).map(|_| std::array::from_fn(|_| 1.0 + rng.sample::<f64, _>(StandardNormal))).collect();
    let energy = |v: &[[f64; 3]]| v.iter().map(|x| x.iter().map(|c| c * c).sum::<f64>()).sum::<f64>();
    let e0 = energy(&vel);
    advance_cell_velocities(&mut vel, &closure, 0.3, |_| std::array::from_fn(|_| rng.sample(StandardNormal)));
    println!("projected step: relative energy change {:.1e}", (energy(&vel) - e0).abs() / e0);
}
