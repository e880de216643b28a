//! A Maxwellian is a fixed point of the closure: all nonlinear drift
//! coefficients vanish and the temperature does not drift.

use fefp::config::SimulationConfig;
use fefp::scenario::{run_homogeneous, RunOptions};

const CONFIG: &str = r#"
scenario = "homogeneous"
model = "fefp"
seed = 3
n_particles = 50000
dt = 0.01
steps_transient = 100
[homogeneous]
initial = { kind = "anisotropic", lambda = [1.0, 1.0, 1.0] }
"#;

fn main() {
    let cfg = SimulationConfig::from_toml(CONFIG).expect("valid config");
    let res = run_homogeneous(&cfg, &RunOptions { no_output: true, ..Default::default() }).expect("run");
    let first = res.rows.first().unwrap();
    let last = res.rows.last().unwrap();
    let trace = |r: &fefp::scenario::HomogeneousRow| r.stress[0] + r.stress[3] + r.stress[5];
    println!("steps          {}", res.rows.len());
    println!("theta          {:.5}", res.theta);
    println!("trace stress   {:+.2e} -> {:+.2e}", trace(first), trace(last));
    println!("|q|            {:.2e}", last.q.iter().map(|x| x * x).sum::<f64>().sqrt());
    println!("fallback steps {}", res.fallback_steps);
}
