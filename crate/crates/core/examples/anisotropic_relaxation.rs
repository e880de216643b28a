//! Relaxation of an anisotropic Gaussian. The stress decays at p/mu = 2/tau
//! for every model; the FE-FP run is compared with the exponential.

use fefp::config::SimulationConfig;
use fefp::scenario::{run_homogeneous, RunOptions};

const CONFIG: &str = r#"
scenario = "homogeneous"
model = "fefp"
n_particles = 100000
dt = 0.01
steps_transient = 150
[homogeneous]
initial = { kind = "anisotropic", lambda = [1.5, 1.0, 0.5] }
"#;

fn main() {
    let cfg = SimulationConfig::from_toml(CONFIG).expect("valid config");
    let res = run_homogeneous(&cfg, &RunOptions { no_output: true, ..Default::default() }).expect("run");
    let s0 = res.rows[0].stress[0];
    println!("{:>8} {:>10} {:>10} {:>10}", "t/tau", "sxx", "exact", "H");
    for row in res.rows.iter().step_by(25) {
        let exact = s0 * (-2.0 * row.t / res.tau).exp();
        println!("{:8.3} {:10.5} {:10.5} {:10.5}", row.t / res.tau, row.stress[0], exact, row.h);
    }
}
