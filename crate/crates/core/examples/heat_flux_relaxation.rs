//! Heat-flux relaxation from a bi-Gaussian for the three models. For Maxwell
//! molecules the heat flux decays at (2/3) p/mu; the linear model gives 3/2 p/mu,
//! a Prandtl number of 1.

use fefp::config::{ModelKind, SimulationConfig};
use fefp::scenario::{run_homogeneous, RunOptions};
use fefp::testkit::fd_rate;

const CONFIG: &str = r#"
scenario = "homogeneous"
model = "linear"
n_particles = 200000
dt = 0.005
steps_transient = 25
[homogeneous]
initial = { kind = "bi_gaussian", heat_flux = 0.4 }
"#;

fn main() {
    let base = SimulationConfig::from_toml(CONFIG).expect("valid config");
    for model in [ModelKind::Linear, ModelKind::Cubic, ModelKind::Fefp] {
        let cfg = SimulationConfig { model, ..base.clone() };
        let res = run_homogeneous(&cfg, &RunOptions { no_output: true, ..Default::default() }).expect("run");
        let q: Vec<f64> = res.rows.iter().map(|r| r.q[0].abs()).collect();
        let rate = fd_rate(&q, res.dt, 0..q.len()).expect("enough points");
        println!("{model:?}: -d ln q / dt = {:.4} (in units of p/mu: {:.4})", -rate.rate, -rate.rate * res.tau / 2.0);
    }
    println!("Maxwell molecules: 2/3 = 0.6667");
}
