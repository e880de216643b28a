//! A short, coarse run of the supersonic flow over a plate. Prints density
//! and temperature along a line in front of the plate (x2 = 0.5 L) and the
//! shock metrics.
//!
//! Use `fefp run configs/shock_plate_desk.toml` for a converged field.

use fefp::config::SimulationConfig;
use fefp::scenario::{run_shock, RunOptions};

const CONFIG: &str = r#"
scenario = "shock_plate"
model = "fefp"
n_particles = 40000
dt = 2.0e-2
steps_transient = 150
steps_average = 100
interaction = "hard_sphere_approx"
[grid]
nx = 30
ny = 30
[domain]
lx = 2.5
ly = 3.0
slice_x2 = 0.5
[flow]
mach = 4.0
knudsen = 0.14
"#;

fn main() {
    let cfg = SimulationConfig::from_toml(CONFIG).expect("valid config");
    let res = run_shock(&cfg, &RunOptions { no_output: true, ..Default::default() }).expect("run");
    println!("{:>7} {:>7} {:>7}", "x1", "rho", "T");
    for row in res.slice.iter().step_by(3) {
        println!("{:7.3} {:7.3} {:7.3}", row.x1, row.rho, row.t);
    }
    println!("{:?}", res.metrics);
    println!("fallback fraction {:.3}, runaway fraction {:.4}", res.fallback_fraction, res.runaway_fraction);
}
