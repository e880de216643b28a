//! Rebuild the closure system from explicit integrals and compare it entry
//! by entry with the bordered solver, on a skewed two-component mixture.

use fefp::closure::audit::audit;
use fefp::closure::{production_terms, stabilization_coefficient};
use fefp::gas::{transport_scales, GasModel, Interaction};
use fefp::poly::{mixture_central_moments, GaussianComponent};
use nalgebra::{Matrix3, Vector3};

fn main() {
    let m = mixture_central_moments(
        &[
            GaussianComponent { weight: 0.6, mean: Vector3::new(-0.5, 0.2, 0.0), cov: Matrix3::from_diagonal(&Vector3::new(0.8, 1.1, 0.9)) },
            GaussianComponent { weight: 0.4, mean: Vector3::new(0.75, -0.3, 0.1), cov: Matrix3::identity() * 1.2 },
        ],
        8,
    )
    .expect("moments");
    let gas = GasModel::nondimensional(1.0, 1.0, Interaction::Maxwell);
    let tau = transport_scales(m.theta(), m.rho(), &gas).expect("scales").tau;
    let c_d = stabilization_coefficient(&m, 1e-3, 1.0).expect("stabilizer");
    let p = production_terms(&m, &gas).expect("productions");
    let report = audit(&m, tau, c_d, &p).expect("audit");
    println!("{}", report.to_text());
    println!("{} of {} entries differ", report.discrepancy_count(), report.entries.len());
}
