//! Closures checked against Gauss-Hermite quadrature of analytic densities.

use fefp::closure::{
    cubic_closure, fefp_closure, production_terms, row_productions, stabilization_coefficient, BasisSet,
    ClosureParams, DriftCoefficients, SolveOptions,
};
use fefp::gas::{transport_scales, GasModel, Interaction};
use fefp::poly::GaussianComponent;
use fefp::testkit::{operator_projection, reference_drift, stein_divergence, AnalyticDensity};
use nalgebra::{Matrix3, Vector3};

fn maxwell() -> GasModel {
    GasModel::nondimensional(1.0, 1.0, Interaction::Maxwell)
}

fn anisotropic() -> AnalyticDensity {
    AnalyticDensity::gaussian(1.0, Vector3::zeros(), Matrix3::from_diagonal(&Vector3::new(1.5, 1.0, 0.5))).unwrap()
}

fn params() -> ClosureParams {
    ClosureParams { eps0: 1e-3, theta_ref: 1.0, solve: SolveOptions { eta: 0.0 } }
}

#[test]
fn stress_rows_match_productions_on_anisotropic_gaussian() {
    let d = anisotropic();
    let m = d.moments().unwrap();
    let gas = maxwell();
    let (c, _) = fefp_closure(&m, &gas, &params()).unwrap();
    let rows = row_productions(&production_terms(&m, &gas).unwrap());
    let basis = BasisSet::standard().members;
    for k in 0..6 {
        let proj = operator_projection(&d, &c, &basis[k]).unwrap();
        assert!((proj - rows[k]).abs() < 1e-8, "row {k}: {proj} vs {}", rows[k]);
    }
    // <v1^2> relaxes toward theta at p/mu
    assert!((rows[0] - (1.0 - 1.5) * 2.0 / c.tau).abs() < 1e-12);
}

#[test]
fn linear_drift_projection() {
    // <v1^2, S f> = -2 lambda_1 / tau + 2 theta / tau
    let d = anisotropic();
    let theta = 1.0;
    let tau = 2.0;
    let lin = DriftCoefficients::linear(tau, theta);
    let h = &BasisSet::standard().members[0];
    let proj = operator_projection(&d, &lin, h).unwrap();
    assert!((proj - (-2.0 * 1.5 / tau + 2.0 * theta / tau)).abs() < 1e-12, "{proj}");
}

#[test]
fn entropy_constraint_holds_by_stein_identity() {
    let gas = maxwell();
    let d = AnalyticDensity::mixture(vec![
        GaussianComponent { weight: 0.3, mean: Vector3::new(1.0, 0.0, -0.2), cov: Matrix3::identity() * 0.7 },
        GaussianComponent {
            weight: 0.7,
            mean: Vector3::new(-3.0 / 7.0, 0.0, 0.6 / 7.0),
            cov: Matrix3::from_diagonal(&Vector3::new(1.1, 0.9, 1.0)),
        },
    ])
    .unwrap();
    let m = d.moments().unwrap();
    let (c, _) = fefp_closure(&m, &gas, &params()).unwrap();
    let div = stein_divergence(&d, |v| {
        let a = reference_drift(&c, v);
        std::array::from_fn(|i| a[i] + v[i] / c.tau)
    });
    assert!(div.abs() < 1e-9 * 3.0 / c.tau, "{div}");
}

#[test]
fn fefp_heat_flux_rate_is_two_thirds_and_linear_is_not() {
    // a Gaussian carries no heat flux, so look at the rate of the q rows on a skewed density
    let gas = maxwell();
    let d = AnalyticDensity::mixture(vec![
        GaussianComponent { weight: 0.25, mean: Vector3::new(0.9, 0.0, 0.0), cov: Matrix3::identity() * 0.8 },
        GaussianComponent { weight: 0.75, mean: Vector3::new(-0.3, 0.0, 0.0), cov: Matrix3::identity() * 0.8 },
    ])
    .unwrap();
    let m = d.moments().unwrap();
    let basis = BasisSet::standard().members;
    let (c, _) = fefp_closure(&m, &gas, &params()).unwrap();
    let tau = c.tau;
    let theta = m.theta();
    let q1 = m.heat_flux()[0];
    // d/dt of <v1 r^2> / 2 minus the stress coupling is -(2/3)(p/mu) q1
    let rate = |proj: f64| -proj / 2.0 / q1;
    let fe = rate(operator_projection(&d, &c, &basis[6]).unwrap());
    let lin = rate(operator_projection(&d, &DriftCoefficients::linear(tau, theta), &basis[6]).unwrap());
    let p_over_mu = 2.0 / tau;
    assert!((fe / p_over_mu - 2.0 / 3.0).abs() < 1e-8, "fefp {fe}");
    assert!((lin / p_over_mu - 1.5).abs() < 1e-8, "linear {lin}");
}

#[test]
fn cubic_matches_the_same_rows() {
    let d = anisotropic();
    let m = d.moments().unwrap();
    let gas = maxwell();
    let tau = transport_scales(m.theta(), m.rho(), &gas).unwrap().tau;
    let c_d = stabilization_coefficient(&m, 1e-3, 1.0).unwrap();
    let p = production_terms(&m, &gas).unwrap();
    let cubic = cubic_closure(&m, tau, &p, -6.0 * c_d).unwrap();
    let rows = row_productions(&p);
    for (k, h) in BasisSet::standard().members[..9].iter().enumerate() {
        let proj = operator_projection(&d, &cubic, h).unwrap();
        assert!((proj - rows[k]).abs() < 1e-8, "row {k}: {proj} vs {}", rows[k]);
    }
}
