//! Cubic-drift baseline:
//! `A_i = -v'_i/tau + sum_j c_ij v'_j + gamma_i (|v'|^2 - 3 theta) + Lambda (v'_i |v'|^2 - 2 q_i / rho)`.

use nalgebra::{Matrix3, SMatrix, Vector3};

use std::sync::OnceLock;

use super::{degenerate, forms, row_productions, ClosureError, Vector9, PAIRS};
use crate::poly::{dot3, identity_field, LinearForm, MomentSet, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicCoefficients {
    pub c: Matrix3<f64>,
    pub gamma: Vector3<f64>,
    pub lambda: f64,
    pub theta: f64,
    pub q_over_rho: Vector3<f64>,
    pub tau: f64,
    pub diffusion: f64,
}

impl CubicCoefficients {
    pub fn eval(&self, v: [f64; 3]) -> [f64; 3] {
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        std::array::from_fn(|i| {
            -v[i] / self.tau
                + self.c[(i, 0)] * v[0]
                + self.c[(i, 1)] * v[1]
                + self.c[(i, 2)] * v[2]
                + self.gamma[i] * (r2 - 3.0 * self.theta)
                + self.lambda * (v[i] * r2 - 2.0 * self.q_over_rho[i])
        })
    }

    pub fn polynomial(&self) -> [Polynomial; 3] {
        let v = identity_field();
        let shifted_r2 = Polynomial::norm_sq() - Polynomial::constant(3.0 * self.theta);
        let r2 = Polynomial::norm_sq();
        std::array::from_fn(|i| {
            let mut a = v[i].scale(-1.0 / self.tau);
            for j in 0..3 {
                a += v[j].scale(self.c[(i, j)]);
            }
            a + shifted_r2.scale(self.gamma[i])
                + (v[i].times(&r2).unwrap() - Polynomial::constant(2.0 * self.q_over_rho[i])).scale(self.lambda)
        })
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().chain(self.gamma.iter()).all(|x| x.is_finite()) && self.lambda.is_finite()
    }
}

fn unknown_fields(theta: f64) -> Vec<[Polynomial; 3]> {
    let v = identity_field();
    let zero = Polynomial::zero;
    let mut fields = Vec::with_capacity(9);
    for &(i, j) in &PAIRS {
        let mut f = [zero(), zero(), zero()];
        if i == j {
            f[i] = v[i].clone();
        } else {
            f[i] = v[j].clone();
            f[j] = v[i].clone();
        }
        fields.push(f);
    }
    let shifted_r2 = Polynomial::norm_sq() - Polynomial::constant(3.0 * theta);
    for k in 0..3 {
        let mut f = [zero(), zero(), zero()];
        f[k] = shifted_r2.clone();
        fields.push(f);
    }
    fields
}

struct CubicForms {
    /// `<grad H_a . f_b>` for the six linear fields.
    pair: [[LinearForm; 6]; 9],
    /// `<d_k H_a |v'|^2>`.
    g_r2: [[LinearForm; 3]; 9],
    /// `<grad H_a . v' |v'|^2>`.
    g_vr2: [LinearForm; 9],
}

fn cubic_forms() -> &'static CubicForms {
    static FORMS: OnceLock<CubicForms> = OnceLock::new();
    FORMS.get_or_init(|| {
        let tests = &super::BasisSet::standard().members[..9];
        let grads: Vec<[Polynomial; 3]> = tests.iter().map(Polynomial::gradient).collect();
        let fields = unknown_fields(0.0);
        let v = identity_field();
        let r2 = Polynomial::norm_sq();
        let vr2: [Polynomial; 3] = std::array::from_fn(|i| v[i].times(&r2).unwrap());
        CubicForms {
            pair: std::array::from_fn(|a| std::array::from_fn(|b| LinearForm::new(&dot3(&grads[a], &fields[b]).unwrap()))),
            g_r2: std::array::from_fn(|a| std::array::from_fn(|k| LinearForm::new(&grads[a][k].times(&r2).unwrap()))),
            g_vr2: std::array::from_fn(|a| LinearForm::new(&dot3(&grads[a], &vr2).unwrap())),
        }
    })
}

/// Cubic coefficients from moment matching on the stress and heat-flux rows.
///
/// `lambda` is prescribed (it is not matched); callers use `-c4` from the
/// Fisher-entropic stabilizer rule so both models see the same confinement.
pub fn cubic_closure(
    m: &MomentSet,
    tau: f64,
    productions: &Vector9,
    lambda: f64,
) -> Result<CubicCoefficients, ClosureError> {
    let theta = m.theta();
    if !(theta > 0.0) {
        return Err(degenerate("non-positive temperature"));
    }
    let rho = m.rho();
    let diffusion = theta / tau;
    let q_over_rho = m.heat_flux() / rho;
    let prod = row_productions(productions);
    let cf = cubic_forms();
    let f = forms();

    let mut k = SMatrix::<f64, 9, 9>::zeros();
    let mut rhs = Vector9::zeros();
    for a in 0..9 {
        let grad: [f64; 3] = std::array::from_fn(|i| f.grad[a][i].apply(m));
        for b in 0..6 {
            k[(a, b)] = cf.pair[a][b].apply(m);
        }
        for i in 0..3 {
            k[(a, 6 + i)] = cf.g_r2[a][i].apply(m) - 3.0 * theta * grad[i];
        }
        let fixed = cf.g_vr2[a].apply(m) - 2.0 * (0..3).map(|i| q_over_rho[i] * grad[i]).sum::<f64>();
        rhs[a] = prod[a] + f.vgrad[a].apply(m) / tau - diffusion * f.lap[a].apply(m) - lambda * fixed;
    }
    let x = k.lu().solve(&rhs).ok_or_else(|| degenerate("cubic system singular"))?;
    let mut c = Matrix3::zeros();
    for (n, &(i, j)) in PAIRS.iter().enumerate() {
        c[(i, j)] = x[n];
        c[(j, i)] = x[n];
    }
    let out = CubicCoefficients {
        c,
        gamma: Vector3::new(x[6], x[7], x[8]),
        lambda,
        theta,
        q_over_rho,
        tau,
        diffusion,
    };
    if !out.is_finite() {
        return Err(degenerate("non-finite cubic coefficients"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{gaussian_central_moments, mixture_central_moments, GaussianComponent};

    #[test]
    fn maxwellian_gives_zero_coefficients() {
        let m = gaussian_central_moments(&Matrix3::identity(), 1.0, 8).unwrap();
        let c = cubic_closure(&m, 2.0, &Vector9::zeros(), 0.0).unwrap();
        assert!(c.c.amax() < 1e-13 && c.gamma.amax() < 1e-13);
    }

    #[test]
    fn eval_matches_polynomial() {
        let m = mixture_central_moments(
            &[
                GaussianComponent { weight: 0.6, mean: Vector3::new(0.5, 0.0, 0.1), cov: Matrix3::identity() },
                GaussianComponent { weight: 0.4, mean: Vector3::new(-0.75, 0.0, -0.15), cov: Matrix3::identity() * 0.6 },
            ],
            8,
        )
        .unwrap();
        let c = cubic_closure(&m, 2.0, &Vector9::zeros(), -0.01).unwrap();
        let p = c.polynomial();
        let v = [0.4, -1.2, 0.9];
        let a = c.eval(v);
        for i in 0..3 {
            assert!((a[i] - p[i].eval(v)).abs() < 1e-12);
        }
    }

    #[test]
    fn matched_rows_hold_on_skewed_state() {
        let m = mixture_central_moments(
            &[
                GaussianComponent { weight: 0.7, mean: Vector3::new(0.3, -0.1, 0.0), cov: Matrix3::new(1.2, 0.1, 0.0, 0.1, 0.9, 0.0, 0.0, 0.0, 0.8) },
                GaussianComponent { weight: 0.3, mean: Vector3::new(-0.7, 0.233333333333, 0.0), cov: Matrix3::identity() * 0.5 },
            ],
            8,
        )
        .unwrap();
        let tau = 1.7;
        let prod = Vector9::from_iterator((0..9).map(|k| 0.01 * (k as f64 - 4.0)));
        let c = cubic_closure(&m, tau, &prod, -0.02).unwrap();
        let a = c.polynomial();
        let rows = row_productions(&prod);
        for (k, h) in super::super::BasisSet::standard().members[..9].iter().enumerate() {
            let proj = m.expectation(&dot3(&h.gradient(), &a).unwrap()).unwrap() + c.diffusion * m.expectation(&h.laplacian()).unwrap();
            assert!((proj - rows[k]).abs() < 1e-10, "row {k}: {proj} vs {}", rows[k]);
        }
    }
}
