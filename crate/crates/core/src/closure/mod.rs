//! Drift closures: the Fisher-entropic model, the cubic baseline and the
//! linear (Ornstein-Uhlenbeck) limit.
//!
//! The Fisher-entropic drift is
//!
//! ```text
//! A(v') = -v'/tau + c0 + sum_b c_b grad H_b(v') - c4 v' |v'|^4
//! ```
//!
//! with the ten basis polynomials of [`BasisSet`]. The coefficients match the
//! second moments and heat fluxes of the collision operator and additionally
//! force the entropy to decay at the rate `-D I`, where `I` is the Fisher
//! information relative to the local Maxwellian.

pub mod audit;
mod cubic;

use std::sync::OnceLock;

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use thiserror::Error;

use crate::gas::{transport_scales, GasModel, TransportScales};
use crate::poly::{divergence, dot3, identity_field, LinearForm, MomentSet, PolyError, Polynomial};

pub use cubic::{cubic_closure, CubicCoefficients};

pub const N_BASIS: usize = 10;
pub const N_MATCHED: usize = 9;
/// Index of the entropy polynomial `|v'|^4` in the basis.
pub const PHI: usize = 9;
/// Component pairs `(i, j)`, `i <= j`, of the quadratic basis members.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Minimum particle count for which high-order moments are trusted.
pub const MIN_PARTICLES: usize = 30;
/// Largest accepted condition estimate of `R`.
pub const MAX_CONDITION: f64 = 1e12;

pub type Matrix10 = SMatrix<f64, 10, 10>;
pub type Matrix9 = SMatrix<f64, 9, 9>;
pub type Vector10 = SVector<f64, 10>;
pub type Vector9 = SVector<f64, 9>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosureError {
    #[error("degenerate cell: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn degenerate(msg: impl Into<String>) -> ClosureError {
    ClosureError::Degenerate(msg.into())
}

/// The closure basis in the fluctuating velocity:
/// `v'_i v'_j` (i <= j), `v'_i |v'|^2`, and the entropy polynomial `|v'|^4`.
///
/// The full quadratic products are used instead of their trace-free parts:
/// the six trace-free members sum to zero on the diagonal and would make `R`
/// singular. The span differs only by `|v'|^2`, which the diagonal products
/// already contain.
#[derive(Clone, Debug)]
pub struct BasisSet {
    pub members: Vec<Polynomial>,
    pub conserved: Vec<Polynomial>,
}

impl BasisSet {
    pub fn standard() -> Self {
        let v = identity_field();
        let r2 = Polynomial::norm_sq();
        let mut members: Vec<Polynomial> = PAIRS.iter().map(|&(i, j)| v[i].times(&v[j]).unwrap()).collect();
        members.extend((0..3).map(|i| v[i].times(&r2).unwrap()));
        members.push(Polynomial::norm_pow(4).unwrap());
        let conserved = vec![Polynomial::constant(1.0), v[0].clone(), v[1].clone(), v[2].clone()];
        let basis = BasisSet { members, conserved };
        assert_eq!(basis.rank(), N_BASIS, "basis polynomials are linearly dependent");
        basis
    }

    /// Rank of the coefficient matrix of the members over monomials.
    pub fn rank(&self) -> usize {
        let monos = crate::poly::indices_up_to(8);
        let m = nalgebra::DMatrix::from_fn(self.members.len(), monos.len(), |a, k| self.members[a].coeff(monos[k]));
        m.rank(1e-12)
    }
}

/// Linear forms over the moment table used by the assembler, built once.
pub(crate) struct Forms {
    pub gg: [[LinearForm; N_BASIS]; N_BASIS],
    pub grad: [[LinearForm; 3]; N_BASIS],
    pub lap: [LinearForm; N_BASIS],
    pub vgrad: [LinearForm; N_BASIS],
    pub grad_vr4: [LinearForm; N_BASIS],
    pub vr4: [LinearForm; 3],
    pub r4: LinearForm,
    pub lap_r6: LinearForm,
}

pub(crate) fn forms() -> &'static Forms {
    static FORMS: OnceLock<Forms> = OnceLock::new();
    FORMS.get_or_init(|| {
        let h = BasisSet::standard().members;
        let grads: Vec<[Polynomial; 3]> = h.iter().map(Polynomial::gradient).collect();
        let v = identity_field();
        let r4 = Polynomial::norm_pow(4).unwrap();
        let vr4: [Polynomial; 3] = std::array::from_fn(|i| v[i].times(&r4).unwrap());
        Forms {
            gg: std::array::from_fn(|a| std::array::from_fn(|b| LinearForm::new(&dot3(&grads[a], &grads[b]).unwrap()))),
            grad: std::array::from_fn(|a| std::array::from_fn(|i| LinearForm::new(&grads[a][i]))),
            lap: std::array::from_fn(|a| LinearForm::new(&h[a].laplacian())),
            vgrad: std::array::from_fn(|a| LinearForm::new(&dot3(&v, &grads[a]).unwrap())),
            grad_vr4: std::array::from_fn(|a| LinearForm::new(&dot3(&grads[a], &vr4).unwrap())),
            vr4: std::array::from_fn(|i| LinearForm::new(&vr4[i])),
            r4: LinearForm::new(&r4),
            lap_r6: LinearForm::new(&Polynomial::norm_pow(6).unwrap().laplacian()),
        }
    })
}

/// Solved Fisher-entropic drift for one cell.
///
/// `A_i = -v'_i/tau + c0_i + sum_j c1_sym_ij v'_j + 2 sum_j c2_j v'_i v'_j
///        + c2_i |v'|^2 + 3 c3 v'_i |v'|^2 - c4 v'_i |v'|^4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftCoefficients {
    pub c0: Vector3<f64>,
    pub c1_sym: Matrix3<f64>,
    pub c2: Vector3<f64>,
    pub c3: f64,
    pub c4: f64,
    pub tau: f64,
    pub diffusion: f64,
}

impl DriftCoefficients {
    /// Pure Ornstein-Uhlenbeck drift `-v'/tau`.
    pub fn linear(tau: f64, theta: f64) -> Self {
        DriftCoefficients {
            c0: Vector3::zeros(),
            c1_sym: Matrix3::zeros(),
            c2: Vector3::zeros(),
            c3: 0.0,
            c4: 0.0,
            tau,
            diffusion: theta / tau,
        }
    }

    pub fn theta(&self) -> f64 {
        self.diffusion * self.tau
    }

    /// Largest absolute nonlinear coefficient (`c0`, `c1`, `c2`, `c3`, `c4`).
    pub fn max_nonlinear(&self) -> f64 {
        self.c0
            .amax()
            .max(self.c1_sym.amax())
            .max(self.c2.amax())
            .max(self.c3.abs())
            .max(self.c4.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.c0.iter().chain(self.c1_sym.iter()).chain(self.c2.iter()).all(|x| x.is_finite())
            && [self.c3, self.c4, self.tau, self.diffusion].iter().all(|x| x.is_finite())
    }

    /// Basis coefficients `c_b` in the order of [`BasisSet`].
    pub fn basis_coefficients(&self) -> Vector10 {
        let mut c = Vector10::zeros();
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            c[k] = if i == j { self.c1_sym[(i, i)] / 2.0 } else { self.c1_sym[(i, j)] };
        }
        for i in 0..3 {
            c[6 + i] = self.c2[i];
        }
        c[PHI] = 0.75 * self.c3;
        c
    }

    fn from_basis(c: &Vector10, c0: Vector3<f64>, c4: f64, tau: f64, diffusion: f64) -> Self {
        let mut c1 = Matrix3::zeros();
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            if i == j {
                c1[(i, i)] = 2.0 * c[k];
            } else {
                c1[(i, j)] = c[k];
                c1[(j, i)] = c[k];
            }
        }
        DriftCoefficients {
            c0,
            c1_sym: c1,
            c2: Vector3::new(c[6], c[7], c[8]),
            c3: c[PHI] * 4.0 / 3.0,
            c4,
            tau,
            diffusion,
        }
    }
}

/// Evaluate the drift at a fluctuating velocity.
pub fn drift_eval(c: &DriftCoefficients, v: [f64; 3]) -> [f64; 3] {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let c2v = c.c2[0] * v[0] + c.c2[1] * v[1] + c.c2[2] * v[2];
    let radial = 3.0 * c.c3 * r2 - c.c4 * r2 * r2 - 1.0 / c.tau + 2.0 * c2v;
    std::array::from_fn(|i| {
        c.c0[i]
            + c.c1_sym[(i, 0)] * v[0]
            + c.c1_sym[(i, 1)] * v[1]
            + c.c1_sym[(i, 2)] * v[2]
            + c.c2[i] * r2
            + radial * v[i]
    })
}

/// The drift as a polynomial vector field in `v'`.
pub fn drift_polynomial(c: &DriftCoefficients) -> [Polynomial; 3] {
    let b = BasisSet::standard();
    let coeffs = c.basis_coefficients();
    let v = identity_field();
    let r4 = Polynomial::norm_pow(4).unwrap();
    std::array::from_fn(|i| {
        let mut a = Polynomial::constant(c.c0[i]) - v[i].scale(1.0 / c.tau) - v[i].times(&r4).unwrap().scale(c.c4);
        for (k, h) in b.members.iter().enumerate() {
            a += h.partial(i).scale(coeffs[k]);
        }
        a
    })
}

/// Entropy stabilizer `c_d`; the drift carries `c4 = 6 c_d` on `-v'|v'|^4`.
///
/// `c_d = eps0 (2 theta0)^2 ((m4 - 15 rho theta^2) / (15 rho theta^2))^2`, where
/// `theta0` is the reference temperature of the run. It vanishes exactly when the
/// fourth moment takes its Maxwellian value and is invariant under velocity
/// rescaling of the cell.
pub fn stabilization_coefficient(m: &MomentSet, eps0: f64, theta0: f64) -> Result<f64, ClosureError> {
    let theta = m.theta();
    if !(theta > 0.0) {
        return Err(degenerate("non-positive temperature"));
    }
    let eq = 15.0 * m.rho() * theta * theta;
    let excess = (m.m4() - eq) / eq;
    Ok(eps0 * (2.0 * theta0).powi(2) * excess * excess)
}

/// Collision productions: six `d/dt Pi_ij` entries (pairs in [`PAIRS`] order)
/// followed by three `d/dt q_i`.
///
/// Both interactions use the Maxwell-molecule relaxation form
/// `-(p/mu) sigma` and `-(2/3)(p/mu) q` with the interaction's own viscosity.
pub fn production_terms(m: &MomentSet, model: &GasModel) -> Result<Vector9, ClosureError> {
    let ts = transport_scales(m.theta(), m.rho(), model).map_err(|e| degenerate(e.to_string()))?;
    let rate = ts.p / ts.mu;
    let sigma = m.stress();
    let q = m.heat_flux();
    let mut p = Vector9::zeros();
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        p[k] = -rate * sigma[(i, j)];
    }
    for i in 0..3 {
        p[6 + i] = -2.0 / 3.0 * rate * q[i];
    }
    Ok(p)
}

/// Right-hand side production for each matched basis row.
/// The heat-flux rows use `H = v'_i |v'|^2 = 2 q_i`, hence the factor 2.
pub fn row_productions(p: &Vector9) -> Vector9 {
    let mut out = *p;
    for i in 6..9 {
        out[i] *= 2.0;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssembledSystem {
    pub rho: f64,
    pub theta: f64,
    pub tau: f64,
    pub diffusion: f64,
    pub c_d: f64,
    pub c4: f64,
    /// Momentum-centred Gram matrix `<grad H_a . grad H_b> - <grad H_a>.<grad H_b>/rho`.
    pub r: Matrix10,
    /// `<Lap H_a>`.
    pub q: Vector10,
    pub g: Vector10,
    /// `(R^-1)` from the single Cholesky factorization.
    pub r_inv: Matrix10,
    pub c_hat: Vector10,
    pub s: f64,
    /// Bordered matrix `[[R_bar, Q_bar], [Q_bar^T, S]]`.
    pub l: Matrix10,
    /// Matched right-hand side followed by the entropy target `h`.
    pub b: Vector10,
    /// `<grad H_a>` for the momentum closure.
    pub mean_grad: [Vector3<f64>; N_BASIS],
    pub mean_vr4: Vector3<f64>,
    pub condition_estimate: f64,
}

impl AssembledSystem {
    pub fn r_bar(&self) -> Matrix9 {
        self.r.fixed_view::<9, 9>(0, 0).into_owned()
    }

    pub fn q_bar(&self) -> Vector9 {
        self.q.fixed_rows::<9>(0).into_owned()
    }

    pub fn b_bar(&self) -> Vector9 {
        self.b.fixed_rows::<9>(0).into_owned()
    }

    pub fn h(&self) -> f64 {
        self.b[PHI]
    }
}

/// Build `R`, `Q`, `G`, `c_hat`, `L` and `b` for one cell from its moments.
///
/// `productions` are the values returned by [`production_terms`]; `c_d` is the
/// stabilizer from [`stabilization_coefficient`].
pub fn assemble_system(
    m: &MomentSet,
    tau: f64,
    diffusion: f64,
    c_d: f64,
    productions: &Vector9,
) -> Result<AssembledSystem, ClosureError> {
    let theta = m.theta();
    if !(theta > 0.0) || !(m.rho() > 0.0) {
        return Err(degenerate("non-positive temperature or density"));
    }
    if m.max_order() < 8 {
        return Err(PolyError::MissingOrder { order: 8, max: m.max_order() }.into());
    }
    let f = forms();
    let rho = m.rho();
    let c4 = 6.0 * c_d;
    let mean_grad: [Vector3<f64>; N_BASIS] =
        std::array::from_fn(|a| Vector3::from_fn(|i, _| f.grad[a][i].apply(m)));
    let mean_vr4 = Vector3::from_fn(|i, _| f.vr4[i].apply(m));

    let r = Matrix10::from_fn(|a, b| f.gg[a][b].apply(m) - mean_grad[a].dot(&mean_grad[b]) / rho);
    let q = Vector10::from_fn(|a, _| f.lap[a].apply(m));
    let mut g = Vector10::zeros();
    g[PHI] = -2.0 * q[PHI];

    let prod = row_productions(productions);
    let mut b = Vector10::zeros();
    for a in 0..N_MATCHED {
        let stab = f.grad_vr4[a].apply(m) - mean_grad[a].dot(&mean_vr4) / rho;
        b[a] = prod[a] + f.vgrad[a].apply(m) / tau - diffusion * q[a] + c4 * stab;
    }
    // Lap |v'|^6 = 42 |v'|^4 in three dimensions.
    b[PHI] = c_d * f.lap_r6.apply(m);

    let (r_inv, condition_estimate) = spd_inverse(&r)?;
    let c_hat = r_inv * (q + g);
    let s = q.dot(&c_hat);
    let mut l = r;
    for a in 0..N_MATCHED {
        l[(a, PHI)] = q[a];
        l[(PHI, a)] = q[a];
    }
    l[(PHI, PHI)] = s;
    Ok(AssembledSystem {
        rho,
        theta,
        tau,
        diffusion,
        c_d,
        c4,
        r,
        q,
        g,
        r_inv,
        c_hat,
        s,
        l,
        b,
        mean_grad,
        mean_vr4,
        condition_estimate,
    })
}

/// Inverse of an SPD matrix through one Cholesky factorization, with a
/// condition estimate taken from the Jacobi-scaled factor.
fn spd_inverse(r: &Matrix10) -> Result<(Matrix10, f64), ClosureError> {
    let d = Vector10::from_fn(|i, _| r[(i, i)]);
    if d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(degenerate("R has a non-positive diagonal"));
    }
    let scale = d.map(|x| 1.0 / x.sqrt());
    let scaled = Matrix10::from_fn(|i, j| r[(i, j)] * scale[i] * scale[j]);
    let chol = scaled.cholesky().ok_or_else(|| degenerate("R is not positive definite"))?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let condition = (hi / lo).powi(2);
    if !(condition < MAX_CONDITION) {
        return Err(degenerate(format!("R condition estimate {condition:.3e}")));
    }
    let inv = chol.inverse();
    Ok((Matrix10::from_fn(|i, j| inv[(i, j)] * scale[i] * scale[j]), condition))
}

/// Inverse of `R_bar` (R without its last row and column) from `R^-1`:
/// `R_bar^-1 = (R^-1)_bar - u u^T / a`, `u = (R^-1)_{bar,phi}`, `a = (R^-1)_{phi,phi}`.
pub fn block_downdate_inverse(r_inv: &Matrix10) -> Matrix9 {
    let a = r_inv[(PHI, PHI)];
    let u: Vector9 = r_inv.fixed_view::<9, 1>(0, PHI).into_owned();
    r_inv.fixed_view::<9, 9>(0, 0).into_owned() - u * u.transpose() / a
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Relative Tikhonov weight on the one-dimensional Schur solve.
    ///
    /// At Gaussian states the Schur complement of `L` vanishes and the entropy
    /// row is then satisfied by the matched rows alone. Sampled moments only
    /// approximate this, so the pivot is regularized by
    /// `delta = eta (R^-1)_{phi,phi} Q_phi^2`.
    pub eta: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { eta: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    /// `L / R_bar = S - Q_bar^T R_bar^-1 Q_bar`.
    pub schur: f64,
    /// Same quantity from the bordered-inverse identity `(w^2 - a^2 Q_phi^2) / a`.
    pub schur_identity: f64,
    pub c_phi_prime: f64,
    pub c_prime: Vector10,
    pub basis: Vector10,
    pub regularization: f64,
    pub condition_estimate: f64,
}

/// Solve for the drift coefficients of an assembled system.
pub fn solve_coefficients(
    sys: &AssembledSystem,
    opts: &SolveOptions,
) -> Result<(DriftCoefficients, SolveReport), ClosureError> {
    let r_bar_inv = block_downdate_inverse(&sys.r_inv);
    let q_bar = sys.q_bar();
    let y = r_bar_inv * sys.b_bar();
    let z = r_bar_inv * q_bar;
    let schur = sys.s - q_bar.dot(&z);
    let resid = sys.h() - q_bar.dot(&y);
    let a = sys.r_inv[(PHI, PHI)];
    let delta = opts.eta * a * sys.q[PHI] * sys.q[PHI];
    let c_phi = if schur == 0.0 && delta == 0.0 { 0.0 } else { schur * resid / (schur * schur + delta * delta) };

    let mut c_prime = Vector10::zeros();
    c_prime.fixed_rows_mut::<9>(0).copy_from(&(y - z * c_phi));
    c_prime[PHI] = c_phi;
    let mut c = Vector10::zeros();
    for k in 0..N_MATCHED {
        c[k] = c_prime[k] + c_phi * sys.c_hat[k];
    }
    c[PHI] = c_phi * sys.c_hat[PHI];

    let c0 = momentum_closure(sys, &c);
    let coeffs = DriftCoefficients::from_basis(&c, c0, sys.c4, sys.tau, sys.diffusion);
    if !coeffs.is_finite() {
        return Err(degenerate("non-finite drift coefficients"));
    }
    let w: f64 = (0..N_MATCHED).map(|k| sys.r_inv[(PHI, k)] * sys.q[k]).sum();
    let report = SolveReport {
        schur,
        schur_identity: (w * w - a * a * sys.q[PHI] * sys.q[PHI]) / a,
        c_phi_prime: c_phi,
        c_prime,
        basis: c,
        regularization: delta,
        condition_estimate: sys.condition_estimate,
    };
    Ok((coeffs, report))
}

/// `c0` from `<A, f> = 0`: `rho c0 = -sum_b c_b <grad H_b> + c4 <v'|v'|^4>`.
fn momentum_closure(sys: &AssembledSystem, c: &Vector10) -> Vector3<f64> {
    let mut s = sys.mean_vr4 * sys.c4;
    for k in 0..N_BASIS {
        s -= sys.mean_grad[k] * c[k];
    }
    s / sys.rho
}

/// Closed form of the momentum closure in terms of the contracted moments:
/// `c0_i = -3 theta c2_i - 2 (Pi c2)_i / rho - 6 c3 q_i / rho + c4 m4_i / rho`.
pub fn closed_form_c0(c: &DriftCoefficients, m: &MomentSet) -> Vector3<f64> {
    let rho = m.rho();
    let pi = m.pressure_tensor();
    -c.c2 * 3.0 * m.theta() - pi * c.c2 * 2.0 / rho - m.heat_flux() * 6.0 * c.c3 / rho + m.m4_vector() * c.c4 / rho
}

/// Dense reference solve of `L c' = b` by LU, for validation.
pub fn dense_reference_solve(sys: &AssembledSystem) -> Option<Vector10> {
    sys.l.lu().solve(&sys.b)
}

/// `<div (A + v'/tau), f>`: the entropy constraint, which vanishes for a
/// solved Fisher-entropic drift. It equals `<sum_b c_b Lap H_b> - c_d <Lap |v'|^6>`.
pub fn fisher_constraint_residual(c: &DriftCoefficients, m: &MomentSet) -> Result<f64, ClosureError> {
    let mut a = drift_polynomial(c);
    let v = identity_field();
    for i in 0..3 {
        a[i] += v[i].scale(1.0 / c.tau);
    }
    Ok(m.expectation(&divergence(&a))?)
}

/// The entropy constraint written with an explicit constant:
/// `<sum_b c_b Lap H_b> - factor c_d <|v'|^4>`.
pub fn entropy_constraint_with_factor(c: &DriftCoefficients, m: &MomentSet, factor: f64) -> Result<f64, ClosureError> {
    let coeffs = c.basis_coefficients();
    let f = forms();
    let lhs: f64 = (0..N_BASIS).map(|k| coeffs[k] * f.lap[k].apply(m)).sum();
    Ok(lhs - factor * (c.c4 / 6.0) * f.r4.apply(m))
}

/// Matched-row residuals `<grad H_a . A> + D <Lap H_a> - P_a` of a polynomial
/// drift on a moment set, for the nine stress and heat-flux rows.
pub fn matched_row_residuals(
    drift: &[Polynomial; 3],
    diffusion: f64,
    m: &MomentSet,
    productions: &Vector9,
) -> Result<Vector9, ClosureError> {
    let rows = row_productions(productions);
    let basis = BasisSet::standard();
    let mut out = Vector9::zeros();
    for (k, h) in basis.members[..N_MATCHED].iter().enumerate() {
        out[k] = m.expectation(&dot3(&h.gradient(), drift)?)? + diffusion * m.expectation(&h.laplacian())? - rows[k];
    }
    Ok(out)
}

/// Per-cell parameters for [`fefp_closure`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureParams {
    pub eps0: f64,
    pub theta_ref: f64,
    pub solve: SolveOptions,
}

/// Full per-cell pipeline: transport scales, stabilizer, productions,
/// assembly and solve.
pub fn fefp_closure(
    m: &MomentSet,
    model: &GasModel,
    params: &ClosureParams,
) -> Result<(DriftCoefficients, SolveReport), ClosureError> {
    if m.sample_count() != 0 && m.sample_count() < MIN_PARTICLES {
        return Err(degenerate(format!("{} particles", m.sample_count())));
    }
    let TransportScales { tau, .. } =
        transport_scales(m.theta(), m.rho(), model).map_err(|e| degenerate(e.to_string()))?;
    let c_d = stabilization_coefficient(m, params.eps0, params.theta_ref)?;
    let p = production_terms(m, model)?;
    let sys = assemble_system(m, tau, m.theta() / tau, c_d, &p)?;
    solve_coefficients(&sys, &params.solve)
}
