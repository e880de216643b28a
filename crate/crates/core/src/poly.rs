//! Sparse polynomials in the three velocity components and central-moment tables.
//!
//! Every projection `<P, f>` used by the closures is evaluated as a linear
//! combination of stored central moments `m_a = <(v - U)^a, f>`, so all
//! polynomials here are understood to be written in the fluctuating velocity
//! `v' = v - U`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Highest total order held in a [`MomentSet`] and allowed in a [`Polynomial`].
pub const MAX_ORDER: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial degree {degree} exceeds the supported maximum {max}")]
    DegreeOverflow { degree: u32, max: u32 },
    #[error("moment of order {order} requested but the set only holds orders up to {max}")]
    MissingOrder { order: u32, max: u32 },
    #[error("covariance matrix is not symmetric positive definite")]
    NotSpd,
    #[error("degenerate cell: {0}")]
    Degenerate(&'static str),
}

/// Exponents `(a1, a2, a3)` of the monomial `v1^a1 v2^a2 v3^a3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub [u8; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0, 0, 0]);

    pub const fn new(a1: u8, a2: u8, a3: u8) -> Self {
        MultiIndex([a1, a2, a3])
    }

    /// Unit index `e_i`.
    pub fn unit(i: usize) -> Self {
        let mut a = [0u8; 3];
        a[i] = 1;
        MultiIndex(a)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&a| a as u32).sum()
    }

    pub fn plus(self, other: MultiIndex) -> MultiIndex {
        MultiIndex([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Dense enumeration of all multi-indices with order `<= MAX_ORDER`, graded by order.
struct IndexTable {
    list: Vec<MultiIndex>,
    lookup: [[[u16; 9]; 9]; 9],
    /// `offsets[k]` = number of indices of order `< k`.
    offsets: [usize; MAX_ORDER as usize + 2],
}

fn index_table() -> &'static IndexTable {
    static TABLE: OnceLock<IndexTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut list = Vec::new();
        let mut lookup = [[[u16::MAX; 9]; 9]; 9];
        let mut offsets = [0usize; MAX_ORDER as usize + 2];
        for order in 0..=MAX_ORDER as u8 {
            offsets[order as usize] = list.len();
            for a1 in (0..=order).rev() {
                for a2 in (0..=order - a1).rev() {
                    let a3 = order - a1 - a2;
                    lookup[a1 as usize][a2 as usize][a3 as usize] = list.len() as u16;
                    list.push(MultiIndex([a1, a2, a3]));
                }
            }
        }
        offsets[MAX_ORDER as usize + 1] = list.len();
        IndexTable {
            list,
            lookup,
            offsets,
        }
    })
}

/// Number of multi-indices with total order `<= order`.
pub fn index_count(order: u32) -> usize {
    index_table().offsets[order.min(MAX_ORDER) as usize + 1]
}

/// All multi-indices with total order `<= order`, graded.
pub fn indices_up_to(order: u32) -> &'static [MultiIndex] {
    &index_table().list[..index_count(order)]
}

fn dense_index(a: MultiIndex) -> Option<usize> {
    let [a1, a2, a3] = a.0;
    if a.order() > MAX_ORDER {
        return None;
    }
    let k = index_table().lookup[a1 as usize][a2 as usize][a3 as usize];
    (k != u16::MAX).then_some(k as usize)
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(MultiIndex::ZERO, c)
    }

    pub fn monomial(index: MultiIndex, coeff: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(index, coeff);
        p
    }

    /// The coordinate polynomial `v_i`.
    pub fn var(i: usize) -> Self {
        Self::monomial(MultiIndex::unit(i), 1.0)
    }

    /// `|v|^2`.
    pub fn norm_sq() -> Self {
        (0..3).map(|i| Self::monomial(MultiIndex::unit(i).plus(MultiIndex::unit(i)), 1.0)).sum()
    }

    /// `|v|^p` for even `p`.
    pub fn norm_pow(p: u32) -> Result<Self, PolyError> {
        assert!(p.is_multiple_of(2), "only even powers of the norm are polynomial");
        let mut out = Self::constant(1.0);
        let r2 = Self::norm_sq();
        for _ in 0..p / 2 {
            out = out.times(&r2)?;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, index: MultiIndex, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let e = self.terms.entry(index).or_insert(0.0);
        *e += coeff;
        if *e == 0.0 {
            self.terms.remove(&index);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn coeff(&self, index: MultiIndex) -> f64 {
        self.terms.get(&index).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            out.add_term(k, v * c);
        }
        out
    }

    pub fn times(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        let degree = self.degree() + other.degree();
        if !self.is_zero() && !other.is_zero() && degree > MAX_ORDER {
            return Err(PolyError::DegreeOverflow {
                degree,
                max: MAX_ORDER,
            });
        }
        let mut out = Polynomial::zero();
        for (ka, va) in self.terms() {
            for (kb, vb) in other.terms() {
                out.add_term(ka.plus(kb), va * vb);
            }
        }
        Ok(out)
    }

    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (k, v) in self.terms() {
            let a = k.0[i];
            if a == 0 {
                continue;
            }
            let mut d = k;
            d.0[i] -= 1;
            out.add_term(d, v * a as f64);
        }
        out
    }

    pub fn gradient(&self) -> [Polynomial; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }

    pub fn laplacian(&self) -> Polynomial {
        (0..3).map(|i| self.partial(i).partial(i)).sum()
    }

    /// `grad P . grad Q`.
    pub fn grad_dot(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        dot3(&self.gradient(), &other.gradient())
    }

    pub fn eval(&self, v: [f64; 3]) -> f64 {
        let mut pw = [[1.0f64; MAX_ORDER as usize + 1]; 3];
        for i in 0..3 {
            for k in 1..=MAX_ORDER as usize {
                pw[i][k] = pw[i][k - 1] * v[i];
            }
        }
        self.terms()
            .map(|(k, c)| {
                let [a, b, d] = k.0;
                c * pw[0][a as usize] * pw[1][b as usize] * pw[2][d as usize]
            })
            .sum()
    }
}

/// Componentwise dot product of two polynomial vector fields.
pub fn dot3(a: &[Polynomial; 3], b: &[Polynomial; 3]) -> Result<Polynomial, PolyError> {
    let mut out = Polynomial::zero();
    for i in 0..3 {
        out += a[i].times(&b[i])?;
    }
    Ok(out)
}

/// Divergence of a polynomial vector field.
pub fn divergence(field: &[Polynomial; 3]) -> Polynomial {
    (0..3).map(|i| field[i].partial(i)).sum()
}

/// The fluctuation field `v'` itself.
pub fn identity_field() -> [Polynomial; 3] {
    [Polynomial::var(0), Polynomial::var(1), Polynomial::var(2)]
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += rhs;
        self
    }
}

impl AddAssign for Polynomial {
    fn add_assign(&mut self, rhs: Polynomial) {
        for (k, v) in rhs.terms() {
            self.add_term(k, v);
        }
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        self + (-rhs)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl std::iter::Sum for Polynomial {
    fn sum<I: Iterator<Item = Polynomial>>(iter: I) -> Polynomial {
        iter.fold(Polynomial::zero(), |a, b| a + b)
    }
}

/// Central velocity moments of one cell, `m_a = <(v - U)^a, f>` for all `|a| <= max_order`.
///
/// Moments carry the mass density: `m_0 = rho`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    max_order: u32,
    rho: f64,
    mean: [f64; 3],
    sample_count: usize,
    values: Vec<f64>,
}

impl MomentSet {
    /// Builds a set from a table of central moments normalised per unit mass
    /// (`values[0] == 1`), scaling by `rho`.
    pub fn from_normalized(
        rho: f64,
        mean: [f64; 3],
        max_order: u32,
        normalized: &[f64],
        sample_count: usize,
    ) -> Self {
        let n = index_count(max_order);
        assert_eq!(normalized.len(), n, "moment table length mismatch");
        let mut values: Vec<f64> = normalized.iter().map(|m| m * rho).collect();
        values[0] = rho;
        for i in 0..3 {
            if max_order >= 1 {
                values[dense_index(MultiIndex::unit(i)).unwrap()] = 0.0;
            }
        }
        MomentSet {
            max_order,
            rho,
            mean,
            sample_count,
            values,
        }
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn mean(&self) -> [f64; 3] {
        self.mean
    }
    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn get(&self, a: MultiIndex) -> Result<f64, PolyError> {
        if a.order() > self.max_order {
            return Err(PolyError::MissingOrder {
                order: a.order(),
                max: self.max_order,
            });
        }
        Ok(self.values[dense_index(a).expect("order checked")])
    }

    fn m(&self, a: [u8; 3]) -> f64 {
        self.get(MultiIndex(a)).expect("moment order within table")
    }

    /// `<P(v'), f>`.
    pub fn expectation(&self, p: &Polynomial) -> Result<f64, PolyError> {
        let mut acc = 0.0;
        for (k, c) in p.terms() {
            acc += c * self.get(k)?;
        }
        Ok(acc)
    }

    /// `theta = k_B T / m = <|v'|^2, f> / (3 rho)`.
    pub fn theta(&self) -> f64 {
        (self.m([2, 0, 0]) + self.m([0, 2, 0]) + self.m([0, 0, 2])) / (3.0 * self.rho)
    }

    pub fn pressure(&self) -> f64 {
        self.rho * self.theta()
    }

    /// `Pi_ij = <v'_i v'_j, f>`.
    pub fn pressure_tensor(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| {
            let mut a = [0u8; 3];
            a[i] += 1;
            a[j] += 1;
            self.m(a)
        })
    }

    /// Trace-free stress `sigma = Pi - p I`.
    pub fn stress(&self) -> Matrix3<f64> {
        let pi = self.pressure_tensor();
        let p = pi.trace() / 3.0;
        pi - Matrix3::identity() * p
    }

    /// `q_i = <v'_i |v'|^2, f> / 2`.
    pub fn heat_flux(&self) -> Vector3<f64> {
        Vector3::from_fn(|i, _| {
            (0..3)
                .map(|j| {
                    let mut a = [0u8; 3];
                    a[i] += 1;
                    a[j] += 2;
                    self.m(a)
                })
                .sum::<f64>()
                / 2.0
        })
    }

    /// `<|v'|^4, f>`.
    pub fn m4(&self) -> f64 {
        self.expectation(&Polynomial::norm_pow(4).unwrap())
            .expect("order 4 available")
    }

    /// `<v'_i |v'|^4, f>`.
    pub fn m4_vector(&self) -> Vector3<f64> {
        let r4 = Polynomial::norm_pow(4).unwrap();
        Vector3::from_fn(|i, _| {
            self.expectation(&Polynomial::var(i).times(&r4).unwrap())
                .expect("order 5 available")
        })
    }

    /// `<v'_i |v'|^6, f>`.
    pub fn m6_vector(&self) -> Result<Vector3<f64>, PolyError> {
        let r6 = Polynomial::norm_pow(6)?;
        let mut out = Vector3::zeros();
        for i in 0..3 {
            out[i] = self.expectation(&Polynomial::var(i).times(&r6)?)?;
        }
        Ok(out)
    }
}

/// A polynomial compiled against the dense moment layout, for repeated
/// evaluation of `<P, f>` over many cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearForm {
    terms: Vec<(usize, f64)>,
    degree: u32,
}

impl LinearForm {
    pub fn new(p: &Polynomial) -> Self {
        LinearForm {
            terms: p
                .terms()
                .map(|(k, c)| (dense_index(k).expect("degree checked on construction"), c))
                .collect(),
            degree: p.degree(),
        }
    }

    /// `<P, f>`; panics if `m` lacks the required order.
    pub fn apply(&self, m: &MomentSet) -> f64 {
        assert!(self.degree <= m.max_order, "moment order {} missing", self.degree);
        self.terms.iter().map(|&(k, c)| c * m.values[k]).sum()
    }
}

/// Central moments of the Gaussian with covariance `pi` (per unit mass) and density `rho`.
///
/// Even moments follow the pair-partition (Isserlis) rule; odd moments vanish.
pub fn gaussian_central_moments(
    pi: &Matrix3<f64>,
    rho: f64,
    max_order: u32,
) -> Result<MomentSet, PolyError> {
    if max_order > MAX_ORDER {
        return Err(PolyError::DegreeOverflow {
            degree: max_order,
            max: MAX_ORDER,
        });
    }
    if (pi - pi.transpose()).abs().max() > 1e-12 * pi.abs().max()
        || pi.cholesky().is_none()
    {
        return Err(PolyError::NotSpd);
    }
    let table = isserlis_table(pi, max_order);
    Ok(MomentSet::from_normalized(rho, [0.0; 3], max_order, &table, 0))
}

/// Zero-mean Gaussian moments per unit mass, graded order, via
/// `E[x_i x^b] = sum_j b_j Pi_ij E[x^(b - e_j)]`.
fn isserlis_table(pi: &Matrix3<f64>, max_order: u32) -> Vec<f64> {
    let idx = indices_up_to(max_order);
    let mut out = vec![0.0; idx.len()];
    out[0] = 1.0;
    for (k, a) in idx.iter().enumerate().skip(1) {
        if a.order() % 2 == 1 {
            continue;
        }
        let i = (0..3).find(|&i| a.0[i] > 0).unwrap();
        let mut rest = *a;
        rest.0[i] -= 1;
        let mut acc = 0.0;
        for j in 0..3 {
            let bj = rest.0[j];
            if bj == 0 {
                continue;
            }
            let mut sub = rest;
            sub.0[j] -= 1;
            acc += bj as f64 * pi[(i, j)] * out[dense_index(sub).unwrap()];
        }
        out[k] = acc;
    }
    out
}

/// One Gaussian component of a velocity density: mass `weight`, mean, covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vector3<f64>,
    pub cov: Matrix3<f64>,
}

/// Central moments (about the mixture mean) of a weighted sum of Gaussians.
pub fn mixture_central_moments(
    components: &[GaussianComponent],
    max_order: u32,
) -> Result<MomentSet, PolyError> {
    let rho: f64 = components.iter().map(|c| c.weight).sum();
    if rho <= 0.0 {
        return Err(PolyError::Degenerate("mixture has no mass"));
    }
    let mean: Vector3<f64> = components.iter().map(|c| c.mean * c.weight).sum::<Vector3<f64>>() / rho;
    let idx = indices_up_to(max_order);
    let mut acc = vec![0.0; idx.len()];
    for comp in components {
        if comp.cov.cholesky().is_none() {
            return Err(PolyError::NotSpd);
        }
        let g = isserlis_table(&comp.cov, max_order);
        let shift = comp.mean - mean;
        // E[(x + s)^a] = sum_{b <= a} C(a,b) s^(a-b) E[x^b]
        for (k, a) in idx.iter().enumerate() {
            let mut total = 0.0;
            for b0 in 0..=a.0[0] {
                for b1 in 0..=a.0[1] {
                    for b2 in 0..=a.0[2] {
                        let b = MultiIndex([b0, b1, b2]);
                        let eb = g[dense_index(b).unwrap()];
                        if eb == 0.0 {
                            continue;
                        }
                        let coef = binom(a.0[0], b0)
                            * binom(a.0[1], b1)
                            * binom(a.0[2], b2)
                            * shift[0].powi((a.0[0] - b0) as i32)
                            * shift[1].powi((a.0[1] - b1) as i32)
                            * shift[2].powi((a.0[2] - b2) as i32);
                        total += coef * eb;
                    }
                }
            }
            acc[k] += comp.weight * total;
        }
    }
    let normalized: Vec<f64> = acc.iter().map(|m| m / rho).collect();
    Ok(MomentSet::from_normalized(
        rho,
        [mean[0], mean[1], mean[2]],
        max_order,
        &normalized,
        0,
    ))
}

fn binom(n: u8, k: u8) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Monte Carlo estimate of the central moments of a cell's velocities.
///
/// The mean is the sample mean; every moment is the sample average of
/// `(v - U)^a` scaled by `rho`.
pub fn estimate_central_moments(
    velocities: &[[f64; 3]],
    rho: f64,
    max_order: u32,
) -> Result<MomentSet, PolyError> {
    let n = velocities.len();
    if n < 2 {
        return Err(PolyError::Degenerate("fewer than two particles"));
    }
    if max_order > MAX_ORDER {
        return Err(PolyError::DegreeOverflow {
            degree: max_order,
            max: MAX_ORDER,
        });
    }
    let mut mean = [0.0; 3];
    for v in velocities {
        for i in 0..3 {
            mean[i] += v[i];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    // Accumulate in nested (a1, a2, a3) order so the inner loop is contiguous,
    // then scatter into the graded table.
    let order = max_order as usize;
    let mut nested = Vec::with_capacity(index_count(max_order));
    for a1 in 0..=order {
        for a2 in 0..=order - a1 {
            for a3 in 0..=order - a1 - a2 {
                nested.push(dense_index(MultiIndex::new(a1 as u8, a2 as u8, a3 as u8)).expect("order within table"));
            }
        }
    }
    let mut buf = vec![0.0; nested.len()];
    let mut pw = [[1.0f64; MAX_ORDER as usize + 1]; 3];
    for v in velocities {
        for i in 0..3 {
            let c = v[i] - mean[i];
            for k in 1..=order {
                pw[i][k] = pw[i][k - 1] * c;
            }
        }
        let mut k = 0;
        for a1 in 0..=order {
            let x = pw[0][a1];
            for a2 in 0..=order - a1 {
                let xy = x * pw[1][a2];
                let len = order - a1 - a2 + 1;
                for (slot, z) in buf[k..k + len].iter_mut().zip(&pw[2][..len]) {
                    *slot += xy * z;
                }
                k += len;
            }
        }
    }
    let mut acc = vec![0.0; nested.len()];
    for (k, &d) in nested.iter().enumerate() {
        acc[d] = buf[k];
    }
    let normalized: Vec<f64> = acc.iter().map(|s| s / n as f64).collect();
    Ok(MomentSet::from_normalized(rho, mean, max_order, &normalized, n))
}
