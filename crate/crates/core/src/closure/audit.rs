//! Explicit 10x10 matrices for the three-dimensional heat-flux closure, written
//! out entry by entry in contracted-moment notation, and a comparison against
//! the generic assembler.
//!
//! The explicit tables are transcribed as published, including entries that do
//! not follow from the defining inner products. The generic assembler is the
//! reference; this module only reports where the two disagree.
//!
//! Notation: `m(p, [i, j, ..])` is `<v'_i v'_j .. |v'|^p, f>`.

use std::fmt::Write as _;

use super::{assemble_system, row_productions, ClosureError, Matrix10, Vector10, Vector9};
use crate::poly::{MomentSet, Polynomial};

/// `<v'_idx |v'|^p, f>`.
fn m(ms: &MomentSet, p: u32, idx: &[usize]) -> f64 {
    let mut poly = Polynomial::norm_pow(p).expect("even power");
    for &i in idx {
        poly = poly.times(&Polynomial::var(i - 1)).expect("order within table");
    }
    ms.expectation(&poly).expect("order within table")
}

pub struct ExplicitSystem {
    pub r: Matrix10,
    pub q: Vector10,
    pub b: Vector10,
}

/// Explicit matrices. `p` holds the row productions (stress rows, then
/// `d/dt <v'_i |v'|^2>`), `d` the diffusion and `c4` the drift stabilizer.
pub fn explicit_system(ms: &MomentSet, p: &Vector9, d: f64, c4: f64) -> ExplicitSystem {
    let m0 = |idx: &[usize]| m(ms, 0, idx);
    let m2 = |idx: &[usize]| m(ms, 2, idx);
    let m4 = |idx: &[usize]| m(ms, 4, idx);
    let m6 = |idx: &[usize]| m(ms, 6, idx);
    let rho = ms.rho();
    let (m11, m12, m13, m22, m23, m33) = (m0(&[1, 1]), m0(&[1, 2]), m0(&[1, 3]), m0(&[2, 2]), m0(&[2, 3]), m0(&[3, 3]));
    let (q1, q2, q3) = (m2(&[1]), m2(&[2]), m2(&[3]));
    let s2 = m2(&[]);
    let s4 = m4(&[]);

    #[rustfmt::skip]
    let b_blk = [
        [2.0 * m11, 2.0 * m12, 2.0 * m13, 0.0, 0.0, 0.0],
        [m12, m11 + m22, m23, m12, m13, 0.0],
        [m13, m23, m11 + m33, 0.0, m12, m13],
        [0.0, 2.0 * m12, 0.0, 2.0 * m22, 2.0 * m23, 0.0],
        [0.0, m13, m12, m23, m22 + m33, m23],
        [0.0, 0.0, 2.0 * m13, 0.0, m23, 2.0 * m33],
    ];
    // Second row, second column is printed without an operator; read as a sum.
    #[rustfmt::skip]
    let c_blk = [
        [2.0 * q1 + 4.0 * m0(&[1, 1, 1]), 4.0 * m0(&[1, 1, 2]), 4.0 * m0(&[1, 1, 3])],
        [q1 + 4.0 * m0(&[1, 1, 2]), q2 + 4.0 * m0(&[1, 2, 2]), 4.0 * m0(&[1, 2, 3])],
        [q1 + 4.0 * m0(&[1, 1, 3]), 4.0 * m0(&[1, 2, 3]), q3 + 4.0 * m0(&[1, 3, 3])],
        [4.0 * m0(&[1, 2, 2]), 2.0 * q2 + 4.0 * m0(&[2, 2, 2]), 4.0 * m0(&[2, 2, 3])],
        [4.0 * m0(&[1, 2, 3]), q2 + 4.0 * m0(&[2, 2, 3]), q3 + 4.0 * m0(&[2, 3, 3])],
        [4.0 * m0(&[1, 3, 3]), 4.0 * m0(&[2, 3, 3]), 2.0 * q3 + 4.0 * m0(&[3, 3, 3])],
    ];
    let e_blk = [11, 12, 13, 22, 23, 33].map(|ij: usize| 6.0 * m2(&[ij / 10, ij % 10]));
    #[rustfmt::skip]
    let f_blk = [
        [2.0 * m0(&[1, 1, 1]) + q1, 4.0 * m0(&[1, 1, 2]) + q2, 4.0 * m0(&[1, 1, 3]) + q3, 2.0 * m0(&[1, 2, 2]), 4.0 * m0(&[1, 2, 3]), 2.0 * m0(&[1, 3, 3])],
        [2.0 * m0(&[1, 1, 2]), 4.0 * m0(&[1, 2, 2]) + q1, 4.0 * m0(&[1, 2, 3]), 2.0 * m0(&[2, 2, 2]) + q2, 4.0 * m0(&[2, 2, 3]) + q3, 2.0 * m0(&[2, 3, 3])],
        [2.0 * m0(&[1, 1, 3]), 4.0 * m0(&[1, 2, 3]), 4.0 * m0(&[1, 3, 3]) + q1, 2.0 * m0(&[2, 2, 3]), 4.0 * m0(&[2, 3, 3]) + q2, 2.0 * m0(&[3, 3, 3]) + q3],
    ];
    let pi = [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]];
    let mut j_blk = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            j_blk[i][j] = 8.0 * m2(&[i + 1, j + 1]) - 4.0 * pi[i][j] * s2;
        }
        j_blk[i][i] -= 4.0 * (pi[i][0].powi(2) + pi[i][1].powi(2) + pi[i][2].powi(2));
        j_blk[i][i] += s4 - s2 * s2;
    }
    #[rustfmt::skip]
    let offdiag = [
        [[0.0, m11 * m12, m11 * m13], [m11 * m12, 0.0, m12 * m13], [m11 * m13, m11 * m13, 0.0]],
        [[0.0, m12 * m22, m12 * m23], [m12 * m22, 0.0, m22 * m23], [m12 * m23, m12 * m23, 0.0]],
        [[0.0, m13 * m23, m13 * m33], [m13 * m23, 0.0, m23 * m33], [m13 * m33, m13 * m33, 0.0]],
    ];
    for blk in &offdiag {
        for i in 0..3 {
            for j in 0..3 {
                j_blk[i][j] -= 4.0 * blk[i][j];
            }
        }
    }
    // The third row repeats the first component's fourth moment as printed.
    let z_blk = [
        3.0 * (3.0 * m4(&[1]) - 2.0 * (q1 * m11 + q2 * m12 + q3 * m13) - q1 * s2),
        3.0 * (3.0 * m4(&[2]) - 2.0 * (q1 * m12 + q2 * m22 + q3 * m23) - q1 * s2),
        3.0 * (3.0 * m4(&[1]) - 2.0 * (q1 * m13 + q2 * m23 + q3 * m33) - q1 * s2),
    ];
    let w = 6.0 * (m4(&[1, 1]) + m4(&[2, 2]) + m4(&[3, 3]) - q1 * q1 - q2 * q2 - q3 * q3);

    let mut r = Matrix10::zeros();
    for i in 0..6 {
        for j in 0..6 {
            r[(i, j)] = b_blk[i][j];
        }
        for j in 0..3 {
            r[(i, 6 + j)] = c_blk[i][j];
        }
        r[(i, 9)] = e_blk[i];
        r[(9, i)] = e_blk[i];
    }
    for i in 0..3 {
        for j in 0..6 {
            r[(6 + i, j)] = f_blk[i][j];
        }
        for j in 0..3 {
            r[(6 + i, 6 + j)] = j_blk[i][j];
        }
        r[(6 + i, 9)] = z_blk[i];
        r[(9, 6 + i)] = z_blk[i];
    }
    r[(9, 9)] = w;

    let mut q = Vector10::zeros();
    for (k, x) in [1.0, 0.0, 0.0, 1.0, 0.0, 1.0].into_iter().enumerate() {
        q[k] = x * rho;
    }
    // First central moments, zero by construction.
    for i in 0..3 {
        q[6 + i] = 8.0 * m0(&[i + 1]);
    }
    q[9] = 5.0 * s2;

    // Rows as printed: row 4 carries the 12-production, row 9 a first-component
    // production, and the sign of the stabilizer term varies between rows.
    let b = Vector10::from_column_slice(&[
        p[0] - d + c4 * m4(&[1, 1]),
        p[1] - 2.0 * c4 * m4(&[1, 2]),
        p[2] - 2.0 * c4 * 2.0 * m4(&[1, 3]),
        p[1] - d - c4 * m4(&[2, 2]),
        p[4] - 2.0 * c4 * m4(&[2, 3]),
        p[5] - d - c4 * m4(&[3, 3]),
        p[6] - c4 * m6(&[1]),
        p[7] - c4 * m6(&[2]),
        p[6] - c4 * m6(&[3]),
        -c4 * s4,
    ]);
    ExplicitSystem { r, q, b }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    pub name: String,
    pub explicit: f64,
    pub generic: f64,
}

impl AuditEntry {
    pub fn abs_diff(&self) -> f64 {
        (self.explicit - self.generic).abs()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub tolerance: f64,
}

impl AuditReport {
    pub fn discrepancies(&self) -> impl Iterator<Item = &AuditEntry> {
        let scale = self
            .entries
            .iter()
            .map(|e| e.generic.abs().max(e.explicit.abs()))
            .fold(0.0f64, f64::max);
        let tol = self.tolerance * scale.max(1.0);
        self.entries.iter().filter(move |e| e.abs_diff() > tol)
    }

    pub fn discrepancy_count(&self) -> usize {
        self.discrepancies().count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "entries compared: {}", self.entries.len()).unwrap();
        writeln!(out, "discrepancies: {}", self.discrepancy_count()).unwrap();
        writeln!(out, "{:<10} {:>16} {:>16} {:>12}", "entry", "explicit", "generic", "abs diff").unwrap();
        for e in self.discrepancies() {
            writeln!(out, "{:<10} {:>16.8e} {:>16.8e} {:>12.4e}", e.name, e.explicit, e.generic, e.abs_diff()).unwrap();
        }
        out
    }
}

/// Compare the explicit matrices with the generic assembler on one moment set.
pub fn audit(ms: &MomentSet, tau: f64, c_d: f64, productions: &Vector9) -> Result<AuditReport, ClosureError> {
    let d = ms.theta() / tau;
    let sys = assemble_system(ms, tau, d, c_d, productions)?;
    let ex = explicit_system(ms, &row_productions(productions), d, sys.c4);
    let mut entries = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            entries.push(AuditEntry { name: format!("R[{i},{j}]"), explicit: ex.r[(i, j)], generic: sys.r[(i, j)] });
        }
    }
    for i in 0..10 {
        entries.push(AuditEntry { name: format!("Q[{i}]"), explicit: ex.q[i], generic: sys.q[i] });
    }
    for i in 0..10 {
        entries.push(AuditEntry { name: format!("b[{i}]"), explicit: ex.b[i], generic: sys.b[i] });
    }
    Ok(AuditReport { entries, tolerance: 1e-9 })
}
