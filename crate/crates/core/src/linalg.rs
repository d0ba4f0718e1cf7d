//! Small dense linear algebra over exact rationals.
//!
//! Matrices are row-major `Vec<Vec<Rational>>`. Dimensions here are tiny
//! (ambient dimension, flat rank), so nothing is blocked or cached.

use num_traits::{One, Zero};

use crate::geom::Rational;

pub type Matrix = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn mat_vec(m: &Matrix, v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(Rational::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Gauss-Jordan inverse; `None` when singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn determinant(m: &Matrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    det
}

/// Reduced row echelon basis of the row span. Zero rows are dropped, so the
/// result is the unique RREF basis of the subspace.
pub fn rref(rows: &[Vec<Rational>]) -> Matrix {
    let mut a: Matrix = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let inv = a[rank][col].recip();
        for x in a[rank].iter_mut() {
            *x *= &inv;
        }
        for r in 0..a.len() {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[rank].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        rank += 1;
    }
    a.truncate(rank);
    a
}

/// Residual of `v` after elimination against an RREF basis; zero iff `v`
/// lies in the span.
pub fn reduce(basis: &Matrix, v: &[Rational]) -> Vec<Rational> {
    let mut out = v.to_vec();
    for row in basis {
        let Some(pivot) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        if out[pivot].is_zero() {
            continue;
        }
        let f = out[pivot].clone();
        for (x, r) in out.iter_mut().zip(row) {
            *x -= &f * r;
        }
    }
    out
}

pub fn in_span(basis: &Matrix, v: &[Rational]) -> bool {
    reduce(basis, v).iter().all(Zero::is_zero)
}

/// Component of `v` orthogonal to the span of `basis` (any spanning rows).
pub fn orthogonal_residual(basis: &Matrix, v: &[Rational]) -> Vec<Rational> {
    if basis.is_empty() {
        return v.to_vec();
    }
    let gram: Matrix = basis
        .iter()
        .map(|a| basis.iter().map(|b| dot(a, b)).collect())
        .collect();
    let gram_inv = inverse(&gram).expect("rref rows are independent");
    let rhs: Vec<Rational> = basis.iter().map(|b| dot(b, v)).collect();
    let coeffs = mat_vec(&gram_inv, &rhs);
    let mut out = v.to_vec();
    for (c, b) in coeffs.iter().zip(basis) {
        for (x, bi) in out.iter_mut().zip(b) {
            *x -= c * bi;
        }
    }
    out
}
