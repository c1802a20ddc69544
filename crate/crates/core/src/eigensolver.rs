//! Generalized symmetric eigenproblem `H c = E S c` for near-singular `S`.
//!
//! Canonical orthogonalization: diagonalize `S`, drop eigenvectors with
//! `s_k < τ·s_max`, solve the standard problem in the retained subspace and
//! map back. The dense symmetric eigendecompositions come from nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("{0} matrix is not symmetric")]
    NotSymmetric(&'static str),
    #[error("matrix dimensions differ: H is {h}x{h}, S is {s}x{s}")]
    DimensionMismatch { h: usize, s: usize },
    #[error("{0} matrix is not square")]
    NotSquare(&'static str),
    #[error("conditioning cutoff must lie in [0, 1), got {0}")]
    InvalidCutoff(f64),
    #[error("overlap matrix has no eigenvalue above the cutoff (largest {largest:e})")]
    BasisCollapse { largest: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditioningPolicy {
    /// Relative cutoff τ on overlap eigenvalues.
    pub cutoff: f64,
    /// Use compensated dot products in `XᵀHX`.
    pub compensated: bool,
}

impl Default for ConditioningPolicy {
    fn default() -> Self {
        Self { cutoff: 1e-12, compensated: false }
    }
}

impl ConditioningPolicy {
    pub fn with_cutoff(cutoff: f64) -> Self {
        Self { cutoff, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedEigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` holds the S-normalized vector of `eigenvalues[k]`.
    pub coefficients: DMatrix<f64>,
    pub retained_dimension: usize,
    /// `s_max / s_min` over the full overlap spectrum (`∞` if `s_min <= 0`).
    pub overlap_condition: f64,
    pub dropped_count: usize,
}

pub fn solve(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
    policy: ConditioningPolicy,
) -> Result<GeneralizedEigenResult, EigenError> {
    check_inputs(h, s)?;
    if !(0.0..1.0).contains(&policy.cutoff) {
        return Err(EigenError::InvalidCutoff(policy.cutoff));
    }
    let n = h.nrows();

    let overlap = SymmetricEigen::new(s.clone());
    let s_max = overlap.eigenvalues.max();
    let s_min = overlap.eigenvalues.min();
    if !(s_max > 0.0) {
        return Err(EigenError::BasisCollapse { largest: s_max });
    }
    let floor = policy.cutoff * s_max;
    let kept: Vec<usize> = (0..n)
        .filter(|&k| overlap.eigenvalues[k] > 0.0 && overlap.eigenvalues[k] >= floor)
        .collect();
    let retained = kept.len();

    let mut x = DMatrix::zeros(n, retained);
    for (col, &k) in kept.iter().enumerate() {
        let scale = 1.0 / overlap.eigenvalues[k].sqrt();
        x.set_column(col, &(overlap.eigenvectors.column(k) * scale));
    }

    let x = reorthonormalize(s, x, policy.compensated);

    let hx = multiply(h, &x, policy.compensated);
    let mut reduced = multiply(&x.transpose(), &hx, policy.compensated);
    for i in 0..retained {
        for j in 0..i {
            let mean = 0.5 * (reduced[(i, j)] + reduced[(j, i)]);
            reduced[(i, j)] = mean;
            reduced[(j, i)] = mean;
        }
    }

    let inner = SymmetricEigen::new(reduced);
    let vectors = &x * &inner.eigenvectors;

    let dominant = |col: usize| -> usize {
        vectors.column(col).iamax()
    };
    let mut order: Vec<usize> = (0..retained).collect();
    order.sort_by(|&a, &b| {
        inner.eigenvalues[a]
            .total_cmp(&inner.eigenvalues[b])
            .then_with(|| dominant(a).cmp(&dominant(b)))
    });

    let eigenvalues = order.iter().map(|&k| inner.eigenvalues[k]).collect();
    let mut coefficients = DMatrix::zeros(n, retained);
    for (col, &k) in order.iter().enumerate() {
        coefficients.set_column(col, &vectors.column(k));
    }

    Ok(GeneralizedEigenResult {
        eigenvalues,
        coefficients,
        retained_dimension: retained,
        overlap_condition: if s_min > 0.0 { s_max / s_min } else { f64::INFINITY },
        dropped_count: n - retained,
    })
}

/// `max_k ‖(H − E_k S) c_k‖ / (‖H‖_F ‖c_k‖)`.
pub fn residual_check(h: &DMatrix<f64>, s: &DMatrix<f64>, result: &GeneralizedEigenResult) -> f64 {
    let h_norm = h.norm();
    if h_norm == 0.0 {
        return 0.0;
    }
    (0..result.eigenvalues.len())
        .map(|k| {
            let c: DVector<f64> = result.coefficients.column(k).into_owned();
            let r = h * &c - (s * &c) * result.eigenvalues[k];
            r.norm() / (h_norm * c.norm())
        })
        .fold(0.0, f64::max)
}

/// One Löwdin pass `X ← X (XᵀSX)^{-1/2}`. Directions kept from the bottom of
/// the overlap spectrum carry errors of order `ε·s_max/s_k`; the pass brings
/// `XᵀSX` back to the identity to second order in that error.
fn reorthonormalize(s: &DMatrix<f64>, x: DMatrix<f64>, compensated: bool) -> DMatrix<f64> {
    let sx = multiply(s, &x, compensated);
    let gram = multiply(&x.transpose(), &sx, compensated);
    let gram = (&gram + gram.transpose()) * 0.5;
    let eig = SymmetricEigen::new(gram);
    if eig.eigenvalues.iter().any(|&g| !(g > 0.0)) {
        return x;
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|g| 1.0 / g.sqrt()));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    x * root
}

fn check_inputs(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<(), EigenError> {
    if !h.is_square() {
        return Err(EigenError::NotSquare("H"));
    }
    if !s.is_square() {
        return Err(EigenError::NotSquare("S"));
    }
    if h.nrows() != s.nrows() {
        return Err(EigenError::DimensionMismatch { h: h.nrows(), s: s.nrows() });
    }
    if h != &h.transpose() {
        return Err(EigenError::NotSymmetric("H"));
    }
    if s != &s.transpose() {
        return Err(EigenError::NotSymmetric("S"));
    }
    Ok(())
}

fn multiply(a: &DMatrix<f64>, b: &DMatrix<f64>, compensated: bool) -> DMatrix<f64> {
    if !compensated {
        return a * b;
    }
    let at = a.transpose();
    DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        dot2(at.column(i).as_slice(), b.column(j).as_slice())
    })
}

/// Dot product accumulated in roughly twice the working precision
/// (Ogita, Rump and Oishi's Dot2).
pub fn dot2(x: &[f64], y: &[f64]) -> f64 {
    let mut p = 0.0f64;
    let mut s = 0.0f64;
    for (&a, &b) in x.iter().zip(y) {
        let h = a * b;
        let r = a.mul_add(b, -h);
        let sum = p + h;
        let z = sum - p;
        let q = (p - (sum - z)) + (h - z);
        p = sum;
        s += q + r;
    }
    p + s
}
