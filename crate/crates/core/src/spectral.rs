//! Symmetric eigen-decomposition and witness controls from eigenvectors.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamilton::k_quadratic;
use crate::serde_mat;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, column `k` belongs to `eigenvalues[k]`.
    #[serde(serialize_with = "serde_mat::matrix")]
    pub eigenvectors: DMatrix<f64>,
    /// `max_k |A v_k - lambda_k v_k|`.
    pub residual: f64,
}

impl EigenResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }
}

/// Cyclic Jacobi rotations on the symmetrized input.
pub fn eig_symmetric(a: &DMatrix<f64>) -> Result<EigenResult> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NonSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    let mut m = sym.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = sym.norm();
    let off = |m: &DMatrix<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..MAX_SWEEPS {
        if off(&m) <= 1e-14 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    let residual = (0..n)
        .map(|k| (&sym * eigenvectors.column(k) - eigenvectors.column(k) * eigenvalues[k]).amax())
        .fold(0.0, f64::max);
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
        residual,
    })
}

/// PSD test with tolerance `tol` (default `1e-10 * |A|_F`); returns the verdict and `lambda_min`.
pub fn is_psd(a: &DMatrix<f64>, tol: Option<f64>) -> Result<(bool, f64)> {
    let e = eig_symmetric(a)?;
    let tol = tol.unwrap_or(1e-10 * a.norm());
    let lmin = if e.eigenvalues.is_empty() { 0.0 } else { e.min() };
    Ok((lmin >= -tol, lmin))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairWitness {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    /// `K(a1, a2) . (a1, a2)`.
    pub value: f64,
}

/// Witness for a nonsymmetric `S`: `a1` a unit eigenvector of `S^T S` with
/// eigenvalue `lambda^2 > 0`, `a2 = -S a1 / lambda`, value `-2 lambda (1 + a1.a2)`.
pub fn nonsym_witness(s: &DMatrix<f64>) -> Result<PairWitness> {
    if s.nrows() != s.ncols() {
        return Err(Error::NonSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    let skew = (s - s.transpose()) * 0.5;
    if skew.norm() <= 1e-10 * s.norm() || s.norm() == 0.0 {
        return Err(Error::SymmetricInput);
    }
    let sts = s.transpose() * s;
    let e = eig_symmetric(&sts)?;
    let top = *e.eigenvalues.last().expect("nonempty");
    let mut best: Option<PairWitness> = None;
    // every eigenvector with positive eigenvalue is a candidate: if all of them
    // give a2 = -a1, they diagonalize S orthogonally and S is symmetric
    for k in (0..e.eigenvalues.len()).rev() {
        let l2 = e.eigenvalues[k];
        if l2 <= 1e-12 * top {
            break;
        }
        for sign in [1.0, -1.0] {
            let a1 = e.vector(k) * sign;
            let a1 = &a1 / a1.norm();
            let sa1 = s * &a1;
            let lambda = sa1.norm();
            let a2 = -sa1 / lambda;
            let (a1v, a2v) = (a1.as_slice().to_vec(), a2.as_slice().to_vec());
            let value = k_quadratic(s, &a1v, &a2v);
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(PairWitness {
                    a1: a1v,
                    a2: a2v,
                    value,
                });
            }
        }
    }
    best.ok_or(Error::SymmetricInput)
}

/// Basis-independent unit vector of the eigenspace of `lambda_min`: the
/// normalized projection of the coordinate vector with the longest projection
/// (lowest index on ties). Its own coordinate is positive.
pub fn canonical_min_vector(eig: &EigenResult, tol: f64) -> DVector<f64> {
    let n = eig.eigenvectors.nrows();
    let lmin = eig.min();
    let cols: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] <= lmin + tol).collect();
    let proj = |i: usize| -> DVector<f64> {
        cols.iter()
            .fold(DVector::zeros(n), |acc, &k| acc + eig.eigenvectors.column(k) * eig.eigenvectors[(i, k)])
    };
    let norms: Vec<f64> = (0..n).map(|i| proj(i).norm()).collect();
    let top = norms.iter().copied().fold(0.0, f64::max);
    let i = norms.iter().position(|v| *v >= top * (1.0 - 1e-9)).unwrap_or(0);
    let v = proj(i);
    &v / v.norm()
}

/// Witness from the minimal eigenspace of `K`: a canonical eigenvector with its
/// halves normalized to the unit sphere.
pub fn k_eigen_witness(k: &DMatrix<f64>, eig: &EigenResult) -> PairWitness {
    let m = k.nrows() / 2;
    let v = canonical_min_vector(eig, 1e-9 * (1.0 + k.norm()));
    let half = |r: std::ops::Range<usize>| -> Vec<f64> {
        let mut h = DVector::from_iterator(m, r.map(|i| v[i]));
        let scale = h.amax();
        // roundoff-level entries are exact zeros
        h.iter_mut().filter(|c| c.abs() <= 1e-14 * scale).for_each(|c| *c = 0.0);
        let n = h.norm();
        if n > 0.0 {
            (h / n).as_slice().to_vec()
        } else {
            vec![0.0; m]
        }
    };
    let a1 = half(0..m);
    let a2 = half(m..2 * m);
    let mut w = a1.clone();
    w.extend_from_slice(&a2);
    let wv = DVector::from_vec(w);
    let value = (k * &wv).dot(&wv);
    PairWitness { a1, a2, value }
}
