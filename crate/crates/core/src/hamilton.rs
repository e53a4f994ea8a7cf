//! First- and second-order Hamiltonians and the matrices built from them.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::serde_mat;
use crate::expr::{Expr, Jet2};
use crate::system::{lie_bracket_from, BasisJets, Control, SystemKind, SystemSpec};

/// Jet of `u` and basis-field jets at one point; every Hamiltonian at that
/// point is an algebraic combination of these.
#[derive(Debug, Clone)]
pub struct LocalJets {
    pub x: Vec<f64>,
    pub u: Jet2,
    pub basis: BasisJets,
}

impl LocalJets {
    pub fn new(sys: &SystemSpec, u: &Expr, x: &[f64]) -> Result<Self> {
        Ok(LocalJets {
            x: x.to_vec(),
            u: u.eval_jet2(x)?,
            basis: sys.basis_jets(x)?,
        })
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.u.gradient
    }

    /// `H_f u = -grad u . f`.
    pub fn h1(&self, w: &[(usize, f64)]) -> f64 {
        -self.u.gradient.dot(&self.basis.combine_value(w))
    }

    /// `H_{g,f} u = D^2u f . g + grad u . Df g` with `g` from `outer`, `f` from `inner`.
    pub fn h2(&self, outer: &[(usize, f64)], inner: &[(usize, f64)]) -> f64 {
        let f = self.basis.combine_value(inner);
        let g = self.basis.combine_value(outer);
        let df = self.basis.combine_jacobian(inner);
        (&self.u.hessian * &f).dot(&g) + self.u.gradient.dot(&(df * &g))
    }

    pub fn bracket(&self, w1: &[(usize, f64)], w2: &[(usize, f64)]) -> DVector<f64> {
        lie_bracket_from(&self.basis, w1, w2)
    }

    /// Negative `t^2/2` coefficient of `u` along the single-switch trajectory.
    pub fn decay_margin(&self, w1: &[(usize, f64)], w2: &[(usize, f64)]) -> f64 {
        -(self.h2(w1, w1) + self.h2(w2, w2) + 2.0 * self.h2(w1, w2))
    }

    /// The same quantity assembled term by term as written in the sufficient
    /// condition: `-D^2u f1.f2 - (D(f1+f2)(f1+f2) + [f1,f2]) . grad u`.
    pub fn literal_margin(&self, w1: &[(usize, f64)], w2: &[(usize, f64)]) -> f64 {
        let f1 = self.basis.combine_value(w1);
        let f2 = self.basis.combine_value(w2);
        let sum = &f1 + &f2;
        let dsum = self.basis.combine_jacobian(w1) + self.basis.combine_jacobian(w2);
        let tr = (&self.u.hessian * &f1).dot(&f2);
        -tr - (dsum * &sum + self.bracket(w1, w2)).dot(&self.u.gradient)
    }
}

pub fn first_hamiltonian(sys: &SystemSpec, u: &Expr, x: &[f64], a: &Control) -> Result<f64> {
    let w = sys.weights(a)?;
    Ok(LocalJets::new(sys, u, x)?.h1(&w))
}

/// `H_{g,f} u(x)` with `g = f(., outer)` and `f = f(., inner)`.
pub fn second_hamiltonian(sys: &SystemSpec, u: &Expr, x: &[f64], outer: &Control, inner: &Control) -> Result<f64> {
    let (wo, wi) = (sys.weights(outer)?, sys.weights(inner)?);
    Ok(LocalJets::new(sys, u, x)?.h2(&wo, &wi))
}

/// `-(H_{f,f} + H_{g,g} + 2 H_{f,g}) u(x)` with `f = f(., a1)`, `g = f(., a2)`.
pub fn exact_decay_margin(sys: &SystemSpec, u: &Expr, x: &[f64], a1: &Control, a2: &Control) -> Result<f64> {
    let (w1, w2) = (sys.weights(a1)?, sys.weights(a2)?);
    Ok(LocalJets::new(sys, u, x)?.decay_margin(&w1, &w2))
}

pub fn literal_decay_margin(sys: &SystemSpec, u: &Expr, x: &[f64], a1: &Control, a2: &Control) -> Result<f64> {
    let (w1, w2) = (sys.weights(a1)?, sys.weights(a2)?);
    Ok(LocalJets::new(sys, u, x)?.literal_margin(&w1, &w2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SMatrices {
    #[serde(serialize_with = "serde_mat::matrix")]
    pub s: DMatrix<f64>,
    #[serde(serialize_with = "serde_mat::matrix")]
    pub s_sym: DMatrix<f64>,
    #[serde(serialize_with = "serde_mat::matrix")]
    pub s_skew: DMatrix<f64>,
    pub at_point: Vec<f64>,
}

impl SMatrices {
    pub fn from_s(s: DMatrix<f64>, at_point: Vec<f64>) -> Self {
        let st = s.transpose();
        let s_sym = (&s + &st) * 0.5;
        let s_skew = (&s - &st) * 0.5;
        SMatrices {
            s,
            s_sym,
            s_skew,
            at_point,
        }
    }

    pub fn m(&self) -> usize {
        self.s.nrows()
    }
}

fn unit(j: usize) -> [(usize, f64); 1] {
    [(j, 1.0)]
}

/// `S_ij = H_{sigma_j, sigma_i} u` over the basis with offset `off` (1 skips an affine drift).
fn s_from_jets(lj: &LocalJets, m: usize, off: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| lj.h2(&unit(j + off), &unit(i + off)))
}

pub fn s_matrix_local(sys: &SystemSpec, lj: &LocalJets) -> Result<SMatrices> {
    if sys.kind() != SystemKind::Symmetric {
        return Err(Error::KindMismatch {
            expected: "symmetric",
            got: sys.kind().name(),
        });
    }
    Ok(SMatrices::from_s(s_from_jets(lj, sys.m(), 0), lj.x.clone()))
}

pub fn s_matrix(sys: &SystemSpec, u: &Expr, x: &[f64]) -> Result<SMatrices> {
    if sys.kind() != SystemKind::Symmetric {
        return Err(Error::KindMismatch {
            expected: "symmetric",
            got: sys.kind().name(),
        });
    }
    s_matrix_local(sys, &LocalJets::new(sys, u, x)?)
}

/// `K = [[S*, S^T], [S, S*]]`.
pub fn k_matrix(s: &SMatrices) -> DMatrix<f64> {
    let m = s.m();
    let mut k = DMatrix::zeros(2 * m, 2 * m);
    k.view_mut((0, 0), (m, m)).copy_from(&s.s_sym);
    k.view_mut((m, m), (m, m)).copy_from(&s.s_sym);
    k.view_mut((0, m), (m, m)).copy_from(&s.s.transpose());
    k.view_mut((m, 0), (m, m)).copy_from(&s.s);
    debug_assert!(k == k.transpose());
    k
}

/// `K(a1, a2) . (a1, a2) = S a1.a1 + S a2.a2 + 2 S a1.a2`.
pub fn k_quadratic(s: &DMatrix<f64>, a1: &[f64], a2: &[f64]) -> f64 {
    let a1 = DVector::from_column_slice(a1);
    let a2 = DVector::from_column_slice(a2);
    let sa1 = s * &a1;
    sa1.dot(&a1) + (s * &a2).dot(&a2) + 2.0 * sa1.dot(&a2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineData {
    pub alpha: f64,
    #[serde(serialize_with = "serde_mat::vector")]
    pub beta: DVector<f64>,
    #[serde(serialize_with = "serde_mat::vector")]
    pub gamma: DVector<f64>,
    #[serde(serialize_with = "serde_mat::matrix")]
    pub s: DMatrix<f64>,
    #[serde(serialize_with = "serde_mat::matrix")]
    pub stilde: DMatrix<f64>,
    /// `max_j |(gamma - beta)_j - [sigma_0, sigma_j] . grad u|`.
    pub bracket_residual: f64,
}

pub fn affine_data_local(sys: &SystemSpec, lj: &LocalJets) -> Result<AffineData> {
    if sys.kind() != SystemKind::Affine {
        return Err(Error::KindMismatch {
            expected: "affine",
            got: sys.kind().name(),
        });
    }
    let m = sys.m();
    let stilde = s_from_jets(lj, m + 1, 0);
    let s = stilde.view((1, 1), (m, m)).into_owned();
    let beta = DVector::from_fn(m, |j, _| stilde[(0, j + 1)]);
    let gamma = DVector::from_fn(m, |j, _| stilde[(j + 1, 0)]);
    let bracket_residual = (0..m)
        .map(|j| {
            let br = lj.bracket(&unit(0), &unit(j + 1)).dot(lj.gradient());
            (gamma[j] - beta[j] - br).abs()
        })
        .fold(0.0, f64::max);
    Ok(AffineData {
        alpha: stilde[(0, 0)],
        beta,
        gamma,
        s,
        stilde,
        bracket_residual,
    })
}

pub fn affine_data(sys: &SystemSpec, u: &Expr, x: &[f64]) -> Result<AffineData> {
    if sys.kind() != SystemKind::Affine {
        return Err(Error::KindMismatch {
            expected: "affine",
            got: sys.kind().name(),
        });
    }
    affine_data_local(sys, &LocalJets::new(sys, u, x)?)
}

/// `k(a1, a2) = 4 alpha + (3 beta + gamma).a1 + (beta + 3 gamma).a2 + K(a1, a2).(a1, a2)`.
pub fn affine_k_quadratic(ad: &AffineData, a1: &[f64], a2: &[f64]) -> f64 {
    let v1 = DVector::from_column_slice(a1);
    let v2 = DVector::from_column_slice(a2);
    4.0 * ad.alpha
        + (&ad.beta * 3.0 + &ad.gamma).dot(&v1)
        + (&ad.beta + &ad.gamma * 3.0).dot(&v2)
        + k_quadratic(&ad.s, a1, a2)
}
