//! Grid scan of the second-order margin over a box around the base point.

use rayon::prelude::*;
use serde::Serialize;

use super::{affine_candidates, petrov_local, ClassifyOptions};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hamilton::{affine_data_local, k_matrix, s_matrix_local, LocalJets};
use crate::spectral::{eig_symmetric, k_eigen_witness};
use crate::system::{Control, SystemKind, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Half-width of the axis-aligned box.
    pub radius: f64,
    /// Points per axis.
    pub grid: usize,
    /// Required margin.
    pub rho: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub x: Vec<f64>,
    /// Best margin over the base witness, its negation and the local optimum.
    pub best_margin: f64,
    /// Margin of the base-point witness pair.
    pub witness_margin: f64,
    pub petrov_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub options: ScanOptions,
    pub points: Vec<ScanPoint>,
    pub min_best_margin: f64,
    pub min_witness_margin: f64,
    /// Indices of points with `best_margin < rho`.
    pub violating: Vec<usize>,
    /// The base witness alone keeps margin `>= rho` everywhere.
    pub witness_holds_everywhere: bool,
    /// Points where every admissible field points outward of the local level set.
    pub outward_points: usize,
    pub passed: bool,
}

fn local_best(sys: &SystemSpec, lj: &LocalJets) -> Result<f64> {
    let opts = ClassifyOptions::default();
    Ok(match sys.kind() {
        SystemKind::Symmetric => {
            let k = k_matrix(&s_matrix_local(sys, lj)?);
            let e = eig_symmetric(&k)?;
            let w = k_eigen_witness(&k, &e);
            let (w1, w2) = (sys.weights(&Control::Ball(w.a1))?, sys.weights(&Control::Ball(w.a2))?);
            lj.decay_margin(&w1, &w2)
        }
        SystemKind::Affine => {
            let ad = affine_data_local(sys, lj)?;
            affine_candidates(lj, &ad, &opts)
                .into_iter()
                .map(|c| c.margin)
                .fold(f64::NEG_INFINITY, f64::max)
        }
        SystemKind::General => {
            let n = lj.basis.values.len();
            let mut best = f64::NEG_INFINITY;
            for i in 0..n {
                for j in 0..n {
                    best = best.max(lj.decay_margin(&[(i, 1.0)], &[(j, 1.0)]));
                }
            }
            best
        }
    })
}

pub fn neighborhood_scan(
    sys: &SystemSpec,
    u: &Expr,
    center: &[f64],
    witness: (&Control, &Control),
    opts: &ScanOptions,
) -> Result<ScanReport> {
    if !(opts.radius > 0.0 && opts.radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("scan radius must be positive, got {}", opts.radius)));
    }
    if opts.grid < 2 {
        return Err(Error::InvalidArgument(format!("scan grid needs at least 2 points per axis, got {}", opts.grid)));
    }
    if !(opts.rho > 0.0 && opts.rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {}", opts.rho)));
    }
    let n = sys.n();
    let k = opts.grid;
    let total = k.checked_pow(n as u32).filter(|t| *t <= 10_000_000).ok_or_else(|| {
        Error::InvalidArgument(format!("grid {k}^{n} is too large"))
    })?;
    let w1 = sys.weights(witness.0)?;
    let w2 = sys.weights(witness.1)?;
    let nw1 = witness.0.negated().map(|c| sys.weights(&c)).transpose()?;
    let nw2 = witness.1.negated().map(|c| sys.weights(&c)).transpose()?;
    let coord = |i: usize| -opts.radius + 2.0 * opts.radius * i as f64 / (k - 1) as f64;
    let points: Vec<ScanPoint> = (0..total)
        .into_par_iter()
        .map(|idx| -> Result<ScanPoint> {
            let mut rem = idx;
            let x: Vec<f64> = (0..n)
                .map(|d| {
                    let i = rem % k;
                    rem /= k;
                    center[d] + coord(i)
                })
                .collect();
            let lj = LocalJets::new(sys, u, &x)?;
            let wm = lj.decay_margin(&w1, &w2);
            let mut best = wm.max(local_best(sys, &lj)?);
            if let (Some(a), Some(b)) = (&nw1, &nw2) {
                best = best.max(lj.decay_margin(a, b));
            }
            let (pm, _) = petrov_local(sys, &lj);
            Ok(ScanPoint {
                x,
                best_margin: best,
                witness_margin: wm,
                petrov_margin: pm,
                pass: best >= opts.rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_best_margin = points.iter().map(|p| p.best_margin).fold(f64::INFINITY, f64::min);
    let min_witness_margin = points.iter().map(|p| p.witness_margin).fold(f64::INFINITY, f64::min);
    let violating: Vec<usize> = points.iter().enumerate().filter(|(_, p)| !p.pass).map(|(i, _)| i).collect();
    let outward_points = points.iter().filter(|p| p.petrov_margin < -opts.tol).count();
    Ok(ScanReport {
        options: *opts,
        witness_holds_everywhere: min_witness_margin >= opts.rho,
        passed: violating.is_empty(),
        points,
        min_best_margin,
        min_witness_margin,
        violating,
        outward_points,
    })
}
