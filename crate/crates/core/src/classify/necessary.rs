//! Necessary conditions for a square-root minimum-time estimate at a tangency point.

use serde::Serialize;

use super::grid;
use crate::error::Result;
use crate::expr::Expr;
use crate::hamilton::LocalJets;
use crate::system::{Control, SystemKind, SystemSpec};

const DIRS_PER_FACTOR: usize = 64;
const DIR_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NecessaryVerdict {
    NecessaryHolds,
    NecessaryFails,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryReport {
    /// Some pair has `[f(., a1), f(., a2)] . grad u < 0`.
    pub bracket_transversal: bool,
    pub bracket_value: f64,
    pub bracket_pair: Option<(Control, Control)>,
    /// Some control has `grad(grad u . f) . f < 0`.
    pub single_field_negative: bool,
    pub single_field_value: f64,
    pub single_field_control: Option<Control>,
    pub verdict: NecessaryVerdict,
    pub warnings: Vec<String>,
}

pub fn check_necessary(sys: &SystemSpec, u: &Expr, x: &[f64], tol: f64) -> Result<NecessaryReport> {
    let lj = LocalJets::new(sys, u, x)?;
    let grad = lj.gradient().clone();
    let fscale: f64 = lj.basis.values.iter().map(|v| v.norm()).sum();
    let mut warnings = Vec::new();
    let tangent = lj
        .basis
        .values
        .iter()
        .all(|v| v.dot(&grad).abs() <= tol * (1.0 + grad.norm() * fscale));
    if !tangent {
        warnings.push("fields are not all tangent at the point; the conditions are evaluated anyway".into());
    }

    let (pair_set, single_set): (Vec<Control>, Vec<Control>) = match sys.kind() {
        SystemKind::General => {
            warnings.push("convexity of f(x, .) over the control sample is not checked".into());
            let all: Vec<Control> = (0..sys.listed_controls().len()).map(Control::Listed).collect();
            (all.clone(), all)
        }
        _ => (
            grid::sphere_dirs(sys.m(), DIRS_PER_FACTOR, DIR_SEED)
                .into_iter()
                .map(Control::Ball)
                .collect(),
            grid::ball_points(sys.m(), 256).into_iter().map(Control::Ball).collect(),
        ),
    };

    let weights = |c: &Control| sys.weights(c);
    let pw: Vec<_> = pair_set.iter().map(weights).collect::<Result<_>>()?;
    let mut bracket = (f64::INFINITY, None);
    for (i, w1) in pw.iter().enumerate() {
        for (j, w2) in pw.iter().enumerate() {
            let v = lj.bracket(w1, w2).dot(&grad);
            if v < bracket.0 {
                bracket = (v, Some((pair_set[i].clone(), pair_set[j].clone())));
            }
        }
    }
    let mut single = (f64::INFINITY, None);
    for c in &single_set {
        let w = weights(c)?;
        let v = lj.h2(&w, &w);
        if v < single.0 {
            single = (v, Some(c.clone()));
        }
    }

    let h2scale: f64 = 1.0 + grad.norm() * fscale * fscale + lj.u.hessian.norm() * fscale * fscale;
    let bracket_transversal = bracket.0 < -tol * h2scale;
    let single_field_negative = single.0 < -tol * h2scale;
    Ok(NecessaryReport {
        bracket_transversal,
        bracket_value: bracket.0,
        bracket_pair: bracket.1,
        single_field_negative,
        single_field_value: single.0,
        single_field_control: single.1,
        verdict: if bracket_transversal || single_field_negative {
            NecessaryVerdict::NecessaryHolds
        } else {
            NecessaryVerdict::NecessaryFails
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::load_registry;
    use std::sync::Arc;

    #[test]
    fn heisenberg_bracket_transversal() {
        let p = load_registry("ex4").unwrap();
        let r = check_necessary(&p.system, &p.target.u, &p.base_point, 1e-9).unwrap();
        assert!(r.bracket_transversal);
        assert!((r.bracket_value + 2.0).abs() < 1e-12);
        assert_eq!(r.verdict, NecessaryVerdict::NecessaryHolds);
    }

    #[test]
    fn ex2_single_field() {
        let p = load_registry("ex2").unwrap();
        let r = check_necessary(&p.system, &p.target.u, &p.base_point, 1e-9).unwrap();
        assert!(r.single_field_negative);
        assert_eq!(r.single_field_value, -1.0);
        assert!(!r.bracket_transversal);
    }

    #[test]
    fn flat_commuting_system_fails() {
        // constant fields tangent to the half-space, S = 0
        let v: Arc<[String]> = vec!["x".into(), "y".into(), "z".into()].into();
        let e = |s: &str| Expr::parse(s, &v).unwrap();
        let sys = SystemSpec::symmetric(v.clone(), vec![vec![e("1"), e("0"), e("0")], vec![e("0"), e("1"), e("0")]]).unwrap();
        let r = check_necessary(&sys, &e("z"), &[0.0, 0.0, 0.0], 1e-9).unwrap();
        assert_eq!(r.verdict, NecessaryVerdict::NecessaryFails);
        assert!(r.warnings.is_empty());
    }
}
