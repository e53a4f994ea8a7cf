//! Common witness pairs for targets given as intersections of sublevel sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{classify_point, grid, ClassifyOptions, Witness};
use crate::error::Result;
use crate::expr::Expr;
use crate::hamilton::LocalJets;
use crate::system::{Control, SystemKind, SystemSpec};

const NEARBY_POINTS: usize = 8;
const NEARBY_RADIUS: f64 = 1e-3;
const NEARBY_SEED: u64 = 0x1_c00c;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetOutcome {
    /// `FIRST_ORDER`, `SECOND_ORDER` or `NONE`.
    pub case: &'static str,
    /// `-grad u_i . (f1 + f2)` for first order, the decay margin for second order.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionReport {
    pub found: bool,
    pub pair: Option<(Control, Control)>,
    pub outcomes: Vec<TargetOutcome>,
    pub min_score: f64,
    pub candidates_tried: usize,
}

fn candidate_pairs(sys: &SystemSpec, targets: &[Expr], x: &[f64], opts: &ClassifyOptions) -> Result<Vec<(Control, Control)>> {
    let mut singles: Vec<Control> = Vec::new();
    let mut pairs: Vec<(Control, Control)> = Vec::new();
    for u in targets {
        let level = u.eval_value(x)?;
        let r = classify_point(sys, u, level, x, opts)?;
        if let Some(c) = r.petrov_control {
            singles.push(c);
        }
        match r.witness {
            Some(Witness::Pair { a1, a2 }) => {
                if let (Some(n1), Some(n2)) = (a1.negated(), a2.negated()) {
                    pairs.push((n1, n2));
                }
                pairs.push((a1, a2));
            }
            Some(Witness::Single { a }) => singles.push(a),
            None => {}
        }
    }
    let pool: Vec<Control> = match sys.kind() {
        SystemKind::General => (0..sys.listed_controls().len()).map(Control::Listed).collect(),
        _ => {
            let m = sys.m();
            let mut v: Vec<Control> = grid::sphere_dirs(m, 16, 11).into_iter().map(Control::Ball).collect();
            v.push(Control::Ball(vec![0.0; m]));
            v
        }
    };
    singles.extend(pool);
    for a in &singles {
        for b in &singles {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let mut uniq: Vec<(Control, Control)> = Vec::with_capacity(pairs.len());
    for p in pairs {
        if !uniq.contains(&p) {
            uniq.push(p);
        }
    }
    Ok(uniq)
}

/// For general systems: a listed control `a` and `lambda > 0` with
/// `lambda f(., a) = f(., a1) + f(., a2)` at `x` and at nearby sample points.
fn general_sum_field(sys: &SystemSpec, x: &[f64], a1: usize, a2: usize, tol: f64) -> Result<Option<(usize, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(NEARBY_SEED);
    let mut pts = vec![x.to_vec()];
    for _ in 0..NEARBY_POINTS {
        pts.push(x.iter().map(|c| c + rng.random_range(-NEARBY_RADIUS..=NEARBY_RADIUS)).collect());
    }
    let (c1, c2) = (Control::Listed(a1), Control::Listed(a2));
    let sum0 = sys.field_value(x, &c1)? + sys.field_value(x, &c2)?;
    for k in 0..sys.listed_controls().len() {
        let fk = sys.field_value(x, &Control::Listed(k))?;
        let nn = fk.norm_squared();
        if nn == 0.0 {
            continue;
        }
        let lambda = sum0.dot(&fk) / nn;
        if lambda <= 0.0 {
            continue;
        }
        let mut ok = true;
        for p in &pts {
            let s = sys.field_value(p, &c1)? + sys.field_value(p, &c2)?;
            let f = sys.field_value(p, &Control::Listed(k))?;
            if (f * lambda - &s).amax() > tol * (1.0 + s.amax()) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some((k, lambda)));
        }
    }
    Ok(None)
}

pub fn classify_intersection(sys: &SystemSpec, targets: &[Expr], x: &[f64], opts: &ClassifyOptions) -> Result<IntersectionReport> {
    let jets: Vec<LocalJets> = targets.iter().map(|u| LocalJets::new(sys, u, x)).collect::<Result<_>>()?;
    let pairs = candidate_pairs(sys, targets, x, opts)?;
    let tol = opts.tol;
    let mut best: Option<(f64, (Control, Control), Vec<TargetOutcome>)> = None;
    for (a1, a2) in &pairs {
        let (w1, w2) = (sys.weights(a1)?, sys.weights(a2)?);
        let sum_has_field = match (sys.kind(), a1, a2) {
            (SystemKind::General, Control::Listed(i), Control::Listed(j)) => general_sum_field(sys, x, *i, *j, tol)?.is_some(),
            _ => true,
        };
        let mut outcomes = Vec::with_capacity(jets.len());
        for lj in &jets {
            let sum = lj.basis.combine_value(&w1) + lj.basis.combine_value(&w2);
            let fscale: f64 = lj.basis.values.iter().map(|v| v.norm()).sum();
            let scale = tol * (1.0 + lj.gradient().norm() * fscale);
            let first = -lj.gradient().dot(&sum);
            let outcome = if sum_has_field && first > scale {
                TargetOutcome {
                    case: "FIRST_ORDER",
                    score: first,
                }
            } else {
                let margin = lj.decay_margin(&w1, &w2);
                if first.abs() <= scale && margin > tol * (1.0 + lj.u.hessian.norm() * fscale * fscale + lj.gradient().norm() * fscale * fscale) {
                    TargetOutcome {
                        case: "SECOND_ORDER",
                        score: margin,
                    }
                } else {
                    TargetOutcome {
                        case: "NONE",
                        score: f64::NEG_INFINITY,
                    }
                }
            };
            outcomes.push(outcome);
        }
        let min = outcomes.iter().map(|o| o.score).fold(f64::INFINITY, f64::min);
        if min > f64::NEG_INFINITY && best.as_ref().is_none_or(|b| min > b.0) {
            best = Some((min, (a1.clone(), a2.clone()), outcomes));
        }
    }
    Ok(match best {
        Some((min_score, pair, outcomes)) => IntersectionReport {
            found: true,
            pair: Some(pair),
            outcomes,
            min_score,
            candidates_tried: pairs.len(),
        },
        None => IntersectionReport {
            found: false,
            pair: None,
            outcomes: Vec::new(),
            min_score: f64::NEG_INFINITY,
            candidates_tried: pairs.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Classification;
    use crate::system::{load_registry, ListedControl};
    use std::sync::Arc;

    #[test]
    fn single_target_matches_classifier() {
        for name in crate::system::registry_names() {
            let p = load_registry(name).unwrap();
            let o = ClassifyOptions::default();
            let r = classify_point(&p.system, &p.target.u, p.target.level, &p.base_point, &o).unwrap();
            let i = classify_intersection(&p.system, std::slice::from_ref(&p.target.u), &p.base_point, &o).unwrap();
            let expect = matches!(r.classification, Classification::SecondOrder | Classification::FirstOrderPetrov);
            assert_eq!(i.found, expect, "{name}");
        }
        let p = load_registry("ex3").unwrap().at_point(&[2.0 * 0.1f64.cos(), 2.0 * 0.1f64.sin()]).unwrap();
        let i = classify_intersection(&p.system, std::slice::from_ref(&p.target.u), &p.base_point, &ClassifyOptions::default()).unwrap();
        assert!(!i.found);
    }

    #[test]
    fn two_half_spaces_first_order() {
        let v: Arc<[String]> = vec!["x".into(), "y".into()].into();
        let e = |s: &str| Expr::parse(s, &v).unwrap();
        let sys = SystemSpec::symmetric(v.clone(), vec![vec![e("1"), e("0")], vec![e("0"), e("1")]]).unwrap();
        let i = classify_intersection(&sys, &[e("x"), e("y")], &[0.0, 0.0], &ClassifyOptions::default()).unwrap();
        assert!(i.found);
        assert!(i.outcomes.iter().all(|o| o.case == "FIRST_ORDER"));
    }

    #[test]
    fn general_kind_uses_listed_sum_field() {
        let v: Arc<[String]> = vec!["x".into(), "y".into()].into();
        let e = |s: &str| Expr::parse(s, &v).unwrap();
        let c = |l: &str, f: [&str; 2]| ListedControl {
            label: l.into(),
            value: vec![0.0],
            field: vec![e(f[0]), e(f[1])],
        };
        let sys = SystemSpec::general(v.clone(), 1, vec![c("a", ["-1", "0"]), c("b", ["0", "-1"]), c("ab", ["-1", "-1"])]).unwrap();
        let i = classify_intersection(&sys, &[e("x"), e("y")], &[0.0, 0.0], &ClassifyOptions::default()).unwrap();
        assert!(i.found);
        assert!(general_sum_field(&sys, &[0.0, 0.0], 0, 1, 1e-9).unwrap().is_some());
        let sys2 = SystemSpec::general(v.clone(), 1, vec![c("a", ["-1", "0"]), c("b", ["0", "-1"])]).unwrap();
        assert!(general_sum_field(&sys2, &[0.0, 0.0], 0, 1, 1e-9).unwrap().is_none());
    }
}
