//! Built-in example systems.

use std::sync::Arc;

use serde::Serialize;

use super::{AnalyticDistance, Problem, SystemKind, SystemSpec, TargetSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, Serialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub kind: SystemKind,
    pub n: usize,
    pub m: usize,
    pub base_point: Vec<f64>,
    pub expected: &'static str,
    pub summary: &'static str,
}

pub fn registry_names() -> &'static [&'static str] {
    &["ex1", "ex2", "ex3", "ex4", "ex5", "ex6"]
}

pub fn registry_entries() -> Vec<RegistryEntry> {
    registry_names()
        .iter()
        .map(|name| {
            let p = load_registry(name).expect("registry entries are valid");
            RegistryEntry {
                name,
                kind: p.system.kind(),
                n: p.system.n(),
                m: p.system.m(),
                base_point: p.base_point.clone(),
                expected: "SECOND_ORDER",
                summary: summary(name),
            }
        })
        .collect()
}

fn summary(name: &str) -> &'static str {
    match name {
        "ex1" => "rotation field, half-plane target y <= 1",
        "ex2" => "constant vertical field, exterior of the unit disc",
        "ex3" => "affine drift (y, 0), disc of radius 2",
        "ex4" => "Heisenberg system, ball target",
        "ex5" => "convexified Reeds-Shepp system, ball target",
        "ex6" => "affine rotation drift, cylinder target",
        _ => "",
    }
}

fn vars(names: &[&str]) -> Arc<[String]> {
    names.iter().map(|s| s.to_string()).collect::<Vec<_>>().into()
}

fn exprs(v: &Arc<[String]>, texts: &[&str]) -> Vec<Expr> {
    texts
        .iter()
        .map(|t| Expr::parse(t, v).expect("registry expression parses"))
        .collect()
}

fn problem(name: &str, system: SystemSpec, u: &str, base_point: Vec<f64>) -> Result<Problem> {
    let u = Expr::parse(u, system.state_vars())?;
    let level = u.eval_value(&base_point)?;
    let mut target = TargetSpec::new(u, level)?;
    target.distance = distance_for(name, level);
    Ok(Problem {
        name: name.to_string(),
        system,
        target,
        base_point,
    })
}

/// Example 3 with the disc target of radius `r`, based at `(r, 0)`.
pub fn example3(r: f64) -> Result<Problem> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let v = vars(&["x", "y"]);
    let sys = SystemSpec::affine(v.clone(), exprs(&v, &["y", "0"]), vec![exprs(&v, &["0", "1"])])?;
    problem("ex3", sys, "(x^2 + y^2)/2", vec![r, 0.0])
}

pub fn load_registry(name: &str) -> Result<Problem> {
    match name {
        "ex1" => {
            let v = vars(&["x", "y"]);
            let sys = SystemSpec::symmetric(v.clone(), vec![exprs(&v, &["-y", "x"])])?;
            problem(name, sys, "y - 1", vec![0.0, 1.0])
        }
        "ex2" => {
            let v = vars(&["x", "y"]);
            let sys = SystemSpec::symmetric(v.clone(), vec![exprs(&v, &["0", "1"])])?;
            problem(name, sys, "(1 - x^2 - y^2)/2", vec![1.0, 0.0])
        }
        "ex3" => example3(2.0),
        "ex4" => {
            let v = vars(&["x", "y", "z"]);
            let sys = SystemSpec::symmetric(v.clone(), vec![exprs(&v, &["1", "0", "y"]), exprs(&v, &["0", "1", "-x"])])?;
            problem(name, sys, "(x^2 + y^2 + z^2)/2", vec![0.0, 0.0, 1.0])
        }
        "ex5" => {
            let v = vars(&["x", "y", "z"]);
            let sys = SystemSpec::symmetric(
                v.clone(),
                vec![exprs(&v, &["cos(z)", "sin(z)", "0"]), exprs(&v, &["0", "0", "1"])],
            )?;
            problem(name, sys, "(x^2 + y^2 + z^2)/2", vec![0.0, 1.0, 0.0])
        }
        "ex6" => {
            let v = vars(&["x", "y", "z"]);
            let sys = SystemSpec::affine(
                v.clone(),
                exprs(&v, &["-y/12", "x/12", "0"]),
                vec![exprs(&v, &["x*z", "y*z", "0"]), exprs(&v, &["0", "0", "1"])],
            )?;
            problem(name, sys, "(x^2 + y^2)/2", vec![1.0, 0.0, 0.0])
        }
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

/// Closed-form distance to the registry target `{u <= level}`.
pub(crate) fn distance_for(name: &str, level: f64) -> Option<AnalyticDistance> {
    match name {
        "ex1" => Some(AnalyticDistance::HalfSpace {
            normal: vec![0.0, 1.0],
            offset: 1.0 + level,
        }),
        "ex2" if level < 0.5 => Some(AnalyticDistance::BallExterior {
            center: vec![0.0, 0.0],
            radius: (1.0 - 2.0 * level).sqrt(),
        }),
        "ex3" if level > 0.0 => Some(AnalyticDistance::BallInterior {
            center: vec![0.0, 0.0],
            radius: (2.0 * level).sqrt(),
        }),
        "ex4" | "ex5" if level > 0.0 => Some(AnalyticDistance::BallInterior {
            center: vec![0.0; 3],
            radius: (2.0 * level).sqrt(),
        }),
        "ex6" if level > 0.0 => Some(AnalyticDistance::CylinderInterior {
            axes: vec![0, 1],
            center: vec![0.0, 0.0],
            radius: (2.0 * level).sqrt(),
        }),
        _ => None,
    }
}
