//! Controlled vector fields, targets and their pointwise derivatives.

mod registry;
mod schema;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Node};

pub use registry::{example3, load_registry, registry_entries, registry_names, RegistryEntry};
pub use schema::{parse_problem_json, ControlDoc, ProblemDoc};

/// Slack allowed on the unit-ball constraint `|a| <= 1`.
pub const BALL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    #[serde(alias = "GENERAL")]
    General,
    #[serde(alias = "SYMMETRIC")]
    Symmetric,
    #[serde(alias = "AFFINE")]
    Affine,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::General => "general",
            SystemKind::Symmetric => "symmetric",
            SystemKind::Affine => "affine",
        }
    }

    pub fn is_ball(self) -> bool {
        !matches!(self, SystemKind::General)
    }
}

/// One admissible control value of a general system, with its vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct ListedControl {
    pub label: String,
    pub value: Vec<f64>,
    pub field: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    /// `f(x, a) = sigma(x) a`, `sigma` stored column by column.
    Symmetric { sigma: Vec<Vec<Expr>> },
    /// `f(x, a) = sigma0(x) + sigma(x) a`.
    Affine { drift: Vec<Expr>, sigma: Vec<Vec<Expr>> },
    /// Finite control sample, one field per control.
    General { controls: Vec<ListedControl> },
}

/// A control value: a point of the unit ball for symmetric/affine systems, or
/// an index into the control list of a general system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Control {
    Ball(Vec<f64>),
    Listed(usize),
}

impl Control {
    pub fn ball(a: &[f64]) -> Control {
        Control::Ball(a.to_vec())
    }

    pub fn negated(&self) -> Option<Control> {
        match self {
            Control::Ball(a) => Some(Control::Ball(a.iter().map(|v| -v).collect())),
            Control::Listed(_) => None,
        }
    }
}

/// Values and spatial Jacobians of the basis fields at one point.
///
/// Basis order: symmetric `sigma_1..sigma_m`; affine `sigma_0, sigma_1..sigma_m`;
/// general: the listed fields.
#[derive(Debug, Clone)]
pub struct BasisJets {
    pub values: Vec<DVector<f64>>,
    pub jacobians: Vec<DMatrix<f64>>,
}

impl BasisJets {
    pub fn combine_value(&self, weights: &[(usize, f64)]) -> DVector<f64> {
        let n = self.values[0].len();
        weights
            .iter()
            .fold(DVector::zeros(n), |acc, &(b, w)| acc + &self.values[b] * w)
    }

    pub fn combine_jacobian(&self, weights: &[(usize, f64)]) -> DMatrix<f64> {
        let n = self.values[0].len();
        weights
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, &(b, w)| acc + &self.jacobians[b] * w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    state_vars: Arc<[String]>,
    m: usize,
    dynamics: Dynamics,
}

impl SystemSpec {
    pub fn symmetric(state_vars: Arc<[String]>, sigma: Vec<Vec<Expr>>) -> Result<Self> {
        let m = sigma.len();
        let s = SystemSpec {
            state_vars,
            m,
            dynamics: Dynamics::Symmetric { sigma },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn affine(state_vars: Arc<[String]>, drift: Vec<Expr>, sigma: Vec<Vec<Expr>>) -> Result<Self> {
        let m = sigma.len();
        let s = SystemSpec {
            state_vars,
            m,
            dynamics: Dynamics::Affine { drift, sigma },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn general(state_vars: Arc<[String]>, m: usize, controls: Vec<ListedControl>) -> Result<Self> {
        let s = SystemSpec {
            state_vars,
            m,
            dynamics: Dynamics::General { controls },
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        let check_vec = |path: String, v: &[Expr]| -> Result<()> {
            if v.len() != n {
                return Err(Error::schema(path, format!("expected {n} components, got {}", v.len())));
            }
            for (i, e) in v.iter().enumerate() {
                if **e.vars() != *self.state_vars {
                    return Err(Error::schema(format!("{path}[{i}]"), "expression uses a different variable list"));
                }
            }
            Ok(())
        };
        match &self.dynamics {
            Dynamics::Symmetric { sigma } | Dynamics::Affine { sigma, .. } => {
                if sigma.is_empty() {
                    return Err(Error::schema("sigma", "at least one control column is required"));
                }
                for (j, col) in sigma.iter().enumerate() {
                    check_vec(format!("sigma column {j}"), col)?;
                }
                if let Dynamics::Affine { drift, .. } = &self.dynamics {
                    check_vec("sigma0".into(), drift)?;
                }
            }
            Dynamics::General { controls } => {
                if controls.is_empty() {
                    return Err(Error::schema("controls", "control list is empty"));
                }
                for (k, c) in controls.iter().enumerate() {
                    check_vec(format!("fields[{k}]"), &c.field)?;
                    if c.value.len() != self.m {
                        return Err(Error::schema(
                            format!("controls[{k}].value"),
                            format!("expected {} entries, got {}", self.m, c.value.len()),
                        ));
                    }
                    if controls[..k].iter().any(|o| o.label == c.label) {
                        return Err(Error::schema(format!("controls[{k}].label"), format!("duplicate label `{}`", c.label)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SystemKind {
        match self.dynamics {
            Dynamics::Symmetric { .. } => SystemKind::Symmetric,
            Dynamics::Affine { .. } => SystemKind::Affine,
            Dynamics::General { .. } => SystemKind::General,
        }
    }

    pub fn n(&self) -> usize {
        self.state_vars.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn state_vars(&self) -> &Arc<[String]> {
        &self.state_vars
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn listed_controls(&self) -> &[ListedControl] {
        match &self.dynamics {
            Dynamics::General { controls } => controls,
            _ => &[],
        }
    }

    /// Basis fields as component expression lists, in [`BasisJets`] order.
    pub fn basis_fields(&self) -> Vec<&[Expr]> {
        match &self.dynamics {
            Dynamics::Symmetric { sigma } => sigma.iter().map(Vec::as_slice).collect(),
            Dynamics::Affine { drift, sigma } => std::iter::once(drift.as_slice())
                .chain(sigma.iter().map(Vec::as_slice))
                .collect(),
            Dynamics::General { controls } => controls.iter().map(|c| c.field.as_slice()).collect(),
        }
    }

    pub fn validate_control(&self, c: &Control) -> Result<()> {
        match (c, self.kind().is_ball()) {
            (Control::Ball(a), true) => {
                if a.len() != self.m {
                    return Err(Error::InvalidControl(format!(
                        "expected {} components, got {}",
                        self.m,
                        a.len()
                    )));
                }
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidControl("non-finite component".into()));
                }
                let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1.0 + BALL_SLACK {
                    return Err(Error::InvalidControl(format!("|a| = {norm} exceeds 1")));
                }
                Ok(())
            }
            (Control::Listed(k), false) => {
                let len = self.listed_controls().len();
                if *k >= len {
                    return Err(Error::InvalidControl(format!("control index {k} out of range ({len} controls)")));
                }
                Ok(())
            }
            (Control::Ball(_), false) => Err(Error::InvalidControl(
                "general systems take a listed control, not a vector".into(),
            )),
            (Control::Listed(_), true) => Err(Error::InvalidControl(
                "ball-constrained systems take a control vector, not a label".into(),
            )),
        }
    }

    /// Weights of the basis fields making up `f(., c)`. Zero weights are dropped.
    pub fn weights(&self, c: &Control) -> Result<Vec<(usize, f64)>> {
        self.validate_control(c)?;
        Ok(match (c, self.kind()) {
            (Control::Ball(a), SystemKind::Symmetric) => a
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(j, w)| (j, *w))
                .collect(),
            (Control::Ball(a), SystemKind::Affine) => std::iter::once((0, 1.0))
                .chain(a.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(j, w)| (j + 1, *w)))
                .collect(),
            (Control::Listed(k), _) => vec![(*k, 1.0)],
            _ => unreachable!("validated above"),
        })
    }

    /// The numeric control vector (listed controls report their stored value).
    pub fn control_vector(&self, c: &Control) -> Vec<f64> {
        match c {
            Control::Ball(a) => a.clone(),
            Control::Listed(k) => self.listed_controls()[*k].value.clone(),
        }
    }

    pub fn control_label(&self, c: &Control) -> String {
        match c {
            Control::Ball(a) => format!("{a:?}"),
            Control::Listed(k) => self.listed_controls()[*k].label.clone(),
        }
    }

    /// `f(x, c)`.
    pub fn field_value(&self, x: &[f64], c: &Control) -> Result<DVector<f64>> {
        self.weighted_value(x, &self.weights(c)?)
    }

    /// `sum_b w_b sigma_b(x)` for precomputed weights.
    pub(crate) fn weighted_value(&self, x: &[f64], weights: &[(usize, f64)]) -> Result<DVector<f64>> {
        let basis = self.basis_fields();
        let mut out = DVector::zeros(self.n());
        for &(b, w) in weights {
            for (i, e) in basis[b].iter().enumerate() {
                out[i] += w * e.eval_value(x)?;
            }
        }
        Ok(out)
    }

    /// Values and Jacobians of all basis fields at `x`.
    pub fn basis_jets(&self, x: &[f64]) -> Result<BasisJets> {
        let n = self.n();
        let basis = self.basis_fields();
        let mut values = Vec::with_capacity(basis.len());
        let mut jacobians = Vec::with_capacity(basis.len());
        for field in basis {
            let mut v = DVector::zeros(n);
            let mut jac = DMatrix::zeros(n, n);
            for (i, e) in field.iter().enumerate() {
                let j = e.eval_jet2(x)?;
                v[i] = j.value;
                jac.set_row(i, &j.gradient.transpose());
            }
            values.push(v);
            jacobians.push(jac);
        }
        Ok(BasisJets { values, jacobians })
    }

    /// Spatial Jacobian `Df(., c)(x)`.
    pub fn field_jacobian(&self, x: &[f64], c: &Control) -> Result<DMatrix<f64>> {
        let weights = self.weights(c)?;
        Ok(self.basis_jets(x)?.combine_jacobian(&weights))
    }

    /// Lie bracket `[f, g](x) = Dg f - Df g` with `f = f(., c1)`, `g = f(., c2)`.
    pub fn lie_bracket(&self, x: &[f64], c1: &Control, c2: &Control) -> Result<DVector<f64>> {
        let jets = self.basis_jets(x)?;
        let (w1, w2) = (self.weights(c1)?, self.weights(c2)?);
        Ok(lie_bracket_from(&jets, &w1, &w2))
    }

    /// General system sampling this system at the given control values.
    pub fn sampled(&self, samples: &[(String, Control)]) -> Result<SystemSpec> {
        let basis = self.basis_fields();
        let mut controls = Vec::with_capacity(samples.len());
        for (label, c) in samples {
            let weights = self.weights(c)?;
            let field = (0..self.n())
                .map(|i| {
                    let node = weights
                        .iter()
                        .map(|&(b, w)| {
                            let comp = basis[b][i].root().clone();
                            if w == 1.0 {
                                comp
                            } else {
                                Node::bin(BinOp::Mul, Node::num(w), comp)
                            }
                        })
                        .reduce(|acc, t| Node::bin(BinOp::Add, acc, t))
                        .unwrap_or(Node::num(0.0));
                    Expr::from_node(node, self.state_vars.clone())
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            controls.push(ListedControl {
                label: label.clone(),
                value: self.control_vector(c),
                field,
            });
        }
        SystemSpec::general(self.state_vars.clone(), self.m, controls)
    }
}

pub(crate) fn lie_bracket_from(jets: &BasisJets, w1: &[(usize, f64)], w2: &[(usize, f64)]) -> DVector<f64> {
    let f = jets.combine_value(w1);
    let g = jets.combine_value(w2);
    jets.combine_jacobian(w2) * &f - jets.combine_jacobian(w1) * &g
}

/// Closed-form distance to a target set, when one is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticDistance {
    /// Target `{x : normal . x <= offset}` with a unit normal.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// Target is the closed ball.
    BallInterior { center: Vec<f64>, radius: f64 },
    /// Target is the complement of the open ball.
    BallExterior { center: Vec<f64>, radius: f64 },
    /// Target is a solid cylinder: a ball in the listed coordinates, any value in the others.
    CylinderInterior { axes: Vec<usize>, center: Vec<f64>, radius: f64 },
}

impl AnalyticDistance {
    /// Euclidean distance from `x` to the target (zero inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        let dist = |c: &[f64], idx: &mut dyn Iterator<Item = usize>| -> f64 {
            idx.zip(c).map(|(i, ci)| (x[i] - ci).powi(2)).sum::<f64>().sqrt()
        };
        match self {
            AnalyticDistance::HalfSpace { normal, offset } => {
                let s: f64 = normal.iter().zip(x).map(|(a, b)| a * b).sum();
                (s - offset).max(0.0)
            }
            AnalyticDistance::BallInterior { center, radius } => (dist(center, &mut (0..x.len())) - radius).max(0.0),
            AnalyticDistance::BallExterior { center, radius } => (radius - dist(center, &mut (0..x.len()))).max(0.0),
            AnalyticDistance::CylinderInterior { axes, center, radius } => {
                (dist(center, &mut axes.iter().copied()) - radius).max(0.0)
            }
        }
    }
}

/// Target `{x : u(x) <= level}`, optionally intersected with further sublevel sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub u: Expr,
    pub level: f64,
    /// Additional functions `u_i` of an intersection target; each level is `u_i(base point)`.
    pub intersection: Vec<Expr>,
    pub distance: Option<AnalyticDistance>,
}

impl TargetSpec {
    pub fn new(u: Expr, level: f64) -> Result<Self> {
        if !level.is_finite() {
            return Err(Error::schema("level", "level must be finite"));
        }
        Ok(TargetSpec {
            u,
            level,
            intersection: Vec::new(),
            distance: None,
        })
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.u.eval_value(x)? <= self.level)
    }
}

/// A system, a target and the base point where attainability is examined.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub system: SystemSpec,
    pub target: TargetSpec,
    pub base_point: Vec<f64>,
}

impl Problem {
    /// Move the base point; the level becomes `u(point)` so the point stays on
    /// the target boundary. Registry distances are rebuilt for the new level.
    pub fn at_point(&self, point: &[f64]) -> Result<Problem> {
        if point.len() != self.system.n() {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, system has {}",
                point.len(),
                self.system.n()
            )));
        }
        let level = self.target.u.eval_value(point)?;
        let mut p = self.clone();
        p.base_point = point.to_vec();
        p.target.level = level;
        p.target.distance = registry::distance_for(&self.name, level);
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.system.n()
    }
}
