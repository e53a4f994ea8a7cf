//! Single-switch trajectories and the second-order Taylor residuals of the
//! endpoint state and of `u` along them.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::format;
use crate::hamilton::LocalJets;
use crate::system::{Control, SystemSpec};

/// Residuals at or below this are treated as roundoff and left out of fits.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Index of time `t`; `a1` drives steps before it, `a2` from it on.
    pub switch_index: usize,
    pub u_values: Vec<f64>,
    pub controls: (Control, Control),
}

impl TrajectoryRecord {
    /// Columns `time, x1..xn, u, control_label`; the label is `a1` or `a2`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("time");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",u,control_label\n");
        for (k, (t, x)) in self.times.iter().zip(&self.states).enumerate() {
            out.push_str(&format::full(*t));
            for c in x {
                out.push(',');
                out.push_str(&format::full(*c));
            }
            out.push(',');
            out.push_str(&format::full(self.u_values[k]));
            out.push_str(if k < self.switch_index { ",a1\n" } else { ",a2\n" });
        }
        out
    }
}

/// One classical RK4 step of `x' = f(x)` with `f = sum_b w_b sigma_b`.
pub(crate) fn rk4_step(sys: &SystemSpec, w: &[(usize, f64)], x: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let f = |y: &DVector<f64>| sys.weighted_value(y.as_slice(), w);
    let k1 = f(x)?;
    let k2 = f(&(x + &k1 * (h / 2.0)))?;
    let k3 = f(&(x + &k2 * (h / 2.0)))?;
    let k4 = f(&(x + &k3 * h))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

pub(crate) fn checked_step(
    sys: &SystemSpec,
    w: &[(usize, f64)],
    x: &DVector<f64>,
    h: f64,
    time: f64,
) -> Result<DVector<f64>> {
    let next = rk4_step(sys, w, x, h)?;
    if next.iter().all(|c| c.is_finite()) {
        Ok(next)
    } else {
        Err(Error::IntegrationDiverged {
            time,
            last_state: x.iter().copied().collect(),
        })
    }
}

fn leg_steps(t: f64, h: f64) -> Result<usize> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("switch time must be positive, got {t}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let n = (t / h * (1.0 - 1e-12)).ceil().max(1.0);
    if n > 1e8 {
        return Err(Error::InvalidArgument(format!("t/h = {} steps per leg is too many", n)));
    }
    Ok(n as usize)
}

/// States on the uniform grid of `[0, 2t]` with `ceil(t/h)` steps per leg.
fn integrate_grid(sys: &SystemSpec, x0: &[f64], a1: &Control, a2: &Control, t: f64, h: f64) -> Result<(Vec<f64>, Vec<DVector<f64>>, usize)> {
    if x0.len() != sys.n() {
        return Err(Error::InvalidArgument(format!("initial point has {} coordinates, system has {}", x0.len(), sys.n())));
    }
    let n = leg_steps(t, h)?;
    let hh = t / n as f64;
    let (w1, w2) = (sys.weights(a1)?, sys.weights(a2)?);
    let mut times = Vec::with_capacity(2 * n + 1);
    let mut states = Vec::with_capacity(2 * n + 1);
    let mut x = DVector::from_column_slice(x0);
    times.push(0.0);
    states.push(x.clone());
    for k in 0..2 * n {
        let w = if k < n { &w1 } else { &w2 };
        x = checked_step(sys, w, &x, hh, times[k])?;
        let tk = if k + 1 == n {
            t
        } else if k + 1 == 2 * n {
            2.0 * t
        } else {
            (k + 1) as f64 * hh
        };
        times.push(tk);
        states.push(x.clone());
    }
    Ok((times, states, n))
}

/// Follow `f(., a1)` on `[0, t]` and `f(., a2)` on `[t, 2t]` with fixed-step RK4.
/// The step is lowered to `t / ceil(t/h)` so the switch is a grid node.
pub fn integrate_switched(
    sys: &SystemSpec,
    u: &Expr,
    x0: &[f64],
    a1: &Control,
    a2: &Control,
    t: f64,
    h: f64,
) -> Result<TrajectoryRecord> {
    let (times, states, switch_index) = integrate_grid(sys, x0, a1, a2, t, h)?;
    let u_values = states.iter().map(|x| u.eval_value(x.as_slice())).collect::<Result<Vec<_>, _>>()?;
    Ok(TrajectoryRecord {
        times,
        states: states.into_iter().map(|x| x.iter().copied().collect()).collect(),
        switch_index,
        u_values,
        controls: (a1.clone(), a2.clone()),
    })
}

fn endpoint(sys: &SystemSpec, x0: &[f64], a1: &Control, a2: &Control, t: f64, h: f64) -> Result<DVector<f64>> {
    let (_, mut states, _) = integrate_grid(sys, x0, a1, a2, t, h)?;
    Ok(states.pop().expect("grid has at least three nodes"))
}

/// Second-order prediction of `x_{2t} - x0`.
pub fn predicted_displacement(sys: &SystemSpec, x0: &[f64], a1: &Control, a2: &Control, t: f64) -> Result<DVector<f64>> {
    let (w1, w2) = (sys.weights(a1)?, sys.weights(a2)?);
    let jets = sys.basis_jets(x0)?;
    let sum: Vec<(usize, f64)> = w1.iter().chain(&w2).copied().collect();
    let f = jets.combine_value(&sum);
    let df = jets.combine_jacobian(&sum);
    let br = crate::system::lie_bracket_from(&jets, &w1, &w2);
    Ok(&f * t + (&df * &f + br) * (t * t / 2.0))
}

/// `|x_{2t} - x0 - [(f+g) t + (D(f+g)(f+g) + [f,g]) t^2/2]|`.
pub fn taylor_residual_state(sys: &SystemSpec, x0: &[f64], a1: &Control, a2: &Control, t: f64, h: f64) -> Result<f64> {
    let xe = endpoint(sys, x0, a1, a2, t, h)?;
    let pred = predicted_displacement(sys, x0, a1, a2, t)?;
    Ok((xe - DVector::from_column_slice(x0) - pred).norm())
}

/// Second-order prediction of `u(x_{2t}) - u(x0)`.
pub fn predicted_value_change(sys: &SystemSpec, u: &Expr, x0: &[f64], a1: &Control, a2: &Control, t: f64) -> Result<f64> {
    let (w1, w2) = (sys.weights(a1)?, sys.weights(a2)?);
    let lj = LocalJets::new(sys, u, x0)?;
    let sum: Vec<(usize, f64)> = w1.iter().chain(&w2).copied().collect();
    let first = lj.gradient().dot(&lj.basis.combine_value(&sum));
    let second = lj.h2(&sum, &sum) + lj.gradient().dot(&lj.bracket(&w1, &w2));
    Ok(first * t + second * t * t / 2.0)
}

/// `|u(x_{2t}) - u(x0) - grad u.(f+g) t - (H_{f+g,f+g} u + grad u.[f,g]) t^2/2|`.
pub fn taylor_residual_value(sys: &SystemSpec, u: &Expr, x0: &[f64], a1: &Control, a2: &Control, t: f64, h: f64) -> Result<f64> {
    let xe = endpoint(sys, x0, a1, a2, t, h)?;
    let du = u.eval_value(xe.as_slice())? - u.eval_value(x0)?;
    Ok((du - predicted_value_change(sys, u, x0, a1, a2, t)?).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Per input point: true when it fell below the floor and was left out.
    pub clamped: Vec<bool>,
}

impl OrderFit {
    pub fn used(&self) -> usize {
        self.clamped.iter().filter(|c| !**c).count()
    }
}

/// Least squares of `log r` against `log t`, skipping residuals `<= 1e-13`.
pub fn order_fit(ts: &[f64], residuals: &[f64]) -> Result<OrderFit> {
    if ts.len() != residuals.len() {
        return Err(Error::InvalidArgument(format!("{} times but {} residuals", ts.len(), residuals.len())));
    }
    if ts.len() < 4 {
        return Err(Error::InsufficientPoints { needed: 4, got: ts.len() });
    }
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument(format!("times must be positive, got {t}")));
    }
    let clamped: Vec<bool> = residuals.iter().map(|r| !(*r > RESIDUAL_FLOOR)).collect();
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(residuals)
        .zip(&clamped)
        .filter(|(_, c)| !**c)
        .map(|((t, r), _)| (t.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let (slope, intercept, r2) = linear_fit(&pts).ok_or(Error::DegenerateFit)?;
    Ok(OrderFit {
        slope,
        intercept,
        r2,
        clamped,
    })
}

/// Ordinary least squares `y = slope x + intercept`; `None` when all `x` coincide.
pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some((slope, intercept, r2))
}

/// `2^-4, ..., 2^-10`.
pub fn default_taylor_times() -> Vec<f64> {
    (4..=10).map(|k| 2f64.powi(-k)).collect()
}

/// Outcome of a residual fit: a slope, or every residual at roundoff (the
/// expansion is exact for this trajectory).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitOutcome {
    Fit(OrderFit),
    BelowFloor,
}

impl FitOutcome {
    fn from(r: Result<OrderFit>) -> Result<Self> {
        match r {
            Ok(f) => Ok(FitOutcome::Fit(f)),
            Err(Error::DegenerateFit) => Ok(FitOutcome::BelowFloor),
            Err(e) => Err(e),
        }
    }

    /// Exact expansions pass; fits need both the slope and `r^2`.
    pub fn meets(&self, min_slope: f64, min_r2: f64) -> bool {
        match self {
            FitOutcome::Fit(f) => f.slope >= min_slope && f.r2 >= min_r2,
            FitOutcome::BelowFloor => true,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        match self {
            FitOutcome::Fit(f) => Some(f.slope),
            FitOutcome::BelowFloor => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorStudy {
    pub ts: Vec<f64>,
    pub steps_per_leg: usize,
    pub state_residuals: Vec<f64>,
    pub value_residuals: Vec<f64>,
    pub state_fit: FitOutcome,
    pub value_fit: FitOutcome,
}

/// Residuals of both expansions at each `t` with step `t / steps_per_leg`.
#[allow(clippy::too_many_arguments)]
pub fn taylor_study(
    sys: &SystemSpec,
    u: &Expr,
    x0: &[f64],
    a1: &Control,
    a2: &Control,
    ts: &[f64],
    steps_per_leg: usize,
) -> Result<TaylorStudy> {
    if steps_per_leg == 0 {
        return Err(Error::InvalidArgument("steps per leg must be positive".into()));
    }
    let rows: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| -> Result<(f64, f64)> {
            let h = t / steps_per_leg as f64;
            Ok((
                taylor_residual_state(sys, x0, a1, a2, t, h)?,
                taylor_residual_value(sys, u, x0, a1, a2, t, h)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (state_residuals, value_residuals): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(TaylorStudy {
        state_fit: FitOutcome::from(order_fit(ts, &state_residuals))?,
        value_fit: FitOutcome::from(order_fit(ts, &value_residuals))?,
        ts: ts.to_vec(),
        steps_per_leg,
        state_residuals,
        value_residuals,
    })
}
