//! Brute-force minimum time over single-switch controls and power-law fits of
//! the hitting time against the offset from a boundary point.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{classify_point, ClassifyOptions};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::format;
use crate::system::{AnalyticDistance, Control, SystemKind, SystemSpec};
use crate::trajsim::{checked_step, linear_fit};

pub const SWITCH_GRID_POINTS: usize = 32;
pub const SWITCH_GRID_MIN: f64 = 1e-4;
pub const RANDOM_PAIRS: usize = 16;
pub const CANDIDATE_SEED: u64 = 0x5eed_7a1e;
const BISECTION_ITERS: usize = 200;

/// Crossing tolerance `1e-12 (1 + |level|)`.
fn crossing_tol(level: f64) -> f64 {
    1e-12 * (1.0 + level.abs())
}

/// First time `u(x_s) <= level` along `a1` on `[0, switch_time]` then `a2`,
/// up to `limit`. `None` means not reached.
#[allow(clippy::too_many_arguments)]
fn hit_until(
    sys: &SystemSpec,
    u: &Expr,
    level: f64,
    x0: &[f64],
    w1: &[(usize, f64)],
    w2: &[(usize, f64)],
    switch_time: f64,
    limit: f64,
    h: f64,
) -> Result<Option<f64>> {
    if u.eval_value(x0)? <= level {
        return Ok(Some(0.0));
    }
    let tol = crossing_tol(level);
    let mut x = DVector::from_column_slice(x0);
    let mut t = 0.0;
    let n1 = if switch_time > 0.0 { (switch_time / h * (1.0 - 1e-12)).ceil().max(1.0) as usize } else { 0 };
    let h1 = if n1 > 0 { switch_time / n1 as f64 } else { h };
    let mut k = 0usize;
    while t < limit {
        let (w, step, next_t) = if k < n1 {
            let nt = if k + 1 == n1 { switch_time } else { (k + 1) as f64 * h1 };
            (w1, nt - t, nt)
        } else {
            let nt = (t + h).min(limit);
            (w2, nt - t, nt)
        };
        let nx = checked_step(sys, w, &x, step, t)?;
        let g = u.eval_value(nx.as_slice())? - level;
        if g <= 0.0 {
            // bisect inside the last step
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..BISECTION_ITERS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = u.eval_value(checked_step(sys, w, &x, mid, t)?.as_slice())? - level;
                if gm <= 0.0 {
                    hi = mid;
                    if -gm <= tol {
                        break;
                    }
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(t + hi));
        }
        x = nx;
        t = next_t;
        k += 1;
    }
    Ok(None)
}

/// First crossing of `u = level` for the switched control, or `None` within `horizon`.
#[allow(clippy::too_many_arguments)]
pub fn hitting_time(
    sys: &SystemSpec,
    u: &Expr,
    level: f64,
    x0: &[f64],
    a1: &Control,
    a2: &Control,
    switch_time: f64,
    horizon: f64,
    h: f64,
) -> Result<Option<f64>> {
    if x0.len() != sys.n() {
        return Err(Error::InvalidArgument(format!("initial point has {} coordinates, system has {}", x0.len(), sys.n())));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if !(0.0..=horizon / 2.0).contains(&switch_time) {
        return Err(Error::InvalidArgument(format!("switch time {switch_time} must lie in [0, horizon/2]")));
    }
    let (w1, w2) = (sys.weights(a1)?, sys.weights(a2)?);
    hit_until(sys, u, level, x0, &w1, &w2, switch_time, horizon, h)
}

/// `count` log-spaced switch times in `[1e-4, horizon/2]`.
pub fn switch_grid(horizon: f64, count: usize) -> Result<Vec<f64>> {
    let top = horizon / 2.0;
    if !(top > SWITCH_GRID_MIN && top.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon {horizon} leaves no room for switch times above {SWITCH_GRID_MIN}")));
    }
    log_space(SWITCH_GRID_MIN, top, count)
}

/// `count` log-spaced values from `lo` to `hi`, ascending.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(Error::InvalidArgument(format!("bad log range {lo}:{hi}:{count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect();
    v[0] = lo;
    v[count - 1] = hi;
    Ok(v)
}

/// Witness pairs, their negation and seeded random unit pairs; all listed
/// pairs for general systems.
pub fn candidate_pairs(sys: &SystemSpec, witnesses: &[(Control, Control)]) -> Vec<(Control, Control)> {
    let mut out: Vec<(Control, Control)> = Vec::new();
    let mut push = |p: (Control, Control)| {
        if !out.contains(&p) {
            out.push(p);
        }
    };
    for (a1, a2) in witnesses {
        push((a1.clone(), a2.clone()));
        if let (Some(n1), Some(n2)) = (a1.negated(), a2.negated()) {
            push((n1, n2));
        }
    }
    match sys.kind() {
        SystemKind::General => {
            let k = sys.listed_controls().len();
            for i in 0..k {
                for j in 0..k {
                    push((Control::Listed(i), Control::Listed(j)));
                }
            }
        }
        _ => {
            let m = sys.m();
            let mut rng = ChaCha8Rng::seed_from_u64(CANDIDATE_SEED);
            let unit = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                loop {
                    let v: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if n > 1e-8 {
                        return v.into_iter().map(|c| c / n).collect();
                    }
                }
            };
            for _ in 0..RANDOM_PAIRS {
                let a1 = unit(&mut rng);
                let a2 = unit(&mut rng);
                push((Control::Ball(a1), Control::Ball(a2)));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPlan {
    pub base_point: Vec<f64>,
    /// Unit vectors.
    pub directions: Vec<Vec<f64>>,
    /// Strictly decreasing, positive.
    pub deltas: Vec<f64>,
    pub candidates: Vec<(Control, Control)>,
    /// Ascending switch times in `(0, horizon/2]`.
    pub switch_times: Vec<f64>,
    /// Extra switch times tried between the neighbours of the best one (0 disables).
    pub refine_points: usize,
    pub horizon: f64,
    pub step: f64,
}

impl SweepPlan {
    /// Standard plan: the classifier's witness (or Petrov control) at `base`,
    /// the default candidate set and a 32-point switch grid.
    #[allow(clippy::too_many_arguments)]
    pub fn standard(
        sys: &SystemSpec,
        u: &Expr,
        level: f64,
        base: &[f64],
        directions: Vec<Vec<f64>>,
        deltas: Vec<f64>,
        horizon: f64,
        step: f64,
    ) -> Result<SweepPlan> {
        let r = classify_point(sys, u, level, base, &ClassifyOptions::default())?;
        let mut witnesses = Vec::new();
        if let Some(w) = &r.witness {
            witnesses.push(w.pair());
        }
        if let Some(c) = &r.petrov_control {
            witnesses.push((c.clone(), c.clone()));
        }
        let plan = SweepPlan {
            base_point: base.to_vec(),
            directions: directions.into_iter().map(normalized).collect::<Result<_>>()?,
            deltas: {
                let mut d = deltas;
                d.sort_by(|a, b| b.total_cmp(a));
                d.dedup();
                d
            },
            candidates: candidate_pairs(sys, &witnesses),
            switch_times: switch_grid(horizon, SWITCH_GRID_POINTS)?,
            refine_points: 8,
            horizon,
            step,
        };
        plan.validate(sys)?;
        Ok(plan)
    }

    pub fn validate(&self, sys: &SystemSpec) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.base_point.len() != sys.n() {
            return bad(format!("base point has {} coordinates, system has {}", self.base_point.len(), sys.n()));
        }
        if self.directions.is_empty() || self.directions.iter().any(|d| d.len() != sys.n()) {
            return bad("directions must be non-empty vectors of the state dimension".into());
        }
        if self.directions.iter().any(|d| (d.iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs() > 1e-12) {
            return bad("directions must be unit vectors".into());
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return bad("deltas must be positive".into());
        }
        if self.deltas.windows(2).any(|w| w[0] <= w[1]) {
            return bad("deltas must be strictly decreasing".into());
        }
        if self.candidates.is_empty() {
            return bad("no candidate control pairs".into());
        }
        for (a1, a2) in &self.candidates {
            sys.validate_control(a1)?;
            sys.validate_control(a2)?;
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.switch_times.is_empty() || self.switch_times.iter().any(|s| !(*s > 0.0)) {
            return bad("switch times must be positive".into());
        }
        if self.switch_times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("switch times must be increasing".into());
        }
        if self.switch_times.iter().any(|s| 2.0 * s > self.horizon) {
            return bad("horizon must be at least twice the largest switch time".into());
        }
        Ok(())
    }
}

fn normalized(d: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument("direction must be a nonzero vector".into()));
    }
    Ok(d.into_iter().map(|c| c / n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// `None` when no candidate reaches the target within the horizon.
    pub t_star: Option<f64>,
    pub pair: Option<(Control, Control)>,
    pub switch_time: Option<f64>,
}

/// Minimum hitting time over `plan.candidates x plan.switch_times`, with an
/// optional local refinement of the switch time of the best pair.
pub fn oracle_min_time(sys: &SystemSpec, u: &Expr, level: f64, x0: &[f64], plan: &SweepPlan) -> Result<OracleResult> {
    if u.eval_value(x0)? <= level {
        return Ok(OracleResult {
            t_star: Some(0.0),
            pair: plan.candidates.first().cloned(),
            switch_time: Some(0.0),
        });
    }
    let weights: Vec<_> = plan
        .candidates
        .iter()
        .map(|(a, b)| Ok((sys.weights(a)?, sys.weights(b)?)))
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut best_idx = 0usize;
    let try_one = |ci: usize, s: f64, best: &mut Option<(f64, usize, f64)>| -> Result<bool> {
        let limit = best.map_or(plan.horizon, |b| b.0);
        let (w1, w2) = &weights[ci];
        if let Some(t) = hit_until(sys, u, level, x0, w1, w2, s, limit, plan.step)? {
            if best.is_none_or(|b| t < b.0) {
                *best = Some((t, ci, s));
                return Ok(true);
            }
        }
        Ok(false)
    };
    for ci in 0..plan.candidates.len() {
        for (si, &s) in plan.switch_times.iter().enumerate() {
            if try_one(ci, s, &mut best)? {
                best_idx = si;
            }
        }
    }
    if let Some((_, ci, _)) = best {
        if plan.refine_points > 0 {
            let lo = plan.switch_times[best_idx.saturating_sub(1)];
            let hi = plan.switch_times[(best_idx + 1).min(plan.switch_times.len() - 1)];
            for k in 1..=plan.refine_points {
                let s = lo + (hi - lo) * k as f64 / (plan.refine_points + 1) as f64;
                try_one(ci, s, &mut best)?;
            }
        }
    }
    Ok(match best {
        Some((t, ci, s)) => OracleResult {
            t_star: Some(t),
            pair: Some(plan.candidates[ci].clone()),
            switch_time: Some(s),
        },
        None => OracleResult {
            t_star: None,
            pair: None,
            switch_time: None,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub direction_id: usize,
    pub delta: f64,
    pub x: Vec<f64>,
    pub t_star: Option<f64>,
    pub pair: Option<(Control, Control)>,
    pub switch_time: Option<f64>,
    /// Distance to the target when it is known in closed form.
    pub distance: Option<f64>,
}

/// `T ~ C x^s` fitted in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    pub r2: f64,
    pub used: usize,
}

fn power_fit(pts: &[(f64, f64)]) -> Option<PowerFit> {
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let (slope, intercept, r2) = linear_fit(&logs)?;
    Some(PowerFit {
        exponent: slope,
        constant: intercept.exp(),
        r2,
        used: logs.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinTimeEstimate {
    pub base_point: Vec<f64>,
    pub level: f64,
    pub points: Vec<SweepPoint>,
    /// Per direction, `log T` against `log delta` over reached points.
    pub fits: Vec<Option<PowerFit>>,
    /// All reached points pooled.
    pub fit: Option<PowerFit>,
    /// `log T` against `log d(x)`, when `d` is analytic.
    pub distance_fit: Option<PowerFit>,
    /// `max T / delta^(1/2)` over reached points.
    pub envelope_max: Option<f64>,
    /// Slope of `T / delta^(1/2)` against `log delta` over reached points.
    pub envelope_trend: Option<f64>,
    pub unreached: usize,
    pub unreached_fraction: f64,
}

impl MinTimeEstimate {
    /// Columns `direction_id, delta, T_star, a1_1..a1_m, a2_1..a2_m, switch_time, reached`.
    pub fn to_csv(&self, sys: &SystemSpec) -> String {
        let m = sys.m();
        let mut out = String::from("direction_id,delta,T_star");
        for p in ["a1", "a2"] {
            for i in 1..=m {
                out.push_str(&format!(",{p}_{i}"));
            }
        }
        out.push_str(",switch_time,reached\n");
        for p in &self.points {
            out.push_str(&format!("{},{},", p.direction_id, format::full(p.delta)));
            out.push_str(&p.t_star.map_or("inf".into(), format::full));
            let controls: Vec<f64> = match &p.pair {
                Some((a1, a2)) => sys.control_vector(a1).into_iter().chain(sys.control_vector(a2)).collect(),
                None => vec![f64::NAN; 2 * m],
            };
            for c in controls {
                out.push(',');
                out.push_str(&format::full(c));
            }
            out.push(',');
            out.push_str(&p.switch_time.map_or("nan".into(), format::full));
            out.push_str(if p.t_star.is_some() { ",true\n" } else { ",false\n" });
        }
        out
    }
}

/// Oracle times from `base + delta dir` for every direction and offset; points
/// are evaluated in parallel and reported in `(direction, delta)` order.
pub fn exponent_sweep(
    sys: &SystemSpec,
    u: &Expr,
    level: f64,
    distance: Option<&AnalyticDistance>,
    plan: &SweepPlan,
) -> Result<MinTimeEstimate> {
    plan.validate(sys)?;
    let base = &plan.base_point;
    let ub = u.eval_value(base)?;
    if (ub - level).abs() > 1e-9 * (1.0 + level.abs()) {
        return Err(Error::InvalidArgument(format!(
            "base point is not on the target boundary: u = {ub}, level = {level}"
        )));
    }
    let jobs: Vec<(usize, f64)> = (0..plan.directions.len())
        .flat_map(|d| plan.deltas.iter().map(move |&delta| (d, delta)))
        .collect();
    let points: Vec<SweepPoint> = jobs
        .par_iter()
        .map(|&(d, delta)| -> Result<SweepPoint> {
            let x: Vec<f64> = base.iter().zip(&plan.directions[d]).map(|(b, c)| b + delta * c).collect();
            let r = oracle_min_time(sys, u, level, &x, plan)?;
            Ok(SweepPoint {
                direction_id: d,
                delta,
                distance: distance.map(|dist| dist.distance(&x)),
                x,
                t_star: r.t_star,
                pair: r.pair,
                switch_time: r.switch_time,
            })
        })
        .collect::<Result<_>>()?;
    let reached: Vec<&SweepPoint> = points.iter().filter(|p| p.t_star.is_some()).collect();
    let fits = (0..plan.directions.len())
        .map(|d| {
            let pts: Vec<(f64, f64)> = reached
                .iter()
                .filter(|p| p.direction_id == d)
                .map(|p| (p.delta, p.t_star.unwrap()))
                .collect();
            power_fit(&pts)
        })
        .collect();
    let fit = power_fit(&reached.iter().map(|p| (p.delta, p.t_star.unwrap())).collect::<Vec<_>>());
    let distance_fit = if distance.is_some() {
        power_fit(
            &reached
                .iter()
                .filter_map(|p| p.distance.map(|d| (d, p.t_star.unwrap())))
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let ratios: Vec<(f64, f64)> = reached
        .iter()
        .map(|p| (p.delta.ln(), p.t_star.unwrap() / p.delta.sqrt()))
        .collect();
    let envelope_max = ratios.iter().map(|r| r.1).reduce(f64::max);
    let envelope_trend = linear_fit(&ratios).map(|f| f.0);
    let unreached = points.len() - reached.len();
    Ok(MinTimeEstimate {
        base_point: base.clone(),
        level,
        unreached_fraction: unreached as f64 / points.len() as f64,
        points,
        fits,
        fit,
        distance_fit,
        envelope_max,
        envelope_trend,
        unreached,
    })
}
