//! Pointwise classification: first-order (Petrov), second-order, or neither.

pub mod grid;
mod intersection;
mod necessary;
mod scan;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::expr::Expr;
use crate::hamilton::{affine_data_local, affine_k_quadratic, k_matrix, s_matrix_local, AffineData, LocalJets, SMatrices};
use crate::serde_mat;
use crate::spectral::{eig_symmetric, k_eigen_witness, nonsym_witness, EigenResult};
use crate::system::{Control, SystemKind, SystemSpec};

pub use intersection::{classify_intersection, IntersectionReport, TargetOutcome};
pub use necessary::{check_necessary, NecessaryReport, NecessaryVerdict};
pub use scan::{neighborhood_scan, ScanOptions, ScanPoint, ScanReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    DegenerateGradient,
    FirstOrderPetrov,
    SecondOrder,
    Inconclusive,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::DegenerateGradient => "DEGENERATE_GRADIENT",
            Classification::FirstOrderPetrov => "FIRST_ORDER_PETROV",
            Classification::SecondOrder => "SECOND_ORDER",
            Classification::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Which sufficient condition produced an affine witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AffineCase {
    BracketDrift,
    SstarNeg,
    SNonsym,
    SingleField,
    AlphaRelaxed,
}

impl AffineCase {
    pub fn name(self) -> &'static str {
        match self {
            AffineCase::BracketDrift => "BRACKET_DRIFT",
            AffineCase::SstarNeg => "SSTAR_NEG",
            AffineCase::SNonsym => "S_NONSYM",
            AffineCase::SingleField => "SINGLE_FIELD",
            AffineCase::AlphaRelaxed => "ALPHA_RELAXED",
        }
    }

    /// Preference among cases whose margins tie.
    fn rank(self) -> u8 {
        match self {
            AffineCase::BracketDrift => 0,
            AffineCase::SNonsym => 1,
            AffineCase::SstarNeg => 2,
            AffineCase::SingleField => 3,
            AffineCase::AlphaRelaxed => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Single { a: Control },
    Pair { a1: Control, a2: Control },
}

impl Witness {
    /// The switched pair; a single field is the pair `(a, a)`.
    pub fn pair(&self) -> (Control, Control) {
        match self {
            Witness::Single { a } => (a.clone(), a.clone()),
            Witness::Pair { a1, a2 } => (a1.clone(), a2.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    /// Relative tolerance for tangency, Petrov and margin tests.
    pub tol: f64,
    /// Size of the unit-ball grid searched for a single decreasing field.
    pub single_field_points: usize,
    /// Also evaluate the term-by-term form of the sufficient condition at the witness.
    pub literal_form: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tol: 1e-9,
            single_field_points: 256,
            literal_form: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub point: Vec<f64>,
    pub u_value: f64,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    /// `grad u . f` for each basis field (symmetric: sigma_j; affine: sigma_0 then sigma_j;
    /// general: each listed control).
    pub tangency_residuals: Vec<f64>,
    pub tangent: bool,
    pub classification: Classification,
    pub petrov_margin: f64,
    pub petrov_control: Option<Control>,
    pub second_order_margin: Option<f64>,
    pub literal_margin: Option<f64>,
    pub witness: Option<Witness>,
    pub case_tag: Option<AffineCase>,
    pub relaxed_case: Option<AffineCase>,
    pub s: Option<SMatrices>,
    #[serde(serialize_with = "serde_mat::opt_matrix")]
    pub k: Option<DMatrix<f64>>,
    pub affine: Option<AffineData>,
    pub eigen: Option<EigenResult>,
    pub notes: Vec<String>,
}

/// `max_a -grad u . f(x, a)` and a maximizing control (`None` when every
/// control gives the same value and no direction is preferred).
pub fn petrov_margin(sys: &SystemSpec, u: &Expr, x: &[f64]) -> Result<(f64, Option<Control>)> {
    let lj = LocalJets::new(sys, u, x)?;
    Ok(petrov_local(sys, &lj))
}

fn sigma_t_grad(lj: &LocalJets, m: usize, off: usize) -> DVector<f64> {
    DVector::from_fn(m, |j, _| lj.basis.values[j + off].dot(lj.gradient()))
}

pub(crate) fn petrov_local(sys: &SystemSpec, lj: &LocalJets) -> (f64, Option<Control>) {
    let m = sys.m();
    match sys.kind() {
        SystemKind::Symmetric | SystemKind::Affine => {
            let off = usize::from(sys.kind() == SystemKind::Affine);
            let w = sigma_t_grad(lj, m, off);
            let drift = if off == 1 {
                -lj.basis.values[0].dot(lj.gradient())
            } else {
                0.0
            };
            let n = w.norm();
            let ctrl = if n > 0.0 {
                Some(Control::Ball((-&w / n).as_slice().to_vec()))
            } else if off == 1 {
                Some(Control::Ball(vec![0.0; m]))
            } else {
                None
            };
            (drift + n, ctrl)
        }
        SystemKind::General => {
            let mut best = (f64::NEG_INFINITY, None);
            for (k, v) in lj.basis.values.iter().enumerate() {
                let h = -v.dot(lj.gradient());
                if h > best.0 {
                    best = (h, Some(Control::Listed(k)));
                }
            }
            best
        }
    }
}

fn field_scale(lj: &LocalJets) -> f64 {
    lj.basis.values.iter().map(|v| v.norm()).sum::<f64>()
}

struct Candidate {
    case: AffineCase,
    a1: Vec<f64>,
    a2: Vec<f64>,
    margin: f64,
}

fn ball_w(a: &[f64], off: usize) -> Vec<(usize, f64)> {
    let mut w: Vec<(usize, f64)> = if off == 1 { vec![(0, 1.0)] } else { vec![] };
    w.extend(a.iter().enumerate().map(|(j, v)| (j + off, *v)));
    w
}

/// Best single field `a` on the ball grid, by decay margin of the pair `(a, a)`.
fn single_field_search(lj: &LocalJets, m: usize, off: usize, points: usize) -> (Vec<f64>, f64) {
    let mut best = (vec![0.0; m], f64::NEG_INFINITY);
    for a in grid::ball_points(m, points) {
        let w = ball_w(&a, off);
        let margin = lj.decay_margin(&w, &w);
        if margin > best.1 {
            best = (a, margin);
        }
    }
    best
}

fn affine_candidates(lj: &LocalJets, ad: &AffineData, opts: &ClassifyOptions) -> Vec<Candidate> {
    let m = ad.beta.len();
    let margin = |a1: &[f64], a2: &[f64]| -affine_k_quadratic(ad, a1, a2);
    let mut out = Vec::new();

    let (a, sf) = single_field_search(lj, m, 1, opts.single_field_points);
    out.push(Candidate {
        case: AffineCase::SingleField,
        a1: a.clone(),
        a2: a,
        margin: sf,
    });

    let d = &ad.gamma - &ad.beta;
    if d.norm() > opts.tol * (1.0 + ad.stilde.norm()) {
        let a1: Vec<f64> = (&d / d.norm()).as_slice().to_vec();
        let a2: Vec<f64> = a1.iter().map(|v| -v).collect();
        out.push(Candidate {
            case: AffineCase::BracketDrift,
            margin: margin(&a1, &a2),
            a1,
            a2,
        });
    }

    let s_sym = (&ad.s + ad.s.transpose()) * 0.5;
    if let Ok(e) = eig_symmetric(&s_sym) {
        if e.min() < -opts.tol * (1.0 + s_sym.norm()) {
            let mut a1 = e.vector(0);
            if (&ad.beta + &ad.gamma).dot(&a1) > 0.0 {
                a1 = -a1;
            }
            let a1 = a1.as_slice().to_vec();
            out.push(Candidate {
                case: AffineCase::SstarNeg,
                margin: margin(&a1, &a1),
                a1: a1.clone(),
                a2: a1,
            });
        }
    }

    if let Ok(w) = nonsym_witness(&ad.s) {
        // both signs of a1 (a2 follows), keep the smaller k
        let flip = |v: &[f64]| v.iter().map(|c| -c).collect::<Vec<_>>();
        let (b1, b2) = (flip(&w.a1), flip(&w.a2));
        let (m1, m2) = (margin(&w.a1, &w.a2), margin(&b1, &b2));
        let (a1, a2, mg) = if m2 > m1 { (b1, b2, m2) } else { (w.a1, w.a2, m1) };
        out.push(Candidate {
            case: AffineCase::SNonsym,
            a1,
            a2,
            margin: mg,
        });
    }
    out
}

fn pick(cands: Vec<Candidate>, margin_tol: f64) -> Option<Candidate> {
    let valid: Vec<Candidate> = cands.into_iter().filter(|c| c.margin > margin_tol).collect();
    let top = valid.iter().map(|c| c.margin).fold(f64::NEG_INFINITY, f64::max);
    valid
        .into_iter()
        .filter(|c| c.margin >= top - 1e-9 * top.abs().max(1.0))
        .min_by_key(|c| c.case.rank())
}

pub fn classify_point(sys: &SystemSpec, u: &Expr, level: f64, x: &[f64], opts: &ClassifyOptions) -> Result<AnalysisReport> {
    let lj = LocalJets::new(sys, u, x)?;
    let tol = opts.tol;
    let grad = lj.gradient().clone();
    let gnorm = grad.norm();
    let scale = tol * (1.0 + gnorm * field_scale(&lj));
    let residuals: Vec<f64> = lj.basis.values.iter().map(|v| v.dot(&grad)).collect();
    let tangent = residuals.iter().all(|r| r.abs() <= scale);
    let (pm, pc) = petrov_local(sys, &lj);
    let mut rep = AnalysisReport {
        point: x.to_vec(),
        u_value: lj.u.value,
        gradient: grad.as_slice().to_vec(),
        gradient_norm: gnorm,
        tangency_residuals: residuals,
        tangent,
        classification: Classification::Inconclusive,
        petrov_margin: pm,
        petrov_control: pc,
        second_order_margin: None,
        literal_margin: None,
        witness: None,
        case_tag: None,
        relaxed_case: None,
        s: None,
        k: None,
        affine: None,
        eigen: None,
        notes: Vec::new(),
    };
    if (lj.u.value - level).abs() > tol * (1.0 + level.abs()) {
        rep.notes.push(format!("point is off the level set: u(x) - level = {:e}", lj.u.value - level));
    }
    if gnorm <= tol {
        rep.classification = Classification::DegenerateGradient;
        return Ok(rep);
    }
    if pm > scale {
        rep.classification = Classification::FirstOrderPetrov;
        if let Some(c) = rep.petrov_control.clone() {
            rep.witness = Some(Witness::Single { a: c });
        }
        return Ok(rep);
    }
    match sys.kind() {
        SystemKind::Symmetric => {
            let s = s_matrix_local(sys, &lj)?;
            let k = k_matrix(&s);
            let e = eig_symmetric(&k)?;
            if e.min() < -tol * (1.0 + k.norm()) {
                let w = k_eigen_witness(&k, &e);
                rep.witness = Some(Witness::Pair {
                    a1: Control::Ball(w.a1),
                    a2: Control::Ball(w.a2),
                });
                rep.classification = Classification::SecondOrder;
            }
            rep.s = Some(s);
            rep.k = Some(k);
            rep.eigen = Some(e);
        }
        SystemKind::Affine => {
            let ad = affine_data_local(sys, &lj)?;
            let margin_tol = tol * (1.0 + ad.stilde.norm());
            if ad.bracket_residual > 1e-9 * (1.0 + ad.stilde.norm()) {
                rep.notes.push(format!("bracket identity residual {:e}", ad.bracket_residual));
            }
            if tangent {
                if let Some(c) = pick(affine_candidates(&lj, &ad, opts), margin_tol) {
                    rep.classification = Classification::SecondOrder;
                    if ad.alpha > margin_tol {
                        rep.case_tag = Some(AffineCase::AlphaRelaxed);
                        rep.relaxed_case = Some(c.case);
                    } else {
                        rep.case_tag = Some(c.case);
                    }
                    rep.witness = Some(if c.a1 == c.a2 {
                        Witness::Single { a: Control::Ball(c.a1) }
                    } else {
                        Witness::Pair {
                            a1: Control::Ball(c.a1),
                            a2: Control::Ball(c.a2),
                        }
                    });
                }
            } else if pm.abs() <= scale {
                // one field is tangent, the others point outward
                if let Some(Control::Ball(a)) = rep.petrov_control.clone() {
                    let w = ball_w(&a, 1);
                    if lj.decay_margin(&w, &w) > margin_tol {
                        rep.classification = Classification::SecondOrder;
                        rep.case_tag = Some(AffineCase::SingleField);
                        rep.witness = Some(Witness::Single { a: Control::Ball(a) });
                    }
                }
                rep.notes.push("fields are not all tangent; only the tangent field was examined".into());
            } else {
                rep.notes.push("every admissible field points outward".into());
            }
            let sm = SMatrices::from_s(ad.s.clone(), x.to_vec());
            rep.k = Some(k_matrix(&sm));
            rep.eigen = Some(eig_symmetric(rep.k.as_ref().expect("set above"))?);
            rep.s = Some(sm);
            rep.affine = Some(ad);
        }
        SystemKind::General => {
            let n = lj.basis.values.len();
            let mut h2max: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    h2max = h2max.max(lj.h2(&[(i, 1.0)], &[(j, 1.0)]).abs());
                }
            }
            let margin_tol = tol * (1.0 + h2max);
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..n {
                for j in 0..n {
                    let sum = &lj.basis.values[i] + &lj.basis.values[j];
                    if sum.dot(&grad).abs() > scale {
                        continue;
                    }
                    let mg = lj.decay_margin(&[(i, 1.0)], &[(j, 1.0)]);
                    if mg > margin_tol && best.is_none_or(|b| mg > b.2) {
                        best = Some((i, j, mg));
                    }
                }
            }
            if let Some((i, j, _)) = best {
                rep.classification = Classification::SecondOrder;
                rep.witness = Some(if i == j {
                    Witness::Single { a: Control::Listed(i) }
                } else {
                    Witness::Pair {
                        a1: Control::Listed(i),
                        a2: Control::Listed(j),
                    }
                });
            }
            rep.notes
                .push("convexity of the control sample is assumed, not checked".into());
        }
    }
    if let Some(w) = &rep.witness {
        let (a1, a2) = w.pair();
        let (w1, w2) = (sys.weights(&a1)?, sys.weights(&a2)?);
        rep.second_order_margin = Some(lj.decay_margin(&w1, &w2));
        if opts.literal_form {
            rep.literal_margin = Some(lj.literal_margin(&w1, &w2));
        }
    }
    if rep.classification == Classification::FirstOrderPetrov {
        rep.second_order_margin = None;
    }
    Ok(rep)
}
