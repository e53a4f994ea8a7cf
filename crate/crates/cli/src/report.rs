//! Text rendering of reports.

use std::fmt::Write;

use nalgebra::DMatrix;
use stla_core::classify::{AnalysisReport, IntersectionReport, NecessaryReport, Witness};
use stla_core::format::{short, short_vec};
use stla_core::system::{Control, SystemSpec};
use stla_core::Problem;

pub fn matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let r: Vec<String> = (0..m.ncols()).map(|j| short(m[(i, j)])).collect();
            format!("[{}]", r.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

pub fn control(sys: &SystemSpec, c: &Control) -> String {
    match c {
        Control::Ball(a) => short_vec(a),
        Control::Listed(_) => format!("{} {}", sys.control_label(c), short_vec(&sys.control_vector(c))),
    }
}

fn line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key:<24}{value}");
}

pub fn header(out: &mut String, p: &Problem) {
    let s = &p.system;
    line(out, "problem", format!("{} ({}, n = {}, m = {})", p.name, s.kind().name(), s.n(), s.m()));
}

pub fn analysis(p: &Problem, r: &AnalysisReport, nec: Option<&NecessaryReport>, inter: Option<&IntersectionReport>) -> String {
    let sys = &p.system;
    let mut out = String::new();
    header(&mut out, p);
    line(&mut out, "point", short_vec(&r.point));
    line(&mut out, "u(point)", format!("{}   level {}", short(r.u_value), short(p.target.level)));
    line(&mut out, "grad u", format!("{}   |grad u| = {}", short_vec(&r.gradient), short(r.gradient_norm)));
    line(
        &mut out,
        "grad u . fields",
        format!("{}   {}", short_vec(&r.tangency_residuals), if r.tangent { "tangent" } else { "not tangent" }),
    );
    let pc = r.petrov_control.as_ref().map(|c| format!("   control {}", control(sys, c))).unwrap_or_default();
    line(&mut out, "Petrov margin", format!("{}{pc}", short(r.petrov_margin)));
    if let Some(s) = &r.s {
        line(&mut out, "S", matrix(&s.s));
        line(&mut out, "S* (symmetric)", matrix(&s.s_sym));
        line(&mut out, "Se (skew)", matrix(&s.s_skew));
    }
    if let Some(a) = &r.affine {
        line(&mut out, "alpha", short(a.alpha));
        line(&mut out, "beta", short_vec(a.beta.as_slice()));
        line(&mut out, "gamma", short_vec(a.gamma.as_slice()));
        line(&mut out, "S~", matrix(&a.stilde));
    }
    if let Some(k) = &r.k {
        line(&mut out, "K", matrix(k));
    }
    if let Some(e) = &r.eigen {
        line(&mut out, "K eigenvalues", short_vec(&e.eigenvalues));
        line(&mut out, "lambda_min", short(e.min()));
    }
    match &r.witness {
        Some(Witness::Pair { a1, a2 }) => line(&mut out, "witness", format!("a1 = {}, a2 = {}", control(sys, a1), control(sys, a2))),
        Some(Witness::Single { a }) => line(&mut out, "witness", format!("a = {} (single field)", control(sys, a))),
        None => {}
    }
    if let Some(c) = r.case_tag {
        let relaxed = r.relaxed_case.map(|c| format!(" (relaxes {})", c.name())).unwrap_or_default();
        line(&mut out, "affine case", format!("{}{relaxed}", c.name()));
    }
    if let Some(m) = r.second_order_margin {
        line(&mut out, "second-order margin", short(m));
    }
    if let Some(m) = r.literal_margin {
        line(&mut out, "literal-form margin", short(m));
    }
    if let Some(n) = nec {
        line(
            &mut out,
            "necessary condition",
            format!(
                "{}   bracket . grad u min {}, H_aa u min {}",
                serde_name(&n.verdict),
                short(n.bracket_value),
                short(n.single_field_value)
            ),
        );
        for w in &n.warnings {
            line(&mut out, "", format!("warning: {w}"));
        }
    }
    if let Some(i) = inter {
        if let Some((a1, a2)) = &i.pair {
            let cases: Vec<String> = i.outcomes.iter().map(|o| format!("{} {}", o.case, short(o.score))).collect();
            line(
                &mut out,
                "intersection",
                format!("common pair a1 = {}, a2 = {}: {}", control(sys, a1), control(sys, a2), cases.join("; ")),
            );
        } else {
            line(&mut out, "intersection", format!("no common pair among {} candidates", i.candidates_tried));
        }
    }
    for n in &r.notes {
        line(&mut out, "note", n);
    }
    line(&mut out, "classification", r.classification.name());
    out
}

pub fn serde_name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    line(out, key, value);
}
