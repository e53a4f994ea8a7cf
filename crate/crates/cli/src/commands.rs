use std::fs;
use std::path::Path;

use serde::Serialize;
use stla_core::classify::{
    check_necessary, classify_intersection, classify_point, neighborhood_scan, AnalysisReport, Classification, ClassifyOptions,
    IntersectionReport, NecessaryReport, ScanOptions,
};
use stla_core::format::{full, short, short_vec};
use stla_core::mintime::{exponent_sweep, MinTimeEstimate, SweepPlan};
use stla_core::system::{load_registry, parse_problem_json, registry_entries, Control, ProblemDoc, SystemKind, SystemSpec};
use stla_core::trajsim::{default_taylor_times, integrate_switched, taylor_study, FitOutcome, TaylorStudy, RESIDUAL_FLOOR};
use stla_core::Problem;

use crate::args::{parse_csv, parse_deltas, parse_dirs, AnalyzeArgs, Common, ExamplesArgs, MintimeArgs, ScanArgs, SimulateArgs};
use crate::report::{self, kv};
use crate::{CliError, EXIT_DEGENERATE, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_SCAN_FAILED, EXIT_UNREACHED};

type CmdResult = Result<u8, CliError>;

fn load(c: &Common) -> Result<Problem, CliError> {
    let p = match (&c.source.example, &c.source.input) {
        (Some(name), _) => load_registry(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            parse_problem_json(&text, &name).map_err(|e| CliError::Message(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(CliError::Message("one of --example or --input is required".into())),
    };
    match &c.point {
        Some(text) => Ok(p.at_point(&parse_csv(text, "--point").map_err(CliError::Message)?)?),
        None => Ok(p),
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Message(format!("--tol must be positive, got {tol}")))
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn classify(p: &Problem, opts: &ClassifyOptions) -> Result<AnalysisReport, CliError> {
    Ok(classify_point(&p.system, &p.target.u, p.target.level, &p.base_point, opts)?)
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    problem: &'a str,
    system: ProblemDoc,
    analysis: &'a AnalysisReport,
    necessary: Option<&'a NecessaryReport>,
    intersection: Option<&'a IntersectionReport>,
}

pub fn analyze(a: &AnalyzeArgs) -> CmdResult {
    let c = &a.common;
    check_tol(c.tol)?;
    let p = load(c)?;
    let opts = ClassifyOptions {
        tol: c.tol,
        literal_form: a.literal_form,
        ..ClassifyOptions::default()
    };
    let r = classify(&p, &opts)?;
    let nec = if r.tangent && r.classification != Classification::DegenerateGradient {
        Some(check_necessary(&p.system, &p.target.u, &p.base_point, c.tol)?)
    } else {
        None
    };
    let inter = if p.target.intersection.is_empty() {
        None
    } else {
        let mut targets = vec![p.target.u.clone()];
        targets.extend(p.target.intersection.iter().cloned());
        Some(classify_intersection(&p.system, &targets, &p.base_point, &opts)?)
    };
    let out = AnalyzeOutput {
        problem: &p.name,
        system: ProblemDoc::from_problem(&p),
        analysis: &r,
        necessary: nec.as_ref(),
        intersection: inter.as_ref(),
    };
    let json = to_json(&out);
    write_file(&c.out, "report.json", &json)?;
    if c.json {
        print!("{json}");
    } else {
        print!("{}", report::analysis(&p, &r, nec.as_ref(), inter.as_ref()));
    }
    Ok(match r.classification {
        Classification::FirstOrderPetrov | Classification::SecondOrder => EXIT_OK,
        Classification::Inconclusive => EXIT_INCONCLUSIVE,
        Classification::DegenerateGradient => EXIT_DEGENERATE,
    })
}

fn parse_control(sys: &SystemSpec, text: &str, flag: &str) -> Result<Control, CliError> {
    let c = match sys.kind() {
        SystemKind::General => {
            let t = text.trim();
            match sys.listed_controls().iter().position(|l| l.label == t) {
                Some(k) => Control::Listed(k),
                None => Control::Listed(
                    t.parse::<usize>()
                        .map_err(|_| CliError::Message(format!("{flag}: no listed control `{t}`")))?,
                ),
            }
        }
        _ => Control::Ball(parse_csv(text, flag).map_err(CliError::Message)?),
    };
    sys.validate_control(&c)?;
    Ok(c)
}

fn witness_pair(r: &AnalysisReport) -> Option<(Control, Control)> {
    match &r.witness {
        Some(w) => Some(w.pair()),
        None => r.petrov_control.as_ref().map(|c| (c.clone(), c.clone())),
    }
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    problem: &'a str,
    point: &'a [f64],
    a1: &'a Control,
    a2: &'a Control,
    t: f64,
    step: f64,
    u_start: f64,
    u_end: f64,
    predicted_change: f64,
    taylor: &'a TaylorStudy,
}

fn fit_text(f: &FitOutcome) -> String {
    match f {
        FitOutcome::Fit(o) => format!(
            "slope {}   r2 {}   ({} of {} points used)",
            short(o.slope),
            short(o.r2),
            o.used(),
            o.clamped.len()
        ),
        FitOutcome::BelowFloor => format!("exact: every residual is below {RESIDUAL_FLOOR:e}"),
    }
}

pub fn simulate(a: &SimulateArgs) -> CmdResult {
    let c = &a.common;
    check_tol(c.tol)?;
    let p = load(c)?;
    let sys = &p.system;
    let (a1, a2) = match (&a.a1, &a.a2) {
        (Some(t1), Some(t2)) => (parse_control(sys, t1, "--a1")?, parse_control(sys, t2, "--a2")?),
        _ => {
            let r = classify(&p, &ClassifyOptions { tol: c.tol, ..ClassifyOptions::default() })?;
            match witness_pair(&r) {
                Some(pair) => pair,
                None => {
                    eprintln!(
                        "error: no witness control at this point (classification {}); pass --a1 and --a2",
                        r.classification.name()
                    );
                    return Ok(EXIT_INCONCLUSIVE);
                }
            }
        }
    };
    let tr = integrate_switched(sys, &p.target.u, &p.base_point, &a1, &a2, a.t, a.step)?;
    let study = taylor_study(sys, &p.target.u, &p.base_point, &a1, &a2, &default_taylor_times(), 1000)?;
    let predicted = stla_core::trajsim::predicted_value_change(sys, &p.target.u, &p.base_point, &a1, &a2, a.t)?;
    let u_start = tr.u_values[0];
    let u_end = *tr.u_values.last().expect("non-empty trajectory");
    write_file(&c.out, "trajectory.csv", &tr.to_csv())?;
    let out = SimulateOutput {
        problem: &p.name,
        point: &p.base_point,
        a1: &a1,
        a2: &a2,
        t: a.t,
        step: a.t / tr.switch_index as f64,
        u_start,
        u_end,
        predicted_change: predicted,
        taylor: &study,
    };
    let json = to_json(&out);
    write_file(&c.out, "taylor.json", &json)?;
    if c.json {
        print!("{json}");
    } else {
        let mut s = String::new();
        report::header(&mut s, &p);
        kv(&mut s, "point", short_vec(&p.base_point));
        kv(&mut s, "controls", format!("a1 = {}, a2 = {}", report::control(sys, &a1), report::control(sys, &a2)));
        kv(&mut s, "switch time", format!("{}   step {} ({} per leg)", short(a.t), short(out.step), tr.switch_index));
        kv(&mut s, "u(x0)", short(u_start));
        kv(&mut s, "u(x_2t)", short(u_end));
        kv(&mut s, "change", format!("{}   second-order prediction {}", short(u_end - u_start), short(predicted)));
        kv(&mut s, "state residual order", fit_text(&study.state_fit));
        kv(&mut s, "value residual order", fit_text(&study.value_fit));
        print!("{s}");
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MintimeOutput<'a> {
    problem: &'a str,
    classification: Classification,
    plan: &'a SweepPlan,
    estimate: &'a MinTimeEstimate,
}

pub fn mintime(a: &MintimeArgs) -> CmdResult {
    let c = &a.common;
    check_tol(c.tol)?;
    let p = load(c)?;
    let sys = &p.system;
    let deltas = parse_deltas(&a.deltas).map_err(CliError::Message)?;
    let r = classify(&p, &ClassifyOptions { tol: c.tol, ..ClassifyOptions::default() })?;
    let normal: Option<Vec<f64>> = (r.gradient_norm > 0.0).then(|| r.gradient.iter().map(|g| g / r.gradient_norm).collect());
    let dirs = parse_dirs(&a.dirs, sys.state_vars(), normal.as_deref()).map_err(CliError::Message)?;
    let plan = SweepPlan::standard(sys, &p.target.u, p.target.level, &p.base_point, dirs, deltas, a.horizon, a.step)?;
    let est = exponent_sweep(sys, &p.target.u, p.target.level, p.target.distance.as_ref(), &plan)?;
    write_file(&c.out, "sweep.csv", &est.to_csv(sys))?;
    let json = to_json(&MintimeOutput {
        problem: &p.name,
        classification: r.classification,
        plan: &plan,
        estimate: &est,
    });
    write_file(&c.out, "mintime.json", &json)?;
    let too_many_unreached = r.classification == Classification::SecondOrder && est.unreached_fraction > 0.1;
    if c.json {
        print!("{json}");
    } else {
        let mut s = String::new();
        report::header(&mut s, &p);
        kv(&mut s, "base point", short_vec(&p.base_point));
        kv(&mut s, "classification", r.classification.name());
        for (d, dir) in plan.directions.iter().enumerate() {
            kv(&mut s, &format!("direction {d}"), short_vec(dir));
        }
        kv(&mut s, "offsets", format!("{} from {} to {}", plan.deltas.len(), short(plan.deltas[plan.deltas.len() - 1]), short(plan.deltas[0])));
        kv(&mut s, "candidate pairs", plan.candidates.len());
        for q in &est.points {
            let t = q.t_star.map_or("UNREACHED".to_string(), short);
            kv(&mut s, &format!("  dir {} delta {}", q.direction_id, short(q.delta)), format!("T* = {t}"));
        }
        match &est.fit {
            Some(f) => kv(&mut s, "fit T ~ C delta^s", format!("s = {}   C = {}   r2 = {}", short(f.exponent), short(f.constant), short(f.r2))),
            None => kv(&mut s, "fit T ~ C delta^s", "not enough reached points"),
        }
        if let Some(f) = &est.distance_fit {
            kv(&mut s, "fit T ~ C d^s", format!("s = {}   C = {}   r2 = {}", short(f.exponent), short(f.constant), short(f.r2)));
        }
        if let (Some(m), Some(t)) = (est.envelope_max, est.envelope_trend) {
            kv(&mut s, "envelope T/delta^(1/2)", format!("max {}   trend vs log delta {}", short(m), short(t)));
        }
        kv(&mut s, "unreached", format!("{} of {}", est.unreached, est.points.len()));
        print!("{s}");
    }
    if too_many_unreached {
        eprintln!(
            "more than 10% of the sweep ({} of {}) did not reach the target from a SECOND_ORDER point",
            est.unreached,
            est.points.len()
        );
        return Ok(EXIT_UNREACHED);
    }
    if est.fit.is_none() {
        eprintln!("the sweep reached too few points for a fit");
        return Ok(EXIT_UNREACHED);
    }
    Ok(EXIT_OK)
}

pub fn scan(a: &ScanArgs) -> CmdResult {
    let c = &a.common;
    check_tol(c.tol)?;
    let p = load(c)?;
    let sys = &p.system;
    let r = classify(&p, &ClassifyOptions { tol: c.tol, ..ClassifyOptions::default() })?;
    let (a1, a2, margin) = match (&r.witness, r.second_order_margin) {
        (Some(w), Some(m)) if r.classification == Classification::SecondOrder => {
            let (a1, a2) = w.pair();
            (a1, a2, m)
        }
        _ => {
            eprintln!("error: the base point is {}, not SECOND_ORDER; nothing to scan", r.classification.name());
            return Ok(EXIT_INCONCLUSIVE);
        }
    };
    let opts = ScanOptions {
        radius: a.radius,
        grid: a.grid,
        rho: a.rho.unwrap_or(0.5 * margin),
        tol: c.tol,
    };
    let rep = neighborhood_scan(sys, &p.target.u, &p.base_point, (&a1, &a2), &opts)?;
    let mut csv = String::from("index");
    for i in 1..=sys.n() {
        csv.push_str(&format!(",x{i}"));
    }
    csv.push_str(",best_margin,witness_margin,petrov_margin,pass\n");
    for (k, q) in rep.points.iter().enumerate() {
        csv.push_str(&k.to_string());
        for v in q.x.iter().chain([&q.best_margin, &q.witness_margin, &q.petrov_margin]) {
            csv.push(',');
            csv.push_str(&full(*v));
        }
        csv.push_str(if q.pass { ",true\n" } else { ",false\n" });
    }
    write_file(&c.out, "scan.csv", &csv)?;
    if c.json {
        print!("{}", to_json(&rep));
    } else {
        let mut s = String::new();
        report::header(&mut s, &p);
        kv(&mut s, "centre", short_vec(&p.base_point));
        kv(&mut s, "witness", format!("a1 = {}, a2 = {}", report::control(sys, &a1), report::control(sys, &a2)));
        kv(&mut s, "box", format!("half-width {}, {} points per axis, {} points", short(opts.radius), opts.grid, rep.points.len()));
        kv(&mut s, "rho", short(opts.rho));
        kv(&mut s, "min best margin", short(rep.min_best_margin));
        kv(&mut s, "min witness margin", format!("{}   {}", short(rep.min_witness_margin), if rep.witness_holds_everywhere { "witness holds everywhere" } else { "witness alone does not hold everywhere" }));
        kv(&mut s, "outward points", rep.outward_points);
        kv(&mut s, "result", if rep.passed { "PASS" } else { "FAIL" });
        for &k in rep.violating.iter().take(20) {
            let q = &rep.points[k];
            kv(&mut s, &format!("  violating {k}"), format!("{}   best margin {}", short_vec(&q.x), short(q.best_margin)));
        }
        if rep.violating.len() > 20 {
            kv(&mut s, "", format!("... {} more", rep.violating.len() - 20));
        }
        print!("{s}");
    }
    Ok(if rep.passed { EXIT_OK } else { EXIT_SCAN_FAILED })
}

pub fn examples(a: &ExamplesArgs) -> CmdResult {
    let entries = registry_entries();
    if a.json {
        print!("{}", to_json(&entries));
    } else {
        println!("{:<6}{:<11}{:>3}{:>3}  {:<16}{:<14}summary", "name", "kind", "n", "m", "base point", "expected");
        for e in &entries {
            println!(
                "{:<6}{:<11}{:>3}{:>3}  {:<16}{:<14}{}",
                e.name,
                e.kind.name(),
                e.n,
                e.m,
                short_vec(&e.base_point),
                e.expected,
                e.summary
            );
        }
    }
    Ok(EXIT_OK)
}
