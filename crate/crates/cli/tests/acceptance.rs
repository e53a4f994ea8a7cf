//! Acceptance suite. Prints one PASS/FAIL line per criterion, in order, from a
//! single process without the test harness so the lines are never captured
//! and the runtime budgets are measured without interference.
//!
//! Criteria 5 and 7 contain clauses that do not hold mathematically (see the
//! README); their lines print FAIL and do not abort the run, while the clauses
//! that do hold are asserted.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stla_core::classify::{classify_point, AffineCase, AnalysisReport, Classification, ClassifyOptions};
use stla_core::fixtures::{random_affine, random_symmetric};
use stla_core::hamilton::{affine_data, k_matrix, k_quadratic, s_matrix, second_hamiltonian, LocalJets, SMatrices};
use stla_core::mintime::{exponent_sweep, log_space, SweepPlan};
use stla_core::spectral::{eig_symmetric, is_psd, k_eigen_witness};
use stla_core::system::{load_registry, registry_names, Control, Problem, SystemKind};
use stla_core::trajsim::{default_taylor_times, taylor_study};

const KNOWN_UNATTAINABLE: &[usize] = &[5, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, budget: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = o.pass && in_time;
    let budget = budget.map(|b| format!(" / {:.0?}", b)).unwrap_or_default();
    println!(
        "{} criterion {n}: {} [{:.2?}{budget}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed
    );
    pass
}

fn at(name: &str, x: &[f64]) -> Problem {
    load_registry(name).unwrap().at_point(x).unwrap()
}

fn classify(p: &Problem) -> AnalysisReport {
    classify_point(&p.system, &p.target.u, p.target.level, &p.base_point, &ClassifyOptions::default()).unwrap()
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    a.shape() == b.shape() && (a - b).amax() <= tol
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();

    let p = load_registry("ex1").unwrap();
    let k = k_matrix(&s_matrix(&p.system, &p.target.u, &p.base_point).unwrap());
    let e = eig_symmetric(&k).unwrap();
    let v = e.vector(0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    if !close(&k, &DMatrix::from_element(2, 2, -1.0), 1e-14)
        || (e.min() + 2.0).abs() > 1e-12
        || (v[0].abs() - r).abs() > 1e-12
        || (v[1] - v[0]).abs() > 1e-12
    {
        failures.push("ex1 K");
    }

    let p = load_registry("ex4").unwrap();
    let k = k_matrix(&s_matrix(&p.system, &p.target.u, &p.base_point).unwrap());
    let printed = DMatrix::from_row_slice(4, 4, &[1., 0., 1., -1., 0., 1., 1., 1., 1., 1., 1., 0., -1., 1., 0., 1.]);
    let e = eig_symmetric(&k).unwrap();
    let lmin = 1.0 - 2f64.sqrt();
    let mult = e.eigenvalues.iter().filter(|l| (*l - lmin).abs() <= 1e-10).count();
    if !close(&k, &printed, 1e-14) || (e.min() - lmin).abs() > 1e-10 || mult != 2 {
        failures.push("ex4 K");
    }

    let p = load_registry("ex5").unwrap();
    for y in [-0.8, 0.0, 0.35, 1.7] {
        let s = s_matrix(&p.system, &p.target.u, &[0.0, y, 0.0]).unwrap();
        if !close(&s.s, &DMatrix::from_row_slice(2, 2, &[1.0, y, 0.0, 1.0]), 1e-12) {
            failures.push("ex5 S");
        }
    }

    let p = load_registry("ex2").unwrap();
    let s = s_matrix(&p.system, &p.target.u, &p.base_point).unwrap();
    if !close(&s.s, &DMatrix::from_element(1, 1, -1.0), 1e-14) {
        failures.push("ex2 S");
    }

    let p = load_registry("ex3").unwrap();
    for x in [-1.5, 0.5, 1.0, 2.0] {
        let ad = affine_data(&p.system, &p.target.u, &[x, 0.0]).unwrap();
        if ad.alpha.abs() > 1e-14 || (ad.beta[0] - ad.gamma[0] - x).abs() > 1e-14 {
            failures.push("ex3 alpha/beta/gamma");
        }
    }

    let p = load_registry("ex6").unwrap();
    for (x, y) in [(1.0, 0.0), (0.6, -0.9), (-0.3, 0.4)] {
        let ad = affine_data(&p.system, &p.target.u, &[x, y, 0.0]).unwrap();
        let pattern = DMatrix::from_row_slice(2, 2, &[0.0, x * x + y * y, 0.0, 0.0]);
        if !close(&ad.s, &pattern, 1e-14) {
            failures.push("ex6 S");
        }
    }

    failures.dedup();
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "ex1 K and eigenpair, ex4 K with lambda_min = 1 - sqrt2 (x2), ex5/ex2 S, ex3 alpha and beta - gamma, ex6 S pattern".into()
        } else {
            format!("mismatch in {}", failures.join(", "))
        },
    }
}

fn pair_vectors(p: &Problem, r: &AnalysisReport) -> Option<(Vec<f64>, Vec<f64>)> {
    let (a1, a2) = r.witness.as_ref()?.pair();
    Some((p.system.control_vector(&a1), p.system.control_vector(&a2)))
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |label: &str, p: Problem, expected: Option<(Vec<f64>, Vec<f64>)>| {
        let r = classify(&p);
        let ok = r.classification == Classification::SecondOrder
            && r.second_order_margin.is_some_and(|m| m > 0.0)
            && expected.is_none_or(|e| pair_vectors(&p, &r) == Some(e));
        if !ok {
            failures.push(format!("{label} -> {}", r.classification.name()));
        }
    };
    check("ex1", load_registry("ex1").unwrap(), Some((vec![1.0], vec![1.0])));
    check("ex2 (1,0)", at("ex2", &[1.0, 0.0]), None);
    check("ex3 (1,0)", at("ex3", &[1.0, 0.0]), Some((vec![-1.0], vec![1.0])));
    for name in ["ex4", "ex5", "ex6"] {
        check(name, load_registry(name).unwrap(), None);
    }
    let r = classify(&at("ex3", &[1.0, 0.0]));
    if r.case_tag != Some(AffineCase::BracketDrift) {
        failures.push("ex3 (1,0) case".into());
    }
    for theta in [-0.01f64, -0.05, -0.1, -0.3] {
        let p = at("ex3", &[2.0 * theta.cos(), 2.0 * theta.sin()]);
        let r = classify(&p);
        if r.classification != Classification::FirstOrderPetrov {
            failures.push(format!("ex3 angle {theta} -> {}", r.classification.name()));
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "ex1-ex6 SECOND_ORDER, ex1 witness (1),(1), ex3 witness (-1),(1), ex3 y < 0 near (2,0) FIRST_ORDER_PETROV".into()
        } else {
            failures.join("; ")
        },
    }
}

fn generic_pair(kind: SystemKind, m: usize) -> (Control, Control) {
    match kind {
        SystemKind::General => (Control::Listed(0), Control::Listed(1)),
        _ => {
            let a1: Vec<f64> = (0..m).map(|i| 0.7 / (m as f64).sqrt() * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let a2: Vec<f64> = (0..m).map(|i| (0.4 + 0.1 * i as f64) / (m as f64).sqrt()).collect();
            (Control::Ball(a1), Control::Ball(a2))
        }
    }
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for name in registry_names() {
        let p = load_registry(name).unwrap();
        let r = classify(&p);
        let Some(w) = &r.witness else {
            failures.push(format!("{name}: no witness"));
            continue;
        };
        for (label, (a1, a2)) in [("witness", w.pair()), ("generic", generic_pair(p.system.kind(), p.system.m()))] {
            let s = taylor_study(&p.system, &p.target.u, &p.base_point, &a1, &a2, &default_taylor_times(), 1000).unwrap();
            for (what, fit) in [("state", &s.state_fit), ("value", &s.value_fit)] {
                if let Some(sl) = fit.slope() {
                    worst = worst.min(sl);
                }
                if !fit.meets(2.9, 0.99) {
                    failures.push(format!("{name} {label} {what}"));
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("all registry residual fits have slope >= 2.9 and r2 >= 0.99 (min fitted slope {worst:.3}; exact expansions below the floor count as passes)")
        } else {
            format!("slope or r2 too low: {}", failures.join(", "))
        },
    }
}

fn basis(m: usize, j: usize) -> Control {
    let mut a = vec![0.0; m];
    a[j] = 1.0;
    Control::Ball(a)
}

fn criterion_4() -> Outcome {
    let mut err = BTreeMap::<&str, f64>::new();
    let mut bump = |k: &'static str, e: f64| {
        let v = err.entry(k).or_insert(0.0);
        *v = v.max(e);
    };
    for seed in 0..100 {
        let fx = random_symmetric(seed);
        let sys = &fx.system;
        let m = sys.m();
        let s = s_matrix(sys, &fx.u, &fx.point).unwrap();
        let g = fx.u.eval_jet2(&fx.point).unwrap();
        let (c1, c2) = (Control::Ball(fx.a1.clone()), Control::Ball(fx.a2.clone()));
        let (a1, a2) = (DVector::from_column_slice(&fx.a1), DVector::from_column_slice(&fx.a2));

        let h12 = second_hamiltonian(sys, &fx.u, &fx.point, &c1, &c2).unwrap();
        let h21 = second_hamiltonian(sys, &fx.u, &fx.point, &c2, &c1).unwrap();
        bump("(i) H_fg = S a1.a2", (h12 - (&s.s * &a1).dot(&a2)).abs());
        for i in 0..m {
            for j in 0..m {
                let (ci, cj) = (basis(m, i), basis(m, j));
                let hji = second_hamiltonian(sys, &fx.u, &fx.point, &cj, &ci).unwrap();
                bump("(i) S_ij = H_{sj,si}", (s.s[(i, j)] - hji).abs());
                let br = sys.lie_bracket(&fx.point, &cj, &ci).unwrap().dot(&g.gradient);
                bump("(ii) Se_ij = [sj,si].grad/2", (s.s_skew[(i, j)] - 0.5 * br).abs());
                let si = sys.field_value(&fx.point, &ci).unwrap();
                let sj = sys.field_value(&fx.point, &cj).unwrap();
                let di = sys.field_jacobian(&fx.point, &ci).unwrap();
                let dj = sys.field_jacobian(&fx.point, &cj).unwrap();
                let star = (&g.hessian * &sj).dot(&si) + 0.5 * (&dj * &si + &di * &sj).dot(&g.gradient);
                bump("(iii) S* formula", (s.s_sym[(i, j)] - star).abs());
            }
        }
        let br = sys.lie_bracket(&fx.point, &c1, &c2).unwrap().dot(&g.gradient);
        bump("(ii) [f,g].grad = 2 Se a1.a2", (br - 2.0 * (&s.s_skew * &a1).dot(&a2)).abs());
        bump("H_fg - H_gf = [f,g].grad", (h12 - h21 - br).abs());

        let k = k_matrix(&s);
        let v = DVector::from_iterator(2 * m, fx.a1.iter().chain(&fx.a2).copied());
        let kv = (&k * &v).dot(&v);
        let by_s = (&s.s * &a1).dot(&a1) + (&s.s * &a2).dot(&a2) + 2.0 * (&s.s * &a1).dot(&a2);
        let sum = &a1 + &a2;
        let by_parts = (&s.s_sym * &sum).dot(&sum) + 2.0 * (&s.s_skew * &a1).dot(&a2);
        bump("K form = S sums", (kv - by_s).abs());
        bump("K form = S* + Se split", (kv - by_parts).abs());
        bump("K form = k_quadratic", (kv - k_quadratic(&s.s, &fx.a1, &fx.a2)).abs());
    }
    for seed in 0..100 {
        let fx = random_affine(seed);
        let ad = affine_data(&fx.system, &fx.u, &fx.point).unwrap();
        let lj = LocalJets::new(&fx.system, &fx.u, &fx.point).unwrap();
        for j in 0..fx.system.m() {
            let br = lj.bracket(&[(0, 1.0)], &[(j + 1, 1.0)]).dot(lj.gradient());
            bump("gamma - beta = [s0,sj].grad", (ad.gamma[j] - ad.beta[j] - br).abs());
        }
    }
    let max = err.values().copied().fold(0.0, f64::max);
    let over: Vec<String> = err.iter().filter(|(_, e)| **e > 1e-8).map(|(k, e)| format!("{k} {e:.2e}")).collect();
    Outcome {
        pass: over.is_empty(),
        detail: if over.is_empty() {
            format!("{} identities on 100 symmetric + 100 affine fixtures, max abs error {max:.2e} <= 1e-8", err.len())
        } else {
            format!("errors above 1e-8: {}", over.join(", "))
        },
    }
}

fn random_s(rng: &mut ChaCha8Rng, idx: usize) -> DMatrix<f64> {
    let m = rng.random_range(1..=5);
    let mut g = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
    match idx % 4 {
        // symmetric PSD, possibly rank deficient
        0 => {
            let rank = 1 + idx / 4 % m;
            let b = g(rank, m);
            b.transpose() * b
        }
        // symmetric indefinite
        1 => {
            let a = g(m, m);
            (&a + a.transpose()) * 0.5
        }
        // PSD plus a skew perturbation
        2 => {
            let b = g(m, m);
            let w = g(m, m);
            let eps = 10f64.powf(-3.0 * (idx / 4 % 4) as f64 / 3.0);
            b.transpose() * b + (&w - w.transpose()) * eps
        }
        _ => g(m, m),
    }
}

struct SpectralStats {
    draws: usize,
    missing_zero: usize,
    missing_zero_even_m: usize,
    negative: usize,
    minimizer_err: f64,
    sampled_below: usize,
    mismatches: usize,
}

fn spectral_stats() -> SpectralStats {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_5005);
    let mut st = SpectralStats {
        draws: 200,
        missing_zero: 0,
        missing_zero_even_m: 0,
        negative: 0,
        minimizer_err: 0.0,
        sampled_below: 0,
        mismatches: 0,
    };
    for idx in 0..st.draws {
        let s = random_s(&mut rng, idx);
        let m = s.nrows();
        let sm = SMatrices::from_s(s.clone(), vec![]);
        let k = k_matrix(&sm);
        let e = eig_symmetric(&k).unwrap();
        let knorm = k.norm();
        if !e.eigenvalues.iter().any(|l| l.abs() <= 1e-10 * knorm) {
            st.missing_zero += 1;
            if m.is_multiple_of(2) {
                st.missing_zero_even_m += 1;
            }
        }

        let lmin = e.min();
        if lmin < -1e-10 * knorm {
            st.negative += 1;
            let v = e.vector(0);
            let (h1, h2) = (v.rows(0, m).norm(), v.rows(m, m).norm());
            let w = k_eigen_witness(&k, &e);
            let n1 = w.a1.iter().map(|c| c * c).sum::<f64>().sqrt();
            let n2 = w.a2.iter().map(|c| c * c).sum::<f64>().sqrt();
            let h = k_quadratic(&s, &w.a1, &w.a2);
            for err in [(h1 - h2).abs(), (n1 - 1.0).abs(), (n2 - 1.0).abs(), (h - 2.0 * lmin).abs()] {
                st.minimizer_err = st.minimizer_err.max(err);
            }
            // the form on the product of unit balls never goes below 2 lambda_min
            for _ in 0..200 {
                let unit = |r: &mut ChaCha8Rng| {
                    let a: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
                    let n = a.iter().map(|c| c * c).sum::<f64>().sqrt().max(1.0);
                    a.into_iter().map(|c| c / n).collect::<Vec<f64>>()
                };
                let (a1, a2) = (unit(&mut rng), unit(&mut rng));
                if k_quadratic(&s, &a1, &a2) < 2.0 * lmin - 1e-8 {
                    st.sampled_below += 1;
                }
            }
        }

        let (k_psd, _) = is_psd(&k, Some(1e-9)).unwrap();
        let symmetric = (&s - s.transpose()).amax() <= 1e-9;
        let (s_psd, _) = is_psd(&sm.s_sym, Some(1e-9)).unwrap();
        if k_psd != (symmetric && s_psd) {
            st.mismatches += 1;
        }
    }
    st
}

fn criterion_5(st: &SpectralStats) -> Outcome {
    Outcome {
        pass: st.missing_zero == 0 && st.minimizer_err <= 1e-8 && st.sampled_below == 0 && st.mismatches == 0,
        detail: format!(
            "zero eigenvalue absent in {}/{} K ({} with even m); {} negative minima, minimizer error {:.2e}, {} sampled pairs below 2 lambda_min; PSD equivalence mismatches {}/{}",
            st.missing_zero, st.draws, st.missing_zero_even_m, st.negative, st.minimizer_err, st.sampled_below, st.mismatches, st.draws
        ),
    }
}

fn sweep(name: &str, base: Option<&[f64]>, dirs: Vec<Vec<f64>>, deltas: Vec<f64>, horizon: f64, step: f64) -> stla_core::mintime::MinTimeEstimate {
    let mut p = load_registry(name).unwrap();
    if let Some(x) = base {
        p = p.at_point(x).unwrap();
    }
    let t = &p.target;
    let plan = SweepPlan::standard(&p.system, &t.u, t.level, &p.base_point, dirs, deltas, horizon, step).unwrap();
    exponent_sweep(&p.system, &t.u, t.level, t.distance.as_ref(), &plan).unwrap()
}

fn criterion_6() -> Outcome {
    let deltas = log_space(1e-4, 1e-1, 8).unwrap();
    let est = sweep("ex4", None, vec![vec![0.0, 0.0, 1.0]], deltas.clone(), 2.0, 1e-3);
    let fit = est.fit;
    let trend = est.envelope_trend;
    let heis_ok = fit.as_ref().is_some_and(|f| (0.4..=0.6).contains(&f.exponent) && f.r2 >= 0.95)
        && trend.is_some_and(|t| t <= 0.05)
        && est.unreached_fraction <= 0.1;
    let pet = sweep("ex2", Some(&[0.0, -1.0]), vec![vec![0.0, 1.0]], deltas, 2.0, 1e-3);
    let pet_ok = pet.fit.as_ref().is_some_and(|f| (0.9..=1.1).contains(&f.exponent));
    let show = |f: &Option<stla_core::mintime::PowerFit>| {
        f.as_ref().map(|f| format!("s = {:.4} (r2 {:.5})", f.exponent, f.r2)).unwrap_or_else(|| "no fit".into())
    };
    Outcome {
        pass: heis_ok && pet_ok,
        detail: format!(
            "ex4 along +e3: {}, envelope max {:.4}, trend {:.4}, unreached {}; Petrov ex2 at (0,-1): {}",
            show(&fit),
            est.envelope_max.unwrap_or(f64::NAN),
            trend.unwrap_or(f64::NAN),
            est.unreached,
            show(&pet.fit)
        ),
    }
}

struct NonStla {
    above: Vec<(f64, Option<f64>)>,
    below: Vec<(f64, Option<f64>)>,
}

fn non_stla() -> NonStla {
    let est = sweep("ex3", None, vec![vec![0.0, 1.0], vec![0.0, -1.0]], vec![1e-2, 1e-3], 0.5, 1e-4);
    let pick = |d: usize| est.points.iter().filter(|p| p.direction_id == d).map(|p| (p.delta, p.t_star)).collect();
    NonStla { above: pick(0), below: pick(1) }
}

fn criterion_7(r: &NonStla) -> Outcome {
    let unreached = r.above.iter().all(|(_, t)| t.is_none());
    let below_ok = r.below.iter().all(|(d, t)| t.is_some_and(|t| t <= 10.0 * d));
    let show = |v: &[(f64, Option<f64>)]| {
        v.iter()
            .map(|(d, t)| format!("delta {d:e}: {}", t.map(|t| format!("T = {t:.3e} ({:.2} delta)", t / d)).unwrap_or("UNREACHED".into())))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Outcome {
        pass: unreached && below_ok,
        detail: format!("from (2, +delta): {}; from (2, -delta): {}", show(&r.above), show(&r.below)),
    }
}

fn run_cli(args: &[&str], out: &Path, threads: Option<&str>) -> (Option<i32>, Vec<u8>, BTreeMap<String, Vec<u8>>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stla"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(t) = threads {
        cmd.env("STLA_THREADS", t);
    }
    let o = cmd.output().unwrap();
    let mut files = BTreeMap::new();
    if let Ok(rd) = std::fs::read_dir(out) {
        for e in rd.flatten() {
            files.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
        }
    }
    (o.status.code(), o.stdout, files)
}

fn criterion_8() -> Outcome {
    let commands: &[&[&str]] = &[
        &["analyze"],
        &["analyze", "--json"],
        &["simulate"],
        &["mintime", "--deltas", "1e-3:1e-1:4"],
        &["scan", "--grid", "3"],
    ];
    let jobs: Vec<(String, Vec<&str>)> = registry_names()
        .iter()
        .flat_map(|ex| {
            commands.iter().map(move |c| {
                let mut args = vec![c[0], "--example", ex];
                args.extend_from_slice(&c[1..]);
                (format!("{} {ex}", c.join(" ")), args)
            })
        })
        .collect();
    let root = tempfile::tempdir().unwrap();
    let results: Vec<(String, bool, usize)> = std::thread::scope(|sc| {
        let handles: Vec<_> = jobs
            .iter()
            .enumerate()
            .map(|(i, (label, args))| {
                let root = root.path();
                sc.spawn(move || {
                    let a = run_cli(args, &root.join(format!("{i}a")), None);
                    let b = run_cli(args, &root.join(format!("{i}b")), Some("1"));
                    (label.clone(), a == b, a.2.len())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let examples_a = Command::new(env!("CARGO_BIN_EXE_stla")).args(["examples", "--json"]).output().unwrap();
    let examples_b = Command::new(env!("CARGO_BIN_EXE_stla")).args(["examples", "--json"]).output().unwrap();
    let differing: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect();
    let files: usize = results.iter().map(|r| r.2).sum();
    let pass = differing.is_empty() && examples_a.stdout == examples_b.stdout;
    Outcome {
        pass,
        detail: if pass {
            format!(
                "{} runs of analyze/simulate/mintime/scan on ex1-ex6 plus examples reproduce stdout, exit codes and {files} output files byte for byte (second run single-threaded)",
                results.len()
            )
        } else {
            format!("outputs differ: {}", differing.join(", "))
        },
    }
}

fn main() {
    let mut passed = BTreeMap::new();
    passed.insert(1, report(1, Some(Duration::from_secs(1)), criterion_1));
    passed.insert(2, report(2, Some(Duration::from_secs(1)), criterion_2));
    passed.insert(3, report(3, Some(Duration::from_secs(30)), criterion_3));
    passed.insert(4, report(4, Some(Duration::from_secs(10)), criterion_4));
    let mut stats = None;
    passed.insert(
        5,
        report(5, Some(Duration::from_secs(10)), || {
            let st = spectral_stats();
            let o = criterion_5(&st);
            stats = Some(st);
            o
        }),
    );
    passed.insert(6, report(6, Some(Duration::from_secs(120)), criterion_6));
    let mut nonstla = None;
    passed.insert(
        7,
        report(7, Some(Duration::from_secs(30)), || {
            let r = non_stla();
            let o = criterion_7(&r);
            nonstla = Some(r);
            o
        }),
    );
    passed.insert(8, report(8, None, criterion_8));

    let failed: Vec<usize> = passed.iter().filter(|(_, p)| !**p).map(|(n, _)| *n).collect();
    let unexpected: Vec<&usize> = failed.iter().filter(|n| !KNOWN_UNATTAINABLE.contains(n)).collect();
    println!("acceptance: {}/{} criteria pass; known unattainable: {KNOWN_UNATTAINABLE:?}", 8 - failed.len(), 8);
    if !unexpected.is_empty() {
        eprintln!("criteria failed: {unexpected:?}");
        std::process::exit(1);
    }

    // the clauses of 5 and 7 that do hold
    let st = stats.unwrap();
    assert_eq!(st.mismatches, 0);
    assert!(st.minimizer_err <= 1e-8 && st.sampled_below == 0);
    assert_eq!(st.missing_zero, st.missing_zero_even_m, "odd m always has a zero eigenvalue");
    let r = nonstla.unwrap();
    assert!(r.below.iter().all(|(d, t)| t.is_some_and(|t| t <= 10.0 * d)));
}
