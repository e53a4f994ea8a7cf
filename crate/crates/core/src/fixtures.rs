//! Seeded random systems, targets and points for identity checks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Expr;
use crate::system::SystemSpec;

#[derive(Debug, Clone)]
pub struct RandomFixture {
    pub system: SystemSpec,
    pub u: Expr,
    pub point: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

fn coef(rng: &mut ChaCha8Rng) -> String {
    format!("({:.6})", rng.random_range(-1.5..1.5))
}

fn term(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let v = |rng: &mut ChaCha8Rng| vars[rng.random_range(0..vars.len())].clone();
    let c = coef(rng);
    match rng.random_range(0..7) {
        0 => c,
        1 => format!("{c}*{}", v(rng)),
        2 => format!("{c}*{}*{}", v(rng), v(rng)),
        3 => format!("{c}*sin({})", v(rng)),
        4 => format!("{c}*cos({})*{}", v(rng), v(rng)),
        5 => format!("{c}*exp(0.3*{})", v(rng)),
        _ => format!("{c}*{}^2", v(rng)),
    }
}

fn smooth(rng: &mut ChaCha8Rng, vars: &Arc<[String]>, terms: usize) -> Expr {
    let text: Vec<String> = (0..terms).map(|_| term(rng, vars)).collect();
    Expr::parse(&text.join(" + "), vars).expect("generated expression parses")
}

fn unit_ball(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

fn parts(seed: u64) -> (ChaCha8Rng, Arc<[String]>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=4);
    let m = rng.random_range(1..=3);
    let vars: Arc<[String]> = (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().into();
    (rng, vars, m)
}

fn finish(mut rng: ChaCha8Rng, vars: &Arc<[String]>, system: SystemSpec) -> RandomFixture {
    let m = system.m();
    let u = smooth(&mut rng, vars, 5);
    let point = (0..vars.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a1 = unit_ball(&mut rng, m);
    let a2 = unit_ball(&mut rng, m);
    RandomFixture { system, u, point, a1, a2 }
}

/// A symmetric system with `n in 2..=4`, `m in 1..=3` and smooth random columns.
pub fn random_symmetric(seed: u64) -> RandomFixture {
    let (mut rng, vars, m) = parts(seed);
    let n = vars.len();
    let sigma = (0..m).map(|_| (0..n).map(|_| smooth(&mut rng, &vars, 3)).collect()).collect();
    let system = SystemSpec::symmetric(vars.clone(), sigma).expect("valid random system");
    finish(rng, &vars, system)
}

/// An affine system with a random drift and random columns.
pub fn random_affine(seed: u64) -> RandomFixture {
    let (mut rng, vars, m) = parts(seed);
    let n = vars.len();
    let drift = (0..n).map(|_| smooth(&mut rng, &vars, 3)).collect();
    let sigma = (0..m).map(|_| (0..n).map(|_| smooth(&mut rng, &vars, 3)).collect()).collect();
    let system = SystemSpec::affine(vars.clone(), drift, sigma).expect("valid random system");
    finish(rng, &vars, system)
}
