//! Deterministic point sets on the unit sphere and ball of R^m.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = GOLDEN_ANGLE * k as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn random_sphere(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.into_iter().map(|c| c / n).collect()
        })
        .collect()
}

/// About `count` unit vectors in R^m (exactly `{1, -1}` when m = 1).
pub fn sphere_dirs(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match m {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => fibonacci_sphere(count),
        _ => random_sphere(m, count, seed),
    }
}

/// About `count` points of the closed unit ball of R^m, always including the origin.
pub fn ball_points(m: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(2);
    let mut pts = match m {
        0 => vec![],
        1 => (0..count)
            .map(|k| vec![-1.0 + 2.0 * k as f64 / (count - 1) as f64])
            .collect(),
        2 => (0..count)
            .map(|k| {
                let r = ((k as f64 + 0.5) / count as f64).sqrt();
                let phi = GOLDEN_ANGLE * k as f64;
                vec![r * phi.cos(), r * phi.sin()]
            })
            .collect(),
        3 => {
            let dirs = fibonacci_sphere((count / 4).max(1));
            let mut out = Vec::with_capacity(count);
            for r in [0.25, 0.5, 0.75, 1.0] {
                out.extend(dirs.iter().map(|d| d.iter().map(|c| c * r).collect::<Vec<_>>()));
            }
            out
        }
        _ => {
            let axis = |per: usize| -> Vec<f64> { (0..per).map(|k| -1.0 + 2.0 * k as f64 / (per - 1) as f64).collect() };
            let mut per = 3;
            let mut out = tensor_ball(m, &axis(per));
            while out.len() < count / 2 && ((per + 2) as f64).powi(m as i32) <= 2e5 {
                per += 2;
                out = tensor_ball(m, &axis(per));
            }
            out
        }
    };
    if m > 0 && !pts.iter().any(|p| p.iter().all(|c| *c == 0.0)) {
        pts.push(vec![0.0; m]);
    }
    pts
}

fn tensor_ball(m: usize, axis: &[f64]) -> Vec<Vec<f64>> {
    let per = axis.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; m];
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-12 {
            out.push(p);
        }
        let mut d = 0;
        while d < m {
            idx[d] += 1;
            if idx[d] < per {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == m {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    #[test]
    fn sphere_points_are_unit() {
        for m in 1..=6 {
            let d = sphere_dirs(m, 64, 7);
            assert!(!d.is_empty());
            assert!(d.iter().all(|v| v.len() == m && (norm(v) - 1.0).abs() < 1e-14));
        }
        assert_eq!(sphere_dirs(5, 64, 7), sphere_dirs(5, 64, 7));
    }

    #[test]
    fn ball_points_inside() {
        for m in 1..=5 {
            let b = ball_points(m, 256);
            assert!(b.len() >= 64, "m={m}: {}", b.len());
            assert!(b.iter().all(|v| v.len() == m && norm(v) <= 1.0 + 1e-12));
            assert!(b.iter().any(|v| norm(v) == 0.0));
        }
    }
}
