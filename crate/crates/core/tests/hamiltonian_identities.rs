use nalgebra::{DMatrix, DVector};
use stla_core::fixtures::{random_affine, random_symmetric, RandomFixture};
use stla_core::hamilton::{affine_data, k_matrix, k_quadratic, s_matrix, second_hamiltonian};
use stla_core::system::Control;

const FD_STEP: f64 = 1e-5;

/// `x -> grad u(x)^T sigma(x)` differentiated by central differences, times sigma:
/// the defining formula `S = D(grad u sigma) sigma`.
fn s_by_definition(fx: &RandomFixture) -> DMatrix<f64> {
    let sys = &fx.system;
    let (n, m) = (sys.n(), sys.m());
    let row = |x: &[f64]| -> DVector<f64> {
        let g = fx.u.eval_jet2(x).unwrap().gradient;
        DVector::from_iterator(
            m,
            (0..m).map(|j| {
                let mut a = vec![0.0; m];
                a[j] = 1.0;
                g.dot(&sys.field_value(x, &Control::Ball(a)).unwrap())
            }),
        )
    };
    let mut d = DMatrix::zeros(m, n);
    for k in 0..n {
        let mut xp = fx.point.clone();
        let mut xm = fx.point.clone();
        xp[k] += FD_STEP;
        xm[k] -= FD_STEP;
        let col = (row(&xp) - row(&xm)) / (2.0 * FD_STEP);
        d.set_column(k, &col);
    }
    let sigma = DMatrix::from_fn(n, m, |i, j| {
        let mut a = vec![0.0; m];
        a[j] = 1.0;
        sys.field_value(&fx.point, &Control::Ball(a)).unwrap()[i]
    });
    d * sigma
}

fn basis(m: usize, j: usize) -> Control {
    let mut a = vec![0.0; m];
    a[j] = 1.0;
    Control::Ball(a)
}

#[test]
fn s_matches_definition_and_bilinear_form() {
    for seed in 0..100 {
        let fx = random_symmetric(seed);
        let s = s_matrix(&fx.system, &fx.u, &fx.point).unwrap();
        let fd = s_by_definition(&fx);
        let scale = 1.0 + fd.amax();
        assert!((&s.s - &fd).amax() <= 1e-7 * scale, "seed {seed}: {}", (&s.s - &fd).amax());
        let (c1, c2) = (Control::Ball(fx.a1.clone()), Control::Ball(fx.a2.clone()));
        let h = second_hamiltonian(&fx.system, &fx.u, &fx.point, &c1, &c2).unwrap();
        let form = (&s.s * DVector::from_column_slice(&fx.a1)).dot(&DVector::from_column_slice(&fx.a2));
        assert!((h - form).abs() <= 1e-10 * (1.0 + h.abs()), "seed {seed}");
    }
}

#[test]
fn skew_part_is_half_bracket_and_symmetric_part_formula() {
    for seed in 100..200 {
        let fx = random_symmetric(seed);
        let sys = &fx.system;
        let m = sys.m();
        let s = s_matrix(sys, &fx.u, &fx.point).unwrap();
        let jet = fx.u.eval_jet2(&fx.point).unwrap();
        for i in 0..m {
            for j in 0..m {
                let (ci, cj) = (basis(m, i), basis(m, j));
                let br = sys.lie_bracket(&fx.point, &cj, &ci).unwrap().dot(&jet.gradient);
                assert!((s.s_skew[(i, j)] - 0.5 * br).abs() <= 1e-10, "seed {seed}");
                let si = sys.field_value(&fx.point, &ci).unwrap();
                let sj = sys.field_value(&fx.point, &cj).unwrap();
                let di = sys.field_jacobian(&fx.point, &ci).unwrap();
                let dj = sys.field_jacobian(&fx.point, &cj).unwrap();
                let star = (&jet.hessian * &sj).dot(&si) + 0.5 * (&dj * &si + &di * &sj).dot(&jet.gradient);
                assert!((s.s_sym[(i, j)] - star).abs() <= 1e-10, "seed {seed}");
            }
        }
        let (c1, c2) = (Control::Ball(fx.a1.clone()), Control::Ball(fx.a2.clone()));
        let br = sys.lie_bracket(&fx.point, &c1, &c2).unwrap().dot(&jet.gradient);
        let (a1, a2) = (DVector::from_column_slice(&fx.a1), DVector::from_column_slice(&fx.a2));
        assert!((br - 2.0 * (&s.s_skew * &a1).dot(&a2)).abs() <= 1e-10);
        let sum = &a1 + &a2;
        let quad = (&s.s_sym * &sum).dot(&sum) + 2.0 * (&s.s_skew * &a1).dot(&a2);
        assert!((k_quadratic(&s.s, &fx.a1, &fx.a2) - quad).abs() <= 1e-12 * (1.0 + quad.abs()));
        let k = k_matrix(&s);
        let v = DVector::from_iterator(2 * m, fx.a1.iter().chain(&fx.a2).copied());
        assert!(((&k * &v).dot(&v) - quad).abs() <= 1e-12 * (1.0 + quad.abs()));
        let hf = second_hamiltonian(sys, &fx.u, &fx.point, &c1, &c2).unwrap();
        let hg = second_hamiltonian(sys, &fx.u, &fx.point, &c2, &c1).unwrap();
        assert!((hf - hg - br).abs() <= 1e-10 * (1.0 + br.abs()));
    }
}

#[test]
fn affine_gamma_minus_beta_is_drift_bracket() {
    for seed in 0..100 {
        let fx = random_affine(seed);
        let sys = &fx.system;
        let ad = affine_data(sys, &fx.u, &fx.point).unwrap();
        let lj = stla_core::hamilton::LocalJets::new(sys, &fx.u, &fx.point).unwrap();
        for j in 0..sys.m() {
            let br = lj.bracket(&[(0, 1.0)], &[(j + 1, 1.0)]).dot(lj.gradient());
            assert!((ad.gamma[j] - ad.beta[j] - br).abs() <= 1e-10 * (1.0 + br.abs()), "seed {seed}");
        }
        assert!(ad.bracket_residual <= 1e-9);
    }
}
