use proptest::prelude::*;

use weyl_bvp::elliptic::{build_1d, elliptic_triple};
use weyl_bvp::linalg::{self, c, re, Mat, C64};
use weyl_bvp::opfunc::{negative_squares, strict_kernel, MatrixFunction, OperatorFunction, RationalNevanlinna};
use weyl_bvp::realize::{realize, realize_constant, realize_rational, RealizeOptions};
use weyl_bvp::solver::{build_linearization, build_linearization_rational, direct_solve, krein_resolve};
use weyl_bvp::{intersect, KreinSpace, LinearRelation, Subspace, Window};

fn random_rational(seed: u64, g: usize, m: usize, beta1_rank: usize) -> RationalNevanlinna {
    let mut rng = linalg::rng(seed);
    let alpha = (0..m).map(|_| linalg::random_hermitian(&mut rng, g)).collect();
    let beta = (0..m)
        .map(|i| linalg::random_psd(&mut rng, g, if i == 0 { beta1_rank } else { g }))
        .collect();
    RationalNevanlinna::new(alpha, beta).unwrap()
}

fn indefinite_space(seed: u64, n: usize) -> KreinSpace {
    let mut rng = linalg::rng(seed);
    let mut g = linalg::random_hermitian(&mut rng, n);
    // shift the spectrum away from zero while keeping both signs
    let (vals, vecs) = linalg::hermitian_eigen(&g);
    let d = Mat::from_diagonal(&linalg::Vector::from_iterator(
        n,
        vals.iter().enumerate().map(|(k, &v)| re(if k % 2 == 0 { -1.0 - v.abs() } else { 1.0 + v.abs() })),
    ));
    g = &vecs * d * vecs.adjoint();
    KreinSpace::new(linalg::hermitian_part(&g), None).unwrap()
}

fn rel(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjoint_is_an_involution(seed in any::<u64>(), n in 1usize..4, k in 1usize..6) {
        let space = indefinite_space(seed, n);
        let mut rng = linalg::rng(seed ^ 1);
        let k = k.min(2 * n);
        let rel_ = LinearRelation::new(space, &linalg::random_matrix(&mut rng, 2 * n, k)).unwrap();
        let twice = rel_.adjoint().adjoint();
        prop_assert!(twice.distance(&rel_) < 1e-8);
        prop_assert_eq!(rel_.adjoint().dim(), 2 * n - rel_.dim());
    }

    #[test]
    fn intersection_is_symmetric(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = linalg::rng(seed);
        let u = Subspace::column_space(&linalg::random_matrix(&mut rng, n, n - 1), 1e-10);
        let v = Subspace::column_space(&linalg::random_matrix(&mut rng, n, n - 1), 1e-10);
        let a = intersect(&u, &v).unwrap();
        let b = intersect(&v, &u).unwrap();
        prop_assert_eq!(a.dim(), b.dim());
        prop_assert!(a.distance(&b) < 1e-8);
        prop_assert!(a.dim() >= n - 2);
    }

    #[test]
    fn rational_realization_reproduces_tau(seed in any::<u64>(), g in 1usize..4, m in 1usize..4) {
        let tau = random_rational(seed, g, m, g);
        let t = realize_rational(&tau).unwrap();
        prop_assert!(t.green_residual() < 1e-10);
        for l in Window::default().sample(seed, 6) {
            let a = tau.eval(l).unwrap();
            prop_assert!(rel(&t.weyl(l).unwrap(), &a) < 1e-9);
        }
        prop_assert!(t.verify_identities(&Window::default().sample(seed ^ 7, 6)).unwrap().max() < 1e-9);
    }

    #[test]
    fn singular_beta1_realization(seed in any::<u64>(), g in 2usize..4) {
        let tau = OperatorFunction::Rational(random_rational(seed, g, 2, 1));
        let r = realize(&tau, &RealizeOptions { seed, ..Default::default() }).unwrap();
        prop_assert!(r.triple.green_residual() < 1e-10);
        for l in Window::default().sample(seed ^ 3, 6) {
            let a = tau.eval(l).unwrap();
            prop_assert!(rel(&r.triple.weyl(l).unwrap(), &a) < 1e-8);
        }
    }

    #[test]
    fn constant_realization_is_exact(seed in any::<u64>(), g in 1usize..4, im in 0.1f64..5.0) {
        let mut rng = linalg::rng(seed);
        let theta = linalg::random_hermitian(&mut rng, g);
        let t = realize_constant(&theta, c(0.3, im)).unwrap();
        prop_assert_eq!(t.state().signature(), (g, g));
        prop_assert!(t.green_residual() < 1e-10);
        for l in Window::default().sample(seed, 4) {
            prop_assert!(rel(&t.weyl(l).unwrap(), &theta) < 1e-10);
        }
    }

    #[test]
    fn nevanlinna_functions_have_no_negative_squares(seed in any::<u64>(), g in 1usize..3, m in 1usize..4) {
        let tau = random_rational(seed, g, m, g);
        let pts = Window::default().sample(seed, 10).into_iter().filter(|z| z.im > 0.0).take(5).collect::<Vec<_>>();
        prop_assert_eq!(negative_squares(&tau, &pts).unwrap(), 0);
        // a strict kernel only exists for constant directions
        prop_assert_eq!(strict_kernel(&tau, &Window::default().sample(seed, 2 * g + 3)).unwrap().dim(), 0);
    }

    #[test]
    fn elliptic_weyl_function_is_nevanlinna(n in 5usize..30, a in 0.0f64..10.0, x in -20.0f64..20.0, y in 0.01f64..10.0) {
        let de = build_1d(n, &1.0.into(), &a.into(), [0.0, 1.0]).unwrap();
        let et = elliptic_triple(&de, None).unwrap();
        prop_assert!(et.triple().green_residual() < 1e-12);
        let l = c(x, y);
        let m = et.weyl(l).unwrap();
        prop_assert!(rel(&m.adjoint(), &et.weyl(l.conj()).unwrap()) < 1e-10);
        let im = (&m - m.adjoint()) * c(0.0, -0.5);
        prop_assert!(linalg::min_eigenvalue(&im) > -1e-10 * m.norm());
    }

    #[test]
    fn solvers_agree(seed in any::<u64>(), n in 5usize..40, x in -30.0f64..30.0, y in 0.05f64..5.0) {
        let de = build_1d(n, &weyl_bvp::Coefficient::Expr("1 + x".into()), &0.0.into(), [0.0, 1.0]).unwrap();
        let et = elliptic_triple(&de, None).unwrap();
        let tau = random_rational(seed, 2, 2, 2);
        let mut rng = linalg::rng(seed);
        let g = linalg::random_vector(&mut rng, n);
        let l = c(x, y);
        let d = direct_solve(&et, &tau, l, &g).unwrap();
        let k = krein_resolve(&et, &tau, l, &g).unwrap();
        prop_assert!((&k.f - &d).norm() < 1e-9 * d.norm());
        let lin = build_linearization_rational(&et, &tau).unwrap();
        prop_assert!(lin.w_symmetry_residual() < 1e-10);
        let f = lin.compressed_resolvent(l, &g).unwrap();
        prop_assert!((&f - &d).norm() < 1e-9 * d.norm());
        let general = build_linearization(&et, &realize_rational(&tau).unwrap()).unwrap();
        prop_assert!((general.matrix() - lin.matrix()).norm() < 1e-9 * lin.matrix().norm());
    }
}

#[test]
fn negative_lambda_has_a_negative_square() {
    let tau = weyl_bvp::opfunc::FnFunction {
        dim: 1,
        f: |l: C64| Ok(Mat::from_element(1, 1, -l)),
    };
    let pts = [c(0.0, 1.0), c(1.0, 2.0), c(-1.0, 0.5)];
    assert!(negative_squares(&tau, &pts).unwrap() >= 1);
}
