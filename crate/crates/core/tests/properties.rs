use proptest::prelude::*;

use wavelet_telegraph::basis::{basis_vector, project_1d, project_2d, wavelet_eval};
use wavelet_telegraph::expr::Expr;
use wavelet_telegraph::krylov::{bicgstab, dense_solve, relative_residual};
use wavelet_telegraph::tensor::{kron, unvec, vec, KronOperator};
use wavelet_telegraph::{
    CoeffTensor, DoubleDouble, Mat, Mat64, OperatorSet, QuadratureRule, Real, SolverConfig,
    TensorBasis, WaveletBasis,
};

fn level() -> impl Strategy<Value = u32> {
    1u32..=3
}

fn order() -> impl Strategy<Value = usize> {
    2usize..=8
}

fn mat(rows: usize, cols: usize) -> impl Strategy<Value = Mat64> {
    prop::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |v| Mat::from_col_major(rows, cols, v))
}

fn dims() -> impl Strategy<Value = usize> {
    1usize..=4
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_active_translate(k in level(), m in order(), x in 0.0f64..=1.0) {
        let b = WaveletBasis::new(k, m).unwrap();
        let v = basis_vector(&b, x);
        let active: Vec<usize> = (1..=b.translates())
            .filter(|&n| (0..m).any(|d| v[b.index(n, d)] != 0.0))
            .collect();
        prop_assert!(active.len() <= 1);
        prop_assert!(v.iter().filter(|c| **c != 0.0).count() <= m);
        let n = b.translate_of(x).unwrap();
        let (lo, hi) = b.cell::<f64>(n);
        prop_assert!(lo <= x && (x < hi || (x == 1.0 && hi == 1.0)));
        // the m = 0 entry never vanishes on its support
        prop_assert!(v[b.index(n, 0)] > 0.0);
    }

    #[test]
    fn quadrature_weights_and_degree(points in 1usize..=12, p in 0usize..24) {
        let q = QuadratureRule::<f64>::gauss_legendre(points);
        let sum: f64 = q.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-14);
        prop_assert!(q.weights().iter().all(|&w| w > 0.0));
        if p < 2 * points {
            let got = q.integrate(0.25, 0.75, |x| x.powi(p as i32));
            let exact = (0.75f64.powi(p as i32 + 1) - 0.25f64.powi(p as i32 + 1)) / (p as f64 + 1.0);
            prop_assert!((got - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn piecewise_polynomials_are_reproduced(
        k in level(),
        m in order(),
        seed in prop::collection::vec(-1.0f64..1.0, 32),
        xs in prop::collection::vec(0.0f64..1.0, 10),
    ) {
        let b = WaveletBasis::new(k, m).unwrap();
        let q = QuadratureRule::for_basis(&b);
        // degree m-1 polynomial with cell-dependent coefficients
        let f = |x: f64| {
            let n = b.translate_of(x).unwrap();
            (0..m).map(|d| seed[(n * 7 + d) % seed.len()] * x.powi(d as i32)).sum::<f64>()
        };
        let c = project_1d(f, &b, &q).unwrap();
        for &x in &xs {
            prop_assert!((c.eval(&[x]).unwrap() - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_projection_error_does_not_grow(a in -2.0f64..2.0, w in 0.5f64..4.0) {
        let f = |x: f64| (a * x).exp() + (w * x).sin();
        let mut last = f64::INFINITY;
        for m in 3..=6 {
            let b = WaveletBasis::new(2, m).unwrap();
            let q = QuadratureRule::for_basis(&b);
            let c = project_1d(f, &b, &q).unwrap();
            let err = (0..=100)
                .map(|i| i as f64 / 100.0)
                .map(|x| (c.eval(&[x]).unwrap() - f(x)).abs())
                .fold(0.0, f64::max);
            prop_assert!(err <= last * (1.0 + 1e-9), "M = {}: {:e} > {:e}", m, err, last);
            last = err;
        }
    }

    #[test]
    fn derivative_of_constant_vanishes(k in level(), m in 1usize..=8) {
        let b = WaveletBasis::new(k, m).unwrap();
        let q = QuadratureRule::<f64>::for_basis(&b);
        let ops = OperatorSet::new(&b, &q).unwrap();
        let d = ops.diff.vecmat(&ops.ones);
        prop_assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn integration_rows_end_at_integral(k in level(), m in order()) {
        let b = WaveletBasis::new(k, m).unwrap();
        let q = QuadratureRule::for_basis(&b);
        let ops = OperatorSet::new(&b, &q).unwrap();
        let basis = TensorBasis::new(vec![b]).unwrap();
        // the top degree's antiderivative is truncated on the last cell
        for i in (0..b.size()).filter(|&i| b.split(i).1 + 1 < m) {
            let row: Vec<f64> = (0..b.size()).map(|j| ops.int[(i, j)]).collect();
            let c = CoeffTensor::new(basis.clone(), Mat::column(&row)).unwrap();
            prop_assert!((c.eval(&[1.0]).unwrap() - ops.integral[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn diff_matrix_structure(k in level(), m in 1usize..=8) {
        let b = WaveletBasis::new(k, m).unwrap();
        let d = wavelet_telegraph::opmat::diff_matrix::<f64>(&b);
        let two_k = (1u32 << k) as f64;
        for i in 0..b.size() {
            for j in 0..b.size() {
                let ((ni, r), (nj, s)) = (b.split(i), b.split(j));
                let expect = if ni == nj && r > s && (r + s) % 2 == 1 {
                    two_k * (((2 * r + 1) * (2 * s + 1)) as f64).sqrt()
                } else {
                    0.0
                };
                prop_assert!((d[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixed_product(
        (a, b, c, d) in (dims(), dims(), dims(), dims(), dims(), dims()).prop_flat_map(|(m, n, p, q, r, s)| {
            (mat(m, n), mat(p, q), mat(n, r), mat(q, s))
        })
    ) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn vec_identity(
        (a, x, b) in (dims(), dims(), dims(), dims()).prop_flat_map(|(m, n, p, q)| {
            (mat(m, n), mat(n, p), mat(p, q))
        })
    ) {
        let lhs = kron(&b.transpose(), &a).matvec(&vec(&x));
        let rhs = vec(&a.matmul(&x).matmul(&b));
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() < 1e-12);
        }
        let back = unvec(&vec(&x), x.nrows(), x.ncols()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn kron_operator_matches_dense(
        (l, r, v) in (dims(), dims(), dims(), dims()).prop_flat_map(|(m, n, p, q)| {
            (mat(m, n), mat(p, q), prop::collection::vec(-1.0f64..1.0, n * q))
        })
    ) {
        let op = KronOperator::new(l.clone(), r.clone());
        let dense = kron(&l, &r).matvec(&v);
        for (x, y) in op.apply_vec(&v).iter().zip(&dense) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let cols = Mat::from_col_major(v.len(), 1, v.clone());
        prop_assert!(op.apply_cols(&cols).max_abs_diff(&Mat::column(&dense)) < 1e-12);
    }

    #[test]
    fn spatial_derivative_and_integral_pointwise(
        coef in prop::collection::vec(-1.0f64..1.0, 9),
        eta in 0.01f64..0.99,
        xi in 0.01f64..0.99,
    ) {
        let b = WaveletBasis::new(2, 5).unwrap();
        let q = QuadratureRule::for_basis(&b);
        let ops = OperatorSet::new(&b, &q).unwrap();
        // degree 2 in each variable
        let g = |a: f64, x: f64| {
            (0..3usize).flat_map(|i| (0..3usize).map(move |j| (i, j)))
                .map(|(i, j)| coef[3 * i + j] * a.powi(i as i32) * x.powi(j as i32))
                .sum::<f64>()
        };
        let g_xi = |a: f64, x: f64| {
            (0..3usize).flat_map(|i| (1..3usize).map(move |j| (i, j)))
                .map(|(i, j)| coef[3 * i + j] * j as f64 * a.powi(i as i32) * x.powi(j as i32 - 1))
                .sum::<f64>()
        };
        let g_int_eta = |a: f64, x: f64| {
            (0..3usize).flat_map(|i| (0..3usize).map(move |j| (i, j)))
                .map(|(i, j)| coef[3 * i + j] * a.powi(i as i32 + 1) / (i + 1) as f64 * x.powi(j as i32))
                .sum::<f64>()
        };
        let c = project_2d(g, &b, &b, &q).unwrap();
        let flat = c.to_flat();
        let ops2 = wavelet_telegraph::tensor::lemma2_operators(&ops, &ops);
        let dxi = ops2.d_xi.transpose().apply_vec(&flat);
        let ieta = ops2.int_eta.transpose().apply_vec(&flat);
        let as_tensor = |v: Vec<f64>| {
            CoeffTensor::new(c.basis().clone(), unvec(&v, b.size(), b.size()).unwrap().transpose()).unwrap()
        };
        prop_assert!((as_tensor(dxi).eval(&[eta, xi]).unwrap() - g_xi(eta, xi)).abs() < 1e-8);
        prop_assert!((as_tensor(ieta).eval(&[eta, xi]).unwrap() - g_int_eta(eta, xi)).abs() < 1e-8);
    }

    #[test]
    fn bicgstab_matches_dense_on_dominant_systems(
        entries in prop::collection::vec(-1.0f64..1.0, 100),
        rhs in prop::collection::vec(-1.0f64..1.0, 10),
    ) {
        let mut a = Mat::from_col_major(10, 10, entries);
        for i in 0..10 {
            a[(i, i)] += 12.0;
        }
        prop_assume!(rhs.iter().any(|v| v.abs() > 1e-3));
        let sol = bicgstab(&a, &rhs, &SolverConfig::with_tol(1e-13)).unwrap();
        let direct = dense_solve(&a, &rhs).unwrap();
        let norm = direct.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff = sol.x.iter().zip(&direct).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-8 * norm);
        prop_assert!(!sol.residual_history.is_empty());
        let recomputed = relative_residual(&a, &sol.x, &rhs);
        let reported = sol.final_residual();
        prop_assert!((recomputed - reported).abs() <= 1e-6 * reported.max(1e-16) + 1e-15);
    }

    #[test]
    fn dense_solve_residual(entries in prop::collection::vec(-1.0f64..1.0, 2500), rhs in prop::collection::vec(-1.0f64..1.0, 50)) {
        let mut a = Mat::from_col_major(50, 50, entries);
        for i in 0..50 {
            a[(i, i)] += 4.0;
        }
        let x = dense_solve(&a, &rhs).unwrap();
        prop_assert!(relative_residual(&a, &x, &rhs) < 1e-10);
    }

    #[test]
    fn double_double_arithmetic(a in -1e3f64..1e3, b in 1e-3f64..1e3, tiny in -1e-20f64..1e-20) {
        let x = DoubleDouble::new(a, 0.0) + DoubleDouble::new(tiny, 0.0);
        let y = DoubleDouble::new(b, 0.0);
        let tol = 1e-30 * (x.abs().hi() + 1.0);
        prop_assert!(((x + y) - y - x).abs().hi() <= tol * (1.0 + b));
        prop_assert!(((x * y) / y - x).abs().hi() <= tol);
        let s = y.sqrt();
        prop_assert!((s * s - y).abs().hi() <= 1e-30 * b);
    }

    #[test]
    fn linear_expressions_evaluate(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, p in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)) {
        let src = format!("{a:?} * eta + ({b:?}) * xi - ({c:?}) * t");
        let e = Expr::<f64>::parse(&src).unwrap();
        let got = e.eval(p.0, p.1, p.2);
        prop_assert!((got - (a * p.0 + b * p.1 - c * p.2)).abs() < 1e-12);
    }
}

#[test]
fn wavelets_are_generic_over_precision() {
    let b = WaveletBasis::new(2, 4).unwrap();
    for m in 0..4 {
        let lo = wavelet_eval(&b, 2, m, 0.7f64).unwrap();
        let hi = wavelet_eval(&b, 2, m, DoubleDouble::lit(0.7)).unwrap();
        assert!((hi.approx_f64() - lo).abs() < 1e-13);
    }
}
