//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion and
//! exits non-zero if any fails.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavelet_telegraph::basis::{basis_vector, project_1d};
use wavelet_telegraph::krylov::bicgstab;
use wavelet_telegraph::opmat::embedding_matrices;
use wavelet_telegraph::telegraph::{
    self, boundary_fidelity, diagonal_probes, error_table, eval_full, grid_coords,
    BoundaryFidelity, Fn2, Fn3,
};
use wavelet_telegraph::tensor::{kron, vec};
use wavelet_telegraph::{
    harness, DoubleDouble, Mat, Mat64, OperatorSet, QuadratureRule, SolverConfig, TelegraphProblem,
    WaveletBasis,
};

fn report(id: u32, name: &str, pass: bool, detail: String, elapsed: Duration) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:>2} {verdict} {name}: {detail} [{:.2} s]",
        elapsed.as_secs_f64()
    );
    pass
}

fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat64 {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn criterion_01_orthonormality() -> bool {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 1..=3 {
        for order in 1..=8 {
            let basis = WaveletBasis::new(k, order).unwrap();
            let quad = QuadratureRule::<f64>::for_basis(&basis);
            let (xs, ws) = quad.composite(&basis);
            let n = basis.size();
            let mut gram = Mat64::zeros(n, n);
            for (&x, &w) in xs.iter().zip(&ws) {
                let v = basis_vector(&basis, x);
                for i in 0..n {
                    for j in 0..n {
                        gram[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            worst = worst.max(gram.max_abs_diff(&Mat::identity(n)));
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "Gram matrix vs identity, k <= 3, M <= 8",
        worst < 1e-10 && elapsed < Duration::from_secs(5),
        format!("max deviation {worst:.3e}"),
        elapsed,
    )
}

fn criterion_02_operational_matrix_exactness() -> bool {
    let start = Instant::now();
    let (mut d_err, mut j_err) = (0.0f64, 0.0f64);
    for k in 1..=3 {
        for order in 2..=8 {
            let basis = WaveletBasis::new(k, order).unwrap();
            let quad = QuadratureRule::<f64>::for_basis(&basis);
            let ops = OperatorSet::new(&basis, &quad).unwrap();
            let dt = ops.diff.transpose();
            let jt = ops.int.transpose();
            for p in 0..order as i32 {
                let c = project_1d(|x| x.powi(p), &basis, &quad).unwrap().to_flat();
                let pf = p as f64;
                let deriv = project_1d(
                    |x| if p == 0 { 0.0 } else { pf * x.powi(p - 1) },
                    &basis,
                    &quad,
                )
                .unwrap()
                .to_flat();
                let got = dt.matvec(&c);
                d_err = d_err.max(max_diff(&got, &deriv));
                if p < order as i32 - 1 {
                    let anti = project_1d(|x| x.powi(p + 1) / (pf + 1.0), &basis, &quad)
                        .unwrap()
                        .to_flat();
                    j_err = j_err.max(max_diff(&jt.matvec(&c), &anti));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "D and J on polynomials, k <= 3, M <= 8",
        d_err < 1e-10 && j_err < 1e-10 && elapsed < Duration::from_secs(5),
        format!("D error {d_err:.3e}, J error {j_err:.3e}"),
        elapsed,
    )
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn criterion_03_kronecker_identities() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (m, n, p, q) = (
            rng.random_range(1..5),
            rng.random_range(1..5),
            rng.random_range(1..5),
            rng.random_range(1..5),
        );
        // (Bᵀ ⊗ A) vec(X) = vec(A X B)
        let a = random_mat(&mut rng, m, n);
        let x = random_mat(&mut rng, n, p);
        let b = random_mat(&mut rng, p, q);
        let lhs = kron(&b.transpose(), &a).matvec(&vec(&x));
        let rhs = vec(&a.matmul(&x).matmul(&b));
        worst = worst.max(max_diff(&lhs, &rhs));
        // (A ⊗ B)(C ⊗ D) = (AC) ⊗ (BD)
        let c = random_mat(&mut rng, n, q);
        let bb = random_mat(&mut rng, p, m);
        let d = random_mat(&mut rng, m, n);
        let lhs = kron(&a, &bb).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &bb.matmul(&d));
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    let elapsed = start.elapsed();
    report(
        3,
        "vec identity and mixed product, 100 instances",
        worst < 1e-12,
        format!("max deviation {worst:.3e}"),
        elapsed,
    )
}

fn criterion_04_embedding_identities() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for k in 1..=2 {
        for order in 2..=6 {
            let basis = WaveletBasis::new(k, order).unwrap();
            let quad = QuadratureRule::<f64>::for_basis(&basis);
            let ops = OperatorSet::new(&basis, &quad).unwrap();
            let emb = embedding_matrices(&ops, &ops);
            let lam = Mat::row(&ops.integral);
            for _ in 0..100 {
                let (eta, xi): (f64, f64) = (rng.random(), rng.random());
                let pe = Mat::row(&basis_vector(&basis, eta));
                let px = Mat::row(&basis_vector(&basis, xi));
                let p2 = kron(&pe, &px);
                let cases = [
                    (&emb.xi_const, px.clone()),
                    (&emb.xi_times_eta, px.scale(eta)),
                    (&emb.eta_mean_times_eta, kron(&lam, &px).scale(eta)),
                    (&emb.xi_mean_times_xi, kron(&pe, &lam).scale(xi)),
                    (&emb.eta_const, pe.clone()),
                    (&emb.eta_times_xi, pe.scale(xi)),
                ];
                for (e, expect) in cases {
                    worst = worst.max(p2.matmul(e).max_abs_diff(&expect));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        "six embedding identities at 100 random points, k <= 2, M <= 6",
        worst < 1e-10,
        format!("max deviation {worst:.3e}"),
        elapsed,
    )
}

fn criterion_05_iterative_matches_dense() -> bool {
    let start = Instant::now();
    let cfg = SolverConfig::with_tol(1e-13);
    let mut worst = 0.0f64;
    for problem in harness::registry::<f64>() {
        for order in 2..=4 {
            let disc = telegraph::Discretization::uniform(1, order).unwrap();
            let system = telegraph::assemble(&problem, &disc).unwrap();
            let dense = telegraph::solve_dense(&disc, &system).unwrap().to_flat();
            let iter = bicgstab(&system.operator(), system.z.as_slice(), &cfg).unwrap();
            let c = Mat::from_col_major(system.z.nrows(), system.z.ncols(), iter.x);
            let iter = wavelet_telegraph::CoeffTensor::new(disc.tensor_basis(), c)
                .unwrap()
                .to_flat();
            let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff = dense
                .iter()
                .zip(&iter)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(diff / norm);
        }
    }
    let elapsed = start.elapsed();
    report(
        5,
        "BiCGSTAB vs dense LU at k = 1, M <= 4",
        worst < 1e-8 && elapsed < Duration::from_secs(10),
        format!("max relative difference {worst:.3e}"),
        elapsed,
    )
}

/// `Φ = ηξt(1−η)(1−ξ)` with its forcing for damping 10 and reaction 5.
fn manufactured() -> TelegraphProblem<f64> {
    let (l1, l2) = (10.0, 5.0);
    let bump = |a: f64, b: f64| a * b * (1.0 - a) * (1.0 - b);
    let exact: Fn3<f64> = Arc::new(move |a, b, t| t * bump(a, b));
    let forcing: Fn3<f64> = Arc::new(move |a, b, t| {
        2.0 * l1 * bump(a, b) + l2 * l2 * t * bump(a, b) + 2.0 * t * (b * (1.0 - b) + a * (1.0 - a))
    });
    let velocity: Fn2<f64> = Arc::new(move |a, b| bump(a, b));
    TelegraphProblem::from_exact("manufactured", l1, l2, forcing, exact, velocity)
}

fn criterion_06_manufactured_solution() -> bool {
    let start = Instant::now();
    let problem = manufactured();
    let disc = telegraph::Discretization::uniform(1, 6).unwrap();
    let report_ = telegraph::solve(&problem, &disc, &SolverConfig::with_tol(1e-14)).unwrap();
    let exact = problem.exact.as_ref().unwrap();
    let coords = grid_coords(11);
    let mut worst = 0.0f64;
    for &a in &coords {
        for &b in &coords {
            for &t in &coords {
                worst = worst.max((eval_full(&report_.phi, a, b, t) - exact(a, b, t)).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        6,
        "manufactured polynomial solution at k = 1, M = 6",
        worst < 1e-8 && elapsed < Duration::from_secs(30),
        format!("max error over 11^3 grid {worst:.3e}"),
        elapsed,
    )
}

struct Sweep {
    linf: Vec<(usize, f64)>,
    fidelity: BoundaryFidelity,
    elapsed: Duration,
}

/// Double-double solves at k = 3, M = 4..7, cached per example.
fn sweep(id: usize) -> Arc<Sweep> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<OnceLock<Arc<Sweep>>>>>> = OnceLock::new();
    let cell = CACHE
        .get_or_init(Default::default)
        .lock()
        .unwrap()
        .entry(id)
        .or_default()
        .clone();
    cell.get_or_init(|| {
        let start = Instant::now();
        let problem = harness::example::<DoubleDouble>(id).unwrap();
        let exact = problem.exact.clone().unwrap();
        let cfg = SolverConfig::with_tol(1e-26);
        let mut linf = Vec::new();
        let mut fidelity = None;
        for order in 4..=7 {
            let disc = telegraph::Discretization::uniform(3, order).unwrap();
            let rep = telegraph::solve(&problem, &disc, &cfg).unwrap();
            let table = error_table(&rep.phi, exact.as_ref(), &diagonal_probes(), 1.0, 11).unwrap();
            linf.push((order, table.linf));
            if order == 7 {
                fidelity = Some(boundary_fidelity(&rep.phi, exact.as_ref(), 1.0, 11).unwrap());
            }
        }
        Arc::new(Sweep {
            linf,
            fidelity: fidelity.unwrap(),
            elapsed: start.elapsed(),
        })
    })
    .clone()
}

fn strictly_decreasing(linf: &[(usize, f64)]) -> bool {
    linf.windows(2).all(|w| w[1].1 < w[0].1)
}

fn within_decade(x: f64, reference: f64) -> bool {
    x >= reference / 10.0 && x <= reference * 10.0
}

fn sweep_detail(s: &Sweep, magnitude_ok: bool) -> String {
    let values = s
        .linf
        .iter()
        .map(|(m, e)| format!("M={m} {e:.4e}"))
        .collect::<Vec<_>>()
        .join(", ");
    let verdict = |ok| if ok { "ok" } else { "no" };
    format!(
        "{values}; magnitude {}, decreasing {}",
        verdict(magnitude_ok),
        verdict(strictly_decreasing(&s.linf))
    )
}

fn criterion_07_example1_norms() -> bool {
    let s = sweep(1);
    let at7 = s.linf[3].1;
    let magnitude = at7 <= 1e-2 && within_decade(at7, 9.7446e-4);
    let pass = magnitude && strictly_decreasing(&s.linf) && s.elapsed < Duration::from_secs(300);
    report(
        7,
        "example 1 l-inf at k = 3",
        pass,
        sweep_detail(&s, magnitude),
        s.elapsed,
    )
}

fn criterion_08_example2_norms() -> bool {
    let s = sweep(2);
    let at7 = s.linf[3].1;
    let magnitude = within_decade(at7, 1.3731e-4) || within_decade(at7, 1.3731e-5);
    let pass = magnitude && strictly_decreasing(&s.linf);
    report(
        8,
        "example 2 l-inf at k = 3",
        pass,
        sweep_detail(&s, magnitude),
        s.elapsed,
    )
}

fn criterion_09_example3_norms() -> bool {
    let s = sweep(3);
    let at7 = s.linf[3].1;
    let magnitude = at7 <= 1e-2 && within_decade(at7, 1.4000e-4);
    let pass = magnitude && strictly_decreasing(&s.linf);
    report(
        9,
        "example 3 l-inf at k = 3",
        pass,
        sweep_detail(&s, magnitude),
        s.elapsed,
    )
}

fn criterion_10_boundary_and_initial_fidelity() -> bool {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for id in 1..=3 {
        let f = &sweep(id).fidelity;
        let worst_edge = f.edges.iter().copied().fold(0.0, f64::max);
        pass &= f.edges.iter().all(|&e| e <= 10.0 * f.interior) && f.initial <= 10.0 * f.interior;
        detail.push(format!(
            "ex{id} edges {worst_edge:.2e} t=0 {:.2e} interior {:.2e}",
            f.initial, f.interior
        ));
    }
    report(
        10,
        "boundary and t = 0 errors vs interior at k = 3, M = 7",
        pass,
        detail.join("; "),
        start.elapsed(),
    )
}

fn main() {
    let criteria: [fn() -> bool; 10] = [
        criterion_01_orthonormality,
        criterion_02_operational_matrix_exactness,
        criterion_03_kronecker_identities,
        criterion_04_embedding_identities,
        criterion_05_iterative_matches_dense,
        criterion_06_manufactured_solution,
        criterion_07_example1_norms,
        criterion_08_example2_norms,
        criterion_09_example3_norms,
        criterion_10_boundary_and_initial_fidelity,
    ];
    let failed = criteria
        .iter()
        .enumerate()
        .filter(|(i, c)| {
            !std::panic::catch_unwind(|| c()).unwrap_or_else(|_| {
                println!("criterion {:>2} FAIL: panicked", i + 1);
                false
            })
        })
        .count();
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
