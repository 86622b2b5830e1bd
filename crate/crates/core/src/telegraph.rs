//! The 2D telegraph equation
//!
//! ```text
//! Φ_tt + 2 λ₁ Φ_t + λ₂² Φ = Φ_ηη + Φ_ξξ + F(η, ξ, t)   on (0,1)² x (0,1]
//! Φ(η,ξ,0) = f1,  Φ_t(η,ξ,0) = f2,
//! Φ(0,ξ,t) = f3,  Φ(1,ξ,t) = f4,  Φ(η,0,t) = f5,  Φ(η,1,t) = f6
//! ```
//!
//! is integrated twice in each variable so that the initial and boundary
//! data enter the equation, expanded in Legendre wavelets, and reduced to
//! the generalized Sylvester equation
//!
//! ```text
//! C + X1 C Y1 + X2 C Y2 = Z
//! ```
//!
//! for the coefficient matrix `C` (rows: `(η, ξ)` pairs, columns: `t`).
//! Both `X1` and `X2` are Kronecker products sharing their η factor, which
//! the matrix-free operator exploits.

use std::sync::Arc;

use crate::basis::{
    basis_vector, project_2d, project_3d, CoeffTensor, QuadratureRule, SliceEvaluator, TensorBasis,
    WaveletBasis,
};
use crate::error::{Error, Result};
use crate::krylov::{bicgstab, dense_solve, FnOperator, LinearOperator, SolverConfig};
use crate::matrix::Mat;
use crate::opmat::{embedding_matrices, OperatorSet};
use crate::scalar::Real;
use crate::tensor::{kron, lemma2_operators, KronOperator};

pub type Fn2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
pub type Fn3<T> = Arc<dyn Fn(T, T, T) -> T + Send + Sync>;

#[derive(Clone)]
pub struct TelegraphProblem<T> {
    pub name: String,
    /// λ₁, the coefficient of the `2 λ₁ Φ_t` term.
    pub damping: T,
    /// λ₂, entering as `λ₂² Φ`.
    pub reaction: T,
    pub forcing: Fn3<T>,
    /// `Φ(η, ξ, 0)`
    pub initial_value: Fn2<T>,
    /// `Φ_t(η, ξ, 0)`
    pub initial_velocity: Fn2<T>,
    /// `Φ(0, ξ, t)` as a function of `(ξ, t)`.
    pub at_eta0: Fn2<T>,
    /// `Φ(1, ξ, t)` as a function of `(ξ, t)`.
    pub at_eta1: Fn2<T>,
    /// `Φ(η, 0, t)` as a function of `(η, t)`.
    pub at_xi0: Fn2<T>,
    /// `Φ(η, 1, t)` as a function of `(η, t)`.
    pub at_xi1: Fn2<T>,
    pub exact: Option<Fn3<T>>,
}

impl<T: Real> std::fmt::Debug for TelegraphProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TelegraphProblem")
            .field("name", &self.name)
            .field("damping", &self.damping)
            .field("reaction", &self.reaction)
            .field("exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

/// One failed edge-compatibility sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityIssue {
    pub edge: &'static str,
    pub coordinate: f64,
    pub mismatch: f64,
}

impl<T: Real> TelegraphProblem<T> {
    /// Problem whose data are all derived from a known solution `exact`.
    pub fn from_exact(
        name: impl Into<String>,
        damping: T,
        reaction: T,
        forcing: Fn3<T>,
        exact: Fn3<T>,
        velocity: Fn2<T>,
    ) -> Self {
        let e = exact.clone();
        let initial_value: Fn2<T> = Arc::new(move |a, b| e(a, b, T::zero()));
        let e = exact.clone();
        let at_eta0: Fn2<T> = Arc::new(move |x, t| e(T::zero(), x, t));
        let e = exact.clone();
        let at_eta1: Fn2<T> = Arc::new(move |x, t| e(T::one(), x, t));
        let e = exact.clone();
        let at_xi0: Fn2<T> = Arc::new(move |a, t| e(a, T::zero(), t));
        let e = exact.clone();
        let at_xi1: Fn2<T> = Arc::new(move |a, t| e(a, T::one(), t));
        TelegraphProblem {
            name: name.into(),
            damping,
            reaction,
            forcing,
            initial_value,
            initial_velocity: velocity,
            at_eta0,
            at_eta1,
            at_xi0,
            at_xi1,
            exact: Some(exact),
        }
    }

    /// Every datum multiplied by `alpha`.
    pub fn scaled(&self, alpha: T) -> Self {
        let s2 = |f: &Fn2<T>| -> Fn2<T> {
            let f = f.clone();
            Arc::new(move |a, b| alpha * f(a, b))
        };
        let s3 = |f: &Fn3<T>| -> Fn3<T> {
            let f = f.clone();
            Arc::new(move |a, b, c| alpha * f(a, b, c))
        };
        TelegraphProblem {
            name: format!("{}*{}", self.name, alpha),
            damping: self.damping,
            reaction: self.reaction,
            forcing: s3(&self.forcing),
            initial_value: s2(&self.initial_value),
            initial_velocity: s2(&self.initial_velocity),
            at_eta0: s2(&self.at_eta0),
            at_eta1: s2(&self.at_eta1),
            at_xi0: s2(&self.at_xi0),
            at_xi1: s2(&self.at_xi1),
            exact: self.exact.as_ref().map(s3),
        }
    }

    /// Checks that initial and boundary data agree along the four edges of
    /// the base `t = 0`, at 11 points each.
    pub fn compatibility_issues(&self, tol: f64) -> Vec<CompatibilityIssue> {
        let mut out = Vec::new();
        let (z, o) = (T::zero(), T::one());
        for i in 0..=10 {
            let s = T::lit(i as f64 / 10.0);
            let checks = [
                ("eta=0", (self.initial_value)(z, s) - (self.at_eta0)(s, z)),
                ("eta=1", (self.initial_value)(o, s) - (self.at_eta1)(s, z)),
                ("xi=0", (self.initial_value)(s, z) - (self.at_xi0)(s, z)),
                ("xi=1", (self.initial_value)(s, o) - (self.at_xi1)(s, z)),
            ];
            for (edge, diff) in checks {
                let d = diff.abs().approx_f64();
                if !(d <= tol) {
                    out.push(CompatibilityIssue {
                        edge,
                        coordinate: i as f64 / 10.0,
                        mismatch: d,
                    });
                }
            }
        }
        out
    }
}

/// Per-dimension operators and the quadrature rule used for projections.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub eta: OperatorSet<T>,
    pub xi: OperatorSet<T>,
    pub time: OperatorSet<T>,
    pub quad: QuadratureRule<T>,
}

impl<T: Real> Discretization<T> {
    /// Same `k` and `M` in all three directions.
    pub fn uniform(k: u32, order: usize) -> Result<Self> {
        let b = WaveletBasis::new(k, order)?;
        Self::new(b, b, b)
    }

    pub fn new(eta: WaveletBasis, xi: WaveletBasis, time: WaveletBasis) -> Result<Self> {
        let quad = QuadratureRule::for_bases(&[eta, xi, time]);
        Ok(Discretization {
            eta: OperatorSet::new(&eta, &quad)?,
            xi: OperatorSet::new(&xi, &quad)?,
            time: OperatorSet::new(&time, &quad)?,
            quad,
        })
    }

    pub fn tensor_basis(&self) -> TensorBasis {
        TensorBasis::new(vec![self.eta.basis, self.xi.basis, self.time.basis])
            .expect("three dimensions")
    }

    /// Rows and columns of the coefficient matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.eta.size() * self.xi.size(), self.time.size())
    }
}

/// Projected data of a problem.
#[derive(Debug, Clone)]
pub struct BoundaryData<T> {
    /// `f3` over `(ξ, t)`.
    pub at_eta0: Mat<T>,
    /// `f4` over `(ξ, t)`.
    pub at_eta1: Mat<T>,
    /// `f5` over `(η, t)`.
    pub at_xi0: Mat<T>,
    /// `f6` over `(η, t)`.
    pub at_xi1: Mat<T>,
    /// Forcing over `(η, ξ, t)`.
    pub forcing: CoeffTensor<T>,
    /// `f1 + t f2` over `(η, ξ, t)`.
    pub initial: CoeffTensor<T>,
}

pub fn expand_boundary_data<T: Real>(
    problem: &TelegraphProblem<T>,
    disc: &Discretization<T>,
) -> Result<BoundaryData<T>> {
    let (be, bx, bt) = (&disc.eta.basis, &disc.xi.basis, &disc.time.basis);
    let q = &disc.quad;
    let f1 = problem.initial_value.clone();
    let f2 = problem.initial_velocity.clone();
    Ok(BoundaryData {
        at_eta0: project_2d(|x, t| (problem.at_eta0)(x, t), bx, bt, q)?.into_matrix(),
        at_eta1: project_2d(|x, t| (problem.at_eta1)(x, t), bx, bt, q)?.into_matrix(),
        at_xi0: project_2d(|a, t| (problem.at_xi0)(a, t), be, bt, q)?.into_matrix(),
        at_xi1: project_2d(|a, t| (problem.at_xi1)(a, t), be, bt, q)?.into_matrix(),
        forcing: project_3d(|a, x, t| (problem.forcing)(a, x, t), be, bx, bt, q)?,
        initial: project_3d(|a, x, t| f1(a, x) + t * f2(a, x), be, bx, bt, q)?,
    })
}

/// `C + X1 C Y1 + X2 C Y2 = Z` with
/// `X1 = K_η ⊗ (K_ξ Dᵀ²)`, `X2 = K_η ⊗ (K_ξ Dᵀ⁴)`.
#[derive(Debug, Clone)]
pub struct SylvesterSystem<T> {
    /// Shared η factor `Jᵀ² − A Λᵀ Jᵀ` (double integral with the
    /// boundary-fixing correction).
    pub eta_factor: Mat<T>,
    pub xi_factor1: Mat<T>,
    pub xi_factor2: Mat<T>,
    pub y1: Mat<T>,
    pub y2: Mat<T>,
    pub z: Mat<T>,
}

/// `Jᵀ² − A Λᵀ Jᵀ`: coefficient map of `g ↦ ∫₀ˣ∫₀ˢ g − x ∫₀¹∫₀ˢ g`.
fn double_integral_factor<T: Real>(ops: &OperatorSet<T>) -> Mat<T> {
    let jt = ops.int.transpose();
    let a_lam = Mat::from_fn(ops.size(), ops.size(), |i, j| ops.ramp[i] * ops.integral[j]);
    &jt.matmul(&jt) - &a_lam.matmul(&jt)
}

/// Time factor `D² J²`.
fn time_factor<T: Real>(ops: &OperatorSet<T>) -> Mat<T> {
    let d2 = ops.diff.matmul(&ops.diff);
    let j2 = ops.int.matmul(&ops.int);
    d2.matmul(&j2)
}

pub fn assemble<T: Real>(
    problem: &TelegraphProblem<T>,
    disc: &Discretization<T>,
) -> Result<SylvesterSystem<T>> {
    let data = expand_boundary_data(problem, disc)?;
    assemble_with_data(problem, disc, &data)
}

pub fn assemble_with_data<T: Real>(
    problem: &TelegraphProblem<T>,
    disc: &Discretization<T>,
    data: &BoundaryData<T>,
) -> Result<SylvesterSystem<T>> {
    let (se, sx, st) = (disc.eta.size(), disc.xi.size(), disc.time.size());
    let k_eta = double_integral_factor(&disc.eta);
    let k_xi = double_integral_factor(&disc.xi);
    let dxt = disc.xi.diff.transpose();
    let dxt2 = dxt.matmul(&dxt);
    let xi_factor1 = k_xi.matmul(&dxt2);
    let xi_factor2 = xi_factor1.matmul(&dxt2);

    let tf = time_factor(&disc.time);
    let dt = &disc.time.diff;
    let mut poly = dt.matmul(dt);
    poly.axpy(T::lit(2.0) * problem.damping, dt);
    poly.axpy(problem.reaction * problem.reaction, &Mat::identity(st));
    let y1 = -&poly.matmul(&tf);
    let y2 = tf.clone();

    // right-hand side
    let emb = embedding_matrices(&disc.eta, &disc.xi);
    let mut z = data.initial.matrix().clone();
    let side_xi = &emb.eta_const.matmul(&data.at_xi0)
        + &emb.eta_times_xi.matmul(&(&data.at_xi1 - &data.at_xi0));
    z.axpy(T::one(), &side_xi.matmul(&tf));
    let k_eta_op = KronOperator::new(k_eta.clone(), Mat::identity(sx));
    let mut inner = &emb.xi_times_eta.matmul(&(&data.at_eta1 - &data.at_eta0))
        + &emb.xi_const.matmul(&data.at_eta0);
    inner.axpy(-T::one(), &k_eta_op.apply_cols(data.forcing.matrix()));
    let outer = KronOperator::new(Mat::identity(se), xi_factor1.clone());
    z.axpy(T::one(), &outer.apply_cols(&inner).matmul(&tf));

    if !z.all_finite() || !y1.all_finite() || !xi_factor2.all_finite() {
        return Err(Error::Shape(
            "assembled system contains non-finite entries".into(),
        ));
    }
    Ok(SylvesterSystem {
        eta_factor: k_eta,
        xi_factor1,
        xi_factor2,
        y1,
        y2,
        z,
    })
}

impl<T: Real> SylvesterSystem<T> {
    pub fn shape(&self) -> (usize, usize) {
        self.z.shape()
    }

    pub fn dim(&self) -> usize {
        self.z.nrows() * self.z.ncols()
    }

    pub fn x1(&self) -> KronOperator<T> {
        KronOperator::new(self.eta_factor.clone(), self.xi_factor1.clone())
    }

    pub fn x2(&self) -> KronOperator<T> {
        KronOperator::new(self.eta_factor.clone(), self.xi_factor2.clone())
    }

    /// `C + X1 C Y1 + X2 C Y2`.
    pub fn apply(&self, c: &Mat<T>) -> Mat<T> {
        let (rows, cols) = self.shape();
        assert_eq!(c.shape(), (rows, cols));
        let sx = self.xi_factor1.nrows();
        let se = self.eta_factor.nrows();
        // (I ⊗ B) M is B times M viewed as sx x (se * cols)
        let xi_apply = |b: &Mat<T>, m: Mat<T>| {
            let wide = Mat::from_col_major(sx, se * cols, m.into_vec());
            Mat::from_col_major(rows, cols, b.matmul(&wide).into_vec())
        };
        let mut w = xi_apply(&self.xi_factor1, c.matmul(&self.y1));
        w.axpy(T::one(), &xi_apply(&self.xi_factor2, c.matmul(&self.y2)));
        // (K ⊗ I) per column: column j viewed as sx x se times Kᵀ
        let kt = self.eta_factor.transpose();
        let mut out = c.clone();
        for j in 0..cols {
            let xt = Mat::from_col_major(sx, se, w.col(j).to_vec());
            let prod = xt.matmul(&kt);
            for (o, &v) in out.col_mut(j).iter_mut().zip(prod.as_slice()) {
                *o += v;
            }
        }
        out
    }

    /// `I + Y1ᵀ ⊗ X1 + Y2ᵀ ⊗ X2`, for small systems and tests.
    pub fn dense_matrix(&self) -> Mat<T> {
        let n = self.dim();
        let mut a = Mat::identity(n);
        a.axpy(T::one(), &kron(&self.y1.transpose(), &self.x1().dense()));
        a.axpy(T::one(), &kron(&self.y2.transpose(), &self.x2().dense()));
        a
    }

    pub fn operator(&self) -> impl LinearOperator<T> + '_ {
        let (rows, cols) = self.shape();
        FnOperator::new(rows * cols, move |x: &[T], y: &mut [T]| {
            let c = Mat::from_col_major(rows, cols, x.to_vec());
            y.copy_from_slice(self.apply(&c).as_slice());
        })
    }

    /// Residual `‖Z − L(C)‖_F / ‖Z‖_F`.
    pub fn relative_residual(&self, c: &Mat<T>) -> T {
        let r = &self.z - &self.apply(c);
        let nz = self.z.frobenius();
        if nz == T::zero() {
            r.frobenius()
        } else {
            r.frobenius() / nz
        }
    }
}

/// Literal assembly from dense Kronecker products of the embedding and
/// extension matrices. Used as a cross-check of [`assemble`].
pub fn assemble_literal<T: Real>(
    problem: &TelegraphProblem<T>,
    disc: &Discretization<T>,
    data: &BoundaryData<T>,
) -> (Mat<T>, Mat<T>, Mat<T>, Mat<T>, Mat<T>) {
    let emb = embedding_matrices(&disc.eta, &disc.xi);
    let ext = lemma2_operators(&disc.eta, &disc.xi);
    let st = disc.time.size();
    let dxi_t = ext.d_xi.dense().transpose();
    let dxi_t2 = dxi_t.matmul(&dxi_t);
    let ieta_t = ext.int_eta.dense().transpose();
    let ixi_t = ext.int_xi.dense().transpose();
    let k_eta = &ieta_t.matmul(&ieta_t) - &emb.eta_mean_times_eta.matmul(&ieta_t);
    let k_xi = &ixi_t.matmul(&ixi_t) - &emb.xi_mean_times_xi.matmul(&ixi_t);
    let x1 = k_xi.matmul(&dxi_t2).matmul(&k_eta);
    let x2 = x1.matmul(&dxi_t2);
    let d = &disc.time.diff;
    let j = &disc.time.int;
    let tf = d.matmul(d).matmul(j).matmul(j);
    let lam1 = problem.damping;
    let lam2 = problem.reaction;
    let mut poly = d.matmul(d);
    poly.axpy(T::lit(2.0) * lam1, d);
    poly.axpy(lam2 * lam2, &Mat::identity(st));
    let y1 = -&poly.matmul(&tf);
    let y2 = tf.clone();
    let mut z = data.initial.matrix().clone();
    z.axpy(
        T::one(),
        &(&emb.eta_const.matmul(&data.at_xi0)
            + &emb.eta_times_xi.matmul(&(&data.at_xi1 - &data.at_xi0)))
            .matmul(&tf),
    );
    let inner = &(&emb.xi_times_eta.matmul(&(&data.at_eta1 - &data.at_eta0))
        + &emb.xi_const.matmul(&data.at_eta0))
        - &k_eta.matmul(data.forcing.matrix());
    z.axpy(T::one(), &k_xi.matmul(&dxi_t2).matmul(&inner).matmul(&tf));
    (x1, y1, x2, y2, z)
}

/// Pointwise error summary at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub t_eval: f64,
    /// `(η, ξ, |Φ − Φ_apx|)` at the probe points.
    pub probes: Vec<(f64, f64, f64)>,
    /// Root of the sum of squared errors over the grid.
    pub l2: f64,
    /// Maximum error over the grid.
    pub linf: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub phi: CoeffTensor<T>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub linear_residual: f64,
    pub errors: Option<ErrorTable>,
}

/// The diagonal probes `(0,0), (0.1,0.1), …, (1,1)`.
pub fn diagonal_probes() -> Vec<(f64, f64)> {
    (0..=10)
        .map(|i| (i as f64 / 10.0, i as f64 / 10.0))
        .collect()
}

/// Uniform grid coordinates `0, 1/(n-1), …, 1`; `n` is clamped to at
/// least 2 so the grid always contains both ends.
pub fn grid_coords(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Solves by matrix-free BiCGSTAB and, if the problem carries an exact
/// solution, reports errors at `t = 1` on the 11 x 11 grid.
pub fn solve<T: Real>(
    problem: &TelegraphProblem<T>,
    disc: &Discretization<T>,
    config: &SolverConfig,
) -> Result<SolveReport<T>> {
    let system = assemble(problem, disc)?;
    solve_system(problem, disc, &system, config)
}

pub fn solve_system<T: Real>(
    problem: &TelegraphProblem<T>,
    disc: &Discretization<T>,
    system: &SylvesterSystem<T>,
    config: &SolverConfig,
) -> Result<SolveReport<T>> {
    let (rows, cols) = system.shape();
    let op = system.operator();
    let sol = bicgstab(&op, system.z.as_slice(), config)?;
    let linear_residual = sol.final_residual();
    let c = Mat::from_col_major(rows, cols, sol.x);
    let phi = CoeffTensor::new(disc.tensor_basis(), c)?;
    let errors = problem
        .exact
        .as_ref()
        .map(|ex| error_table(&phi, ex.as_ref(), &diagonal_probes(), 1.0, 11))
        .transpose()?;
    Ok(SolveReport {
        phi,
        iterations: sol.iterations,
        residual_history: sol.residual_history,
        linear_residual,
        errors,
    })
}

/// Direct solve of the vectorized system; small sizes only.
pub fn solve_dense<T: Real>(
    disc: &Discretization<T>,
    system: &SylvesterSystem<T>,
) -> Result<CoeffTensor<T>> {
    let (rows, cols) = system.shape();
    let x = dense_solve(&system.dense_matrix(), system.z.as_slice())?;
    CoeffTensor::new(disc.tensor_basis(), Mat::from_col_major(rows, cols, x))
}

/// Errors of `phi` against `exact` at time `t_eval`: probe rows plus l²
/// and l∞ over a `grid x grid` uniform grid.
pub fn error_table<T: Real>(
    phi: &CoeffTensor<T>,
    exact: &(dyn Fn(T, T, T) -> T + Send + Sync),
    probes: &[(f64, f64)],
    t_eval: f64,
    grid: usize,
) -> Result<ErrorTable> {
    let ev = SliceEvaluator::new(phi, T::lit(t_eval))?;
    let t = T::lit(t_eval);
    let err = |a: f64, b: f64| -> f64 {
        let (a, b) = (T::lit(a), T::lit(b));
        (exact(a, b, t) - ev.eval(a, b)).abs().approx_f64()
    };
    let probes = probes.iter().map(|&(a, b)| (a, b, err(a, b))).collect();
    let coords = grid_coords(grid);
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for &a in &coords {
        for &b in &coords {
            let e = err(a, b);
            sum += e * e;
            max = max.max(e);
        }
    }
    Ok(ErrorTable {
        t_eval,
        probes,
        l2: sum.sqrt(),
        linf: max,
        grid_points: coords.len(),
    })
}

/// Largest errors on the spatial boundary at `t_eval`, on the initial
/// slice, and in the interior at `t_eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFidelity {
    /// Edges `η=0, η=1, ξ=0, ξ=1`.
    pub edges: [f64; 4],
    pub initial: f64,
    pub interior: f64,
}

pub fn boundary_fidelity<T: Real>(
    phi: &CoeffTensor<T>,
    exact: &(dyn Fn(T, T, T) -> T + Send + Sync),
    t_eval: f64,
    grid: usize,
) -> Result<BoundaryFidelity> {
    let coords = grid_coords(grid);
    let at = |ev: &SliceEvaluator<'_, T>, a: f64, b: f64, t: f64| -> f64 {
        let (ta, tb, tt) = (T::lit(a), T::lit(b), T::lit(t));
        (exact(ta, tb, tt) - ev.eval(ta, tb)).abs().approx_f64()
    };
    let ev = SliceEvaluator::new(phi, T::lit(t_eval))?;
    let mut edges = [0.0f64; 4];
    for &s in &coords {
        edges[0] = edges[0].max(at(&ev, 0.0, s, t_eval));
        edges[1] = edges[1].max(at(&ev, 1.0, s, t_eval));
        edges[2] = edges[2].max(at(&ev, s, 0.0, t_eval));
        edges[3] = edges[3].max(at(&ev, s, 1.0, t_eval));
    }
    let mut interior = 0.0f64;
    for &a in &coords[1..coords.len() - 1] {
        for &b in &coords[1..coords.len() - 1] {
            interior = interior.max(at(&ev, a, b, t_eval));
        }
    }
    let ev0 = SliceEvaluator::new(phi, T::zero())?;
    let mut initial = 0.0f64;
    for &a in &coords {
        for &b in &coords {
            initial = initial.max(at(&ev0, a, b, 0.0));
        }
    }
    Ok(BoundaryFidelity {
        edges,
        initial,
        interior,
    })
}

/// Max of `|Φ_tt + 2λ₁Φ_t + λ₂²Φ − Φ_ηη − Φ_ξξ − F|` over `points`, with
/// all derivatives taken in coefficient space.
pub fn pde_residual<T: Real>(
    phi: &CoeffTensor<T>,
    problem: &TelegraphProblem<T>,
    disc: &Discretization<T>,
    points: &[(T, T, T)],
) -> Result<T> {
    let c = phi.matrix();
    let dt = &disc.time.diff;
    let ct = c.matmul(dt);
    let mut res = ct.matmul(dt);
    res.axpy(T::lit(2.0) * problem.damping, &ct);
    res.axpy(problem.reaction * problem.reaction, c);
    let de = disc.eta.diff.transpose();
    let dx = disc.xi.diff.transpose();
    let d_eta2 = KronOperator::new(de.matmul(&de), Mat::identity(disc.xi.size()));
    let d_xi2 = KronOperator::new(Mat::identity(disc.eta.size()), dx.matmul(&dx));
    res.axpy(-T::one(), &d_eta2.apply_cols(c));
    res.axpy(-T::one(), &d_xi2.apply_cols(c));
    let coeffs = CoeffTensor::new(disc.tensor_basis(), res)?;
    let mut worst = T::zero();
    for &(a, b, t) in points {
        let v = coeffs.eval(&[a, b, t])? - (problem.forcing)(a, b, t);
        worst = Real::max(worst, v.abs());
    }
    Ok(worst)
}

/// Interior sample points avoiding the dyadic cell edges of `disc`.
pub fn interior_samples<T: Real>(disc: &Discretization<T>, per_dim: usize) -> Vec<(T, T, T)> {
    let cells = [&disc.eta.basis, &disc.xi.basis, &disc.time.basis]
        .iter()
        .map(|b| b.translates())
        .max()
        .unwrap_or(1);
    // midpoints of a grid finer than, and offset from, every cell edge
    let n = per_dim.max(1);
    let coord = |i: usize| -> T {
        let c = i % cells;
        let frac = (i / cells) as f64;
        let m = n.div_ceil(cells).max(1) as f64;
        T::lit((c as f64 + (frac + 0.37) / (m + 0.2)) / cells as f64)
    };
    let mut pts = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                pts.push((coord(i), coord(j), coord(l)));
            }
        }
    }
    pts
}

/// Evaluates the expansion at `(η, ξ, t)` through the full basis vectors;
/// slower than [`SliceEvaluator`] but independent of it.
pub fn eval_full<T: Real>(phi: &CoeffTensor<T>, eta: T, xi: T, t: T) -> T {
    let dims = phi.basis().dims();
    let ve = basis_vector(&dims[0], eta);
    let vx = basis_vector(&dims[1], xi);
    let vt = basis_vector(&dims[2], t);
    let ct = phi.matrix().matvec(&vt);
    let sx = vx.len();
    let mut acc = T::zero();
    for (a, &va) in ve.iter().enumerate() {
        for (b, &vb) in vx.iter().enumerate() {
            acc += va * vb * ct[a * sx + b];
        }
    }
    acc
}
