//! Unpreconditioned BiCGSTAB over an abstract operator, plus a dense LU
//! fallback.

use thiserror::Error;

use crate::matrix::Mat;
use crate::scalar::Real;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch: operator has {op}, right-hand side has {rhs}")]
    DimensionMismatch { op: usize, rhs: usize },

    #[error("BiCGSTAB breakdown at iteration {iteration}")]
    Breakdown { iteration: usize, history: Vec<f64> },

    #[error("BiCGSTAB did not converge in {iterations} iterations (relative residual {last:e})")]
    NotConverged {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("matrix is singular to working precision (pivot {pivot:e} in column {column})")]
    Singular { pivot: f64, column: usize },

    #[error("dense solve of dimension {dim} exceeds the cap of {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
}

impl SolverError {
    /// Residual history if the error came from an iterative solve.
    pub fn history(&self) -> Option<&[f64]> {
        match self {
            SolverError::Breakdown { history, .. } | SolverError::NotConverged { history, .. } => {
                Some(history)
            }
            _ => None,
        }
    }
}

/// A square linear map `y = A x`. Must be safe to call repeatedly.
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

/// Wraps a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<T, F: Fn(&[T], &mut [T])> LinearOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        (self.f)(x, y)
    }
}

impl<T: Real> LinearOperator<T> for Mat<T> {
    fn dim(&self) -> usize {
        assert!(self.is_square(), "operator matrix must be square");
        self.nrows()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(&self.matvec(x));
    }
}

/// Right preconditioner `z = M⁻¹ r`.
pub trait Preconditioner<T> {
    fn apply(&self, r: &[T], z: &mut [T]);
}

pub struct Identity;

impl<T: Copy> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Target for `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    /// `None` means ten times the dimension.
    pub max_iter: Option<usize>,
    pub restart_on_breakdown: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: None,
            restart_on_breakdown: true,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        SolverConfig {
            tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == Some(0) {
            return Err(SolverError::InvalidConfig("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    fn iteration_cap(&self, dim: usize) -> usize {
        self.max_iter.unwrap_or(10 * dim.max(1))
    }
}

#[derive(Debug, Clone)]
pub struct KrylovSolution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// `‖r_k‖ / ‖b‖` per iteration as produced by the recurrence.
    pub residual_history: Vec<f64>,
    pub restarts: usize,
}

impl<T> KrylovSolution<T> {
    pub fn final_residual(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("history is never empty")
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `‖b − A x‖ / ‖b‖` computed from scratch.
pub fn relative_residual<T: Real>(op: &impl LinearOperator<T>, x: &[T], b: &[T]) -> T {
    let mut ax = vec![T::zero(); b.len()];
    op.apply(x, &mut ax);
    let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let nb = norm(b);
    if nb == T::zero() {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

pub fn bicgstab<T: Real>(
    op: &impl LinearOperator<T>,
    rhs: &[T],
    config: &SolverConfig,
) -> Result<KrylovSolution<T>, SolverError> {
    bicgstab_preconditioned(op, &Identity, rhs, config)
}

/// Right-preconditioned BiCGSTAB from a zero initial guess with shadow
/// residual `r̂ = r₀`.
pub fn bicgstab_preconditioned<T: Real>(
    op: &impl LinearOperator<T>,
    precond: &impl Preconditioner<T>,
    rhs: &[T],
    config: &SolverConfig,
) -> Result<KrylovSolution<T>, SolverError> {
    config.validate()?;
    let n = op.dim();
    if rhs.len() != n {
        return Err(SolverError::DimensionMismatch {
            op: n,
            rhs: rhs.len(),
        });
    }
    let cap = config.iteration_cap(n);
    let tol = T::lit(config.tol);
    let tiny = T::lit(1e-30);
    let bnorm = norm(rhs);
    let mut x = vec![T::zero(); n];
    let mut history = Vec::new();
    if bnorm == T::zero() {
        history.push(0.0);
        return Ok(KrylovSolution {
            x,
            iterations: 1,
            residual_history: history,
            restarts: 0,
        });
    }

    let mut r = rhs.to_vec();
    let mut r_hat = r.clone();
    let mut p = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut p_hat = vec![T::zero(); n];
    let mut s_hat = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let (mut rho_old, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut restarts = 0;

    let mut it = 0;
    while it < cap {
        it += 1;
        let rho = dot(&r_hat, &r);
        let breakdown_rho = rho.abs() <= tiny * norm(&r_hat) * norm(&r);
        if breakdown_rho || omega.abs() <= tiny {
            if config.restart_on_breakdown && restarts == 0 {
                restarts += 1;
                let mut ax = vec![T::zero(); n];
                op.apply(&x, &mut ax);
                for i in 0..n {
                    r[i] = rhs[i] - ax[i];
                }
                r_hat.copy_from_slice(&r);
                p.iter_mut().for_each(|e| *e = T::zero());
                v.iter_mut().for_each(|e| *e = T::zero());
                rho_old = T::one();
                alpha = T::one();
                omega = T::one();
                it -= 1;
                continue;
            }
            return Err(SolverError::Breakdown {
                iteration: it,
                history,
            });
        }
        let beta = (rho / rho_old) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.apply(&p, &mut p_hat);
        op.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() <= tiny * norm(&r_hat) * norm(&v) {
            if config.restart_on_breakdown && restarts == 0 {
                restarts += 1;
                let mut ax = vec![T::zero(); n];
                op.apply(&x, &mut ax);
                for i in 0..n {
                    r[i] = rhs[i] - ax[i];
                }
                r_hat.copy_from_slice(&r);
                p.iter_mut().for_each(|e| *e = T::zero());
                v.iter_mut().for_each(|e| *e = T::zero());
                rho_old = T::one();
                alpha = T::one();
                omega = T::one();
                it -= 1;
                continue;
            }
            return Err(SolverError::Breakdown {
                iteration: it,
                history,
            });
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let snorm = norm(&s) / bnorm;
        if snorm <= tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            history.push(snorm.approx_f64());
            return Ok(KrylovSolution {
                x,
                iterations: it,
                residual_history: history,
                restarts,
            });
        }
        precond.apply(&s, &mut s_hat);
        op.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == T::zero() {
            T::zero()
        } else {
            dot(&t, &s) / tt
        };
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        rho_old = rho;
        let rel = norm(&r) / bnorm;
        history.push(rel.approx_f64());
        if !rel.is_finite() {
            return Err(SolverError::Breakdown {
                iteration: it,
                history,
            });
        }
        if rel <= tol {
            return Ok(KrylovSolution {
                x,
                iterations: it,
                residual_history: history,
                restarts,
            });
        }
    }
    let last = history.last().copied().unwrap_or(f64::NAN);
    Err(SolverError::NotConverged {
        iterations: it,
        last,
        history,
    })
}

/// Default size limit for [`dense_solve`].
pub const DENSE_CAP: usize = 4096;

/// Gaussian elimination with partial pivoting.
pub fn dense_solve<T: Real>(a: &Mat<T>, rhs: &[T]) -> Result<Vec<T>, SolverError> {
    dense_solve_capped(a, rhs, DENSE_CAP)
}

pub fn dense_solve_capped<T: Real>(
    a: &Mat<T>,
    rhs: &[T],
    cap: usize,
) -> Result<Vec<T>, SolverError> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(SolverError::DimensionMismatch {
            op: n,
            rhs: a.ncols(),
        });
    }
    if rhs.len() != n {
        return Err(SolverError::DimensionMismatch {
            op: n,
            rhs: rhs.len(),
        });
    }
    if n > cap {
        return Err(SolverError::TooLarge { dim: n, cap });
    }
    let scale = a.max_abs();
    let mut lu = a.clone();
    let mut b = rhs.to_vec();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == T::zero() || best <= T::epsilon() * scale * T::lit(1e-3) {
            return Err(SolverError::Singular {
                pivot: best.approx_f64(),
                column: k,
            });
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            b.swap(k, piv);
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            lu[(i, k)] /= d;
        }
        for j in k + 1..n {
            let ukj = lu[(k, j)];
            if ukj == T::zero() {
                continue;
            }
            let (lcol, ucol) = split_cols(&mut lu, k, j);
            for i in k + 1..n {
                ucol[i] -= lcol[i] * ukj;
            }
        }
        let bk = b[k];
        for i in k + 1..n {
            b[i] -= lu[(i, k)] * bk;
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= lu[(k, j)] * b[j];
        }
        b[k] = acc / lu[(k, k)];
    }
    Ok(b)
}

// Disjoint borrows of column `k` (read) and column `j > k` (write).
fn split_cols<T: Real>(m: &mut Mat<T>, k: usize, j: usize) -> (&[T], &mut [T]) {
    let rows = m.nrows();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(j * rows);
    (&head[k * rows..(k + 1) * rows], &mut tail[..rows])
}
