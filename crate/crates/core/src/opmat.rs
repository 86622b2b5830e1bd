//! One-dimensional operational matrices and the 2D embedding matrices.
//!
//! Orientation: for the basis vector `Ψ(x)`,
//! `d/dx Ψ(x) = D Ψ(x)` and `∫₀ˣ Ψ(s) ds ≈ J Ψ(x)`. A function with
//! coefficients `c` (so `f = cᵀΨ`) therefore has derivative coefficients
//! `Dᵀc` and antiderivative coefficients `Jᵀc`.

use std::io::Write;
use std::path::Path;

use crate::basis::{legendre_std, project_1d, wavelet_scale, QuadratureRule, WaveletBasis};
use crate::error::Result;
use crate::matrix::Mat;
use crate::scalar::Real;
use crate::tensor::kron;

/// Differentiation matrix `D`: block diagonal, one `M x M` block per
/// translate, `F[r][s] = 2^k sqrt((2r-1)(2s-1))` for `r > s`, `r + s` odd
/// (1-based).
pub fn diff_matrix<T: Real>(basis: &WaveletBasis) -> Mat<T> {
    let m = basis.order();
    let two_k = T::from_usize_exact(1usize << basis.k());
    let mut block = Mat::zeros(m, m);
    for r in 1..=m {
        for s in 1..r {
            if (r + s) % 2 == 1 {
                block[(r - 1, s - 1)] =
                    two_k * T::from_usize_exact((2 * r - 1) * (2 * s - 1)).sqrt();
            }
        }
    }
    let mut d = Mat::zeros(basis.size(), basis.size());
    for n in 0..basis.translates() {
        for i in 0..m {
            for j in 0..m {
                d[(n * m + i, n * m + j)] = block[(i, j)];
            }
        }
    }
    d
}

/// Exact `∫₀ˣ ψ_{n,m}` for any `x` in [0, 1].
pub fn wavelet_antiderivative<T: Real>(basis: &WaveletBasis, n: usize, m: usize, x: T) -> T {
    let (a, b) = basis.cell::<T>(n);
    if x < a {
        return T::zero();
    }
    let two_k = T::from_usize_exact(1usize << basis.k());
    // d(local)/dx = 2^k
    let scale = wavelet_scale::<T>(basis, m) / two_k;
    let s = if x >= b {
        T::one()
    } else {
        two_k * x - T::from_usize_exact(2 * n - 1)
    };
    let prim = if m == 0 {
        s + T::one()
    } else {
        (legendre_std(m + 1, s) - legendre_std(m - 1, s)) / T::from_usize_exact(2 * m + 1)
    };
    scale * prim
}

/// Integration matrix `J`: row `i` holds the projection of `x ↦ ∫₀ˣ ψ_i`.
/// The antiderivative is constant to the right of the wavelet's cell, which
/// couples each translate to all later ones.
pub fn int_matrix<T: Real>(basis: &WaveletBasis, quad: &QuadratureRule<T>) -> Result<Mat<T>> {
    let size = basis.size();
    let mut j = Mat::zeros(size, size);
    for i in 0..size {
        let (n, m) = basis.split(i);
        let row = project_1d(|x| wavelet_antiderivative(basis, n, m, x), basis, quad)?;
        for (col, v) in row.to_flat().into_iter().enumerate() {
            j[(i, col)] = v;
        }
    }
    Ok(j)
}

/// `Λ_i = ∫₀¹ ψ_i`; only the degree-0 entries are nonzero.
pub fn integral_vector<T: Real>(basis: &WaveletBasis) -> Vec<T> {
    // sqrt(1/2) 2^(k/2) times the cell width 2^(1-k)
    let value = (T::lit(2.0) / T::from_usize_exact(1usize << basis.k())).sqrt();
    let mut lam = vec![T::zero(); basis.size()];
    for n in 1..=basis.translates() {
        lam[basis.index(n, 0)] = value;
    }
    lam
}

/// All per-dimension operators for one basis.
#[derive(Debug, Clone)]
pub struct OperatorSet<T> {
    pub basis: WaveletBasis,
    /// Differentiation `D`.
    pub diff: Mat<T>,
    /// Integration `J`.
    pub int: Mat<T>,
    /// `∫₀¹ Ψ`.
    pub integral: Vec<T>,
    /// Coefficients of the constant 1.
    pub ones: Vec<T>,
    /// Coefficients of the identity function `x`.
    pub ramp: Vec<T>,
}

impl<T: Real> OperatorSet<T> {
    pub fn new(basis: &WaveletBasis, quad: &QuadratureRule<T>) -> Result<Self> {
        Ok(OperatorSet {
            basis: *basis,
            diff: diff_matrix(basis),
            int: int_matrix(basis, quad)?,
            integral: integral_vector(basis),
            ones: project_1d(|_| T::one(), basis, quad)?.to_flat(),
            ramp: project_1d(|x| x, basis, quad)?.to_flat(),
        })
    }

    pub fn size(&self) -> usize {
        self.basis.size()
    }
}

/// The six embeddings between 1D and 2D coefficient spaces.
///
/// With `Ψ(η,ξ) = Ψ(η) ⊗ Ψ(ξ)` each matrix `E` satisfies a pointwise
/// identity of the form `lhs(η,ξ) = Ψᵀ(η,ξ) E`.
#[derive(Debug, Clone)]
pub struct EmbeddingSet<T> {
    /// `Ψᵀ(ξ)`, constant in η.
    pub xi_const: Mat<T>,
    /// `η Ψᵀ(ξ)`.
    pub xi_times_eta: Mat<T>,
    /// `η (Λ_ηᵀ ⊗ Ψᵀ(ξ))`: η times the η-mean of a 2D expansion.
    pub eta_mean_times_eta: Mat<T>,
    /// `ξ (Ψᵀ(η) ⊗ Λ_ξᵀ)`.
    pub xi_mean_times_xi: Mat<T>,
    /// `Ψᵀ(η)`, constant in ξ.
    pub eta_const: Mat<T>,
    /// `ξ Ψᵀ(η)`.
    pub eta_times_xi: Mat<T>,
}

pub fn embedding_matrices<T: Real>(eta: &OperatorSet<T>, xi: &OperatorSet<T>) -> EmbeddingSet<T> {
    let ie = Mat::<T>::identity(eta.size());
    let ix = Mat::<T>::identity(xi.size());
    let outer = |a: &[T], b: &[T]| Mat::from_fn(a.len(), b.len(), |i, j| a[i] * b[j]);
    EmbeddingSet {
        xi_const: kron(&Mat::column(&eta.ones), &ix),
        xi_times_eta: kron(&Mat::column(&eta.ramp), &ix),
        eta_mean_times_eta: kron(&outer(&eta.ramp, &eta.integral), &ix),
        xi_mean_times_xi: kron(&ie, &outer(&xi.ramp, &xi.integral)),
        eta_const: kron(&ie, &Mat::column(&xi.ones)),
        eta_times_xi: kron(&ie, &Mat::column(&xi.ramp)),
    }
}

/// Writes a matrix as CSV, row-major, full precision.
pub fn write_matrix_csv<T: Real>(m: &Mat<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.17e}", m[(i, j)].approx_f64()))
            .collect();
        writeln!(f, "{}", row.join(","))?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diff_block_k1_m3() {
        let b = WaveletBasis::new(1, 3).unwrap();
        let d: Mat<f64> = diff_matrix(&b);
        let s3 = 2.0 * 3f64.sqrt();
        let s15 = 2.0 * 15f64.sqrt();
        let expect = Mat::from_rows(&[&[0.0, 0.0, 0.0], &[s3, 0.0, 0.0], &[0.0, s15, 0.0]]);
        assert!(d.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn integral_vector_values() {
        let b = WaveletBasis::new(2, 2).unwrap();
        let lam: Vec<f64> = integral_vector(&b);
        let h = 0.5f64.sqrt();
        for (a, e) in lam.iter().zip([h, 0.0, h, 0.0]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(
            integral_vector::<f64>(&WaveletBasis::new(1, 4).unwrap()),
            vec![1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn first_row_of_int_matrix() {
        let b = WaveletBasis::new(1, 3).unwrap();
        let q = QuadratureRule::for_basis(&b);
        let j: Mat<f64> = int_matrix(&b, &q).unwrap();
        assert!((j[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((j[(0, 1)] - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!(j[(0, 2)].abs() < 1e-15);
    }

    #[test]
    fn antiderivative_reaches_integral() {
        let b = WaveletBasis::new(3, 4).unwrap();
        let lam: Vec<f64> = integral_vector(&b);
        for i in 0..b.size() {
            let (n, m) = b.split(i);
            let v = wavelet_antiderivative(&b, n, m, 1.0f64);
            assert!((v - lam[i]).abs() < 1e-14, "i = {i}");
        }
    }
}
