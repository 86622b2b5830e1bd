//! Kronecker products, column-stacking `vec`, and matrix-free Kronecker
//! operators.
//!
//! Convention: `vec` stacks columns, so `(Bᵀ ⊗ A) vec(X) = vec(A X B)`.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::opmat::OperatorSet;
use crate::scalar::Real;

/// Block `(i, j)` of the result is `a[i][j] * b`.
pub fn kron<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn vec<T: Real>(x: &Mat<T>) -> Vec<T> {
    x.as_slice().to_vec()
}

pub fn unvec<T: Real>(v: &[T], rows: usize, cols: usize) -> Result<Mat<T>> {
    if v.len() != rows * cols {
        return Err(Error::Shape(format!(
            "cannot reshape {} entries into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(Mat::from_col_major(rows, cols, v.to_vec()))
}

/// `left ⊗ right`, applied without forming the product.
#[derive(Debug, Clone)]
pub struct KronOperator<T> {
    left: Mat<T>,
    right: Mat<T>,
    left_identity: bool,
    right_identity: bool,
}

fn is_identity<T: Real>(m: &Mat<T>) -> bool {
    m.is_square() && *m == Mat::identity(m.nrows())
}

impl<T: Real> KronOperator<T> {
    pub fn new(left: Mat<T>, right: Mat<T>) -> Self {
        let left_identity = is_identity(&left);
        let right_identity = is_identity(&right);
        KronOperator {
            left,
            right,
            left_identity,
            right_identity,
        }
    }

    pub fn left(&self) -> &Mat<T> {
        &self.left
    }

    pub fn right(&self) -> &Mat<T> {
        &self.right
    }

    pub fn shape(&self) -> (usize, usize) {
        (
            self.left.nrows() * self.right.nrows(),
            self.left.ncols() * self.right.ncols(),
        )
    }

    pub fn dense(&self) -> Mat<T> {
        kron(&self.left, &self.right)
    }

    pub fn transpose(&self) -> Self {
        KronOperator::new(self.left.transpose(), self.right.transpose())
    }

    /// Applies to a vector indexed `i_left * right.ncols() + i_right`.
    pub fn apply_vec(&self, x: &[T]) -> Vec<T> {
        let (_, cols) = self.shape();
        assert_eq!(x.len(), cols, "kron apply: length mismatch");
        // x read column-major is the right.ncols x left.ncols matrix Xt,
        // and (L ⊗ R) vec(Xt) = vec(R Xt Lᵀ).
        let xt = Mat::from_col_major(self.right.ncols(), self.left.ncols(), x.to_vec());
        let tmp = if self.right_identity {
            xt
        } else {
            self.right.matmul(&xt)
        };
        let out = if self.left_identity {
            tmp
        } else {
            tmp.matmul(&self.left.transpose())
        };
        out.into_vec()
    }

    /// Applies to every column of `c`.
    pub fn apply_cols(&self, c: &Mat<T>) -> Mat<T> {
        let (rows, cols) = self.shape();
        assert_eq!(c.nrows(), cols, "kron apply: row mismatch");
        let mut out = Mat::zeros(rows, c.ncols());
        let lt = self.left.transpose();
        for j in 0..c.ncols() {
            let xt = Mat::from_col_major(self.right.ncols(), self.left.ncols(), c.col(j).to_vec());
            let tmp = if self.right_identity {
                xt
            } else {
                self.right.matmul(&xt)
            };
            let res = if self.left_identity {
                tmp
            } else {
                tmp.matmul(&lt)
            };
            out.col_mut(j).copy_from_slice(res.as_slice());
        }
        out
    }
}

/// Kronecker extensions of the 1D operators to the `(η, ξ)` basis:
/// `Ψ_ξ(η,ξ) = d_xi Ψ(η,ξ)` and so on.
#[derive(Debug, Clone)]
pub struct SpatialOperators<T> {
    /// `I ⊗ D_ξ`
    pub d_xi: KronOperator<T>,
    /// `D_η ⊗ I`
    pub d_eta: KronOperator<T>,
    /// `I ⊗ J_ξ`
    pub int_xi: KronOperator<T>,
    /// `J_η ⊗ I`
    pub int_eta: KronOperator<T>,
}

pub fn lemma2_operators<T: Real>(eta: &OperatorSet<T>, xi: &OperatorSet<T>) -> SpatialOperators<T> {
    let ie = Mat::identity(eta.size());
    let ix = Mat::identity(xi.size());
    SpatialOperators {
        d_xi: KronOperator::new(ie.clone(), xi.diff.clone()),
        d_eta: KronOperator::new(eta.diff.clone(), ix.clone()),
        int_xi: KronOperator::new(ie, xi.int.clone()),
        int_eta: KronOperator::new(eta.int.clone(), ix),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_small() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 1)], 1.0);
        assert_eq!(k[(0, 3)], 2.0);
        assert_eq!(k[(3, 0)], 3.0);
        assert_eq!(k[(2, 3)], 4.0);
        assert_eq!(
            kron(&Mat::<f64>::identity(2), &Mat::identity(3)),
            Mat::identity(6)
        );
    }

    #[test]
    fn vec_is_column_stacking() {
        let x = Mat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(vec(&x), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(&vec(&x), 2, 2).unwrap(), x);
        assert!(unvec(&[1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn operator_matches_dense() {
        let l = Mat::from_rows(&[&[1.0, -2.0, 0.5], &[0.0, 3.0, 1.0]]);
        let r = Mat::from_rows(&[&[2.0, 1.0], &[-1.0, 4.0], &[0.0, 1.5]]);
        let op = KronOperator::new(l, r);
        let x: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let dense = op.dense().matvec(&x);
        let fast = op.apply_vec(&x);
        for (a, b) in dense.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
