//! Legendre wavelets on [0, 1] and their tensor products.
//!
//! A [`WaveletBasis`] with resolution `k` and order `M` has `2^(k-1)`
//! translates, each carrying `M` shifted Legendre polynomials on a dyadic
//! cell. Functions are indexed translate-major:
//! `(n=1, m=0..M), (n=2, m=0..M), ...`. Multi-dimensional coefficients are
//! flattened with the last dimension varying fastest.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaveletBasis {
    k: u32,
    order: usize,
}

impl WaveletBasis {
    /// `k >= 1` is the resolution level, `order >= 1` the number of
    /// polynomial degrees per translate.
    pub fn new(k: u32, order: usize) -> Result<Self> {
        if k == 0 || order == 0 {
            return Err(Error::InvalidBasis(format!(
                "need k >= 1 and M >= 1, got k={k}, M={order}"
            )));
        }
        if k > 20 {
            return Err(Error::InvalidBasis(format!("k={k} is too large")));
        }
        Ok(WaveletBasis { k, order })
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Polynomial order count `M`.
    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of translates, `2^(k-1)`.
    #[inline]
    pub fn translates(&self) -> usize {
        1usize << (self.k - 1)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.translates() * self.order
    }

    /// Flat index of `(n, m)` with `n` 1-based.
    #[inline]
    pub fn index(&self, n: usize, m: usize) -> usize {
        (n - 1) * self.order + m
    }

    /// Inverse of [`index`](Self::index).
    #[inline]
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.order + 1, i % self.order)
    }

    /// Support `[a, b)` of translate `n` as exact binary fractions.
    pub fn cell<T: Real>(&self, n: usize) -> (T, T) {
        let w = T::one() / T::from_usize_exact(self.translates());
        (T::from_usize_exact(n - 1) * w, T::from_usize_exact(n) * w)
    }

    /// Active translate at `x`; `x = 1` belongs to the last one.
    pub fn translate_of<T: Real>(&self, x: T) -> Option<usize> {
        if !(x >= T::zero() && x <= T::one()) {
            return None;
        }
        let scaled = (x * T::from_usize_exact(self.translates())).floor();
        let n = scaled.to_usize().unwrap_or(0) + 1;
        Some(n.min(self.translates()))
    }

    fn check(&self, n: usize, m: usize) -> Result<()> {
        if n == 0 || n > self.translates() || m >= self.order {
            return Err(Error::Domain(format!(
                "wavelet (n={n}, m={m}) outside 1..={} x 0..{}",
                self.translates(),
                self.order
            )));
        }
        Ok(())
    }
}

/// Ordered list of per-dimension bases (η, ξ, t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorBasis {
    dims: Vec<WaveletBasis>,
}

impl TensorBasis {
    pub fn new(dims: Vec<WaveletBasis>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidBasis(format!(
                "tensor basis needs 1 to 3 dimensions, got {}",
                dims.len()
            )));
        }
        Ok(TensorBasis { dims })
    }

    pub fn dims(&self) -> &[WaveletBasis] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn size(&self) -> usize {
        self.dims.iter().map(|b| b.size()).product()
    }

    /// Flat index of a multi-index, last dimension fastest.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.dims.len());
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, b)| acc * b.size() + i)
    }

    /// Shape of the coefficient matrix: rows span all dimensions but the
    /// last, columns the last. One-dimensional tensors are a single column.
    pub fn matrix_shape(&self) -> (usize, usize) {
        match self.dims.len() {
            1 => (self.dims[0].size(), 1),
            _ => {
                let (last, lead) = self.dims.split_last().unwrap();
                (lead.iter().map(|b| b.size()).product(), last.size())
            }
        }
    }
}

/// Expansion coefficients over a [`TensorBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor<T> {
    basis: TensorBasis,
    data: Mat<T>,
}

impl<T: Real> CoeffTensor<T> {
    pub fn new(basis: TensorBasis, data: Mat<T>) -> Result<Self> {
        if data.shape() != basis.matrix_shape() {
            return Err(Error::Shape(format!(
                "coefficient matrix {:?} does not match basis {:?}",
                data.shape(),
                basis.matrix_shape()
            )));
        }
        Ok(CoeffTensor { basis, data })
    }

    pub fn zeros(basis: TensorBasis) -> Self {
        let (r, c) = basis.matrix_shape();
        CoeffTensor {
            basis,
            data: Mat::zeros(r, c),
        }
    }

    pub fn basis(&self) -> &TensorBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.data
    }

    pub fn into_matrix(self) -> Mat<T> {
        self.data
    }

    /// Coefficient at a multi-index.
    pub fn get(&self, idx: &[usize]) -> T {
        let flat = self.basis.flat_index(idx);
        let (_, cols) = self.data.shape();
        self.data[(flat / cols, flat % cols)]
    }

    /// Coefficients flattened with the last dimension fastest.
    pub fn to_flat(&self) -> Vec<T> {
        let (r, c) = self.data.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.all_finite()
    }

    /// Value of the truncated series at `point`.
    pub fn eval(&self, point: &[T]) -> Result<T> {
        eval_expansion(self, point)
    }
}

/// Shifted Legendre polynomial: `P_m(2x - 1)`.
pub fn legendre_poly<T: Real>(m: usize, x: T) -> T {
    legendre_std(m, T::lit(2.0) * x - T::one())
}

/// Standard Legendre polynomial on [-1, 1] by the three-term recurrence.
pub fn legendre_std<T: Real>(m: usize, s: T) -> T {
    let mut p0 = T::one();
    if m == 0 {
        return p0;
    }
    let mut p1 = s;
    for j in 1..m {
        let jj = T::from_usize_exact(j);
        let p2 = ((jj + jj + T::one()) * s * p1 - jj * p0) / (jj + T::one());
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_0(s) .. P_{count-1}(s)` in one pass.
pub fn legendre_all<T: Real>(count: usize, s: T) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(T::one());
    if count == 1 {
        return out;
    }
    out.push(s);
    for j in 1..count - 1 {
        let jj = T::from_usize_exact(j);
        let next = ((jj + jj + T::one()) * s * out[j] - jj * out[j - 1]) / (jj + T::one());
        out.push(next);
    }
    out
}

/// Normalisation `sqrt(m + 1/2) * 2^(k/2)`.
pub(crate) fn wavelet_scale<T: Real>(basis: &WaveletBasis, m: usize) -> T {
    // one rounding: sqrt((2m + 1) 2^(k-1))
    T::from_usize_exact((2 * m + 1) << (basis.k() - 1)).sqrt()
}

/// Local coordinate `2^k x - n̂` in [-1, 1] for translate `n`.
fn local_coord<T: Real>(basis: &WaveletBasis, n: usize, x: T) -> T {
    let two_k = T::from_usize_exact(1usize << basis.k());
    two_k * x - T::from_usize_exact(2 * n - 1)
}

/// Value of the single wavelet `(n, m)` at `x`.
pub fn wavelet_eval<T: Real>(basis: &WaveletBasis, n: usize, m: usize, x: T) -> Result<T> {
    basis.check(n, m)?;
    match basis.translate_of(x) {
        Some(active) if active == n => {
            Ok(wavelet_scale::<T>(basis, m) * legendre_std(m, local_coord(basis, n, x)))
        }
        _ => Ok(T::zero()),
    }
}

/// All basis functions at `x`. Points outside [0, 1] give zeros.
pub fn basis_vector<T: Real>(basis: &WaveletBasis, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); basis.size()];
    if let Some(n) = basis.translate_of(x) {
        fill_active(
            basis,
            n,
            x,
            &mut out[basis.index(n, 0)..basis.index(n, 0) + basis.order()],
        );
    }
    out
}

/// Active translate and its `M` values; cheaper than the full vector.
pub fn active_values<T: Real>(basis: &WaveletBasis, x: T) -> Option<(usize, Vec<T>)> {
    let n = basis.translate_of(x)?;
    let mut vals = vec![T::zero(); basis.order()];
    fill_active(basis, n, x, &mut vals);
    Some((n, vals))
}

fn fill_active<T: Real>(basis: &WaveletBasis, n: usize, x: T, out: &mut [T]) {
    let p = legendre_all(basis.order(), local_coord(basis, n, x));
    for (m, (o, pm)) in out.iter_mut().zip(p).enumerate() {
        *o = wavelet_scale::<T>(basis, m) * pm;
    }
}

/// Gauss–Legendre rule on the reference interval [0, 1], applied cell by
/// cell.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// `points` Gauss nodes per cell, computed by Newton's method in `T`.
    pub fn gauss_legendre(points: usize) -> Self {
        assert!(points >= 1, "need at least one node");
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for i in 0..points {
            // Tricomi initial guess, then polish.
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (points as f64 + 0.5)).cos();
            let mut s = T::lit(guess);
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(points, s);
                let step = p / d;
                s -= step;
                dp = d;
                if step.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre_and_derivative(points, s);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - s * s) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes.push((s + T::one()) * T::lit(0.5));
            weights.push(w * T::lit(0.5));
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        QuadratureRule { nodes, weights }
    }

    /// The default rule for a basis: `max(M + 2, 10)` points per cell.
    pub fn for_basis(basis: &WaveletBasis) -> Self {
        Self::gauss_legendre(default_points(basis.order()))
    }

    /// Rule adequate for every basis in `bases`.
    pub fn for_bases(bases: &[WaveletBasis]) -> Self {
        let m = bases.iter().map(|b| b.order()).max().unwrap_or(1);
        Self::gauss_legendre(default_points(m))
    }

    pub fn points_per_cell(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `∫_a^b f` with this rule on a single interval.
    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + h * x))
            .sum::<T>()
            * h
    }

    /// Composite rule over the dyadic cells of `basis`: global nodes and
    /// weights, cells in increasing order.
    pub fn composite(&self, basis: &WaveletBasis) -> (Vec<T>, Vec<T>) {
        let cells = basis.translates();
        let mut xs = Vec::with_capacity(cells * self.nodes.len());
        let mut ws = Vec::with_capacity(cells * self.nodes.len());
        for n in 1..=cells {
            let (a, b) = basis.cell::<T>(n);
            let h = b - a;
            for (&x, &w) in self.nodes.iter().zip(&self.weights) {
                xs.push(a + h * x);
                ws.push(w * h);
            }
        }
        (xs, ws)
    }
}

pub fn default_points(order: usize) -> usize {
    (order + 2).max(10)
}

fn legendre_and_derivative<T: Real>(n: usize, s: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = s;
    for j in 1..n {
        let jj = T::from_usize_exact(j);
        let p2 = ((jj + jj + T::one()) * s * p1 - jj * p0) / (jj + T::one());
        p0 = p1;
        p1 = p2;
    }
    let nn = T::from_usize_exact(n);
    let d = nn * (s * p1 - p0) / (s * s - T::one());
    (p1, d)
}

/// Basis values at the composite quadrature nodes of one dimension, with
/// the weights folded in: row `q` holds `w_q * ψ_i(x_q)`.
struct Tabulation<T> {
    xs: Vec<T>,
    weighted: Mat<T>,
}

impl<T: Real> Tabulation<T> {
    fn new(basis: &WaveletBasis, quad: &QuadratureRule<T>) -> Self {
        let (xs, ws) = quad.composite(basis);
        let per = quad.points_per_cell();
        let mut weighted = Mat::zeros(xs.len(), basis.size());
        for (q, (&x, &w)) in xs.iter().zip(&ws).enumerate() {
            // nodes are interior, so the cell is known without searching
            let n = q / per + 1;
            let p = legendre_all(basis.order(), local_coord(basis, n, x));
            for m in 0..basis.order() {
                weighted[(q, basis.index(n, m))] = w * wavelet_scale::<T>(basis, m) * p[m];
            }
        }
        Tabulation { xs, weighted }
    }
}

fn check_finite<T: Real>(v: T, location: &[T]) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            location: location.iter().map(|x| x.approx_f64()).collect(),
            value: v.approx_f64(),
        })
    }
}

/// Orthogonal projection of `f` onto a 1D basis. Cells are summed in
/// increasing order, nodes within a cell in increasing order.
pub fn project_1d<T: Real>(
    f: impl Fn(T) -> T,
    basis: &WaveletBasis,
    quad: &QuadratureRule<T>,
) -> Result<CoeffTensor<T>> {
    let tab = Tabulation::new(basis, quad);
    let mut vals = Vec::with_capacity(tab.xs.len());
    for &x in &tab.xs {
        vals.push(check_finite(f(x), &[x])?);
    }
    let c = tab.weighted.vecmat(&vals);
    CoeffTensor::new(TensorBasis::new(vec![*basis])?, Mat::column(&c))
}

/// Projection onto `basis_eta ⊗ basis_xi`; the result is a
/// `size_eta x size_xi` matrix.
pub fn project_2d<T: Real>(
    f: impl Fn(T, T) -> T,
    basis_eta: &WaveletBasis,
    basis_xi: &WaveletBasis,
    quad: &QuadratureRule<T>,
) -> Result<CoeffTensor<T>> {
    let te = Tabulation::new(basis_eta, quad);
    let tx = Tabulation::new(basis_xi, quad);
    let samples = sample_2d(&f, &te.xs, &tx.xs)?;
    let c = te
        .weighted
        .transpose()
        .matmul(&samples)
        .matmul(&tx.weighted);
    CoeffTensor::new(TensorBasis::new(vec![*basis_eta, *basis_xi])?, c)
}

fn sample_2d<T: Real>(f: &impl Fn(T, T) -> T, xe: &[T], xx: &[T]) -> Result<Mat<T>> {
    let mut s = Mat::zeros(xe.len(), xx.len());
    for (j, &b) in xx.iter().enumerate() {
        for (i, &a) in xe.iter().enumerate() {
            s[(i, j)] = check_finite(f(a, b), &[a, b])?;
        }
    }
    Ok(s)
}

/// Projection onto `η ⊗ ξ ⊗ t`, stored with `(η, ξ)` pairs as rows
/// (η-major) and the `t` index as columns.
pub fn project_3d<T: Real>(
    f: impl Fn(T, T, T) -> T,
    basis_eta: &WaveletBasis,
    basis_xi: &WaveletBasis,
    basis_t: &WaveletBasis,
    quad: &QuadratureRule<T>,
) -> Result<CoeffTensor<T>> {
    let te = Tabulation::new(basis_eta, quad);
    let tx = Tabulation::new(basis_xi, quad);
    let tt = Tabulation::new(basis_t, quad);
    let (se, sx, st) = (basis_eta.size(), basis_xi.size(), basis_t.size());
    let wet = te.weighted.transpose();
    let mut out = Mat::zeros(se * sx, st);
    for (q, &t) in tt.xs.iter().enumerate() {
        let samples = sample_2d(&|a, b| f(a, b, t), &te.xs, &tx.xs).map_err(|e| match e {
            Error::Evaluation {
                mut location,
                value,
            } => {
                location.push(t.approx_f64());
                Error::Evaluation { location, value }
            }
            other => other,
        })?;
        let slab = wet.matmul(&samples).matmul(&tx.weighted);
        for j in 0..st {
            let wt = tt.weighted[(q, j)];
            if wt == T::zero() {
                continue;
            }
            let col = out.col_mut(j);
            for a in 0..se {
                for b in 0..sx {
                    col[a * sx + b] += wt * slab[(a, b)];
                }
            }
        }
    }
    CoeffTensor::new(
        TensorBasis::new(vec![*basis_eta, *basis_xi, *basis_t])?,
        out,
    )
}

/// Evaluates the truncated series. For three dimensions this computes
/// `Ψᵀ(η,ξ) C Ψ(t)` using only the active translates.
pub fn eval_expansion<T: Real>(c: &CoeffTensor<T>, point: &[T]) -> Result<T> {
    let dims = c.basis().dims();
    if point.len() != dims.len() {
        return Err(Error::Shape(format!(
            "point has {} coordinates, tensor has {} dimensions",
            point.len(),
            dims.len()
        )));
    }
    let data = c.matrix();
    let active: Vec<Option<(usize, Vec<T>)>> = dims
        .iter()
        .zip(point)
        .map(|(b, &x)| active_values(b, x))
        .collect();
    if active.iter().any(|a| a.is_none()) {
        return Ok(T::zero());
    }
    let active: Vec<(usize, Vec<T>)> = active.into_iter().map(Option::unwrap).collect();
    let base = |d: usize| dims[d].index(active[d].0, 0);
    let val = match dims.len() {
        1 => (0..dims[0].order())
            .map(|m| data[(base(0) + m, 0)] * active[0].1[m])
            .sum(),
        2 => {
            let mut acc = T::zero();
            for (a, &va) in active[0].1.iter().enumerate() {
                for (b, &vb) in active[1].1.iter().enumerate() {
                    acc += va * data[(base(0) + a, base(1) + b)] * vb;
                }
            }
            acc
        }
        _ => {
            let sx = dims[1].size();
            let mut acc = T::zero();
            for (a, &va) in active[0].1.iter().enumerate() {
                for (b, &vb) in active[1].1.iter().enumerate() {
                    let row = (base(0) + a) * sx + base(1) + b;
                    let inner: T = active[2]
                        .1
                        .iter()
                        .enumerate()
                        .map(|(m, &vt)| data[(row, base(2) + m)] * vt)
                        .sum();
                    acc += va * vb * inner;
                }
            }
            acc
        }
    };
    Ok(val)
}

/// Reusable evaluator for a 3D expansion at a fixed time: collapses the
/// time direction once, then each `(η, ξ)` lookup costs `O(M^2)`.
pub struct SliceEvaluator<'a, T> {
    basis_eta: &'a WaveletBasis,
    basis_xi: &'a WaveletBasis,
    collapsed: Vec<T>,
}

impl<'a, T: Real> SliceEvaluator<'a, T> {
    pub fn new(c: &'a CoeffTensor<T>, t: T) -> Result<Self> {
        let dims = c.basis().dims();
        if dims.len() != 3 {
            return Err(Error::Shape("slice evaluator needs a 3D tensor".into()));
        }
        let pt = basis_vector(&dims[2], t);
        Ok(SliceEvaluator {
            basis_eta: &dims[0],
            basis_xi: &dims[1],
            collapsed: c.matrix().matvec(&pt),
        })
    }

    pub fn eval(&self, eta: T, xi: T) -> T {
        let (Some((ne, ve)), Some((nx, vx))) = (
            active_values(self.basis_eta, eta),
            active_values(self.basis_xi, xi),
        ) else {
            return T::zero();
        };
        let sx = self.basis_xi.size();
        let be = self.basis_eta.index(ne, 0);
        let bx = self.basis_xi.index(nx, 0);
        let mut acc = T::zero();
        for (a, &va) in ve.iter().enumerate() {
            for (b, &vb) in vx.iter().enumerate() {
                acc += va * vb * self.collapsed[(be + a) * sx + bx + b];
            }
        }
        acc
    }
}
