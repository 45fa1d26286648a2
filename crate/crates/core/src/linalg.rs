//! Dense row-major matrices and the norms the bounds are stated in.
//!
//! Vectors are plain slices. A matrix of samples stores one sample per row,
//! so `‖X‖_{p,∞}` is the largest row p-norm.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Result};
use crate::exponent::Exponent;
use crate::scalar::Scalar;

/// Relative tolerance of the spectral-norm power iteration.
pub const SPECTRAL_TOLERANCE: f64 = 1e-10;
/// Iteration cap of the spectral-norm power iteration.
pub const SPECTRAL_MAX_ITERS: usize = 10_000;

/// Which norm to take of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "p")]
pub enum NormKind {
    /// Square root of the sum of squared entries.
    Frobenius,
    /// Largest row ℓ1-norm, `‖·‖_{1,∞}`.
    GroupOneInf,
    /// Sum of row ℓ2-norms, `‖·‖_{2,1}`.
    GroupTwoOne,
    /// Largest singular value.
    Spectral,
    /// Entrywise ℓp-norm of the flattened matrix.
    VectorP(Exponent),
}

/// Dense `rows × cols` matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// Wraps row-major `data`; rejects empty shapes and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!("matrix must be at least 1x1, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(mismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(mismatch("ragged rows"));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    /// Builds from `f64` rows, converting to `T`.
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let converted: Vec<Vec<T>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| T::of(v)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be at least 1x1");
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.row_iter().map(<[T]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scale(&mut self, c: T) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut m = self.clone();
        m.scale(c);
        m
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(mismatch("matrix shapes differ"));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// `A·x`.
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(mismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `out = A·x` without shape checks beyond debug assertions.
    #[inline]
    pub fn matvec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.row_iter()) {
            *o = dot(row, x);
        }
    }

    /// `out = Aᵀ·y`.
    #[inline]
    pub fn matvec_transposed_into(&self, y: &[T], out: &mut [T]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|v| *v = T::zero());
        for (&yi, row) in y.iter().zip(self.row_iter()) {
            if yi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(row) {
                *o += yi * a;
            }
        }
    }

    /// `self += alpha · u vᵀ`.
    pub fn add_outer(&mut self, alpha: T, u: &[T], v: &[T]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (i, &ui) in u.iter().enumerate() {
            let s = alpha * ui;
            if s == T::zero() {
                continue;
            }
            for (a, &vj) in self.row_mut(i).iter_mut().zip(v) {
                *a += s * vj;
            }
        }
    }

    pub fn norm(&self, kind: NormKind) -> Result<T> {
        matrix_norm(self, kind)
    }
}

impl<T: Scalar> TryFrom<Vec<Vec<T>>> for DenseMatrix<T> {
    type Error = crate::error::Error;

    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl<T: Scalar> From<DenseMatrix<T>> for Vec<Vec<T>> {
    fn from(m: DenseMatrix<T>) -> Self {
        m.to_rows()
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

fn p_norm_unchecked<T: Scalar>(v: &[T], p: Exponent) -> T {
    match p {
        Exponent::Infinity => v.iter().fold(T::zero(), |m, x| m.max(x.abs())),
        Exponent::Finite(q) if q == 1.0 => v.iter().map(|x| x.abs()).sum(),
        Exponent::Finite(q) if q == 2.0 => {
            // Scale by the largest magnitude so squares cannot overflow.
            let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if scale == T::zero() {
                return T::zero();
            }
            let s: T = v.iter().map(|&x| (x / scale) * (x / scale)).sum();
            scale * s.sqrt()
        }
        Exponent::Finite(q) => {
            let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if scale == T::zero() {
                return T::zero();
            }
            let qt = T::of(q);
            let s: T = v.iter().map(|&x| (x.abs() / scale).powf(qt)).sum();
            scale * s.powf(T::one() / qt)
        }
    }
}

/// ℓp-norm of a vector; `p = ∞` is the largest absolute entry.
pub fn vector_p_norm<T: Scalar>(v: &[T], p: f64) -> Result<T> {
    let p = Exponent::new(p)?;
    Ok(p_norm_unchecked(v, p))
}

/// ℓp-norm for an already validated exponent.
pub fn p_norm<T: Scalar>(v: &[T], p: Exponent) -> T {
    p_norm_unchecked(v, p)
}

/// The matrix norm selected by `kind`.
pub fn matrix_norm<T: Scalar>(a: &DenseMatrix<T>, kind: NormKind) -> Result<T> {
    if !a.is_finite() {
        return Err(invalid("matrix has non-finite entries"));
    }
    Ok(match kind {
        NormKind::Frobenius => p_norm_unchecked(a.as_slice(), Exponent::TWO),
        NormKind::GroupOneInf => a
            .row_iter()
            .map(|r| p_norm_unchecked(r, Exponent::ONE))
            .fold(T::zero(), T::max),
        NormKind::GroupTwoOne => a.row_iter().map(|r| p_norm_unchecked(r, Exponent::TWO)).sum(),
        NormKind::Spectral => spectral_norm(a),
        NormKind::VectorP(p) => p_norm_unchecked(a.as_slice(), p),
    })
}

/// Largest singular value by power iteration on `AᵀA`.
///
/// Starts from the normalized all-ones vector and, separately, from the
/// direction of the largest-norm row; returns the larger estimate so a start
/// vector orthogonal to the top singular direction cannot stall the result.
pub fn spectral_norm<T: Scalar>(a: &DenseMatrix<T>) -> T {
    let ones = vec![T::one(); a.cols()];
    let mut best = power_iteration(a, ones);
    let top_row = (0..a.rows())
        .max_by(|&i, &j| {
            let ni = p_norm_unchecked(a.row(i), Exponent::TWO);
            let nj = p_norm_unchecked(a.row(j), Exponent::TWO);
            ni.partial_cmp(&nj).unwrap_or(std::cmp::Ordering::Equal).then(j.cmp(&i))
        })
        .expect("matrix has at least one row");
    let alt = power_iteration(a, a.row(top_row).to_vec());
    if alt > best {
        best = alt;
    }
    best
}

fn power_iteration<T: Scalar>(a: &DenseMatrix<T>, start: Vec<T>) -> T {
    let tol = T::of(SPECTRAL_TOLERANCE).max(T::epsilon() * T::of(16.0));
    let mut v = start;
    let n0 = p_norm_unchecked(&v, Exponent::TWO);
    if n0 == T::zero() {
        return T::zero();
    }
    v.iter_mut().for_each(|x| *x /= n0);
    let mut u = vec![T::zero(); a.rows()];
    let mut w = vec![T::zero(); a.cols()];
    let mut sigma = T::zero();
    for _ in 0..SPECTRAL_MAX_ITERS {
        a.matvec_into(&v, &mut u);
        let next = p_norm_unchecked(&u, Exponent::TWO);
        if next == T::zero() {
            return sigma;
        }
        a.matvec_transposed_into(&u, &mut w);
        let wn = p_norm_unchecked(&w, Exponent::TWO);
        if wn == T::zero() {
            return next;
        }
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        let done = (next - sigma).abs() <= tol * next;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}

/// `‖X‖_{p,∞}`: the largest p-norm over the rows (samples) of `x`.
pub fn data_group_norm<T: Scalar>(x: &DenseMatrix<T>, p: f64) -> Result<T> {
    let p = Exponent::new(p)?;
    if x.is_empty() {
        return Err(invalid("empty sample matrix"));
    }
    Ok(x.row_iter().map(|r| p_norm_unchecked(r, p)).fold(T::zero(), T::max))
}

/// Returns `(‖Ab‖, ‖A‖·‖b‖)` for the two matrix-vector inequalities:
/// `‖Ab‖₂ ≤ ‖A‖_F‖b‖₂` (`Frobenius`) and `‖Ab‖_∞ ≤ ‖A‖_{1,∞}‖b‖_∞` (`GroupOneInf`).
pub fn matvec_norm_bound_check<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &[T],
    kind: NormKind,
) -> Result<(T, T)> {
    let ab = a.matvec(b)?;
    match kind {
        NormKind::Frobenius => Ok((
            p_norm_unchecked(&ab, Exponent::TWO),
            matrix_norm(a, NormKind::Frobenius)? * p_norm_unchecked(b, Exponent::TWO),
        )),
        NormKind::GroupOneInf => Ok((
            p_norm_unchecked(&ab, Exponent::INF),
            matrix_norm(a, NormKind::GroupOneInf)? * p_norm_unchecked(b, Exponent::INF),
        )),
        other => Err(invalid(format!("no matrix-vector inequality for {other:?}"))),
    }
}

/// `max{1, d^{1 − 1/r − 1/p}}`, the factor bounding `‖x′‖_{r*}` by
/// `‖X‖_{p,∞} + ε` for any `x′` in an ε-ball around a sample.
pub fn dual_dimension_factor(d: usize, r: Exponent, p: Exponent) -> f64 {
    let exponent = 1.0 - r.recip() - p.recip();
    (d as f64).powf(exponent).max(1.0)
}

/// Rescales `m` in place so its Frobenius norm is at most `radius`.
pub fn project_frobenius_ball<T: Scalar>(m: &mut DenseMatrix<T>, radius: T) {
    let n = p_norm_unchecked(m.as_slice(), Exponent::TWO);
    if n > radius {
        if n == T::zero() || radius <= T::zero() {
            m.as_mut_slice().iter_mut().for_each(|v| *v = T::zero());
        } else {
            m.scale(radius / n);
        }
    }
}

/// Euclidean projection of `v` onto the ℓ1-ball of the given radius
/// (sorted-threshold algorithm).
pub fn project_l1_ball<T: Scalar>(v: &mut [T], radius: T) {
    if radius <= T::zero() {
        v.iter_mut().for_each(|x| *x = T::zero());
        return;
    }
    if p_norm_unchecked(v, Exponent::ONE) <= radius {
        return;
    }
    let mut mags: Vec<T> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (k, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / T::of((k + 1) as f64);
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    for x in v.iter_mut() {
        let shrunk = (x.abs() - theta).max(T::zero());
        *x = shrunk * x.signum();
    }
}

/// Projects every row of `m` onto the ℓ1-ball, i.e. onto `‖·‖_{1,∞} ≤ radius`.
pub fn project_one_inf_ball<T: Scalar>(m: &mut DenseMatrix<T>, radius: T) {
    for i in 0..m.rows() {
        project_l1_ball(m.row_mut(i), radius);
    }
}
