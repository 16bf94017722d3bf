//! Dense row-major matrices and the handful of kernels the subspace methods need.

mod eigen;

pub use eigen::{orient as eigen_orient, sym_eigendecompose, EigenModel};

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

const PAIRWISE_BLOCK: usize = 128;

/// Dot product with pairwise (cascade) summation.
///
/// Leaves of at most 128 terms are reduced with eight fixed accumulator lanes, so
/// the summation order depends only on the length.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= PAIRWISE_BLOCK {
        let mut acc = [T::zero(); 8];
        let mut ca = a.chunks_exact(8);
        let mut cb = b.chunks_exact(8);
        for (xa, xb) in (&mut ca).zip(&mut cb) {
            for l in 0..8 {
                acc[l] += xa[l] * xb[l];
            }
        }
        let mut tail = T::zero();
        for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
            tail += *x * *y;
        }
        ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
    } else {
        let half = (a.len() / 2).next_multiple_of(8);
        dot(&a[..half], &b[..half]) + dot(&a[half..], &b[half..])
    }
}

/// Pairwise sum of a slice.
pub fn sum<T: Real>(a: &[T]) -> T {
    if a.len() <= PAIRWISE_BLOCK {
        a.iter().fold(T::zero(), |s, &x| s + x)
    } else {
        let half = a.len() / 2;
        sum(&a[..half]) + sum(&a[half..])
    }
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length");
        Mat { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Mat {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Keeps the first `n` rows.
    pub fn truncate_rows(&mut self, n: usize) {
        let n = n.min(self.rows);
        self.data.truncate(n * self.cols);
        self.rows = n;
    }

    pub fn scale(&mut self, s: T) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest `|a_ij - a_ji|`; `+inf` for non-square input.
    pub fn asymmetry(&self) -> T {
        if self.rows != self.cols {
            return T::infinity();
        }
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `self * other`
    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != T::zero() {
                    axpy(a, other.row(k), orow);
                }
            }
        }
        out
    }

    /// `self * otherᵀ`, each entry a pairwise-summed row dot product.
    pub fn mul_transpose(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.cols, "mul_transpose shape");
        let mut out = Mat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                out[(i, j)] = dot(a, other.row(j));
            }
        }
        out
    }

    /// `self * selfᵀ`, computed on the upper triangle and mirrored.
    pub fn gram_rows(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = dot(self.row(i), self.row(j));
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// `selfᵀ * self`
    pub fn gram_cols(&self) -> Mat<T> {
        self.transpose().gram_rows()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "mul_vec shape");
        self.row_iter().map(|r| dot(r, x)).collect()
    }

    /// `self ± other`, elementwise.
    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// Forces exact symmetry by averaging with the transpose.
    pub fn symmetrize(&mut self) {
        let two = T::one() + T::one();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = (self[(i, j)] + self[(j, i)]) / two;
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Orthonormalizes the rows of `m` in place with two passes of modified Gram-Schmidt.
///
/// Rows whose residual falls below `tol` times their original norm are dropped; the
/// surviving rows keep their relative order.
pub fn orthonormalize_rows<T: Real>(m: &Mat<T>, tol: T) -> Mat<T> {
    let cols = m.cols();
    let mut kept: Vec<Vec<T>> = Vec::with_capacity(m.rows());
    for r in m.row_iter() {
        let original = norm(r);
        if original == T::zero() {
            continue;
        }
        let mut v = r.to_vec();
        for _ in 0..2 {
            for q in &kept {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let n = norm(&v);
        if n > tol * original {
            v.iter_mut().for_each(|x| *x /= n);
            kept.push(v);
        }
    }
    let rows = kept.len();
    Mat::from_vec(rows, cols, kept.concat())
}

/// Orthonormal basis (as rows) of the complement of the row space of `q`.
///
/// `q` must have orthonormal rows. Uses a Householder factorization of `qᵀ`; the
/// returned rows are the trailing columns of the accumulated orthogonal factor.
pub fn orthogonal_complement<T: Real>(q: &Mat<T>) -> Mat<T> {
    let n = q.rows();
    let d = q.cols();
    assert!(n <= d);
    // Columns of qᵀ are the rows of q; reflect them one by one.
    let mut work: Vec<Vec<T>> = q.row_iter().map(|r| r.to_vec()).collect();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(n);
    let two = T::one() + T::one();
    for k in 0..n {
        let x = &work[k];
        let alpha = norm(&x[k..]);
        let mut v = vec![T::zero(); d];
        v[k..].copy_from_slice(&x[k..]);
        let sign = if x[k] >= T::zero() { T::one() } else { -T::one() };
        v[k] += sign * alpha;
        let vn = norm(&v);
        if vn > T::zero() {
            v.iter_mut().for_each(|e| *e /= vn);
        }
        for col in work.iter_mut().skip(k) {
            let c = two * dot(&v, col);
            axpy(-c, &v, col);
        }
        reflectors.push(v);
    }
    let mut out = Mat::zeros(d - n, d);
    for j in n..d {
        let row = out.row_mut(j - n);
        row[j] = T::one();
        for v in reflectors.iter().rev() {
            let c = two * dot(v, row);
            axpy(-c, v, row);
        }
    }
    out
}
