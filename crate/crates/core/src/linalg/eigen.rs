//! Symmetric eigendecomposition: Householder tridiagonalization followed by the
//! implicit QL algorithm with Wilkinson-style shifts. No randomness; the result is a
//! pure function of the input bits.

use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Eigenpairs of a symmetric matrix in descending eigenvalue order.
///
/// `vectors` holds one unit eigenvector per row (row `k` pairs with `values[k]`).
/// Each vector is oriented so that its largest-magnitude entry (first on ties) is
/// positive.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenModel<T> {
    pub values: Vec<T>,
    pub vectors: Mat<T>,
}

impl<T: Real> EigenModel<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> &[T] {
        self.vectors.row(k)
    }

    /// Number of eigenvalues above `rank_tol · λ₁`.
    pub fn numerical_rank(&self) -> usize {
        let Some(&top) = self.values.first() else {
            return 0;
        };
        if top <= T::zero() {
            return 0;
        }
        let cut = T::rank_tol() * top;
        self.values.iter().take_while(|&&v| v > cut).count()
    }
}

/// Decomposes a symmetric matrix into descending eigenpairs.
pub fn sym_eigendecompose<T: Real>(a: &Mat<T>) -> Result<EigenModel<T>> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenModel {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let asym = a.asymmetry();
    if asym > lit::<T>(1e-9) * a.max_abs() {
        return Err(Error::NotSymmetric {
            asymmetry: asym.to_f64_lossless(),
        });
    }

    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| (a[(i, j)] + a[(j, i)]) / lit(2.0)).collect())
        .collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);

    // QL rotates pairs of columns; keep them as contiguous rows.
    let mut vt: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    drop(v);
    ql_implicit(&mut d, &mut e, &mut vt)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap().then(i.cmp(&j)));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Mat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        values.push(d[src]);
        let row = vectors.row_mut(k);
        row.copy_from_slice(&vt[src]);
        orient(row);
    }
    Ok(EigenModel { values, vectors })
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
pub fn orient<T: Real>(v: &mut [T]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < T::zero()) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Householder reduction to tridiagonal form; on return `v` holds the accumulated
/// orthogonal transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[k][j] -= upd;
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[k][j] -= upd;
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

/// Implicit QL on the tridiagonal `(d, e)`, rotating the rows of `vt` alongside.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], vt: &mut [Vec<T>]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let eps = T::epsilon();
    let max_iter = 60 * n.max(1);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let mut iterations = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (lit::<T>(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = vt.split_at_mut(i + 1);
                    let vi = &mut lo[i];
                    let vi1 = &mut hi[0];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
