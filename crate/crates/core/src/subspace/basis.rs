//! Coordinates for training: either the ambient space or an orthonormal basis of the
//! centered training data's span. Every scatter matrix of the training set lives in
//! that span, so all decompositions can run in `n ≤ N − 1` dimensions when `N ≪ d`.

use crate::dataset::Dataset;
use crate::linalg::{axpy, orthogonal_complement, orthonormalize_rows, sym_eigendecompose, Mat};
use crate::error::Result;
use crate::scalar::{count, Real};

/// How training coordinates are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// Data span when the sample count does not exceed the dimension, dense otherwise.
    #[default]
    Auto,
    /// Full `d × d` decompositions.
    Dense,
    /// Decompositions in the span of the centered samples, found through the `N × N`
    /// Gram matrix.
    DataSpan,
}

impl Route {
    pub(crate) fn resolve(self, n_samples: usize, d: usize) -> Route {
        match self {
            Route::Auto if n_samples <= d => Route::DataSpan,
            Route::Auto => Route::Dense,
            r => r,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Coordinates<T> {
    pub mean: Vec<T>,
    /// `n × d` orthonormal rows; `None` is the identity.
    pub basis: Option<Mat<T>>,
    /// `N × n`; row `i` holds the coordinates of `x_i − mean`.
    pub coords: Mat<T>,
    pub route: Route,
}

impl<T: Real> Coordinates<T> {
    pub fn build(train: &Dataset<T>, route: Route) -> Result<Self> {
        let n = train.len();
        let d = train.dim();
        let route = route.resolve(n, d);
        let mean = {
            let mut m = vec![T::zero(); d];
            let mut col = Vec::with_capacity(n);
            for (j, mj) in m.iter_mut().enumerate() {
                col.clear();
                col.extend(train.samples().iter().map(|s| s.vector[j]));
                *mj = crate::linalg::sum(&col) / count::<T>(n);
            }
            m
        };
        let mut centered = Mat::zeros(n, d);
        for (i, s) in train.samples().iter().enumerate() {
            for ((c, &x), &m) in centered.row_mut(i).iter_mut().zip(&s.vector).zip(&mean) {
                *c = x - m;
            }
        }
        match route {
            Route::Dense | Route::Auto => Ok(Coordinates {
                mean,
                basis: None,
                coords: centered,
                route: Route::Dense,
            }),
            Route::DataSpan => {
                let gram = centered.gram_rows();
                let eig = sym_eigendecompose(&gram)?;
                let rank = eig.numerical_rank();
                let mut raw = Mat::zeros(rank, d);
                for k in 0..rank {
                    let scale = T::one() / eig.values[k].sqrt();
                    let row = raw.row_mut(k);
                    for (i, &u) in eig.vector(k).iter().enumerate() {
                        if u != T::zero() {
                            axpy(u * scale, centered.row(i), row);
                        }
                    }
                }
                let basis = orthonormalize_rows(&raw, T::rank_tol().sqrt());
                let coords = centered.mul_transpose(&basis);
                Ok(Coordinates {
                    mean,
                    basis: Some(basis),
                    coords,
                    route: Route::DataSpan,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Dimension of the coordinate space.
    pub fn span_dim(&self) -> usize {
        self.coords.cols()
    }

    /// Maps rows expressed in coordinates back to the ambient space.
    pub fn lift(&self, rows: &Mat<T>) -> Mat<T> {
        match &self.basis {
            None => rows.clone(),
            Some(b) => rows.matmul(b),
        }
    }

    /// Orthonormal rows spanning the ambient directions the coordinates omit.
    pub fn complement(&self) -> Mat<T> {
        match &self.basis {
            None => Mat::zeros(0, self.dim()),
            Some(b) => orthogonal_complement(b),
        }
    }
}
