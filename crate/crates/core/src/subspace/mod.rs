//! Trained linear feature extractors: PCA and Fisherface LDA baselines, whole-space
//! regularized whitening (ERE) and subclass discriminant analysis on top of it (WSSDA).

mod basis;
pub(crate) mod io;
mod spectrum;
mod train;

pub use basis::Route;
pub use io::{read_model, read_model_json, write_model, write_model_json, MAGIC};
pub use spectrum::{
    default_mu, fit_spectrum, regularize_spectrum, regularize_values, SpectrumModel,
    SpectrumRegularization,
};
pub use train::{
    fit_ere, fit_wssda, train_ere, train_lda, train_pca, train_wssda, EreFit, WssdaFit,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Lda,
    Ere,
    Wssda,
}

impl Method {
    pub fn tag(self) -> u8 {
        match self {
            Method::Pca => 1,
            Method::Lda => 2,
            Method::Ere => 3,
            Method::Wssda => 4,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => Method::Pca,
            2 => Method::Lda,
            3 => Method::Ere,
            4 => Method::Wssda,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Lda => "lda",
            Method::Ere => "ere",
            Method::Wssda => "wssda",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(Method::Pca),
            "lda" => Ok(Method::Lda),
            "ere" => Ok(Method::Ere),
            "wssda" => Ok(Method::Wssda),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// A trained projection. Row `k` of `transform` is the `k`-th feature direction;
/// rows are ordered by decreasing importance so any prefix is itself a valid model.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceModel<T> {
    pub method: Method,
    pub mean: Vec<T>,
    pub transform: Mat<T>,
    /// Digest of the training configuration and data.
    pub provenance: String,
}

impl<T: Real> SubspaceModel<T> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn q_max(&self) -> usize {
        self.transform.rows()
    }

    /// First `q` features of `x`.
    pub fn project(&self, x: &[T], q: usize) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if q > self.q_max() {
            return Err(Error::TooManyFeatures {
                requested: q,
                available: self.q_max(),
            });
        }
        let centered: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &m)| a - m).collect();
        Ok((0..q).map(|k| dot(self.transform.row(k), &centered)).collect())
    }

    /// Model keeping only the first `q` rows.
    pub fn truncated(&self, q: usize) -> Result<Self> {
        if q > self.q_max() {
            return Err(Error::TooManyFeatures {
                requested: q,
                available: self.q_max(),
            });
        }
        let mut m = self.clone();
        m.transform.truncate_rows(q);
        Ok(m)
    }
}

/// First `q` features of `x` under `model`.
pub fn project<T: Real>(model: &SubspaceModel<T>, x: &[T], q: usize) -> Result<Vec<T>> {
    model.project(x, q)
}
