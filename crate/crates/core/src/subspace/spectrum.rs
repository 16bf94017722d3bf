//! Eigen-spectrum regularization of a within-subclass scatter.
//!
//! Eigenvalues up to a face/noise boundary `m` are kept; beyond it they are replaced by
//! the decay model `α / (k + β)` that passes through `(1, λ₁)` and `(m, λ_m)`, so noise
//! and null directions receive bounded whitening weights.

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::linalg::EigenModel;
use crate::scalar::{lit, Real};

/// Fitted spectrum model over an ordered field (floats or exact rationals).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumModel<T> {
    /// Boundary index `m` (1-based: eigenvalues `1..=m` are kept as measured).
    pub boundary: usize,
    /// Numerical rank `r`.
    pub rank: usize,
    pub alpha: T,
    pub beta: T,
    /// Regularized eigenvalues `λ̃₁..λ̃_d`.
    pub values: Vec<T>,
}

fn median<T>(sorted_desc: &[T]) -> T
where
    T: Clone + Num + FromPrimitive,
{
    let r = sorted_desc.len();
    if r % 2 == 1 {
        sorted_desc[r / 2].clone()
    } else {
        (sorted_desc[r / 2 - 1].clone() + sorted_desc[r / 2].clone()) / T::from_u8(2).unwrap()
    }
}

/// Fits the decay model to descending eigenvalues.
///
/// `rank_tol` is the relative threshold defining the numerical rank
/// `r = #{k : λ_k > rank_tol · λ₁}`; `mu ≥ 0` moves the boundary
/// `m = min{k : λ_k ≤ λ_med + mu·(λ_med − λ_r)}`, clamped to `[2, max(2, r)]`.
pub fn fit_spectrum<T>(eigenvalues: &[T], mu: T, rank_tol: T) -> Result<SpectrumModel<T>>
where
    T: Clone + PartialOrd + Num + FromPrimitive,
{
    let d = eigenvalues.len();
    if d < 2 {
        return Err(Error::InvalidArgument("spectrum needs at least two eigenvalues".into()));
    }
    if mu < T::zero() {
        return Err(Error::InvalidArgument("boundary parameter mu must be non-negative".into()));
    }
    if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("eigenvalues must be in descending order".into()));
    }
    let top = eigenvalues[0].clone();
    if top <= T::zero() {
        return Err(Error::InvalidArgument("largest eigenvalue must be positive".into()));
    }
    let cut = rank_tol * top.clone();
    let rank = eigenvalues.iter().take_while(|&v| *v > cut).count();
    if rank < 2 {
        return Err(Error::InsufficientRank { rank });
    }
    let active = &eigenvalues[..rank];
    let med = median(active);
    let last = active[rank - 1].clone();
    let threshold = med.clone() + mu * (med - last);
    let first_below = eigenvalues
        .iter()
        .position(|v| *v <= threshold)
        .map_or(d, |i| i + 1);
    let boundary = first_below.clamp(2, rank.max(2));
    let lm = eigenvalues[boundary - 1].clone();

    let mut values: Vec<T> = eigenvalues[..boundary].to_vec();
    let (alpha, beta);
    if top > lm {
        let m = T::from_usize(boundary).unwrap();
        let b = (m * lm.clone() - top.clone()) / (top.clone() - lm);
        let a = top * (T::one() + b.clone());
        for k in (boundary + 1)..=d {
            values.push(a.clone() / (T::from_usize(k).unwrap() + b.clone()));
        }
        alpha = a;
        beta = b;
    } else {
        // Flat spectrum: extend the boundary value.
        values.resize(d, lm.clone());
        alpha = lm;
        beta = T::zero();
    }
    Ok(SpectrumModel {
        boundary,
        rank,
        alpha,
        beta,
        values,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRegularization<T> {
    pub model: SpectrumModel<T>,
    /// Whitening weights `1 / √λ̃_k`.
    pub weights: Vec<T>,
}

impl<T: Real> SpectrumRegularization<T> {
    pub fn boundary(&self) -> usize {
        self.model.boundary
    }

    pub fn rank(&self) -> usize {
        self.model.rank
    }

    pub fn regularized(&self) -> &[T] {
        &self.model.values
    }
}

/// Regularizes descending eigenvalues (length `d`, the whole space).
pub fn regularize_values<T: Real>(eigenvalues: &[T], mu: T) -> Result<SpectrumRegularization<T>> {
    if !mu.is_finite() {
        return Err(Error::InvalidArgument("mu must be finite".into()));
    }
    let model = fit_spectrum(eigenvalues, mu, T::rank_tol())?;
    let weights = model.values.iter().map(|&v| T::one() / v.sqrt()).collect();
    Ok(SpectrumRegularization { model, weights })
}

/// Regularizes the spectrum of a decomposed within-subclass scatter.
pub fn regularize_spectrum<T: Real>(eig: &EigenModel<T>, mu: T) -> Result<SpectrumRegularization<T>> {
    regularize_values(&eig.values, mu)
}

/// Default boundary parameter.
pub fn default_mu<T: Real>() -> T {
    lit(1.0)
}
