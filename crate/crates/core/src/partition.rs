//! Per-subject subclass discovery with binary spatial partitioning trees.
//!
//! A node holding more than `max_leaf` samples is split at the median of the samples'
//! projections onto the node's first principal direction; the median element and
//! anything tied with it go left. Leaves are the subclasses.

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sym_eigendecompose, Mat};
use crate::scalar::{count, Real};

pub const DEFAULT_MAX_LEAF: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubclassPartition {
    /// Subject id → subclasses, each a list of indices into the training dataset.
    pub groups: BTreeMap<String, Vec<Vec<usize>>>,
    pub max_leaf: usize,
}

impl SubclassPartition {
    pub fn num_subclasses(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    /// Subclasses in deterministic order (subjects sorted, leaves left to right).
    pub fn subclasses(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.groups
            .iter()
            .flat_map(|(s, leaves)| leaves.iter().map(move |l| (s.as_str(), l.as_slice())))
    }

    /// One subclass per subject (the ordinary class structure).
    pub fn by_class<T: Real>(train: &Dataset<T>) -> Self {
        SubclassPartition {
            groups: train
                .by_subject()
                .into_iter()
                .map(|(s, idx)| (s.to_string(), vec![idx]))
                .collect(),
            max_leaf: usize::MAX,
        }
    }
}

pub fn build_partition<T: Real>(train: &Dataset<T>, max_leaf: usize) -> Result<SubclassPartition> {
    if max_leaf == 0 {
        return Err(Error::InvalidArgument("max_leaf must be at least 1".into()));
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut groups = BTreeMap::new();
    for (subject, idx) in train.by_subject() {
        let mut leaves = Vec::new();
        grow(train, idx, max_leaf, &mut leaves);
        groups.insert(subject.to_string(), leaves);
    }
    Ok(SubclassPartition { groups, max_leaf })
}

fn grow<T: Real>(train: &Dataset<T>, idx: Vec<usize>, max_leaf: usize, leaves: &mut Vec<Vec<usize>>) {
    if idx.len() <= max_leaf {
        leaves.push(idx);
        return;
    }
    let Some(scores) = principal_scores(train, &idx) else {
        // Identical points are not split.
        leaves.push(idx);
        return;
    };
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
    let median = scores[order[(idx.len() - 1) / 2]];
    let mut left: Vec<usize> = idx
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s <= median)
        .map(|(&i, _)| i)
        .collect();
    if left.len() == idx.len() {
        // Ties swallowed the whole node: fall back to the positional median.
        let mut keep: Vec<usize> = order[..idx.len().div_ceil(2)].to_vec();
        keep.sort_unstable();
        left = keep.into_iter().map(|p| idx[p]).collect();
    }
    let right: Vec<usize> = idx.iter().copied().filter(|i| !left.contains(i)).collect();
    grow(train, left, max_leaf, leaves);
    grow(train, right, max_leaf, leaves);
}

/// Projections of the node's samples onto the first principal direction, or `None`
/// when the node covariance is zero.
///
/// The direction comes from the node's Gram matrix, which shares the covariance's
/// nonzero spectrum and stays small when samples are high-dimensional.
fn principal_scores<T: Real>(train: &Dataset<T>, idx: &[usize]) -> Option<Vec<T>> {
    let samples = train.samples();
    let first = &samples[idx[0]].vector;
    if idx.iter().all(|&i| samples[i].vector == *first) {
        return None;
    }
    let d = train.dim();
    let n = idx.len();
    let mut mean = vec![T::zero(); d];
    for &i in idx {
        for (m, &v) in mean.iter_mut().zip(&samples[i].vector) {
            *m += v;
        }
    }
    let nn: T = count(n);
    mean.iter_mut().for_each(|m| *m /= nn);
    let mut centered = Mat::zeros(n, d);
    for (r, &i) in idx.iter().enumerate() {
        for ((c, &v), &m) in centered.row_mut(r).iter_mut().zip(&samples[i].vector).zip(&mean) {
            *c = v - m;
        }
    }
    let gram = centered.gram_rows();
    let eig = sym_eigendecompose(&gram).ok()?;
    if eig.values[0] <= T::zero() {
        return None;
    }
    let u = eig.vector(0);
    let mut direction = vec![T::zero(); d];
    for (r, &w) in u.iter().enumerate() {
        crate::linalg::axpy(w, centered.row(r), &mut direction);
    }
    let len = norm(&direction);
    if len == T::zero() {
        return None;
    }
    direction.iter_mut().for_each(|x| *x /= len);
    crate::linalg::eigen_orient(&mut direction);
    Some(centered.row_iter().map(|r| dot(r, &direction)).collect())
}
