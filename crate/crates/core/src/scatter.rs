//! Subclass statistics and the within-subclass, between-subclass and total scatter
//! matrices, all normalized by the sample count `N`:
//!
//! ```text
//! S_ws = 1/N Σ_ij Σ_{x∈ij} (x − μ_ij)(x − μ_ij)ᵀ
//! S_bs = Σ_ij p_ij (μ_ij − μ)(μ_ij − μ)ᵀ,   p_ij = n_ij / N
//! S_ts = 1/N Σ_x (x − μ)(x − μ)ᵀ  =  S_ws + S_bs
//! ```

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::partition::SubclassPartition;
use crate::scalar::{count, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SubclassStats<T> {
    pub global_mean: Vec<T>,
    pub subclass_means: Vec<Vec<T>>,
    pub priors: Vec<T>,
    pub sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterSet<T> {
    pub within: Mat<T>,
    pub between: Mat<T>,
    pub total: Mat<T>,
    pub stats: SubclassStats<T>,
}

/// Stacks the dataset's vectors as the rows of a matrix.
pub fn sample_matrix<T: Real>(ds: &Dataset<T>) -> Mat<T> {
    let rows: Vec<&[T]> = ds.samples().iter().map(|s| s.vector.as_slice()).collect();
    Mat::from_rows(&rows)
}

/// Subclass index lists in the partition's canonical order, validated against `n`.
pub(crate) fn subclass_lists(part: &SubclassPartition, n: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(part.num_subclasses());
    for (subject, leaf) in part.subclasses() {
        if leaf.is_empty() {
            return Err(Error::EmptySubclass {
                subject: subject.to_string(),
            });
        }
        if let Some(&bad) = leaf.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "partition references sample {bad} but the dataset has {n}"
            )));
        }
        out.push(leaf.to_vec());
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

fn mean_of<T: Real>(rows: &Mat<T>, idx: &[usize]) -> Vec<T> {
    let mut m = vec![T::zero(); rows.cols()];
    // Column sums accumulated per coordinate in pairwise fashion.
    let mut col = Vec::with_capacity(idx.len());
    for (j, mj) in m.iter_mut().enumerate() {
        col.clear();
        col.extend(idx.iter().map(|&i| rows[(i, j)]));
        *mj = crate::linalg::sum(&col) / count::<T>(idx.len());
    }
    m
}

/// Statistics of samples stored as matrix rows, grouped by `subclasses`.
pub fn stats_from_rows<T: Real>(rows: &Mat<T>, subclasses: &[Vec<usize>]) -> SubclassStats<T> {
    let n: usize = subclasses.iter().map(Vec::len).sum();
    let all: Vec<usize> = subclasses.iter().flatten().copied().collect();
    let nn: T = count(n);
    SubclassStats {
        global_mean: mean_of(rows, &all),
        subclass_means: subclasses.iter().map(|s| mean_of(rows, s)).collect(),
        priors: subclasses.iter().map(|s| count::<T>(s.len()) / nn).collect(),
        sizes: subclasses.iter().map(Vec::len).collect(),
    }
}

/// Rows `(x − μ_ij)/√N` for every sample, so that `within_factorᵀ · within_factor = S_ws`.
pub fn within_factor<T: Real>(rows: &Mat<T>, subclasses: &[Vec<usize>], stats: &SubclassStats<T>) -> Mat<T> {
    let n: usize = stats.sizes.iter().sum();
    let scale = T::one() / count::<T>(n).sqrt();
    let mut out = Mat::zeros(n, rows.cols());
    let mut r = 0;
    for (leaf, mean) in subclasses.iter().zip(&stats.subclass_means) {
        for &i in leaf {
            for ((o, &x), &m) in out.row_mut(r).iter_mut().zip(rows.row(i)).zip(mean) {
                *o = (x - m) * scale;
            }
            r += 1;
        }
    }
    out
}

/// Rows `√p_ij (μ_ij − μ)`, so that `between_factorᵀ · between_factor = S_bs`.
pub fn between_factor<T: Real>(stats: &SubclassStats<T>) -> Mat<T> {
    let d = stats.global_mean.len();
    let mut out = Mat::zeros(stats.subclass_means.len(), d);
    for (r, (mean, &p)) in stats.subclass_means.iter().zip(&stats.priors).enumerate() {
        let w = p.sqrt();
        for ((o, &m), &g) in out.row_mut(r).iter_mut().zip(mean).zip(&stats.global_mean) {
            *o = (m - g) * w;
        }
    }
    out
}

/// `Σ p_ij (μ_ij − μ)(μ_ij − μ)ᵀ`, weighting by `p_ij` directly rather than
/// through `√p_ij` so exactly representable inputs give exact scatter.
fn between_matrix<T: Real>(stats: &SubclassStats<T>) -> Mat<T> {
    let d = stats.global_mean.len();
    let k = stats.subclass_means.len();
    let mut dev = Mat::zeros(d, k);
    let mut weighted = Mat::zeros(d, k);
    for (r, (mean, &p)) in stats.subclass_means.iter().zip(&stats.priors).enumerate() {
        for (a, (&m, &g)) in mean.iter().zip(&stats.global_mean).enumerate() {
            dev.row_mut(a)[r] = m - g;
            weighted.row_mut(a)[r] = (m - g) * p;
        }
    }
    weighted.mul_transpose(&dev)
}

/// Rows `(x − μ)/√N`, so that `total_factorᵀ · total_factor = S_ts`.
pub fn total_factor<T: Real>(rows: &Mat<T>, subclasses: &[Vec<usize>], stats: &SubclassStats<T>) -> Mat<T> {
    let n: usize = stats.sizes.iter().sum();
    let scale = T::one() / count::<T>(n).sqrt();
    let mut out = Mat::zeros(n, rows.cols());
    for (r, &i) in subclasses.iter().flatten().enumerate() {
        for ((o, &x), &m) in out.row_mut(r).iter_mut().zip(rows.row(i)).zip(&stats.global_mean) {
            *o = (x - m) * scale;
        }
    }
    out
}

pub fn scatters_from_rows<T: Real>(rows: &Mat<T>, subclasses: &[Vec<usize>]) -> ScatterSet<T> {
    let stats = stats_from_rows(rows, subclasses);
    let mut within = within_factor(rows, subclasses, &stats).gram_cols();
    let mut between = between_matrix(&stats);
    let mut total = total_factor(rows, subclasses, &stats).gram_cols();
    within.symmetrize();
    between.symmetrize();
    total.symmetrize();
    ScatterSet {
        within,
        between,
        total,
        stats,
    }
}

pub fn subclass_statistics<T: Real>(train: &Dataset<T>, part: &SubclassPartition) -> Result<SubclassStats<T>> {
    let lists = subclass_lists(part, train.len())?;
    Ok(stats_from_rows(&sample_matrix(train), &lists))
}

pub fn compute_scatters<T: Real>(train: &Dataset<T>, part: &SubclassPartition) -> Result<ScatterSet<T>> {
    let lists = subclass_lists(part, train.len())?;
    Ok(scatters_from_rows(&sample_matrix(train), &lists))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_partition;
    use crate::linalg::sym_eigendecompose;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn four_points() -> (Dataset<f64>, SubclassPartition) {
        let ds = Dataset::from_labeled(vec![
            ("A", vec![0.0, 0.0]),
            ("A", vec![2.0, 0.0]),
            ("B", vec![0.0, 2.0]),
            ("B", vec![2.0, 2.0]),
        ])
        .unwrap();
        let p = SubclassPartition::by_class(&ds);
        (ds, p)
    }

    #[test]
    fn four_point_statistics() {
        let (ds, p) = four_points();
        let st = subclass_statistics(&ds, &p).unwrap();
        assert_eq!(st.global_mean, vec![1.0, 1.0]);
        assert_eq!(st.subclass_means, vec![vec![1.0, 0.0], vec![1.0, 2.0]]);
        assert_eq!(st.priors, vec![0.5, 0.5]);
        let s = compute_scatters(&ds, &p).unwrap();
        assert_eq!(s.within, Mat::from_rows(&[[1.0, 0.0], [0.0, 0.0]]));
        assert_eq!(s.between, Mat::from_rows(&[[0.0, 0.0], [0.0, 1.0]]));
        assert_eq!(s.total, Mat::from_rows(&[[1.0, 0.0], [0.0, 1.0]]));
    }

    #[test]
    fn single_sample_and_duplicates() {
        let one = Dataset::from_labeled(vec![("a", vec![0.3, 0.7])]).unwrap();
        let st = subclass_statistics(&one, &SubclassPartition::by_class(&one)).unwrap();
        assert_eq!(st.global_mean, vec![0.3, 0.7]);
        assert_eq!(st.priors, vec![1.0]);

        let (ds, p) = four_points();
        let doubled: Vec<_> = ds
            .samples()
            .iter()
            .chain(ds.samples())
            .map(|s| (s.subject_id.clone(), s.vector.clone()))
            .collect();
        let dd = Dataset::from_labeled(doubled).unwrap();
        let a = subclass_statistics(&ds, &p).unwrap();
        let b = subclass_statistics(&dd, &SubclassPartition::by_class(&dd)).unwrap();
        assert_eq!(a.subclass_means, b.subclass_means);
        assert_eq!(a.priors, b.priors);
    }

    #[test]
    fn identical_samples_have_zero_scatter() {
        let ds = Dataset::from_labeled((0..6).map(|i| (format!("s{}", i % 2), vec![0.25, 0.5, 0.75]))).unwrap();
        let s = compute_scatters(&ds, &build_partition(&ds, 2).unwrap()).unwrap();
        assert_eq!(s.within.max_abs(), 0.0);
        assert_eq!(s.between.max_abs(), 0.0);
        assert_eq!(s.total.max_abs(), 0.0);
    }

    #[test]
    fn empty_subclass_rejected() {
        let (ds, mut p) = four_points();
        p.groups.get_mut("A").unwrap().push(vec![]);
        assert!(matches!(compute_scatters(&ds, &p), Err(Error::EmptySubclass { .. })));
    }

    fn random_set(seed: u64, subjects: usize, per: usize, d: usize) -> Dataset<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Dataset::from_labeled((0..subjects * per).map(|i| {
            (format!("s{}", i / per), (0..d).map(|_| rng.random::<f64>()).collect())
        }))
        .unwrap()
    }

    #[test]
    fn class_partition_matches_class_scatter_oracle() {
        let ds = random_set(3, 4, 6, 5);
        let s = compute_scatters(&ds, &SubclassPartition::by_class(&ds)).unwrap();
        // Direct class-level accumulation with plain loops.
        let n = ds.len() as f64;
        let d = ds.dim();
        let mut mu = vec![0.0; d];
        for x in ds.samples() {
            for j in 0..d {
                mu[j] += x.vector[j] / n;
            }
        }
        let mut sw = Mat::<f64>::zeros(d, d);
        let mut sb = Mat::<f64>::zeros(d, d);
        for (_, idx) in ds.by_subject() {
            let mut mc = vec![0.0; d];
            for &i in &idx {
                for j in 0..d {
                    mc[j] += ds.samples()[i].vector[j] / idx.len() as f64;
                }
            }
            for &i in &idx {
                let x = &ds.samples()[i].vector;
                for a in 0..d {
                    for b in 0..d {
                        sw[(a, b)] += (x[a] - mc[a]) * (x[b] - mc[b]) / n;
                    }
                }
            }
            for a in 0..d {
                for b in 0..d {
                    sb[(a, b)] += idx.len() as f64 / n * (mc[a] - mu[a]) * (mc[b] - mu[b]);
                }
            }
        }
        assert!(s.within.sub(&sw).max_abs() < 1e-14);
        assert!(s.between.sub(&sb).max_abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn conservation_psd_and_translation(seed in any::<u64>(), max_leaf in 1usize..6, shift in -0.5f64..0.5) {
            let ds = random_set(seed, 3, 7, 6);
            let p = build_partition(&ds, max_leaf).unwrap();
            let s = compute_scatters(&ds, &p).unwrap();
            let sum = s.within.add(&s.between);
            prop_assert!(s.total.sub(&sum).max_abs() <= 1e-10 * s.total.max_abs());
            let st = &s.stats;
            let total_prior: f64 = st.priors.iter().sum();
            prop_assert!((total_prior - 1.0).abs() < 1e-12);
            for j in 0..ds.dim() {
                let mix: f64 = st.priors.iter().zip(&st.subclass_means).map(|(p, m)| p * m[j]).sum();
                prop_assert!((mix - st.global_mean[j]).abs() < 1e-10);
            }
            for m in [&s.within, &s.between, &s.total] {
                prop_assert!(m.asymmetry() <= 1e-12 * m.max_abs());
                let e = sym_eigendecompose(m).unwrap();
                prop_assert!(*e.values.last().unwrap() >= -1e-10 * e.values[0].abs().max(1e-300));
            }
            let moved = ds.map_vectors(|v| v + shift);
            let t = compute_scatters(&moved, &p).unwrap();
            prop_assert!(t.within.sub(&s.within).max_abs() < 1e-10);
            prop_assert!(t.between.sub(&s.between).max_abs() < 1e-10);
            prop_assert!(t.total.sub(&s.total).max_abs() < 1e-10);
        }
    }
}
