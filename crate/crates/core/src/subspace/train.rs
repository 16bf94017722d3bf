use super::basis::{Coordinates, Route};
use super::spectrum::{regularize_values, SpectrumRegularization};
use super::{Method, SubspaceModel};
use crate::dataset::Dataset;
use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::linalg::{axpy, eigen_orient, sym_eigendecompose, EigenModel, Mat};
use crate::partition::SubclassPartition;
use crate::scalar::{count, Real};
use crate::scatter::{between_factor, scatters_from_rows, stats_from_rows, subclass_lists};

fn provenance<T: Real>(method: Method, train: &Dataset<T>, extra: &str) -> String {
    sha256_hex(format!("{method}|{extra}|dim={}|n={}|data={}", train.dim(), train.len(), train.digest()).as_bytes())
}

/// Rows `diag(scale) · rows`.
fn scale_rows<T: Real>(rows: &Mat<T>, scale: &[T]) -> Mat<T> {
    let mut out = rows.clone();
    for (k, &s) in scale.iter().enumerate().take(rows.rows()) {
        out.row_mut(k).iter_mut().for_each(|x| *x *= s);
    }
    out
}

/// Unit principal directions of `factorᵀ·factor` through the smaller Gram matrix
/// `factor·factorᵀ` when the factor has fewer rows than columns.
fn principal_axes<T: Real>(factor: &Mat<T>) -> Result<EigenModel<T>> {
    if factor.rows() >= factor.cols() {
        let mut s = factor.gram_cols();
        s.symmetrize();
        return sym_eigendecompose(&s);
    }
    let g = sym_eigendecompose(&factor.gram_rows())?;
    let rank = g.numerical_rank();
    let mut values = Vec::with_capacity(rank);
    let mut vectors = Mat::zeros(rank, factor.cols());
    for k in 0..rank {
        values.push(g.values[k]);
        let s = T::one() / g.values[k].sqrt();
        let row = vectors.row_mut(k);
        for (i, &a) in g.vector(k).iter().enumerate() {
            axpy(a * s, factor.row(i), row);
        }
        eigen_orient(row);
    }
    Ok(EigenModel { values, vectors })
}

/// Whole-space regularized whitening of the within-subclass scatter.
#[derive(Clone, Debug)]
pub struct EreFit<T> {
    /// Regularized spectrum over all `d` dimensions.
    pub spectrum: SpectrumRegularization<T>,
    /// Raw within-subclass eigenvalues (clamped at zero, padded to `d`).
    pub eigenvalues: Vec<T>,
    pub(crate) coords: Coordinates<T>,
    /// `n × n`; row `k` is the `k`-th within-subclass eigenvector in coordinates.
    pub(crate) axes: Mat<T>,
    pub(crate) subclasses: Vec<Vec<usize>>,
}

impl<T: Real> EreFit<T> {
    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    pub fn mean(&self) -> &[T] {
        &self.coords.mean
    }

    pub fn route(&self) -> Route {
        self.coords.route
    }

    /// Whitening rows expressed in training coordinates.
    pub(crate) fn transform_coords(&self) -> Mat<T> {
        scale_rows(&self.axes, &self.spectrum.weights)
    }

    /// The full `d × d` transform `diag(w) · Vᵀ`.
    pub fn whole_space_transform(&self) -> Mat<T> {
        let d = self.dim();
        let n = self.coords.span_dim();
        let lifted = self.coords.lift(&self.transform_coords());
        if n == d {
            return lifted;
        }
        let rest = scale_rows(&self.coords.complement(), &self.spectrum.weights[n..]);
        Mat::from_vec(d, d, [lifted.as_slice(), rest.as_slice()].concat())
    }

    /// Ambient-space eigenvectors of the within-subclass scatter, one per row, in the
    /// order matching `spectrum`.
    pub fn eigenvectors(&self) -> Mat<T> {
        let lifted = self.coords.lift(&self.axes);
        let d = self.dim();
        if lifted.rows() == d {
            return lifted;
        }
        let rest = self.coords.complement();
        Mat::from_vec(d, d, [lifted.as_slice(), rest.as_slice()].concat())
    }
}

/// Decomposes and regularizes the within-subclass scatter.
///
/// The null block of the decomposition (eigenvalue zero) is rotated so that its
/// directions are ordered by the total scatter they carry, which fixes which null
/// directions receive which model weight.
pub fn fit_ere<T: Real>(train: &Dataset<T>, part: &SubclassPartition, mu: T, route: Route) -> Result<EreFit<T>> {
    if train.dim() < 2 {
        return Err(Error::InvalidArgument("whitening needs at least two dimensions".into()));
    }
    let subclasses = subclass_lists(part, train.len())?;
    let coords = Coordinates::build(train, route)?;
    let n = coords.span_dim();
    if n < 2 {
        return Err(Error::InsufficientRank { rank: n });
    }
    let scatter = scatters_from_rows(&coords.coords, &subclasses);
    let eig = sym_eigendecompose(&scatter.within)?;

    let mut eigenvalues: Vec<T> = eig.values.iter().map(|&v| v.max(T::zero())).collect();
    eigenvalues.resize(train.dim(), T::zero());
    let spectrum = regularize_values(&eigenvalues, mu)?;
    let rank = spectrum.rank();

    let mut axes = eig.vectors.clone();
    if rank < n {
        let null = Mat::from_vec(n - rank, n, eig.vectors.as_slice()[rank * n..].to_vec());
        let carried = null.matmul(&scatter.total).mul_transpose(&null);
        let order = {
            let mut c = carried;
            c.symmetrize();
            sym_eigendecompose(&c)?
        };
        for k in 0..(n - rank) {
            let row = axes.row_mut(rank + k);
            row.iter_mut().for_each(|x| *x = T::zero());
            for (j, &a) in order.vector(k).iter().enumerate() {
                axpy(a, null.row(j), row);
            }
            eigen_orient(row);
        }
    }
    Ok(EreFit {
        spectrum,
        eigenvalues,
        coords,
        axes,
        subclasses,
    })
}

/// Whole-space ERE model: all `d` whitening rows.
pub fn train_ere<T: Real>(train: &Dataset<T>, part: &SubclassPartition, mu: T) -> Result<SubspaceModel<T>> {
    let fit = fit_ere(train, part, mu, Route::Auto)?;
    Ok(SubspaceModel {
        method: Method::Ere,
        mean: fit.mean().to_vec(),
        transform: fit.whole_space_transform(),
        provenance: provenance(Method::Ere, train, &format!("mu={mu}|max_leaf={}", part.max_leaf)),
    })
}

#[derive(Clone, Debug)]
pub struct WssdaFit<T> {
    pub model: SubspaceModel<T>,
    pub ere: EreFit<T>,
    /// Eigenvalues of the between-subclass scatter of the whitened data.
    pub between_eigenvalues: Vec<T>,
    /// Trace of the total scatter of the whitened data.
    pub total_trace: T,
    /// Available discriminant directions before truncation to `q`.
    pub q_available: usize,
}

/// Subclass discriminant features computed on ERE-whitened data.
pub fn fit_wssda<T: Real>(
    train: &Dataset<T>,
    part: &SubclassPartition,
    mu: T,
    q: Option<usize>,
    route: Route,
) -> Result<WssdaFit<T>> {
    if part.num_subclasses() < 2 {
        return Err(Error::InvalidArgument("need at least two subclasses".into()));
    }
    let ere = fit_ere(train, part, mu, route)?;
    let tc = ere.transform_coords();
    let whitened = ere.coords.coords.mul_transpose(&tc);
    let stats = stats_from_rows(&whitened, &ere.subclasses);
    let axes = principal_axes(&between_factor(&stats))?;

    let c = ere.subclasses.len();
    let top = axes.values.first().copied().unwrap_or(T::zero());
    if top <= T::zero() {
        return Err(Error::InsufficientRank { rank: 0 });
    }
    let cut = T::rank_tol() * top;
    let q_available = axes
        .values
        .iter()
        .take(train.dim().min(c - 1))
        .take_while(|&&v| v > cut)
        .count();
    let q = q.unwrap_or(q_available);
    if q == 0 {
        return Err(Error::InvalidArgument("feature count must be at least 1".into()));
    }
    if q > q_available {
        return Err(Error::TooManyFeatures {
            requested: q,
            available: q_available,
        });
    }
    let mut u = axes.vectors.clone();
    u.truncate_rows(q);
    let rows_c = u.matmul(&tc);
    let total_trace = whitened.as_slice().iter().map(|&z| z * z).sum::<T>() / count::<T>(train.len());
    let model = SubspaceModel {
        method: Method::Wssda,
        mean: ere.mean().to_vec(),
        transform: ere.coords.lift(&rows_c),
        provenance: provenance(Method::Wssda, train, &format!("mu={mu}|max_leaf={}|q={q}", part.max_leaf)),
    };
    Ok(WssdaFit {
        model,
        between_eigenvalues: axes.values,
        total_trace,
        q_available,
        ere,
    })
}

/// WSSDA model with `q` feature rows (`None`: every available discriminant direction).
pub fn train_wssda<T: Real>(
    train: &Dataset<T>,
    part: &SubclassPartition,
    mu: T,
    q: Option<usize>,
) -> Result<SubspaceModel<T>> {
    Ok(fit_wssda(train, part, mu, q, Route::Auto)?.model)
}

/// Principal component baseline: top eigenvectors of the total scatter.
pub fn train_pca<T: Real>(train: &Dataset<T>, q: Option<usize>) -> Result<SubspaceModel<T>> {
    let limit = train.dim().min(train.len().saturating_sub(1));
    let coords = Coordinates::build(train, Route::Auto)?;
    let total = scaled_gram(&coords.coords, train.len());
    let eig = sym_eigendecompose(&total)?;
    let rank = eig.numerical_rank();
    let q = q.unwrap_or(rank.min(limit));
    if q == 0 || q > limit {
        return Err(Error::TooManyFeatures {
            requested: q,
            available: limit,
        });
    }
    if q > rank {
        return Err(Error::InsufficientRank { rank });
    }
    let mut rows = eig.vectors.clone();
    rows.truncate_rows(q);
    let mut transform = coords.lift(&rows);
    for k in 0..q {
        eigen_orient(transform.row_mut(k));
    }
    Ok(SubspaceModel {
        method: Method::Pca,
        mean: coords.mean,
        transform,
        provenance: provenance(Method::Pca, train, &format!("q={q}")),
    })
}

/// `rowsᵀ · rows / n`, symmetrized.
fn scaled_gram<T: Real>(rows: &Mat<T>, n: usize) -> Mat<T> {
    let mut s = rows.gram_cols();
    s.scale(T::one() / count::<T>(n));
    s.symmetrize();
    s
}

/// Fisherface baseline: PCA to rank `min(N − C, d)`, whitening of the within-class
/// scatter there, then the leading between-class directions.
pub fn train_lda<T: Real>(train: &Dataset<T>, q: Option<usize>) -> Result<SubspaceModel<T>> {
    let classes = subclass_lists(&SubclassPartition::by_class(train), train.len())?;
    let c = classes.len();
    if c < 2 {
        return Err(Error::InvalidArgument("LDA needs at least two subjects".into()));
    }
    if let Some(q) = q {
        if q > c - 1 {
            return Err(Error::TooManyFeatures {
                requested: q,
                available: c - 1,
            });
        }
    }
    let coords = Coordinates::build(train, Route::Auto)?;
    let total = scaled_gram(&coords.coords, train.len());
    let pca = sym_eigendecompose(&total)?;
    let keep = pca.numerical_rank().min(train.len() - c).min(train.dim());
    if keep == 0 {
        return Err(Error::InsufficientRank { rank: 0 });
    }
    let mut p = pca.vectors.clone();
    p.truncate_rows(keep);
    let reduced = coords.coords.mul_transpose(&p);
    let sc = scatters_from_rows(&reduced, &classes);
    let within = sym_eigendecompose(&sc.within)?;
    let wr = within.numerical_rank();
    if wr < keep {
        return Err(Error::InsufficientRank { rank: wr });
    }
    let inv_sqrt: Vec<T> = within.values.iter().map(|&v| T::one() / v.sqrt()).collect();
    let whiten = scale_rows(&within.vectors, &inv_sqrt);
    let whitened = reduced.mul_transpose(&whiten);
    let stats = stats_from_rows(&whitened, &classes);
    let between = principal_axes(&between_factor(&stats))?;
    let top = between.values.first().copied().unwrap_or(T::zero());
    if top <= T::zero() {
        return Err(Error::InsufficientRank { rank: 0 });
    }
    let available = between
        .values
        .iter()
        .take(c - 1)
        .take_while(|&&v| v > T::rank_tol() * top)
        .count();
    let q = q.unwrap_or(available);
    if q == 0 || q > available {
        return Err(Error::TooManyFeatures {
            requested: q,
            available,
        });
    }
    let mut u = between.vectors.clone();
    u.truncate_rows(q);
    let rows_c = u.matmul(&whiten).matmul(&p);
    Ok(SubspaceModel {
        method: Method::Lda,
        mean: coords.mean.clone(),
        transform: coords.lift(&rows_c),
        provenance: provenance(Method::Lda, train, &format!("q={q}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::partition::build_partition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(subjects: usize, per: usize, d: usize, seed: u64) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for s in 0..subjects {
            let center: Vec<f64> = (0..d).map(|_| rng.random_range(0.3..0.7)).collect();
            for _ in 0..per {
                let v = center.iter().map(|c| c + rng.random_range(-0.25..0.25)).collect();
                rows.push((format!("s{s}"), v));
            }
        }
        Dataset::from_labeled(rows).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn check_whitening(fit: &EreFit<f64>, s_ws: &Mat<f64>, tol: f64) {
        let t = fit.whole_space_transform();
        let w = t.matmul(s_ws).mul_transpose(&t);
        let m = fit.spectrum.boundary();
        for i in 0..w.rows() {
            for j in 0..w.cols() {
                if i != j {
                    assert!(w[(i, j)].abs() < tol, "off-diagonal ({i},{j}) = {}", w[(i, j)]);
                }
            }
            let expect = fit.eigenvalues[i] / fit.spectrum.regularized()[i];
            assert!((w[(i, i)] - expect).abs() < tol, "diag {i}: {} vs {expect}", w[(i, i)]);
            if i < m {
                assert!((w[(i, i)] - 1.0).abs() < tol);
            }
        }
    }

    #[test]
    fn ere_whitens_within_scatter_dense() {
        let ds = random_dataset(5, 12, 20, 1);
        let part = build_partition(&ds, 4).unwrap();
        let fit = fit_ere(&ds, &part, 1.0, Route::Auto).unwrap();
        assert_eq!(fit.route(), Route::Dense);
        let s = crate::scatter::compute_scatters(&ds, &part).unwrap();
        check_whitening(&fit, &s.within, 1e-9);
        let model = train_ere(&ds, &part, 1.0).unwrap();
        assert_eq!(model.q_max(), 20);
    }

    #[test]
    fn ere_whitens_within_scatter_data_span() {
        let ds = random_dataset(3, 6, 40, 2);
        let part = build_partition(&ds, 4).unwrap();
        let fit = fit_ere(&ds, &part, 1.0, Route::Auto).unwrap();
        assert_eq!(fit.route(), Route::DataSpan);
        let s = crate::scatter::compute_scatters(&ds, &part).unwrap();
        check_whitening(&fit, &s.within, 1e-9);
        let v = fit.eigenvectors();
        let vvt = v.mul_transpose(&v);
        assert!(max_abs_diff(vvt.as_slice(), Mat::identity(40).as_slice()) < 1e-10);
    }

    #[test]
    fn dense_and_data_span_agree() {
        let ds = random_dataset(4, 6, 30, 3);
        let part = build_partition(&ds, 3).unwrap();
        let dense = fit_wssda(&ds, &part, 1.0, None, Route::Dense).unwrap();
        let span = fit_wssda(&ds, &part, 1.0, None, Route::DataSpan).unwrap();
        let r = dense.ere.spectrum.rank();
        assert_eq!(r, span.ere.spectrum.rank());
        let (a, b) = (dense.ere.spectrum.regularized(), span.ere.spectrum.regularized());
        assert!(max_abs_diff(&a[..r], &b[..r]) < 1e-8);
        assert!(max_abs_diff(a, b) < 1e-8);
        assert_eq!(dense.q_available, span.q_available);
        let q = dense.q_available;
        assert!(max_abs_diff(&dense.between_eigenvalues[..q], &span.between_eigenvalues[..q]) < 1e-8);
        // Features agree up to the sign of each discriminant direction.
        for s in ds.samples() {
            let x = dense.model.project(&s.vector, q).unwrap();
            let y = span.model.project(&s.vector, q).unwrap();
            for (u, v) in x.iter().zip(&y) {
                assert!((u.abs() - v.abs()).abs() < 1e-7, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn ere_two_dimensional_closed_form() {
        // Isotropic-ish 2-D data, one subclass per subject: T = diag(w) · rotation.
        let ds = random_dataset(3, 10, 2, 4);
        let part = SubclassPartition::by_class(&ds);
        let fit = fit_ere(&ds, &part, 1.0, Route::Auto).unwrap();
        let t = fit.whole_space_transform();
        let ttt = t.mul_transpose(&t);
        assert!(ttt[(0, 1)].abs() < 1e-12);
        for k in 0..2 {
            assert!((ttt[(k, k)] - fit.spectrum.weights[k].powi(2)).abs() < 1e-9);
            assert_eq!(fit.spectrum.regularized()[k], fit.eigenvalues[k]);
        }
    }

    #[test]
    fn ere_rejects_rank_one_within_scatter() {
        let ds = Dataset::from_labeled(vec![
            ("A", vec![0.0, 0.0]),
            ("A", vec![0.5, 0.0]),
            ("B", vec![0.0, 0.5]),
            ("B", vec![0.5, 0.5]),
        ])
        .unwrap();
        let part = SubclassPartition::by_class(&ds);
        assert!(matches!(train_ere(&ds, &part, 1.0), Err(Error::InsufficientRank { .. })));
    }

    #[test]
    fn wssda_two_classes_aligns_with_whitened_mean_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rows = Vec::new();
        for (s, cx) in [("a", 0.3), ("b", 0.7)] {
            for _ in 0..8 {
                let v = vec![cx + rng.random_range(-0.05..0.05), 0.5 + rng.random_range(-0.1..0.1), 0.5 + rng.random_range(-0.1..0.1)];
                rows.push((s, v));
            }
        }
        let ds = Dataset::from_labeled(rows).unwrap();
        let part = SubclassPartition::by_class(&ds);
        let fit = fit_wssda(&ds, &part, 1.0, None, Route::Auto).unwrap();
        assert_eq!(fit.q_available, 1);
        let t = fit.ere.whole_space_transform();
        let st = crate::scatter::subclass_statistics(&ds, &part).unwrap();
        let diff: Vec<f64> = st.subclass_means[0].iter().zip(&st.subclass_means[1]).map(|(a, b)| a - b).collect();
        let mut u = t.mul_vec(&diff);
        let n = crate::linalg::norm(&u);
        u.iter_mut().for_each(|x| *x /= n);
        // Expected row: uᵀ·T.
        let expect = t.transpose().mul_vec(&u);
        let row = fit.model.transform.row(0);
        let sign = dot(row, &expect).signum();
        let flipped: Vec<f64> = expect.iter().map(|x| x * sign).collect();
        assert!(max_abs_diff(row, &flipped) < 1e-9);
        assert!(train_wssda(&ds, &part, 1.0, Some(2)).is_err());
    }

    #[test]
    fn wssda_truncation_equals_training_with_fewer_features() {
        let ds = random_dataset(5, 10, 12, 6);
        let part = build_partition(&ds, 4).unwrap();
        let full = train_wssda(&ds, &part, 1.0, None).unwrap();
        assert!(full.q_max() >= 4);
        let small = train_wssda(&ds, &part, 1.0, Some(3)).unwrap();
        assert_eq!(full.truncated(3).unwrap().transform, small.transform);
        let x = &ds.samples()[0].vector;
        assert_eq!(full.project(x, 3).unwrap(), small.project(x, 3).unwrap());
        assert!(matches!(
            train_wssda(&ds, &part, 1.0, Some(full.q_max() + 1)),
            Err(Error::TooManyFeatures { .. })
        ));
    }

    #[test]
    fn wssda_features_invariant_to_data_scale() {
        let ds = random_dataset(4, 8, 10, 7);
        let part = build_partition(&ds, 4).unwrap();
        let a = train_wssda(&ds, &part, 1.0, None).unwrap();
        let scaled = ds.map_vectors(|x| x * 0.25);
        let b = train_wssda(&scaled, &part, 1.0, None).unwrap();
        for (s, t) in ds.samples().iter().zip(scaled.samples()) {
            let x = a.project(&s.vector, a.q_max()).unwrap();
            let y = b.project(&t.vector, b.q_max()).unwrap();
            assert!(max_abs_diff(&x, &y) < 1e-8);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let ds = random_dataset(4, 8, 30, 8);
        let part = build_partition(&ds, 4).unwrap();
        for _ in 0..2 {
            assert_eq!(
                train_wssda(&ds, &part, 1.0, None).unwrap().to_bytes(),
                train_wssda(&ds, &part, 1.0, None).unwrap().to_bytes()
            );
            assert_eq!(train_ere(&ds, &part, 1.0).unwrap().to_bytes(), train_ere(&ds, &part, 1.0).unwrap().to_bytes());
            assert_eq!(train_pca(&ds, Some(5)).unwrap().to_bytes(), train_pca(&ds, Some(5)).unwrap().to_bytes());
            assert_eq!(train_lda(&ds, None).unwrap().to_bytes(), train_lda(&ds, None).unwrap().to_bytes());
        }
    }

    #[test]
    fn pca_on_axis_points() {
        let ds = Dataset::from_labeled(vec![("a", vec![0.1f64, 0.5]), ("a", vec![0.4, 0.5]), ("b", vec![0.9, 0.5])]).unwrap();
        let m = train_pca(&ds, Some(1)).unwrap();
        assert!((m.transform[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(m.transform[(0, 1)].abs() < 1e-12);
        assert!(train_pca(&ds, Some(3)).is_err());
    }

    #[test]
    fn pca_complete_basis_reconstructs() {
        let ds = random_dataset(3, 5, 4, 9);
        let m = train_pca(&ds, Some(4)).unwrap();
        let tt = m.transform.mul_transpose(&m.transform);
        assert!(max_abs_diff(tt.as_slice(), Mat::identity(4).as_slice()) < 1e-10);
        for s in ds.samples() {
            let y = m.project(&s.vector, 4).unwrap();
            let back = m.transform.transpose().mul_vec(&y);
            let centered: Vec<f64> = s.vector.iter().zip(&m.mean).map(|(x, u)| x - u).collect();
            assert!(max_abs_diff(&back, &centered) < 1e-10);
        }
        // Rank-deficient data through the span route.
        let wide = random_dataset(2, 3, 50, 10);
        let m = train_pca(&wide, None).unwrap();
        assert_eq!(m.q_max(), 5);
    }

    #[test]
    fn lda_two_classes_matches_closed_form() {
        let ds = random_dataset(2, 15, 3, 11);
        let m = train_lda(&ds, None).unwrap();
        assert_eq!(m.q_max(), 1);
        let s = crate::scatter::compute_scatters(&ds, &SubclassPartition::by_class(&ds)).unwrap();
        let st = &s.stats;
        let diff: Vec<f64> = st.subclass_means[0].iter().zip(&st.subclass_means[1]).map(|(a, b)| a - b).collect();
        // Solve S_w x = Δμ through the eigen decomposition.
        let e = sym_eigendecompose(&s.within).unwrap();
        let mut x = vec![0.0; 3];
        for k in 0..3 {
            let c = dot(e.vector(k), &diff) / e.values[k];
            axpy(c, e.vector(k), &mut x);
        }
        let row = m.transform.row(0);
        let cos = dot(row, &x) / (crate::linalg::norm(row) * crate::linalg::norm(&x));
        assert!((cos.abs() - 1.0).abs() < 1e-10, "{cos}");
        assert!(train_lda(&ds, Some(2)).is_err());
    }

    #[test]
    fn f32_training_runs() {
        let ds = random_dataset(3, 8, 6, 12);
        let ds32: Dataset<f32> = Dataset::from_labeled(
            ds.samples().iter().map(|s| (s.subject_id.clone(), s.vector.iter().map(|&v| v as f32).collect())),
        )
        .unwrap();
        let part = build_partition(&ds32, 4).unwrap();
        let m = train_wssda(&ds32, &part, 1.0, None).unwrap();
        assert!(m.transform.is_finite());
    }
}
