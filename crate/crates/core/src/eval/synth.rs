//! Seeded Gaussian-cluster datasets for end-to-end testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub subjects: usize,
    pub clusters_per_subject: usize,
    pub dim: usize,
    pub samples_per_subject: usize,
    /// Distance between cluster centers in units of the within-cluster deviation.
    pub separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("subjects", self.subjects),
            ("clusters_per_subject", self.clusters_per_subject),
            ("dim", self.dim),
            ("samples_per_subject", self.samples_per_subject),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "separation must be positive, got {}",
                self.separation
            )));
        }
        Ok(())
    }
}

/// Draws the dataset described by `spec`.
///
/// Cluster centers are independent Gaussian draws with per-coordinate deviation
/// `separation/√(2d)`, which puts any two centers (same subject or not) about
/// `separation` apart. Samples add isotropic Gaussian noise scaled so the root mean
/// square distance from a sample to its center is 1, and cycle through their
/// subject's clusters in order. The finished set is mapped by one global affine map
/// into `[0, 1]`, which preserves all distance ratios.
pub fn synthesize<T: Real>(spec: &SyntheticSpec) -> Result<Dataset<T>> {
    spec.validate()?;
    let d = spec.dim;
    let center_sd = spec.separation / (2.0 * d as f64).sqrt();
    let noise_sd = 1.0 / (d as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gauss = |sd: f64| -> f64 { sd * rng.sample::<f64, _>(StandardNormal) };
    let width = spec.subjects.to_string().len();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::with_capacity(spec.subjects * spec.samples_per_subject);
    for s in 0..spec.subjects {
        let centers: Vec<Vec<f64>> = (0..spec.clusters_per_subject)
            .map(|_| (0..d).map(|_| gauss(center_sd)).collect())
            .collect();
        let id = format!("s{s:0width$}");
        for i in 0..spec.samples_per_subject {
            let c = &centers[i % centers.len()];
            let v = c.iter().map(|m| m + gauss(noise_sd)).collect();
            rows.push((id.clone(), v));
        }
    }
    let (lo, hi) = rows
        .iter()
        .flat_map(|(_, v)| v.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    Dataset::from_labeled(rows.into_iter().map(|(id, v)| {
        let mapped = v
            .into_iter()
            .map(|x| T::from_f64(((x - lo) / span).clamp(0.0, 1.0)).unwrap())
            .collect();
        (id, mapped)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            subjects: 10,
            clusters_per_subject: 2,
            dim: 50,
            samples_per_subject: 20,
            separation: 5.0,
            seed: 0,
        }
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn shape_and_determinism() {
        let ds: Dataset<f64> = synthesize(&spec()).unwrap();
        assert_eq!(ds.len(), 200);
        assert_eq!(ds.dim(), 50);
        assert_eq!(ds.subjects().len(), 10);
        assert!(ds.samples().iter().all(|s| s.vector.iter().all(|v| (0.0..=1.0).contains(v))));
        assert_eq!(synthesize::<f64>(&spec()).unwrap(), ds);
        let other: Dataset<f64> = synthesize(&SyntheticSpec { seed: 1, ..spec() }).unwrap();
        assert_ne!(other, ds);

        let one: Dataset<f64> = synthesize(&SyntheticSpec { subjects: 1, ..spec() }).unwrap();
        assert_eq!(one.subjects().len(), 1);
    }

    #[test]
    fn cross_subject_centers_far_exceed_cluster_spread() {
        let ds: Dataset<f64> = synthesize(&spec()).unwrap();
        // Empirical cluster means and root mean square distance to them.
        let mut means = Vec::new();
        let mut sq = 0.0;
        let mut count = 0usize;
        for (subject, idx) in ds.by_subject() {
            for c in 0..2 {
                let members: Vec<&[f64]> = idx
                    .iter()
                    .enumerate()
                    .filter(|(n, _)| n % 2 == c)
                    .map(|(_, &i)| ds.samples()[i].vector.as_slice())
                    .collect();
                let mut m = vec![0.0; 50];
                for v in &members {
                    for (a, x) in m.iter_mut().zip(v.iter()) {
                        *a += x / members.len() as f64;
                    }
                }
                for v in &members {
                    sq += dist(v, &m).powi(2);
                    count += 1;
                }
                means.push((subject.to_string(), m));
            }
        }
        let sigma = (sq / count as f64).sqrt();
        let mut min_cross = f64::INFINITY;
        for (i, (si, mi)) in means.iter().enumerate() {
            for (sj, mj) in &means[i + 1..] {
                if si != sj {
                    min_cross = min_cross.min(dist(mi, mj));
                }
            }
        }
        assert!(min_cross >= 3.0 * sigma, "{min_cross} vs {sigma}");
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(synthesize::<f64>(&SyntheticSpec { subjects: 0, ..spec() }).is_err());
        assert!(synthesize::<f64>(&SyntheticSpec { separation: 0.0, ..spec() }).is_err());
        assert!(synthesize::<f64>(&SyntheticSpec { separation: f64::NAN, ..spec() }).is_err());
    }
}
