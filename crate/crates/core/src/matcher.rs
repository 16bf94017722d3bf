//! Cosine-distance nearest-neighbour identification over an enrolled gallery,
//! open-set rejection against a calibrated threshold, and one-to-one verification.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dataset::Dataset;
use crate::digest::scalars_hex;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Mat};
use crate::scalar::Real;
use crate::subspace::io::{put_scalars, put_string, put_u64, Reader};
use crate::subspace::{SubspaceModel, MAGIC};

/// Container tag distinguishing gallery files from model files.
pub const GALLERY_TAG: u8 = 0x10;

/// `1 − x·y / (‖x‖‖y‖)`, clamped to `[0, 2]`.
pub fn cosine_distance<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == T::zero() {
        return Err(Error::ZeroNorm { index: 0 });
    }
    if ny == T::zero() {
        return Err(Error::ZeroNorm { index: 1 });
    }
    Ok(distance_with_norms(x, nx, y, ny))
}

#[inline]
fn distance_with_norms<T: Real>(x: &[T], nx: T, y: &[T], ny: T) -> T {
    let two = T::one() + T::one();
    (T::one() - dot(x, y) / (nx * ny)).max(T::zero()).min(two)
}

/// Enrolled templates grouped by subject.
#[derive(Clone, Debug, PartialEq)]
pub struct GalleryIndex<T> {
    subjects: Vec<String>,
    /// Template rows, grouped by subject in `subjects` order.
    templates: Mat<T>,
    owner: Vec<usize>,
    norms: Vec<T>,
}

impl<T: Real> GalleryIndex<T> {
    pub fn new(entries: BTreeMap<String, Vec<Vec<T>>>) -> Result<Self> {
        let q = entries
            .values()
            .flatten()
            .next()
            .map(Vec::len)
            .ok_or(Error::EmptyGallery)?;
        let mut subjects = Vec::with_capacity(entries.len());
        let mut data = Vec::new();
        let mut owner = Vec::new();
        let mut norms = Vec::new();
        for (s, (subject, templates)) in entries.into_iter().enumerate() {
            if templates.is_empty() {
                return Err(Error::InvalidArgument(format!("subject {subject} has no templates")));
            }
            for t in templates {
                if t.len() != q {
                    return Err(Error::DimensionMismatch {
                        expected: q,
                        actual: t.len(),
                    });
                }
                let n = norm(&t);
                if n == T::zero() || !n.is_finite() {
                    return Err(Error::ZeroNorm { index: owner.len() });
                }
                data.extend_from_slice(&t);
                owner.push(s);
                norms.push(n);
            }
            subjects.push(subject);
        }
        Ok(GalleryIndex {
            subjects,
            templates: Mat::from_vec(owner.len(), q, data),
            owner,
            norms,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.templates.cols()
    }

    /// Enrolled subject ids, sorted.
    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn contains(&self, subject: &str) -> bool {
        self.subjects.binary_search_by(|s| s.as_str().cmp(subject)).is_ok()
    }

    pub fn num_templates(&self) -> usize {
        self.owner.len()
    }

    /// Templates of each subject.
    pub fn entries(&self) -> BTreeMap<&str, Vec<&[T]>> {
        let mut map: BTreeMap<&str, Vec<&[T]>> = BTreeMap::new();
        for (t, &s) in self.owner.iter().enumerate() {
            map.entry(self.subjects[s].as_str()).or_default().push(self.templates.row(t));
        }
        map
    }

    /// Per-subject minimum cosine distance, in `subjects` order.
    pub fn subject_scores(&self, probe: &[T]) -> Result<Vec<T>> {
        if probe.len() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim(),
                actual: probe.len(),
            });
        }
        let np = norm(probe);
        if np == T::zero() {
            return Err(Error::ZeroNorm { index: 0 });
        }
        let mut best = vec![T::infinity(); self.subjects.len()];
        for (t, &s) in self.owner.iter().enumerate() {
            let d = distance_with_norms(probe, np, self.templates.row(t), self.norms[t]);
            if d < best[s] {
                best[s] = d;
            }
        }
        Ok(best)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(GALLERY_TAG);
        put_u64(&mut out, self.feature_dim());
        put_u64(&mut out, self.subjects.len());
        for (s, subject) in self.subjects.iter().enumerate() {
            put_string(&mut out, subject);
            put_u64(&mut out, self.owner.iter().filter(|&&o| o == s).count());
        }
        put_scalars(&mut out, self.templates.as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        if r.u8()? != GALLERY_TAG {
            return Err(Error::Format("not a gallery container".into()));
        }
        let q = r.u64()?;
        let n = r.u64()?;
        let mut table = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let subject = r.string()?;
            let count = r.u64()?;
            table.push((subject, count));
        }
        let mut entries = BTreeMap::new();
        for (subject, count) in table {
            let templates = (0..count).map(|_| r.scalars(q)).collect::<Result<Vec<_>>>()?;
            if entries.insert(subject, templates).is_some() {
                return Err(Error::Format("duplicate subject".into()));
            }
        }
        r.finish()?;
        GalleryIndex::new(entries)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Projects every gallery sample to `q` features and enrolls it under its subject.
pub fn enroll<T: Real>(model: &SubspaceModel<T>, gallery: &Dataset<T>, q: usize) -> Result<GalleryIndex<T>> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let mut entries: BTreeMap<String, Vec<Vec<T>>> = BTreeMap::new();
    for (i, s) in gallery.samples().iter().enumerate() {
        let f = model.project(&s.vector, q)?;
        if norm(&f) == T::zero() {
            return Err(Error::ZeroNorm { index: i });
        }
        entries.entry(s.subject_id.clone()).or_default().push(f);
    }
    GalleryIndex::new(entries)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Subject(String),
    Unknown,
}

impl Decision {
    pub fn subject(&self) -> Option<&str> {
        match self {
            Decision::Subject(s) => Some(s),
            Decision::Unknown => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult<T> {
    /// Every enrolled subject once, ascending distance, ties by subject id.
    pub ranking: Vec<(String, T)>,
    pub decision: Decision,
    pub tau_used: Option<T>,
}

impl<T: Real> MatchResult<T> {
    /// 1-based rank of `subject`, if enrolled.
    pub fn rank_of(&self, subject: &str) -> Option<usize> {
        self.ranking.iter().position(|(s, _)| s == subject).map(|p| p + 1)
    }

    pub fn best(&self) -> (&str, T) {
        let (s, d) = &self.ranking[0];
        (s, *d)
    }

    pub fn distance_to(&self, subject: &str) -> Option<T> {
        self.ranking.iter().find(|(s, _)| s == subject).map(|(_, d)| *d)
    }
}

/// Ranks every enrolled subject against `probe`. With `tau`, the best subject is
/// accepted only if its distance is at most `tau`; without it identification is
/// closed-set.
pub fn identify<T: Real>(index: &GalleryIndex<T>, probe: &[T], tau: Option<T>) -> Result<MatchResult<T>> {
    if index.num_templates() == 0 {
        return Err(Error::EmptyGallery);
    }
    let scores = index.subject_scores(probe)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // subjects are sorted, so a stable sort keeps id order among equal distances
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let ranking: Vec<(String, T)> = order
        .iter()
        .map(|&s| (index.subjects[s].clone(), scores[s]))
        .collect();
    let (first, best) = (&ranking[0].0, ranking[0].1);
    let decision = match tau {
        Some(t) if best > t => Decision::Unknown,
        _ => Decision::Subject(first.clone()),
    };
    Ok(MatchResult {
        ranking,
        decision,
        tau_used: tau,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdConfig<T> {
    pub theta: T,
    pub tau: T,
    /// Digest of the calibration distances.
    pub calibration_digest: String,
}

/// `tau = theta · max(genuine_distances)`.
pub fn calibrate_threshold<T: Real>(genuine_distances: &[T], theta: T) -> Result<ThresholdConfig<T>> {
    if genuine_distances.is_empty() {
        return Err(Error::InvalidArgument("calibration needs at least one genuine distance".into()));
    }
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(Error::InvalidArgument(format!("theta must be in (0, 1], got {theta}")));
    }
    if genuine_distances.iter().any(|d| !d.is_finite() || *d < T::zero()) {
        return Err(Error::InvalidArgument("genuine distances must be finite and non-negative".into()));
    }
    let max = genuine_distances.iter().copied().fold(T::zero(), T::max);
    Ok(ThresholdConfig {
        theta,
        tau: theta * max,
        calibration_digest: scalars_hex(genuine_distances.iter().copied()),
    })
}

/// One-to-one check of a stored template against a few live captures.
pub fn verify<T: Real>(template: &[T], live: &[Vec<T>], tau: T) -> Result<(bool, T)> {
    if live.is_empty() {
        return Err(Error::InvalidArgument("no live images".into()));
    }
    let mut best = T::infinity();
    for v in live {
        best = best.min(cosine_distance(template, v)?);
    }
    Ok((best <= tau, best))
}
