//! Labeled face data: manifests, normalization into fixed-length vectors, and the
//! train/test and gallery/probe splits used by the evaluation protocols.

mod normalize;

pub use normalize::{
    equalize_histogram, normalize_face, read_pgm, sample_bilinear, write_pgm, GrayImage,
    NormalizationGeometry, Point, Similarity,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const IMAGE_HEADER: [&str; 7] = [
    "path",
    "subject_id",
    "left_eye_x",
    "left_eye_y",
    "right_eye_x",
    "right_eye_y",
    "tag",
];

/// One row of an image manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub image_path: PathBuf,
    pub subject_id: String,
    pub left_eye: Point,
    pub right_eye: Point,
    pub tag: Option<String>,
}

impl ManifestEntry {
    fn validate(&self) -> std::result::Result<(), String> {
        for p in [self.left_eye, self.right_eye] {
            if !(p.x.is_finite() && p.y.is_finite()) || p.x < 0.0 || p.y < 0.0 {
                return Err("eye coordinates must be finite and non-negative".into());
            }
        }
        if self.left_eye == self.right_eye {
            return Err("left and right eye coincide".into());
        }
        if self.subject_id.is_empty() {
            return Err("empty subject_id".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceSample<T> {
    pub vector: Vec<T>,
    pub subject_id: String,
    /// Row index in the manifest the sample came from.
    pub source: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    samples: Vec<FaceSample<T>>,
    dim: usize,
}

impl<T: Real> Dataset<T> {
    pub fn new(samples: Vec<FaceSample<T>>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::EmptyDataset);
        };
        let dim = first.vector.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-length sample vectors".into()));
        }
        for s in &samples {
            if s.vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: s.vector.len(),
                });
            }
            if s.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Dataset { samples, dim })
    }

    /// Builds a dataset from `(subject, vector)` pairs, numbering sources in order.
    pub fn from_labeled<S: Into<String>>(rows: impl IntoIterator<Item = (S, Vec<T>)>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .enumerate()
                .map(|(source, (subject, vector))| FaceSample {
                    vector,
                    subject_id: subject.into(),
                    source,
                })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[FaceSample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sorted distinct subject ids.
    pub fn subjects(&self) -> Vec<&str> {
        self.by_subject().into_keys().collect()
    }

    /// Sample indices per subject, subjects sorted, indices in dataset order.
    pub fn by_subject(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            map.entry(s.subject_id.as_str()).or_default().push(i);
        }
        map
    }

    /// Sub-dataset of the given sample indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.samples[i].clone()).collect())
    }

    /// Samples whose subject passes `keep`, in dataset order.
    pub fn of_subjects(&self, keep: impl Fn(&str) -> bool) -> Result<Self> {
        Self::new(
            self.samples
                .iter()
                .filter(|s| keep(&s.subject_id))
                .cloned()
                .collect(),
        )
    }

    /// Multiplies every coordinate by `factor` (used by invariance checks).
    pub fn map_vectors(&self, f: impl Fn(T) -> T) -> Self {
        Dataset {
            samples: self
                .samples
                .iter()
                .map(|s| FaceSample {
                    vector: s.vector.iter().map(|&v| f(v)).collect(),
                    ..s.clone()
                })
                .collect(),
            dim: self.dim,
        }
    }

    /// SHA-256 over subjects and vector bits.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for s in &self.samples {
            h.update(s.subject_id.as_bytes());
            h.update([0u8]);
            for v in &s.vector {
                h.update(v.to_f64_lossless().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Writes the vector-manifest form (`subject_id,f0,...`).
    pub fn write_vector_manifest(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let mut header = vec!["subject_id".to_string()];
        header.extend((0..self.dim).map(|i| format!("f{i}")));
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for s in &self.samples {
            let mut rec = Vec::with_capacity(self.dim + 1);
            rec.push(s.subject_id.clone());
            rec.extend(s.vector.iter().map(|v| v.to_f64_lossless().to_string()));
            w.write_record(&rec).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::BadFile {
            path: path.to_owned(),
            message: format!("{other:?}"),
        },
    }
}

/// How manifest rows are turned into samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ManifestMode {
    /// Image manifest; each image is normalized with the given geometry.
    Images(NormalizationGeometry),
    /// Vector manifest; rows are taken verbatim.
    Vectors,
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn malformed(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        path: path.to_owned(),
        row,
        message: message.into(),
    }
}

/// Parses an image manifest without loading images. Rows are numbered from 1 after
/// the header.
pub fn read_image_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut rdr = open_csv(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(IMAGE_HEADER.iter().copied()) {
        return Err(Error::BadFile {
            path: path.to_owned(),
            message: format!("expected header `{}`", IMAGE_HEADER.join(",")),
        });
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| malformed(path, row, e.to_string()))?;
        if rec.len() != IMAGE_HEADER.len() {
            return Err(malformed(path, row, format!("expected 7 fields, got {}", rec.len())));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|_| malformed(path, row, format!("bad number in `{}`", IMAGE_HEADER[k])))
        };
        let tag = rec[6].trim();
        let entry = ManifestEntry {
            image_path: base.join(rec[0].trim()),
            subject_id: rec[1].trim().to_string(),
            left_eye: Point::new(num(2)?, num(3)?),
            right_eye: Point::new(num(4)?, num(5)?),
            tag: (!tag.is_empty()).then(|| tag.to_string()),
        };
        entry.validate().map_err(|m| malformed(path, row, m))?;
        out.push(entry);
    }
    Ok(out)
}

/// Loads a manifest into a dataset.
pub fn load_manifest<T: Real>(path: &Path, mode: ManifestMode) -> Result<Dataset<T>> {
    match mode {
        ManifestMode::Vectors => load_vectors(path),
        ManifestMode::Images(geom) => {
            geom.validate()?;
            let entries = read_image_manifest(path)?;
            if entries.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let mut samples = Vec::with_capacity(entries.len());
            for (i, e) in entries.iter().enumerate() {
                let img = read_pgm(&e.image_path)?;
                let vector = normalize_face(&img, e.left_eye, e.right_eye, &geom)
                    .map_err(|err| malformed(path, i + 1, err.to_string()))?;
                samples.push(FaceSample {
                    vector,
                    subject_id: e.subject_id.clone(),
                    source: i,
                });
            }
            Dataset::new(samples)
        }
    }
}

fn load_vectors<T: Real>(path: &Path) -> Result<Dataset<T>> {
    let mut rdr = open_csv(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let dim = header.len().saturating_sub(1);
    let header_ok = header.get(0) == Some("subject_id")
        && dim > 0
        && header.iter().skip(1).enumerate().all(|(i, h)| h == format!("f{i}"));
    if !header_ok {
        return Err(Error::BadFile {
            path: path.to_owned(),
            message: "expected header `subject_id,f0,f1,...`".into(),
        });
    }
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| malformed(path, row, e.to_string()))?;
        if rec.len() != dim + 1 {
            return Err(malformed(
                path,
                row,
                format!("inconsistent vector length: expected {dim}, got {}", rec.len() as isize - 1),
            ));
        }
        let subject = rec[0].trim();
        if subject.is_empty() {
            return Err(malformed(path, row, "empty subject_id"));
        }
        let mut vector = Vec::with_capacity(dim);
        for (k, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| malformed(path, row, format!("bad number in f{k}")))?;
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(malformed(path, row, format!("f{k} = {v} outside [0, 1]")));
            }
            vector.push(T::from_f64(v).expect("value fits scalar"));
        }
        samples.push(FaceSample {
            vector,
            subject_id: subject.to_string(),
            source: i,
        });
    }
    Dataset::new(samples)
}

/// Subject-disjoint split: sorted subject ids are shuffled with a seeded ChaCha8
/// generator and the first `train_subjects` go to training.
pub fn split_train_test<T: Real>(
    ds: &Dataset<T>,
    train_subjects: usize,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>)> {
    let mut subjects: Vec<String> = ds.subjects().into_iter().map(String::from).collect();
    if train_subjects == 0 || train_subjects >= subjects.len() {
        return Err(Error::InvalidArgument(format!(
            "train_subjects must be in 1..{}, got {train_subjects}",
            subjects.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    subjects.shuffle(&mut rng);
    let train: std::collections::BTreeSet<&str> =
        subjects[..train_subjects].iter().map(String::as_str).collect();
    Ok((
        ds.of_subjects(|s| train.contains(s))?,
        ds.of_subjects(|s| !train.contains(s))?,
    ))
}

/// How gallery samples are picked from each subject.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GalleryRule {
    /// First `k` samples in manifest order.
    First,
    /// `k` samples chosen by a seeded shuffle.
    SeededRandom(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GalleryProbeSplit<T> {
    pub gallery: Dataset<T>,
    pub probe: Dataset<T>,
    pub k_per_subject: usize,
    /// Subjects dropped for having `k` or fewer samples.
    pub dropped_subjects: usize,
}

/// Splits each subject into `k` gallery samples and the rest as probes. Subjects with
/// at most `k` samples are dropped.
pub fn make_gallery_probe<T: Real>(
    ds: &Dataset<T>,
    k: usize,
    rule: GalleryRule,
) -> Result<GalleryProbeSplit<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("gallery size k must be at least 1".into()));
    }
    let mut rng = match rule {
        GalleryRule::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        GalleryRule::First => None,
    };
    let mut in_gallery = vec![false; ds.len()];
    let mut in_probe = vec![false; ds.len()];
    let mut dropped = 0;
    for (_, mut idx) in ds.by_subject() {
        if idx.len() <= k {
            dropped += 1;
            continue;
        }
        if let Some(rng) = rng.as_mut() {
            idx.shuffle(rng);
        }
        for (n, &i) in idx.iter().enumerate() {
            if n < k {
                in_gallery[i] = true;
            } else {
                in_probe[i] = true;
            }
        }
    }
    let pick = |mask: &[bool]| -> Vec<usize> {
        mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    };
    let gallery = pick(&in_gallery);
    if gallery.is_empty() {
        return Err(Error::NoSubjectsRetained);
    }
    Ok(GalleryProbeSplit {
        gallery: ds.subset(&gallery)?,
        probe: ds.subset(&pick(&in_probe))?,
        k_per_subject: k,
        dropped_subjects: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    fn toy(counts: &[(&str, usize)]) -> Dataset<f64> {
        let mut rows = Vec::new();
        for (s, n) in counts {
            for i in 0..*n {
                rows.push((s.to_string(), vec![i as f64 / 100.0, 0.5]));
            }
        }
        Dataset::from_labeled(rows).unwrap()
    }

    #[test]
    fn vector_manifest_passthrough() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "v.csv", "subject_id,f0,f1,f2\na,0.1,0.2,0.3\nb,1,0,0.5\n");
        let ds: Dataset<f64> = load_manifest(&p, ManifestMode::Vectors).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.samples()[1].vector, vec![1.0, 0.0, 0.5]);
        assert_eq!(ds.samples()[1].subject_id, "b");
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "v.csv", "subject_id,f0,f1\n");
        let err = load_manifest::<f64>(&p, ManifestMode::Vectors).unwrap_err();
        assert_eq!(err.to_string(), "empty dataset");
    }

    #[test]
    fn malformed_rows_report_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "v.csv", "subject_id,f0,f1\na,0.1,0.2\nb,0.3\n");
        match load_manifest::<f64>(&p, ManifestMode::Vectors) {
            Err(Error::MalformedRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
        let p = write(dir.path(), "w.csv", "subject_id,f0\na,x\n");
        assert!(matches!(
            load_manifest::<f64>(&p, ManifestMode::Vectors),
            Err(Error::MalformedRow { row: 1, .. })
        ));
        let p = write(dir.path(), "r.csv", "subject_id,f0\na,1.5\n");
        assert!(load_manifest::<f64>(&p, ManifestMode::Vectors).is_err());
        let p = write(dir.path(), "h.csv", "id,f0\na,0.5\n");
        assert!(matches!(
            load_manifest::<f64>(&p, ManifestMode::Vectors),
            Err(Error::BadFile { .. })
        ));
        assert!(matches!(
            load_manifest::<f64>(&dir.path().join("missing.csv"), ManifestMode::Vectors),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn image_manifest_normalizes_each_row() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(64, 80, |x, y| (x + y) as u8);
        write_pgm(&dir.path().join("a.pgm"), &img).unwrap();
        let p = write(
            dir.path(),
            "m.csv",
            "path,subject_id,left_eye_x,left_eye_y,right_eye_x,right_eye_y,tag\n\
             a.pgm,s1,20,28,44,28,frontal\na.pgm,s2,20,28,44,28,\n",
        );
        let entries = read_image_manifest(&p).unwrap();
        assert_eq!(entries[0].tag.as_deref(), Some("frontal"));
        assert_eq!(entries[1].tag, None);
        let geom = NormalizationGeometry {
            hist_eq: false,
            ..Default::default()
        };
        let ds: Dataset<f64> = load_manifest(&p, ManifestMode::Images(geom)).unwrap();
        assert_eq!(ds.dim(), 64 * 80);
        assert_eq!(ds.samples()[0].vector[65], (1.0 + 1.0) / 255.0);

        let bad = write(
            dir.path(),
            "b.csv",
            "path,subject_id,left_eye_x,left_eye_y,right_eye_x,right_eye_y,tag\n\
             a.pgm,s1,20,28,20,28,\n",
        );
        assert!(matches!(read_image_manifest(&bad), Err(Error::MalformedRow { row: 1, .. })));
    }

    #[test]
    fn vector_manifest_write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = Dataset::from_labeled(vec![("a", vec![0.1, 1.0 / 3.0]), ("b", vec![0.0, 1.0])])
            .unwrap();
        let p = dir.path().join("o.csv");
        ds.write_vector_manifest(&p).unwrap();
        let back: Dataset<f64> = load_manifest(&p, ManifestMode::Vectors).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn split_counts_and_determinism() {
        let names: Vec<String> = (0..88).map(|i| format!("s{i:02}")).collect();
        let counts: Vec<(&str, usize)> = names.iter().map(|n| (n.as_str(), 3)).collect();
        let ds = toy(&counts);
        let (tr, te) = split_train_test(&ds, 42, 7).unwrap();
        assert_eq!(tr.subjects().len(), 42);
        assert_eq!(te.subjects().len(), 46);
        let again = split_train_test(&ds, 42, 7).unwrap();
        assert_eq!((tr.clone(), te.clone()), again);
        assert_eq!(tr.digest(), again.0.digest());
        assert!(split_train_test(&ds, 88, 7).is_err());
    }

    #[test]
    fn split_three_subjects_disjoint() {
        let ds = toy(&[("a", 2), ("b", 2), ("c", 2)]);
        let (tr, te) = split_train_test(&ds, 1, 3).unwrap();
        let a: BTreeSet<_> = tr.subjects().into_iter().collect();
        let b: BTreeSet<_> = te.subjects().into_iter().collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.len() + b.len(), 3);
    }

    #[test]
    fn gallery_probe_counts() {
        let ds = toy(&[("a", 8), ("b", 3)]);
        let g = make_gallery_probe(&ds, 7, GalleryRule::First).unwrap();
        assert_eq!(g.gallery.len(), 7);
        assert_eq!(g.probe.len(), 1);
        assert_eq!(g.dropped_subjects, 1);
        let g1 = make_gallery_probe(&ds, 1, GalleryRule::First).unwrap();
        assert_eq!(g1.gallery.len(), 2);
        assert_eq!(g1.probe.len(), 9);
        assert_eq!(g1.gallery.samples()[0].source, 0);

        let nine = toy(&[("a", 9), ("b", 9)]);
        let err = make_gallery_probe(&nine, 9, GalleryRule::First).unwrap_err();
        assert_eq!(err.to_string(), "no subjects retained");
        assert!(make_gallery_probe(&nine, 0, GalleryRule::First).is_err());
    }

    proptest! {
        #[test]
        fn split_invariants(counts in proptest::collection::vec(1usize..12, 2..10), seed in any::<u64>(), k in 1usize..6) {
            let names: Vec<String> = (0..counts.len()).map(|i| format!("p{i}")).collect();
            let spec: Vec<(&str, usize)> = names.iter().map(String::as_str).zip(counts.iter().copied()).collect();
            let ds = toy(&spec);

            let ntrain = 1 + (seed as usize) % (counts.len() - 1);
            let (tr, te) = split_train_test(&ds, ntrain, seed).unwrap();
            let a: BTreeSet<String> = tr.subjects().into_iter().map(String::from).collect();
            let b: BTreeSet<String> = te.subjects().into_iter().map(String::from).collect();
            prop_assert!(a.is_disjoint(&b));
            prop_assert_eq!(a.len() + b.len(), counts.len());
            prop_assert_eq!(tr.len() + te.len(), ds.len());

            for rule in [GalleryRule::First, GalleryRule::SeededRandom(seed)] {
                match make_gallery_probe(&ds, k, rule) {
                    Ok(split) => {
                        let g: BTreeSet<usize> = split.gallery.samples().iter().map(|s| s.source).collect();
                        let p: BTreeSet<usize> = split.probe.samples().iter().map(|s| s.source).collect();
                        prop_assert!(g.is_disjoint(&p));
                        let retained: usize = counts.iter().filter(|&&c| c > k).sum();
                        prop_assert_eq!(g.len() + p.len(), retained);
                        for (_, idx) in split.gallery.by_subject() {
                            prop_assert_eq!(idx.len(), k);
                        }
                    }
                    Err(e) => {
                        prop_assert!(counts.iter().all(|&c| c <= k));
                        prop_assert!(matches!(e, Error::NoSubjectsRetained));
                    }
                }
            }
        }
    }
}
