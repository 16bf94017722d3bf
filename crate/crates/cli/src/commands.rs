use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::Serialize;
use subfr::dataset::{
    load_manifest, make_gallery_probe, split_train_test, GalleryRule, ManifestMode, NormalizationGeometry,
    IMAGE_HEADER,
};
use subfr::eval::{emit_report, evaluate as run_protocol, rate_vs_features, synthesize, ProtocolConfig, SyntheticSpec};
use subfr::matcher::{calibrate_threshold, enroll as enroll_gallery, identify as identify_probe, verify as verify_live};
use subfr::partition::build_partition;
use subfr::subspace::{read_model, train_ere, train_lda, train_pca, train_wssda, write_model, write_model_json, Method};
use subfr::{Dataset, GalleryIndex, SubspaceModel};

use crate::runlog::{self, file_digest};
use crate::{
    EnrollArgs, EvaluateArgs, IdentifyArgs, NormalizeArgs, SplitArgs, SweepArgs, SynthArgs, TrainArgs, VerifyArgs,
};

/// Exit code 2 for bad flags or requests the data cannot satisfy, 1 for everything else.
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<subfr::Error> for Failure {
    fn from(e: subfr::Error) -> Self {
        match e {
            subfr::Error::InvalidArgument(_) | subfr::Error::TooManyFeatures { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<Summary, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// One-line `key=value` summary.
#[derive(Default)]
pub struct Summary(Vec<(String, String)>);

impl Summary {
    fn new(command: &str) -> Self {
        Summary(vec![("command".into(), command.into())])
    }

    fn put(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.0.push((key.into(), value.to_string()));
        self
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Loads an image manifest (detected by its header) or a vector manifest.
fn load(path: &Path) -> Result<Dataset, Failure> {
    let file = std::fs::File::open(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let mut first = String::new();
    std::io::BufReader::new(file).read_line(&mut first)?;
    let mode = if first.trim_end().split(',').eq(IMAGE_HEADER.iter().copied()) {
        ManifestMode::Images(NormalizationGeometry::default())
    } else {
        ManifestMode::Vectors
    };
    Ok(load_manifest(path, mode)?)
}

fn out_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn check_theta(theta: f64) -> Result<(), Failure> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--theta must be in (0, 1], got {theta}")))
    }
}

fn check_positive(name: &str, v: usize) -> Result<(), Failure> {
    if v == 0 {
        Err(usage(format!("--{name} must be at least 1")))
    } else {
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<(), Failure> {
    if (0.0..=2.0).contains(&tau) {
        Ok(())
    } else {
        Err(usage(format!("--tau must be in [0, 2], got {tau}")))
    }
}

fn digest_of(path: &Path) -> Result<String, Failure> {
    Ok(file_digest(path)?)
}

fn log<F: Serialize>(dir: &Path, command: &str, flags: &F, inputs: &[&Path], outputs: &[PathBuf]) -> Result<(), Failure> {
    let inputs: Vec<PathBuf> = inputs.iter().map(|p| p.to_path_buf()).collect();
    Ok(runlog::append(dir, command, flags, &inputs, outputs)?)
}

pub fn normalize(a: &NormalizeArgs) -> Outcome {
    let geom = NormalizationGeometry {
        hist_eq: !a.no_hist_eq,
        ..Default::default()
    };
    let ds: Dataset = load_manifest(&a.manifest, ManifestMode::Images(geom))?;
    create_dir(&a.out)?;
    let path = a.out.join("vectors.csv");
    ds.write_vector_manifest(&path)?;
    log(&a.out, "normalize", a, &[&a.manifest], std::slice::from_ref(&path))?;
    Ok(Summary::new("normalize")
        .put("samples", ds.len())
        .put("subjects", ds.subjects().len())
        .put("dim", ds.dim())
        .put("out", path.display()))
}

pub fn split(a: &SplitArgs) -> Outcome {
    if let Some(k) = a.gallery_k {
        check_positive("gallery-k", k)?;
    }
    if let Some(n) = a.train_subjects {
        check_positive("train-subjects", n)?;
    }
    let ds = load(&a.manifest)?;
    let (names, first, second, dropped) = match (a.train_subjects, a.gallery_k) {
        (Some(n), _) => {
            let (train, test) = split_train_test(&ds, n, a.seed)?;
            (["train.csv", "test.csv"], train, test, 0)
        }
        (None, Some(k)) => {
            let s = make_gallery_probe(&ds, k, GalleryRule::SeededRandom(a.seed))?;
            (["gallery.csv", "probe.csv"], s.gallery, s.probe, s.dropped_subjects)
        }
        (None, None) => return Err(usage("one of --train-subjects or --gallery-k is required")),
    };
    create_dir(&a.out)?;
    let paths: Vec<PathBuf> = names.iter().map(|n| a.out.join(n)).collect();
    first.write_vector_manifest(&paths[0])?;
    second.write_vector_manifest(&paths[1])?;
    log(&a.out, "split", a, &[&a.manifest], &paths)?;
    Ok(Summary::new("split")
        .put(names[0].trim_end_matches(".csv"), first.len())
        .put(names[1].trim_end_matches(".csv"), second.len())
        .put("dropped_subjects", dropped)
        .put("out", a.out.display()))
}

pub fn train(a: &TrainArgs) -> Outcome {
    let method: Method = a.method.parse().map_err(|e: subfr::Error| usage(e.to_string()))?;
    check_positive("max-leaf", a.max_leaf)?;
    if !(a.mu >= 0.0 && a.mu.is_finite()) {
        return Err(usage(format!("--mu must be a non-negative number, got {}", a.mu)));
    }
    if let Some(q) = a.q {
        check_positive("q", q)?;
    }
    let ds = load(&a.manifest)?;
    let model: SubspaceModel = match method {
        Method::Pca => train_pca(&ds, a.q)?,
        Method::Lda => train_lda(&ds, a.q)?,
        Method::Ere => {
            let part = build_partition(&ds, a.max_leaf)?;
            let m = train_ere(&ds, &part, a.mu)?;
            match a.q {
                Some(q) => m.truncated(q)?,
                None => m,
            }
        }
        Method::Wssda => {
            let part = build_partition(&ds, a.max_leaf)?;
            train_wssda(&ds, &part, a.mu, a.q)?
        }
    };
    let dir = out_dir(&a.out);
    create_dir(&dir)?;
    write_model(&a.out, &model)?;
    let mut outputs = vec![a.out.clone()];
    if a.json {
        let mut p = a.out.clone().into_os_string();
        p.push(".json");
        let p = PathBuf::from(p);
        write_model_json(&p, &model)?;
        outputs.push(p);
    }
    log(&dir, "train", a, &[&a.manifest], &outputs)?;
    Ok(Summary::new("train")
        .put("method", method)
        .put("samples", ds.len())
        .put("subjects", ds.subjects().len())
        .put("dim", model.dim())
        .put("q_max", model.q_max())
        .put("out", a.out.display())
        .put("sha256", digest_of(&a.out)?))
}

fn feature_count(model: &SubspaceModel, q: Option<usize>) -> Result<usize, Failure> {
    let q = q.unwrap_or(model.q_max());
    check_positive("q", q)?;
    if q > model.q_max() {
        return Err(subfr::Error::TooManyFeatures {
            requested: q,
            available: model.q_max(),
        }
        .into());
    }
    Ok(q)
}

pub fn enroll(a: &EnrollArgs) -> Outcome {
    let model: SubspaceModel = read_model(&a.model)?;
    let q = feature_count(&model, a.q)?;
    let ds = load(&a.manifest)?;
    let gallery = enroll_gallery(&model, &ds, q)?;
    let dir = out_dir(&a.out);
    create_dir(&dir)?;
    gallery.write(&a.out)?;
    log(&dir, "enroll", a, &[&a.model, &a.manifest], std::slice::from_ref(&a.out))?;
    Ok(Summary::new("enroll")
        .put("subjects", gallery.subjects().len())
        .put("templates", gallery.num_templates())
        .put("q", q)
        .put("out", a.out.display())
        .put("sha256", digest_of(&a.out)?))
}

/// Projects `ds` and returns each sample's distance to its own enrolled subject.
fn genuine_distances(model: &SubspaceModel, gallery: &GalleryIndex, ds: &Dataset) -> Result<Vec<f64>, Failure> {
    let q = gallery.feature_dim();
    let mut out = Vec::with_capacity(ds.len());
    for s in ds.samples() {
        let r = identify_probe(gallery, &model.project(&s.vector, q)?, None)?;
        let d = r
            .distance_to(&s.subject_id)
            .ok_or_else(|| Failure::Runtime(subfr::Error::NotEnrolled(s.subject_id.clone()).to_string()))?;
        out.push(d);
    }
    Ok(out)
}

pub fn identify(a: &IdentifyArgs) -> Outcome {
    check_theta(a.theta)?;
    if let Some(t) = a.tau {
        check_tau(t)?;
    }
    let model: SubspaceModel = read_model(&a.model)?;
    let gallery = GalleryIndex::read(&a.gallery)?;
    let q = gallery.feature_dim();
    if q > model.q_max() {
        return Err(Failure::Runtime(format!(
            "gallery has {q} features but the model only {}",
            model.q_max()
        )));
    }
    let probes = load(&a.manifest)?;
    let mut inputs: Vec<&Path> = vec![&a.model, &a.gallery, &a.manifest];
    let (tau, calibration_digest) = match (&a.calibration, a.tau) {
        (Some(path), _) => {
            let cal = load(path)?;
            inputs.push(path);
            let t = calibrate_threshold(&genuine_distances(&model, &gallery, &cal)?, a.theta)?;
            (Some(t.tau), Some(t.calibration_digest))
        }
        (None, t) => (t, None),
    };

    let mut rows = String::from("probe,truth,best,distance,decision,truth_rank\n");
    let (mut enrolled, mut correct, mut unknown) = (0, 0, 0);
    for s in probes.samples() {
        let r = identify_probe(&gallery, &model.project(&s.vector, q)?, tau)?;
        let (best, dist) = r.best();
        let decision = r.decision.subject().unwrap_or("unknown");
        let rank = r.rank_of(&s.subject_id);
        if rank.is_some() {
            enrolled += 1;
            if r.decision.subject() == Some(s.subject_id.as_str()) {
                correct += 1;
            }
        }
        if r.decision.subject().is_none() {
            unknown += 1;
        }
        rows.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.source + 1,
            s.subject_id,
            best,
            dist,
            decision,
            rank.map(|r| r.to_string()).unwrap_or_default()
        ));
    }
    create_dir(&a.out)?;
    let path = a.out.join("matches.csv");
    std::fs::write(&path, rows)?;
    log(&a.out, "identify", a, &inputs, std::slice::from_ref(&path))?;
    let rate = if enrolled == 0 { 0.0 } else { correct as f64 / enrolled as f64 };
    let mut s = Summary::new("identify")
        .put("probes", probes.len())
        .put("enrolled_probes", enrolled)
        .put("correct", correct)
        .put("rate", rate)
        .put("unknown", unknown)
        .put("tau", tau.map(|t| t.to_string()).unwrap_or_else(|| "none".into()));
    if let Some(d) = calibration_digest {
        s = s.put("calibration", d);
    }
    Ok(s.put("out", path.display()))
}

#[derive(Serialize)]
struct VerifyRecord<'a> {
    subject: &'a str,
    tau: f64,
    accepted: bool,
    distance: f64,
    live: usize,
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    check_tau(a.tau)?;
    let model: SubspaceModel = read_model(&a.model)?;
    let gallery = GalleryIndex::read(&a.gallery)?;
    let q = gallery.feature_dim();
    let entries = gallery.entries();
    let templates = entries
        .get(a.subject.as_str())
        .ok_or_else(|| Failure::Runtime(subfr::Error::NotEnrolled(a.subject.clone()).to_string()))?;
    let live_ds = load(&a.manifest)?;
    let live = live_ds
        .samples()
        .iter()
        .map(|s| model.project(&s.vector, q))
        .collect::<subfr::Result<Vec<_>>>()?;
    let mut best = f64::INFINITY;
    for t in templates {
        best = best.min(verify_live(t, &live, a.tau)?.1);
    }
    let accepted = best <= a.tau;
    create_dir(&a.out)?;
    let path = a.out.join("verify.json");
    let record = VerifyRecord {
        subject: &a.subject,
        tau: a.tau,
        accepted,
        distance: best,
        live: live.len(),
    };
    std::fs::write(&path, serde_json::to_string_pretty(&record).map_err(|e| Failure::Runtime(e.to_string()))? + "\n")?;
    log(&a.out, "verify", a, &[&a.model, &a.gallery, &a.manifest], std::slice::from_ref(&path))?;
    Ok(Summary::new("verify")
        .put("subject", &a.subject)
        .put("accepted", accepted)
        .put("distance", best)
        .put("tau", a.tau))
}

pub fn evaluate(a: &EvaluateArgs) -> Outcome {
    for &t in &a.theta {
        check_theta(t)?;
    }
    let model: SubspaceModel = read_model(&a.model)?;
    let config = ProtocolConfig {
        gallery_k: a.gallery_k,
        q_list: if a.q.is_empty() { vec![model.q_max()] } else { a.q.clone() },
        theta_list: a.theta.clone(),
        max_rank: a.max_rank,
        seed: a.seed,
        far_targets: a.far.clone(),
    };
    config.validate()?;
    feature_count(&model, Some(config.eval_q()))?;
    let pool = load(&a.manifest)?;
    let imposters = a.imposters.as_deref().map(load).transpose()?;
    let report = run_protocol(&model, &pool, imposters.as_ref(), &config)?;
    let files = emit_report(&report, &a.out)?;
    let mut inputs: Vec<&Path> = vec![&a.model, &a.manifest];
    if let Some(p) = &a.imposters {
        inputs.push(p);
    }
    log(&a.out, "evaluate", a, &inputs, &files)?;
    let mut s = Summary::new("evaluate")
        .put("method", &report.method)
        .put("q", report.q)
        .put("rank1", report.rank1())
        .put("gallery", report.counts.gallery)
        .put("probes", report.counts.probe)
        .put("imposters", report.counts.imposter);
    for p in &report.open_set {
        s = s.put(&format!("gir@{}", p.theta), p.gir).put(&format!("irr@{}", p.theta), p.irr);
    }
    Ok(s.put("out", a.out.display()))
}

pub fn sweep(a: &SweepArgs) -> Outcome {
    check_positive("gallery-k", a.gallery_k)?;
    check_positive("step", a.step)?;
    let model: SubspaceModel = read_model(&a.model)?;
    let top = feature_count(&model, a.q)?;
    let mut q_list: Vec<usize> = (1..=top).step_by(a.step).collect();
    if q_list.last() != Some(&top) {
        q_list.push(top);
    }
    let pool = load(&a.manifest)?;
    let split = make_gallery_probe(&pool, a.gallery_k, GalleryRule::SeededRandom(a.seed))?;
    let curve = rate_vs_features(&model, &split, &q_list)?;
    create_dir(&a.out)?;
    let path = a.out.join("rate_vs_q.csv");
    let mut text = String::from("q,rate\n");
    for (q, r) in &curve {
        text.push_str(&format!("{q},{r}\n"));
    }
    std::fs::write(&path, text)?;
    log(&a.out, "sweep", a, &[&a.model, &a.manifest], std::slice::from_ref(&path))?;
    let (best_q, best) = curve
        .iter()
        .fold((0, f64::NEG_INFINITY), |acc, &(q, r)| if r > acc.1 { (q, r) } else { acc });
    Ok(Summary::new("sweep")
        .put("points", curve.len())
        .put("best_q", best_q)
        .put("best_rate", best)
        .put("out", path.display()))
}

pub fn synth(a: &SynthArgs) -> Outcome {
    let spec = SyntheticSpec {
        subjects: a.subjects,
        clusters_per_subject: a.clusters,
        dim: a.dim,
        samples_per_subject: a.samples,
        separation: a.separation,
        seed: a.seed,
    };
    spec.validate()?;
    let ds: Dataset = synthesize(&spec)?;
    create_dir(&a.out)?;
    let path = a.out.join("dataset.csv");
    ds.write_vector_manifest(&path)?;
    log(&a.out, "synth", a, &[], std::slice::from_ref(&path))?;
    Ok(Summary::new("synth")
        .put("samples", ds.len())
        .put("subjects", a.subjects)
        .put("dim", a.dim)
        .put("out", path.display())
        .put("sha256", digest_of(&path)?))
}
