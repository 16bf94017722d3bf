//! Identification metrics (CMC, rate against feature count, open-set rates, ROC) and
//! the gallery/probe protocol that ties them to a trained model.
//!
//! Scores are distances throughout: smaller means more similar. Every rate is an
//! integer count divided once at the end.

mod report;
mod synth;

pub use report::{emit_report, read_curve, Summary, SUMMARY_FILE};
pub use synth::{synthesize, SyntheticSpec};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::{make_gallery_probe, Dataset, GalleryProbeSplit, GalleryRule};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::matcher::{calibrate_threshold, enroll, identify, GalleryIndex, MatchResult, ThresholdConfig};
use crate::scalar::{lit, Real};
use crate::subspace::SubspaceModel;

fn ratio(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// A match result with the probe's ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatch<T> {
    pub truth: String,
    /// Imposter probes are skipped by the CMC.
    pub imposter: bool,
    pub result: MatchResult<T>,
}

/// `rate[k-1]` = fraction of genuine probes whose subject is within the first `k`
/// ranking entries.
pub fn cmc_curve<T: Real>(results: &[LabeledMatch<T>], max_rank: usize) -> Result<Vec<f64>> {
    if max_rank == 0 {
        return Err(Error::InvalidArgument("max_rank must be at least 1".into()));
    }
    let mut hist = vec![0usize; max_rank];
    let mut genuine = 0;
    for m in results.iter().filter(|m| !m.imposter) {
        let rank = m.result.rank_of(&m.truth).ok_or_else(|| Error::NotEnrolled(m.truth.clone()))?;
        genuine += 1;
        if rank <= max_rank {
            hist[rank - 1] += 1;
        }
    }
    if genuine == 0 {
        return Err(Error::InvalidArgument("no genuine probes".into()));
    }
    let mut within = 0;
    Ok(hist
        .into_iter()
        .map(|h| {
            within += h;
            ratio(within, genuine)
        })
        .collect())
}

/// Closed-set rank-1 rate at each `q`: gallery and probes are re-projected with the
/// first `q` features and the gallery re-enrolled.
pub fn rate_vs_features<T: Real>(
    model: &SubspaceModel<T>,
    split: &GalleryProbeSplit<T>,
    q_list: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if let Some(&q) = q_list.iter().find(|&&q| q == 0 || q > model.q_max()) {
        return Err(Error::TooManyFeatures {
            requested: q,
            available: model.q_max(),
        });
    }
    let mut curve = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let index = enroll(model, &split.gallery, q)?;
        let mut correct = 0;
        for s in split.probe.samples() {
            let r = identify(&index, &model.project(&s.vector, q)?, None)?;
            if r.decision.subject() == Some(s.subject_id.as_str()) {
                correct += 1;
            }
        }
        curve.push((q, ratio(correct, split.probe.len())));
    }
    Ok(curve)
}

/// A projected probe with its claimed identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe<T> {
    pub subject: String,
    pub features: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpenSetOutcome {
    /// Genuine identification rate.
    pub gir: f64,
    /// Imposter rejection rate; 0 when there are no imposters.
    pub irr: f64,
    /// Per genuine probe: decided as its own subject within the threshold.
    pub accepted: Vec<bool>,
    /// Per imposter probe: decided Unknown.
    pub rejected: Vec<bool>,
}

pub fn open_set_rates<T: Real>(
    index: &GalleryIndex<T>,
    genuine: &[Probe<T>],
    imposters: &[Probe<T>],
    threshold: &ThresholdConfig<T>,
) -> Result<OpenSetOutcome> {
    if let Some(p) = genuine.iter().find(|p| !index.contains(&p.subject)) {
        return Err(Error::NotEnrolled(p.subject.clone()));
    }
    if let Some(p) = imposters.iter().find(|p| index.contains(&p.subject)) {
        return Err(Error::OverlappingSubjects(p.subject.clone()));
    }
    let tau = Some(threshold.tau);
    let accepted = genuine
        .iter()
        .map(|p| Ok(identify(index, &p.features, tau)?.decision.subject() == Some(p.subject.as_str())))
        .collect::<Result<Vec<bool>>>()?;
    let rejected = imposters
        .iter()
        .map(|p| Ok(identify(index, &p.features, tau)?.decision.subject().is_none()))
        .collect::<Result<Vec<bool>>>()?;
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
    Ok(OpenSetOutcome {
        gir: ratio(count(&accepted), accepted.len()),
        irr: ratio(count(&rejected), rejected.len()),
        accepted,
        rejected,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub far_target: f64,
    /// `None` when even the smallest imposter score exceeds the target rate; the
    /// threshold then sits just below it.
    pub threshold: Option<f64>,
    pub far: f64,
    pub vr: f64,
}

/// For each target `f`, the largest imposter score `τ` with
/// `#{imposter ≤ τ} / #imposter ≤ f`, and the fraction of genuine scores `≤ τ`.
pub fn roc_points<T: Real>(genuine: &[T], imposter: &[T], far_targets: &[f64]) -> Result<Vec<RocPoint>> {
    if genuine.is_empty() || imposter.is_empty() {
        return Err(Error::InvalidArgument("ROC needs genuine and imposter scores".into()));
    }
    if genuine.iter().chain(imposter).any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let sorted = |s: &[T]| {
        let mut v = s.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let (gen, imp) = (sorted(genuine), sorted(imposter));
    let at_most = |v: &[T], t: T| v.partition_point(|&x| x <= t);
    let below = |v: &[T], t: T| v.partition_point(|&x| x < t);
    let ni = imp.len();
    far_targets
        .iter()
        .map(|&f| {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidArgument(format!("FAR target {f} outside [0, 1]")));
            }
            // Largest c = #{imposter ≤ imp[c-1]} with c/n ≤ f, over distinct scores.
            let mut best: Option<(T, usize)> = None;
            let mut i = 0;
            while i < ni {
                let c = at_most(&imp, imp[i]);
                if ratio(c, ni) <= f {
                    best = Some((imp[i], c));
                } else {
                    break;
                }
                i = c;
            }
            Ok(match best {
                Some((t, c)) => RocPoint {
                    far_target: f,
                    threshold: Some(t.to_f64_lossless()),
                    far: ratio(c, ni),
                    vr: ratio(at_most(&gen, t), gen.len()),
                },
                None => RocPoint {
                    far_target: f,
                    threshold: None,
                    far: 0.0,
                    vr: ratio(below(&gen, imp[0]), gen.len()),
                },
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Gallery images per subject (1 and 7 are the usual presets).
    pub gallery_k: usize,
    pub q_list: Vec<usize>,
    pub theta_list: Vec<f64>,
    pub max_rank: usize,
    /// Seeds the gallery selection.
    pub seed: u64,
    pub far_targets: Vec<f64>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            gallery_k: 7,
            q_list: vec![9],
            theta_list: vec![0.65, 0.85],
            max_rank: 10,
            seed: 0,
            far_targets: vec![0.001, 0.01, 0.1, 1.0],
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.gallery_k == 0 {
            return bad("gallery_k must be at least 1".into());
        }
        if self.q_list.is_empty() || self.q_list.contains(&0) || self.q_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("q_list must be non-empty, positive and ascending: {:?}", self.q_list));
        }
        if self.theta_list.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return bad(format!("theta values must be in (0, 1]: {:?}", self.theta_list));
        }
        if self.max_rank == 0 {
            return bad("max_rank must be at least 1".into());
        }
        if self.far_targets.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad(format!("FAR targets must be in [0, 1]: {:?}", self.far_targets));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    /// Features used for the CMC, open-set and ROC figures.
    pub fn eval_q(&self) -> usize {
        *self.q_list.last().expect("validated")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenSetPoint {
    pub theta: f64,
    pub tau: f64,
    pub gir: f64,
    pub irr: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub subjects: usize,
    pub gallery: usize,
    pub probe: usize,
    pub imposter: usize,
    pub dropped_subjects: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub q: usize,
    pub cmc: Vec<f64>,
    pub rate_vs_q: Vec<(usize, f64)>,
    pub open_set: Vec<OpenSetPoint>,
    pub roc: Vec<RocPoint>,
    pub counts: Counts,
    pub config_digest: String,
}

impl EvalReport {
    pub fn rank1(&self) -> f64 {
        self.cmc[0]
    }
}

/// Runs the full protocol: `gallery_k` samples per subject of `pool` are enrolled,
/// the remainder are genuine probes, and `imposters` (subjects absent from the
/// gallery) are probes that should be rejected. Thresholds are `θ` times the largest
/// genuine probe distance to its own subject.
pub fn evaluate<T: Real>(
    model: &SubspaceModel<T>,
    pool: &Dataset<T>,
    imposters: Option<&Dataset<T>>,
    config: &ProtocolConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let split = make_gallery_probe(pool, config.gallery_k, GalleryRule::SeededRandom(config.seed))?;
    if split.probe.is_empty() {
        return Err(Error::InvalidArgument("no probes left after gallery selection".into()));
    }
    let rate_vs_q = rate_vs_features(model, &split, &config.q_list)?;
    let q = config.eval_q();
    let index = enroll(model, &split.gallery, q)?;
    let enrolled: BTreeSet<&str> = index.subjects().iter().map(String::as_str).collect();

    let project = |ds: &Dataset<T>| -> Result<Vec<Probe<T>>> {
        ds.samples()
            .iter()
            .map(|s| {
                Ok(Probe {
                    subject: s.subject_id.clone(),
                    features: model.project(&s.vector, q)?,
                })
            })
            .collect()
    };
    let genuine = project(&split.probe)?;
    let imposter_probes = match imposters {
        Some(ds) => {
            if let Some(s) = ds.subjects().into_iter().find(|s| enrolled.contains(s)) {
                return Err(Error::OverlappingSubjects(s.to_string()));
            }
            project(ds)?
        }
        None => Vec::new(),
    };

    let mut matches = Vec::with_capacity(genuine.len() + imposter_probes.len());
    let mut genuine_scores = Vec::with_capacity(genuine.len());
    let mut imposter_scores = Vec::new();
    for (p, imposter) in genuine
        .iter()
        .map(|p| (p, false))
        .chain(imposter_probes.iter().map(|p| (p, true)))
    {
        let result = identify(&index, &p.features, None)?;
        for (s, d) in &result.ranking {
            if !imposter && *s == p.subject {
                genuine_scores.push(*d);
            } else {
                imposter_scores.push(*d);
            }
        }
        matches.push(LabeledMatch {
            truth: p.subject.clone(),
            imposter,
            result,
        });
    }
    let cmc = cmc_curve(&matches, config.max_rank)?;

    let mut open_set = Vec::with_capacity(config.theta_list.len());
    for &theta in &config.theta_list {
        let threshold = calibrate_threshold(&genuine_scores, lit::<T>(theta))?;
        let o = open_set_rates(&index, &genuine, &imposter_probes, &threshold)?;
        open_set.push(OpenSetPoint {
            theta,
            tau: threshold.tau.to_f64_lossless(),
            gir: o.gir,
            irr: o.irr,
        });
    }
    let roc = if imposter_scores.is_empty() {
        Vec::new()
    } else {
        roc_points(&genuine_scores, &imposter_scores, &config.far_targets)?
    };

    Ok(EvalReport {
        method: model.method.name().to_string(),
        q,
        cmc,
        rate_vs_q,
        open_set,
        roc,
        counts: Counts {
            subjects: index.subjects().len(),
            gallery: split.gallery.len(),
            probe: genuine.len(),
            imposter: imposter_probes.len(),
            dropped_subjects: split.dropped_subjects,
        },
        config_digest: config.digest(),
    })
}
