use subfr::dataset::{make_gallery_probe, split_train_test, GalleryRule};
use subfr::eval::{evaluate, rate_vs_features, synthesize, ProtocolConfig, SyntheticSpec};
use subfr::linalg::norm;
use subfr::matcher::{cosine_distance, enroll, identify};
use subfr::partition::{build_partition, DEFAULT_MAX_LEAF};
use subfr::subspace::{train_pca, train_wssda};
use subfr::Dataset;

fn spec(clusters: usize) -> SyntheticSpec {
    SyntheticSpec {
        subjects: 10,
        clusters_per_subject: clusters,
        dim: 50,
        samples_per_subject: 20,
        separation: 5.0,
        seed: 0,
    }
}

/// Half the subjects train the model; the other half are enrolled and probed.
fn pools(clusters: usize) -> (Dataset, Dataset) {
    let ds: Dataset = synthesize(&spec(clusters)).unwrap();
    split_train_test(&ds, 5, 0).unwrap()
}

fn config(k: usize) -> ProtocolConfig {
    ProtocolConfig {
        gallery_k: k,
        q_list: vec![2, 9],
        ..ProtocolConfig::default()
    }
}

#[test]
fn wssda_recognizes_synthetic_subjects() {
    let (train, pool) = pools(2);
    let part = build_partition(&train, DEFAULT_MAX_LEAF).unwrap();
    let wssda = train_wssda(&train, &part, 1.0, Some(9)).unwrap();
    let pca = train_pca(&train, Some(9)).unwrap();
    let w = evaluate(&wssda, &pool, None, &config(7)).unwrap();
    let p = evaluate(&pca, &pool, None, &config(7)).unwrap();
    eprintln!("wssda {:?} pca {:?}", w.rate_vs_q, p.rate_vs_q);
    assert!(w.rank1() >= 0.95);
    assert!(w.rank1() >= p.rank1());
    assert!(w.rate_vs_q[1].1 >= w.rate_vs_q[0].1);
    assert_eq!(*w.cmc.last().unwrap(), 1.0);
}

#[test]
fn nearest_neighbour_agrees_with_exhaustive_distances() {
    let (train, pool) = pools(2);
    let part = build_partition(&train, DEFAULT_MAX_LEAF).unwrap();
    let model = train_wssda(&train, &part, 1.0, Some(9)).unwrap();
    let split = make_gallery_probe(&pool, 7, GalleryRule::First).unwrap();
    let index = enroll(&model, &split.gallery, 9).unwrap();
    let gallery: Vec<(String, Vec<f64>)> = split
        .gallery
        .samples()
        .iter()
        .map(|s| (s.subject_id.clone(), model.project(&s.vector, 9).unwrap()))
        .collect();
    let mut correct = 0;
    for s in split.probe.samples() {
        let f = model.project(&s.vector, 9).unwrap();
        assert!(norm(&f) > 0.0);
        let (best, _) = gallery
            .iter()
            .map(|(id, g)| (id, cosine_distance(&f, g).unwrap()))
            .fold((&gallery[0].0, f64::INFINITY), |acc, (id, d)| if d < acc.1 || (d == acc.1 && id < acc.0) { (id, d) } else { acc });
        let r = identify(&index, &f, None).unwrap();
        assert_eq!(r.decision.subject(), Some(best.as_str()));
        if best == &s.subject_id {
            correct += 1;
        }
    }
    let curve = rate_vs_features(&model, &split, &[9]).unwrap();
    assert_eq!(curve[0].1, correct as f64 / split.probe.len() as f64);
}

#[test]
fn larger_gallery_beats_single_image_on_multimodal_subjects() {
    let (train, pool) = pools(3);
    let part = build_partition(&train, DEFAULT_MAX_LEAF).unwrap();
    let model = train_wssda(&train, &part, 1.0, Some(9)).unwrap();
    let g7 = evaluate(&model, &pool, None, &config(7)).unwrap();
    let g1 = evaluate(&model, &pool, None, &config(1)).unwrap();
    eprintln!("g7 {} g1 {}", g7.rank1(), g1.rank1());
    assert!(g7.rank1() > g1.rank1());
}
