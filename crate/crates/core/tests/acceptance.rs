//! Acceptance suite. Every test prints one `PASS`/`FAIL` line for its criterion.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{big, to_f64, Oracle};
use confens::confidence::{
    entropy, max_entropy, normalize_entropy, step_confidence, Aggregation, Measure, Normalization,
};
use confens::metrics::edit_counts;
use confens::probstream::Split;
use confens::selector::{
    operating_point, train_selector, train_selector_traced, AuxSource, ClassWeighting, FeatureVector,
    OperatingPoint, Threshold, ThresholdObjective, TrainParams, TrainingProblem,
};
use confens::simulator::stress_preset;
use confens::tuning::{enumerate_space, features_for, grid_search, LrGrid, SearchOptions, SearchSpace};
use confens::{ConfidenceConfig, Corpus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

fn verdict(id: u32, name: &str, pass: bool, detail: impl std::fmt::Display) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{status}] {name}: {detail}");
}

fn a_avg_single(corpus: &Corpus, cfg: &ConfidenceConfig, options: &SearchOptions) -> f64 {
    grid_search(corpus, &SearchSpace::single(cfg), &LrGrid::default(), options, None)
        .expect("grid search")
        .validation_a_avg
}

fn random_distribution(rng: &mut ChaCha20Rng) -> Vec<f64> {
    let v = rng.random_range(2..=64usize);
    let scale = [0.05, 0.5, 2.0, 8.0, 30.0][rng.random_range(0..5)];
    let mut p: Vec<f64> = (0..v)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            (scale * z).exp()
        })
        .collect();
    // some distributions carry exact zeros
    if rng.random_bool(0.2) {
        let zeros = rng.random_range(1..v);
        for i in 0..zeros {
            p[i] = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter().map(|x| x / total).collect()
}

#[test]
fn criterion_01_entropy_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut oracle = Oracle::default();
    let alphas = confens::tuning::DEFAULT_ALPHAS;

    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for _ in 0..1000 {
        let p = random_distribution(&mut rng);
        let v = p.len();
        // one order per distribution: a grid value or anything in (0.05, 3)
        let alpha = if rng.random_bool(0.5) {
            alphas[rng.random_range(0..alphas.len())]
        } else {
            rng.random_range(0.05..3.0)
        };
        let families = [(Measure::Gibbs, 1.0), (Measure::Tsallis, alpha), (Measure::Renyi, alpha)];
        let exact = oracle.entropies(&p, &families);
        for (&(measure, alpha), h) in families.iter().zip(&exact) {
            let h_max = oracle.max_entropy(v, measure, alpha);
            for normalization in Normalization::ALL {
                let want = to_f64(&oracle.normalize(h, &h_max, normalization));
                let cfg = ConfidenceConfig {
                    measure,
                    normalization,
                    alpha,
                    ..ConfidenceConfig::default_preset()
                };
                worst = worst.max((step_confidence(&p, &cfg) - want).abs());
                checks += 1;
            }
        }
        let max_p = p.iter().copied().fold(0.0, f64::max);
        let cfg = ConfidenceConfig::untuned_max_prob();
        worst = worst.max((step_confidence(&p, &cfg) - max_p).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();

    let mut near_one = 0.0f64;
    for _ in 0..200 {
        let p = random_distribution(&mut rng);
        let gibbs = entropy(&p, Measure::Gibbs, 1.0);
        let ln_v = (p.len() as f64).ln();
        for alpha in [1.0 - 1e-6, 1.0 + 1e-6] {
            for measure in [Measure::Tsallis, Measure::Renyi] {
                let h = entropy(&p, measure, alpha);
                near_one = near_one.max((h - gibbs).abs());
                near_one = near_one.max((max_entropy(p.len(), measure, alpha) - ln_v).abs());
                for n in Normalization::ALL {
                    let c = normalize_entropy(h, max_entropy(p.len(), measure, alpha), n);
                    near_one = near_one.max((c - normalize_entropy(gibbs, ln_v, n)).abs());
                }
            }
        }
    }

    let pass = worst <= 1e-10 && near_one <= 1e-4 && elapsed < 10.0;
    verdict(
        1,
        "entropy oracle",
        pass,
        format!("{checks} checks, max |diff| {worst:.2e}; alpha=1+-1e-6 max |diff| {near_one:.2e}; {elapsed:.2} s"),
    );
    assert!(worst <= 1e-10, "max deviation from oracle {worst:e}");
    assert!(near_one <= 1e-4, "alpha near 1 deviates from Gibbs by {near_one:e}");
    assert!(elapsed < 10.0, "took {elapsed} s");
}

#[test]
fn frozen_reference_values() {
    let mut oracle = Oracle::default();
    let p = confens::confidence::step_distribution(
        &[2.0, 0.0],
        confens::probstream::StreamKind::Logits,
        0.5,
    )
    .unwrap();
    let e4 = oracle.exp(&big(4.0));
    let want = to_f64(&e4.div(&e4.add(&big(1.0), 128, astro_float::RoundingMode::ToEven), 128, astro_float::RoundingMode::ToEven));
    assert_eq!(want, 0.9820137900379084);
    assert!((p[0] - want).abs() <= 1e-15);

    let q = [0.7, 0.1, 0.1, 0.1];
    let c = step_confidence(&q, &ConfidenceConfig::default_preset());
    let exact = to_f64(&oracle.step_confidence_big(
        &q.iter().map(|&x| big(x)).collect::<Vec<_>>(),
        &ConfidenceConfig::default_preset(),
    ));
    assert!((exact - 0.08035797239810423).abs() <= 1e-15);
    assert!((c - exact).abs() <= 1e-12);
}

#[test]
fn criterion_02_grid_cardinality() {
    let full = enumerate_space(&SearchSpace::default()).len();
    let max_prob = enumerate_space(&SearchSpace::default().with_measures(&[Measure::MaxProb])).len();
    let pass = full == 2960 && max_prob == 80;
    verdict(2, "grid cardinality", pass, format!("default {full}, max_prob only {max_prob}"));
    assert_eq!(full, 2960);
    assert_eq!(max_prob, 80);
}

#[test]
fn criterion_03_tuned_default_untuned_ordering() {
    let spec = stress_preset("overconfident").unwrap();
    assert_eq!(spec.seed, 42);
    let corpus = confens::simulate(&spec).unwrap();
    assert_eq!(corpus.num_models(), 5);
    let options = SearchOptions::default();
    let untuned = a_avg_single(&corpus, &ConfidenceConfig::untuned_max_prob(), &options);
    let default = a_avg_single(&corpus, &ConfidenceConfig::default_preset(), &options);

    let start = Instant::now();
    let tuned = grid_search(&corpus, &SearchSpace::default(), &LrGrid::default(), &options, None).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let pass = tuned.validation_a_avg >= default
        && default >= untuned
        && default - untuned >= 0.02
        && elapsed < 1200.0;
    verdict(
        3,
        "tuned >= default >= untuned",
        pass,
        format!(
            "tuned {:.4} ({}), default {default:.4}, untuned {untuned:.4}; grid {elapsed:.0} s",
            tuned.validation_a_avg, tuned.best_config
        ),
    );
    assert!(tuned.validation_a_avg >= default);
    assert!(default >= untuned);
    assert!(default - untuned >= 0.02);
    assert!(elapsed < 1200.0);

    // regression pins for the seed-42 corpus
    assert_eq!(format!("{untuned:.4}"), "0.7952");
    assert_eq!(format!("{default:.4}"), "0.9672");
    assert_eq!(format!("{:.4}", tuned.validation_a_avg), PINNED_TUNED_A_AVG);
    assert_eq!(tuned.best_config.to_string(), PINNED_TUNED_CONFIG);
}

const PINNED_TUNED_A_AVG: &str = "0.9976";
const PINNED_TUNED_CONFIG: &str = "tsallis/linear/max/with-blanks/T=10/a=0.1";

const TRUNCATIONS: [Option<f64>; 5] = [Some(3.0), Some(5.0), Some(10.0), Some(15.0), None];

fn truncated(corpus: &Corpus, d: Option<f64>) -> Corpus {
    match d {
        Some(d) => corpus.truncated(d).unwrap(),
        None => corpus.clone(),
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (i, x) in v.iter().enumerate() {
        let below = v.iter().filter(|y| *y < x).count() as f64;
        let equal = v.iter().filter(|y| *y == x).count() as f64;
        out[i] = below + (equal + 1.0) / 2.0;
    }
    out
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn criterion_04_duration_trend() {
    let spec = stress_preset("short_audio").unwrap();
    assert_eq!(spec.frame_rate_hz, 10.0);
    let corpus = confens::simulate(&spec).unwrap();
    let cfg = ConfidenceConfig::default_preset();
    let acc: Vec<f64> = TRUNCATIONS
        .iter()
        .map(|&d| a_avg_single(&truncated(&corpus, d), &cfg, &SearchOptions::default()))
        .collect();
    let rho = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &acc);
    let gain = acc[4] - acc[0];
    let pass = rho > 0.0 && gain >= 0.01;
    verdict(
        4,
        "accuracy grows with audio length",
        pass,
        format!("30/50/100/150 steps/full: {acc:.4?}; spearman {rho:.3}; full - 30 steps {gain:.4}"),
    );
    assert!(rho > 0.0);
    assert!(gain >= 0.01);
}

#[test]
fn spearman_reference() {
    assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 5.0, 9.0]) - 1.0).abs() < 1e-12);
    assert!((spearman(&[1.0, 2.0, 3.0], &[9.0, 5.0, 3.0]) + 1.0).abs() < 1e-12);
    // ranks with ties: [1, 2.5, 2.5, 4] against [1, 2, 3, 4] gives 0.9486832980505138
    let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[0.1, 0.5, 0.5, 0.9]);
    assert!((r - 0.9486832980505138).abs() < 1e-12);
}

#[test]
fn criterion_05_fusion() {
    let corpus = confens::simulate(&stress_preset("short_audio").unwrap()).unwrap();
    let cfg = ConfidenceConfig::default_preset();
    let lid = AuxSource {
        source_id: "lid".into(),
        dim: corpus.num_models(),
    };
    let variant = |conf: bool, aux: bool| SearchOptions {
        confidence_features: conf,
        aux_sources: if aux { vec![lid.clone()] } else { Vec::new() },
        ..SearchOptions::default()
    };
    let mut lines = Vec::new();
    let mut ok = true;
    let mut shortest = (0.0, 0.0, 0.0);
    for (i, &d) in TRUNCATIONS.iter().enumerate() {
        let c = truncated(&corpus, d);
        let conf = a_avg_single(&c, &cfg, &variant(true, false));
        let aux = a_avg_single(&c, &cfg, &variant(false, true));
        let fused = a_avg_single(&c, &cfg, &variant(true, true));
        ok &= fused >= conf.max(aux) - 0.002;
        if i == 0 {
            shortest = (conf, aux, fused);
        }
        lines.push(format!("{}: conf {conf:.4} aux {aux:.4} fused {fused:.4}", d.map_or("full".into(), |d| format!("{d} s"))));
    }
    let (conf, aux, fused) = shortest;
    let in_band = |x: f64| (0.85..=0.95).contains(&x);
    let pass = ok && in_band(conf) && in_band(aux) && fused > conf && fused > aux;
    verdict(5, "fusion with auxiliary scores", pass, lines.join("; "));
    assert!(in_band(conf) && in_band(aux), "single-source accuracies at 3 s: {conf}, {aux}");
    assert!(ok, "fused fell below the best single source");
    assert!(fused > conf && fused > aux);
}

fn base_target_corpus() -> Corpus {
    confens::simulate(&stress_preset("domain_shift").unwrap()).unwrap()
}

fn confens_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_confens"))
}

fn run_cli(args: &[&str]) {
    let out = confens_bin().args(args).output().expect("spawn confens");
    assert!(
        out.status.success(),
        "confens {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn criterion_06_threshold_tradeoff() {
    let corpus = base_target_corpus();
    assert_eq!(corpus.num_models(), 2);
    let cfg = ConfidenceConfig::default_preset();
    let trained =
        grid_search(&corpus, &SearchSpace::single(&cfg), &LrGrid::default(), &SearchOptions::default(), None)
            .unwrap();
    let selector = trained.best_selector;
    let layout = selector.layout.clone().unwrap();
    let validation = features_for(&corpus.utterances(Split::Validation), &cfg, &layout).unwrap();

    // favor-target (low theta) to favor-base (high theta)
    let thetas: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let mut nested = true;
    let mut monotone = true;
    let mut previous: Option<(BTreeSet<String>, OperatingPoint)> = None;
    for &theta in &thetas {
        let tuned = selector.with_threshold(Threshold::Binary(theta)).unwrap();
        let routed: BTreeSet<String> = tuned
            .predict_all(&validation)
            .unwrap()
            .into_iter()
            .filter(|&(_, k)| k == 1)
            .map(|(id, _)| id)
            .collect();
        let point = operating_point(&selector, &validation, Some(theta)).unwrap();
        if let Some((prev_set, prev_point)) = &previous {
            nested &= routed.is_subset(prev_set);
            monotone &= point.base_accuracy >= prev_point.base_accuracy
                && point.target_accuracy <= prev_point.target_accuracy;
        }
        previous = Some((routed, point));
    }
    let low = operating_point(&selector, &validation, Some(0.01)).unwrap();
    let high = operating_point(&selector, &validation, Some(0.99)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let corpus_dir = sim.join("corpus");
    run_cli(&["simulate", "--preset", "domain_shift", "--out", path(&sim)]);
    let train = dir.path().join("train");
    run_cli(&["train-selector", "--corpus", path(&corpus_dir), "--preset", "default", "--out", path(&train)]);
    let selector_path = train.join("selector.json");
    let mut points = Vec::new();
    for objective in ["favor-target", "balanced", "favor-base"] {
        let out = dir.path().join(objective);
        run_cli(&[
            "evaluate",
            "--corpus",
            path(&corpus_dir),
            "--selector",
            path(&selector_path),
            "--threshold-objective",
            objective,
            "--out",
            path(&out),
        ]);
        let report: confens::pipeline::ThresholdReport =
            serde_json::from_str(&std::fs::read_to_string(out.join("threshold.json")).unwrap()).unwrap();
        assert_eq!(report.objective, objective.parse::<ThresholdObjective>().unwrap());
        points.push(report);
    }
    let distinct = points
        .iter()
        .map(|p| (p.validation.base_accuracy.to_bits(), p.validation.target_accuracy.to_bits()))
        .collect::<BTreeSet<_>>()
        .len();
    let ordered = points[0].validation.base_accuracy <= points[1].validation.base_accuracy
        && points[1].validation.base_accuracy <= points[2].validation.base_accuracy;

    let pass = nested && monotone && distinct == 3 && ordered;
    let summary: Vec<String> = points
        .iter()
        .map(|p| {
            format!(
                "{:?} {:?} base {:.3} target {:.3}",
                p.objective, p.threshold, p.validation.base_accuracy, p.validation.target_accuracy
            )
        })
        .collect();
    verdict(
        6,
        "threshold trade-off",
        pass,
        format!(
            "nested {nested}, monotone {monotone} (theta 0.01: {:.3}/{:.3}, 0.99: {:.3}/{:.3}); {}",
            low.base_accuracy,
            low.target_accuracy,
            high.base_accuracy,
            high.target_accuracy,
            summary.join("; ")
        ),
    );
    assert!(nested && monotone);
    assert_eq!(distinct, 3);
    assert!(ordered);
    assert!(matches!(points[0].threshold, Threshold::Binary(t) if t < 0.5));
    assert!(matches!(points[2].threshold, Threshold::Binary(t) if t > 0.5));
}

#[test]
fn criterion_07_intermediate_layer() {
    let corpus = confens::simulate(&stress_preset("layered").unwrap()).unwrap();
    let cfg = ConfidenceConfig::default_preset();
    let mean_entropy = |layer: u32| {
        let (mut total, mut n) = (0.0, 0usize);
        for u in corpus.utterances(Split::Validation) {
            for m in corpus.models() {
                let s = u.record.select_layer(m, layer).unwrap();
                for step in &s.steps {
                    let p = confens::confidence::step_distribution(&step.values, s.kind, 1.0).unwrap();
                    total += entropy(&p, Measure::Gibbs, 1.0);
                    n += 1;
                }
            }
        }
        total / n as f64
    };
    let acc = |layer_id: u32| {
        a_avg_single(&corpus, &cfg, &SearchOptions {
            layer_id,
            ..SearchOptions::default()
        })
    };
    let (a4, a_final) = (acc(4), acc(0));
    let (h4, h_final) = (mean_entropy(4), mean_entropy(0));
    let pass = (a4 - a_final).abs() <= 0.05 && h4 > h_final;
    verdict(
        7,
        "intermediate layer",
        pass,
        format!("A_avg layer 4 {a4:.4}, final {a_final:.4}; mean entropy {h4:.3} vs {h_final:.3}"),
    );
    assert!((a4 - a_final).abs() <= 0.05);
    assert!(h4 > h_final);
}

fn random_problem(rng: &mut ChaCha20Rng) -> (Vec<FeatureVector>, usize, TrainParams) {
    let k = rng.random_range(2..=5usize);
    let f = rng.random_range(1..=6usize);
    let n = rng.random_range(3 * k..=40);
    let data = (0..n)
        .map(|i| FeatureVector {
            utterance_id: format!("u{i}"),
            values: (0..f).map(|_| rng.random_range(-2.0..2.0)).collect(),
            // every class appears
            true_label: Some(if i < k { i } else { rng.random_range(0..k) }),
        })
        .collect();
    let weighting = if rng.random_bool(0.5) {
        ClassWeighting::Uniform
    } else {
        ClassWeighting::Balanced
    };
    (data, k, TrainParams::new(rng.random_range(0.0..1.0), weighting))
}

#[test]
fn criterion_08_lr_correctness() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut worst_rel = 0.0f64;
    for _ in 0..20 {
        let (data, k, params) = random_problem(&mut rng);
        let problem = TrainingProblem::new(&data, k, &params).unwrap();
        let theta: Vec<f64> = (0..problem.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
        let (_, grad) = problem.objective_and_gradient(&theta);
        let h = 1e-5;
        let fd: Vec<f64> = (0..theta.len())
            .map(|i| {
                let mut plus = theta.clone();
                let mut minus = theta.clone();
                plus[i] += h;
                minus[i] -= h;
                (problem.objective(&plus) - problem.objective(&minus)) / (2.0 * h)
            })
            .collect();
        let diff: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst_rel = worst_rel.max(diff / norm(&grad).max(norm(&fd)));
    }

    let toy: Vec<FeatureVector> = (0..100)
        .map(|i| FeatureVector {
            utterance_id: format!("t{i}"),
            values: if i % 2 == 0 { vec![0.9, 0.1] } else { vec![0.1, 0.9] },
            true_label: Some(i % 2),
        })
        .collect();
    let model = train_selector(&toy, 2, &TrainParams::default()).unwrap();
    let predictions = model.predict_all(&toy).unwrap();
    let correct = toy
        .iter()
        .filter(|v| predictions[&v.utterance_id] == v.true_label.unwrap())
        .count();

    let mut monotone = true;
    let mut iterations = 0;
    for _ in 0..20 {
        let (data, k, params) = random_problem(&mut rng);
        let (_, trace) = train_selector_traced(&data, k, &params).unwrap();
        monotone &= trace.objective.windows(2).all(|w| w[1] <= w[0]);
        iterations += trace.objective.len() - 1;
    }

    let pass = worst_rel <= 1e-5 && correct == toy.len() && monotone;
    verdict(
        8,
        "logistic regression",
        pass,
        format!(
            "max gradient rel. error {worst_rel:.2e}; toy accuracy {correct}/{}; objective non-increasing over {iterations} iterations: {monotone}",
            toy.len()
        ),
    );
    assert!(worst_rel <= 1e-5);
    assert_eq!(correct, toy.len());
    assert!(monotone);
}

/// Minimum edit count over every alignment, enumerated recursively.
fn brute_force_edits(r: &[usize], h: &[usize]) -> usize {
    match (r.split_first(), h.split_first()) {
        (None, _) => h.len(),
        (_, None) => r.len(),
        (Some((a, rt)), Some((b, ht))) => {
            let pair = brute_force_edits(rt, ht) + usize::from(a != b);
            let delete = brute_force_edits(rt, h) + 1;
            let insert = brute_force_edits(r, ht) + 1;
            pair.min(delete).min(insert)
        }
    }
}

#[test]
fn criterion_09_wer_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for _ in 0..200 {
        let mut seq = |min: usize| -> Vec<usize> {
            let n = rng.random_range(min..=6);
            (0..n).map(|_| rng.random_range(0..4)).collect()
        };
        let r = seq(0);
        let h = seq(0);
        let counts = edit_counts(&r, &h);
        let dp = counts.substitutions + counts.deletions + counts.insertions;
        // both sides of the alignment must agree on the number of hits
        let consistent = counts.reference_words == r.len()
            && r.len() + counts.insertions == h.len() + counts.deletions;
        if dp != brute_force_edits(&r, &h) || !consistent {
            mismatches += 1;
        }
    }
    verdict(9, "WER oracle", mismatches == 0, format!("{mismatches} of 200 pairs disagree"));
    assert_eq!(mismatches, 0);
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("space.json");
    let reduced = SearchSpace {
        temperatures: vec![0.5, 1.0, 2.0],
        alphas: vec![0.25, 0.5],
        measures: vec![Measure::MaxProb, Measure::Renyi, Measure::Tsallis],
        aggregations: vec![Aggregation::Mean, Aggregation::Product],
        ..SearchSpace::default()
    };
    std::fs::write(&space, serde_json::to_string(&reduced).unwrap()).unwrap();

    let pipeline = |tag: &str, workers: &str| -> Vec<(String, Vec<u8>)> {
        let root = dir.path().join(tag);
        let sim = root.join("sim");
        let corpus = sim.join("corpus");
        let search = root.join("search");
        let eval = root.join("eval");
        run_cli(&["simulate", "--preset", "overconfident", "--seed", "7", "--out", path(&sim)]);
        run_cli(&[
            "gridsearch",
            "--corpus",
            path(&corpus),
            "--space",
            path(&space),
            "--workers",
            workers,
            "--out",
            path(&search),
        ]);
        run_cli(&[
            "evaluate",
            "--corpus",
            path(&corpus),
            "--selector",
            path(&search.join("selector.json")),
            "--workers",
            workers,
            "--out",
            path(&eval),
        ]);
        [
            sim.join("corpus/manifest.json"),
            search.join("tuning_result.json"),
            search.join("selector.json"),
            search.join("leaderboard.csv"),
            eval.join("report.json"),
        ]
        .iter()
        .map(|p| {
            let name = p.strip_prefix(&root).unwrap().display().to_string();
            (name, std::fs::read(p).unwrap())
        })
        .collect()
    };
    let one = pipeline("w1", "1");
    let eight = pipeline("w8", "8");
    let again = pipeline("w1-again", "1");
    let differing: Vec<&str> = one
        .iter()
        .zip(&eight)
        .zip(&again)
        .filter(|((a, b), c)| a.1 != b.1 || a.1 != c.1)
        .map(|((a, _), _)| a.0.as_str())
        .collect();
    let pass = differing.is_empty();
    verdict(
        10,
        "determinism",
        pass,
        format!("{} artifacts compared at 1 and 8 workers and on repeat; differing: {differing:?}", one.len()),
    );
    assert!(pass);
}
