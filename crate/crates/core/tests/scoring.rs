use rand_distr::{Distribution, Normal};
use taskverify::aligner::{segment, VerifyOptions};
use taskverify::datagen::{GenConfig, Generator, Sample, Split};
use taskverify::scorer::{
    detection_report, loss_and_gradient, prepare_examples, sample_loss, train, OracleConfig,
    OracleScorer, Scorer, TrainConfig, TrainingExample,
};
use taskverify::semparse::TemplateSet;
use taskverify::{seeds, Lexicon, ParametricScorer, QueryScheme};

fn samples(seed: u64, n: usize) -> Vec<Sample> {
    let config = GenConfig {
        seed,
        train: n,
        ..GenConfig::default()
    };
    Generator::new(config, Lexicon::default(), TemplateSet::default())
        .unwrap()
        .samples(Split::Train, n, 0)
        .unwrap()
}

fn examples(samples: &[Sample]) -> Vec<TrainingExample> {
    prepare_examples(
        samples.iter().map(|s| (&s.graph, &s.trace, s.label)),
        20,
        QueryScheme::StateRelation,
        &Lexicon::default(),
        64,
    )
    .unwrap()
}

fn random_params(scale: f64, seed: u64) -> ParametricScorer {
    let mut p = ParametricScorer::for_lexicon(&Lexicon::default(), 64);
    let normal = Normal::new(0.0, scale).unwrap();
    let mut rng = seeds::rng(seed, "params");
    p.params_mut().iter_mut().for_each(|w| *w = normal.sample(&mut rng));
    p
}

#[test]
fn gradient_matches_central_differences() {
    let data = examples(&samples(21, 20));
    let h = 1e-5;
    for (i, ex) in data.iter().enumerate() {
        let params = random_params(0.03, i as u64);
        let (loss, grad) = loss_and_gradient(&params, ex).unwrap();
        // The loss reported with the gradient is the same computation.
        assert_eq!(loss.to_bits(), sample_loss(&params, ex).unwrap().to_bits());
        let mut probe = params.clone();
        let mut nonzero = 0;
        for k in 0..grad.len() {
            let base = probe.params()[k];
            probe.params_mut()[k] = base + h;
            let up = sample_loss(&probe, ex).unwrap();
            probe.params_mut()[k] = base - h;
            let down = sample_loss(&probe, ex).unwrap();
            probe.params_mut()[k] = base;
            let numeric = (up - down) / (2.0 * h);
            let rel = (grad[k] - numeric).abs() / grad[k].abs().max(numeric.abs()).max(1e-6);
            assert!(rel < 1e-4, "example {i} coordinate {k}: analytic {} numeric {numeric}", grad[k]);
            nonzero += usize::from(grad[k] != 0.0);
        }
        assert!(nonzero > 0);
    }
}

#[test]
fn logit_gradient_matches_central_differences() {
    let q = taskverify::Query::relation("apple", "plate", "in");
    let params = random_params(0.1, 5);
    let mut rng = seeds::rng(6, "features");
    let normal = Normal::new(0.0, 1.0).unwrap();
    let f: Vec<f64> = (0..64).map(|_| normal.sample(&mut rng)).collect();
    let mut grad = vec![0.0; params.params().len()];
    params.accumulate_logit_gradient(&q, &f, 1.0, &mut grad).unwrap();
    let h = 1e-5;
    let mut probe = params.clone();
    for k in 0..grad.len() {
        let base = probe.params()[k];
        probe.params_mut()[k] = base + h;
        let up = probe.logit(&q, &f).unwrap();
        probe.params_mut()[k] = base - h;
        let down = probe.logit(&q, &f).unwrap();
        probe.params_mut()[k] = base;
        let numeric = (up - down) / (2.0 * h);
        let rel = (grad[k] - numeric).abs() / grad[k].abs().max(numeric.abs()).max(1e-6);
        assert!(rel < 1e-4);
    }
}

#[test]
fn training_separates_true_and_false_pairs() {
    let data = samples(31, 300);
    let ex = examples(&data);
    let cfg = TrainConfig {
        epochs: 30,
        seed: 31,
        ..TrainConfig::default()
    };
    let lex = Lexicon::default();
    let (scorer, report) = train(&ex, cfg.initial_scorer(lex.tokens(), 64).unwrap(), &cfg).unwrap();
    assert!(report.epoch_losses.last() < report.epoch_losses.first());
    let truth = OracleScorer::noiseless(&lex);
    let (mut on_true, mut on_false) = (Vec::new(), Vec::new());
    for s in data.iter().filter(|s| s.label).take(100) {
        let trace = segment(&s.trace, 20).unwrap();
        for q in s.graph.nodes() {
            for seg in &trace.segments {
                let p = scorer.score(q, seg).unwrap();
                if truth.score(q, seg).unwrap() > 0.5 {
                    on_true.push(p);
                } else {
                    on_false.push(p);
                }
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&on_true) > mean(&on_false) + 0.2, "{} vs {}", mean(&on_true), mean(&on_false));
}

fn detection_items(data: &[Sample]) -> Vec<(taskverify::TaskGraph, taskverify::aligner::SegmentedTrace)> {
    data.iter()
        .map(|s| (s.graph.clone(), segment(&s.trace, 20).unwrap()))
        .collect()
}

#[test]
fn noiseless_detection_is_perfect() {
    let lex = Lexicon::default();
    let data = samples(41, 100);
    let truth = OracleScorer::noiseless(&lex);
    let report = detection_report(&detection_items(&data), &truth, &truth, 0.5, &VerifyOptions::default()).unwrap();
    for (action, c) in &report.classes {
        assert!(c.total() > 0, "{action}");
        assert_eq!((c.precision(), c.recall()), (1.0, 1.0), "{action}");
    }
}

#[test]
fn flip_noise_costs_a_tenth_of_recall() {
    let lex = Lexicon::default();
    // ~1500 pairs per class puts the tolerance near four standard deviations.
    let data = samples(42, 3000);
    let truth = OracleScorer::noiseless(&lex);
    let noisy = OracleScorer::new(
        OracleConfig {
            label_flip_noise: 0.1,
            seed: 9,
            ..OracleConfig::default()
        },
        &lex,
    )
    .unwrap();
    let report = detection_report(&detection_items(&data), &noisy, &truth, 0.5, &VerifyOptions::default()).unwrap();
    for (action, c) in &report.classes {
        assert!(c.tp + c.fn_ >= 1000, "{action}: only {} positives", c.tp + c.fn_);
        assert!((c.recall() - 0.9).abs() <= 0.03, "{action}: recall {}", c.recall());
    }
}

#[test]
fn oracle_flips_are_reproducible() {
    let lex = Lexicon::default();
    let data = samples(43, 30);
    let cfg = OracleConfig {
        label_flip_noise: 0.1,
        seed: 4,
        ..OracleConfig::default()
    };
    let run = || {
        let oracle = OracleScorer::new(cfg, &lex).unwrap();
        data.iter()
            .flat_map(|s| {
                let trace = segment(&s.trace, 20).unwrap();
                let oracle = &oracle;
                s.graph
                    .nodes()
                    .iter()
                    .flat_map(move |q| trace.segments.iter().map(|seg| oracle.score(q, seg).unwrap()).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<f64>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn checkpoint_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scorer.json");
    let p = random_params(0.05, 1);
    p.save(&path).unwrap();
    let lex = Lexicon::default();
    let back = ParametricScorer::load(&path, Some((&lex.tokens(), 64))).unwrap();
    assert_eq!(back.params(), p.params());
    assert!(ParametricScorer::load(&path, Some((&lex.tokens(), 32))).is_err());
}
