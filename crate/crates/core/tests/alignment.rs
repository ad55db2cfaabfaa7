mod common;

use proptest::prelude::*;
use taskverify::aligner::{satisfies_constraints, segment, verify, verify_with_scores};
use taskverify::graph::linear_extensions;
use taskverify::scorer::{ConstantScorer, Scorer};
use taskverify::{align_bruteforce, align_dp, Error, Event, Trace, VerifyOptions, ScoreMatrix};

fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=5)
        .prop_flat_map(|n| (Just(n), n..=8))
        .prop_flat_map(|(n, s)| prop::collection::vec(prop::collection::vec(-10.0f64..=0.0, s), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dp_matches_exhaustive_search(rows in matrix()) {
        let m = ScoreMatrix::new(rows.clone()).unwrap();
        let dp = align_dp(&m).unwrap();
        prop_assert_eq!(dp.score, common::brute_force_score(&rows));
        prop_assert_eq!(dp.score, align_bruteforce(&m).unwrap().score);
        prop_assert!(common::constraints_hold(&dp.z()));
        prop_assert!(satisfies_constraints(&dp.z()));
        prop_assert!(dp.segments.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn shifting_every_score_keeps_the_alignment(rows in matrix(), c in 0.0f64..5.0) {
        // Every alignment uses exactly N entries, so a uniform shift moves all
        // totals by N c and cannot change which one is best.
        let m = ScoreMatrix::new(rows.clone()).unwrap();
        let shifted = ScoreMatrix::new(rows.iter().map(|r| r.iter().map(|v| v - c).collect()).collect()).unwrap();
        let (a, b) = (align_dp(&m).unwrap(), align_dp(&shifted).unwrap());
        let n = rows.len() as f64;
        prop_assert!((b.score - (a.score - n * c)).abs() < 1e-9);
        prop_assert!((common::score_of(&rows, &b.z()) - a.score).abs() < 1e-9);
    }

    #[test]
    fn square_matrices_align_diagonally(n in 1usize..=6, seed in any::<u64>()) {
        let mut rng = taskverify::seeds::rng(seed, "square");
        let rows = common::random_log_scores(&mut rng, n, n);
        let a = align_dp(&ScoreMatrix::new(rows).unwrap()).unwrap();
        prop_assert_eq!(a.segments, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn two_by_three_example() {
    let rows = vec![
        vec![0.5f64.ln(), 0.9f64.ln(), 0.1f64.ln()],
        vec![0.2f64.ln(), 0.3f64.ln(), 0.8f64.ln()],
    ];
    let m = ScoreMatrix::new(rows).unwrap();
    let a = align_bruteforce(&m).unwrap();
    assert_eq!(a.pairs().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    assert_eq!(align_dp(&m).unwrap().score, a.score);
}

#[test]
fn single_query_takes_the_best_segment() {
    let m = ScoreMatrix::new(vec![vec![0.9f64.ln(), 0.1f64.ln()]]).unwrap();
    let a = align_dp(&m).unwrap();
    assert_eq!(a.z(), vec![vec![1, 0]]);
    assert_eq!(a.score, 0.9f64.ln());
}

#[test]
fn more_queries_than_segments_is_an_error() {
    let m = ScoreMatrix::new(vec![vec![0.0], vec![0.0]]).unwrap();
    assert!(matches!(align_dp(&m), Err(Error::TooFewSegments { .. })));
}

#[test]
fn segmentation_pads_the_last_window() {
    let frames = |t: usize| Trace {
        frames: vec![vec![1.0; 3]; t],
        events: None,
    };
    let s = segment(&frames(50), 20).unwrap();
    assert_eq!(s.len(), 3);
    assert_eq!(s.segments[2].padding(), 10);
    // Mean pooling ignores padded frames.
    assert_eq!(s.segments[2].mean_features(), vec![1.0; 3]);
    let s = segment(&frames(40), 20).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.segments[1].padding(), 0);
}

fn constant_trace(t: usize) -> Trace {
    Trace {
        frames: vec![vec![0.0; 4]; t],
        events: Some(vec![Event {
            start: 0,
            end: 1,
            action: taskverify::Action::Heat,
            object: "apple".into(),
            receptacle: None,
        }]),
    }
}

#[test]
fn perfect_scorer_gives_one_half() {
    let g = common::diamond();
    let trace = segment(&constant_trace(200), 20).unwrap();
    let v = verify(&g, &trace, &ConstantScorer(1.0), &VerifyOptions::default()).unwrap();
    assert_eq!(v.probability, 0.5);
    assert!(v.label);
}

#[test]
fn unsatisfiable_query_sinks_the_probability() {
    struct OneBad;
    impl Scorer for OneBad {
        fn score(&self, q: &taskverify::Query, _: &taskverify::aligner::Segment) -> taskverify::Result<f64> {
            Ok(if q.args()[1] == "clean" { 1e-6 } else { 1.0 })
        }
    }
    let trace = segment(&constant_trace(200), 20).unwrap();
    let states = ["clean", "hot", "sliced", "cold"];
    for n in 1..=4 {
        let g = common::state_graph(&states[..n], &[]);
        let v = verify(&g, &trace, &OneBad, &VerifyOptions::default()).unwrap();
        // mean log-score is ln(1e-6) / n
        let expected = 1.0 / (1.0 + 1e6f64.powf(1.0 / n as f64));
        assert!((v.probability - expected).abs() < 1e-12);
        assert!(!v.label);
        if n <= 3 {
            assert!(v.probability < 0.01);
        }
    }
}

#[test]
fn best_extension_wins() {
    // Diamond with the scores making only the second extension fit.
    let g = common::diamond();
    let p = |hits: [usize; 4]| -> Vec<Vec<f64>> {
        (0..4)
            .map(|j| (0..4).map(|t| if hits[j] == t { 0.99 } else { 0.01 }).collect())
            .collect()
    };
    // node 2 (sliced) observed before node 1 (clean)
    let scores = ScoreMatrix::from_probabilities(&p([0, 2, 1, 3])).unwrap();
    let ext = linear_extensions(&g, 64).unwrap();
    let v = verify_with_scores(&scores, ext, &VerifyOptions::default()).unwrap();
    assert_eq!(v.best_extension, vec![0, 2, 1, 3]);
    assert_eq!(v.best_index, 1);
    assert_eq!(v.node_pairs(), vec![(0, 0), (2, 1), (1, 2), (3, 3)]);
    assert!(v.label);
}
