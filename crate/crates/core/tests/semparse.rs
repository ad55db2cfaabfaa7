mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use taskverify::datagen::{all_signatures, SubTask, TaskSpec};
use taskverify::semparse::{DescriptionParser, TemplateSet};
use taskverify::{ged, parse_description, Action, Error, Lexicon, Query, TaskGraph, VocabMode};

type Shape = (Vec<u8>, BTreeSet<(usize, usize)>);

/// Smallest relabelling-invariant form: minimum over node permutations.
fn canonical((labels, edges): &Shape) -> Shape {
    common::permutations(labels.len())
        .into_iter()
        .map(|perm| {
            // node i moves to position perm[i]
            let mut l = vec![0; labels.len()];
            for (i, &p) in perm.iter().enumerate() {
                l[p] = labels[i];
            }
            let e = edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
            (l, e)
        })
        .min()
        .unwrap()
}

/// Exact edit distance by breadth-first search over single edit operations:
/// insert an isolated node, delete an isolated node, relabel a node, insert
/// or delete an edge. Node counts never need to exceed the larger graph.
fn edit_distance_bfs(a: &Shape, b: &Shape, alphabet: &[u8]) -> usize {
    let target = canonical(b);
    let max_nodes = a.0.len().max(b.0.len());
    let start = canonical(a);
    let mut seen: HashSet<Shape> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((g, d)) = queue.pop_front() {
        if g == target {
            return d;
        }
        let (labels, edges) = &g;
        let n = labels.len();
        let mut next: Vec<Shape> = Vec::new();
        if n < max_nodes {
            for &c in alphabet {
                let mut l = labels.clone();
                l.push(c);
                next.push((l, edges.clone()));
            }
        }
        for i in 0..n {
            if edges.iter().all(|&(u, v)| u != i && v != i) {
                let mut l = labels.clone();
                l.remove(i);
                let shift = |x: usize| if x > i { x - 1 } else { x };
                next.push((l, edges.iter().map(|&(u, v)| (shift(u), shift(v))).collect()));
            }
            for &c in alphabet {
                if c != labels[i] {
                    let mut l = labels.clone();
                    l[i] = c;
                    next.push((l, edges.clone()));
                }
            }
            for j in 0..n {
                if i != j {
                    let mut e = edges.clone();
                    if !e.remove(&(i, j)) {
                        e.insert((i, j));
                    }
                    next.push((labels.clone(), e));
                }
            }
        }
        for s in next {
            let s = canonical(&s);
            if seen.insert(s.clone()) {
                queue.push_back((s, d + 1));
            }
        }
    }
    unreachable!("every graph is reachable")
}

const STATES: [&str; 3] = ["hot", "clean", "sliced"];

fn to_graph((labels, edges): &Shape) -> TaskGraph {
    let nodes = labels.iter().map(|&l| Query::state("apple", STATES[l as usize])).collect();
    TaskGraph::new(nodes, edges.iter().copied()).unwrap()
}

fn shape(max_nodes: usize) -> impl Strategy<Value = Shape> {
    (0..=max_nodes, any::<u64>(), 0.0f64..0.8, prop::collection::vec(0u8..3, max_nodes)).prop_map(
        move |(n, seed, p, labels)| {
            let mut rng = taskverify::seeds::rng(seed, "ged-dag");
            (labels[..n].to_vec(), common::random_dag(&mut rng, n, p))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn ged_matches_edit_sequence_search(a in shape(3), b in shape(3)) {
        let expected = edit_distance_bfs(&a, &b, &[0, 1, 2]);
        prop_assert_eq!(ged(&to_graph(&a), &to_graph(&b)).unwrap(), expected);
    }

    #[test]
    fn ged_matches_on_four_nodes(a in shape(4), edits in prop::collection::vec((0usize..4, 0usize..4, 0u8..3), 1..4)) {
        // Perturb `a` by a few edits so the search stays shallow.
        let mut b = a.clone();
        for (i, j, c) in edits {
            let n = b.0.len();
            if n == 0 {
                b.0.push(c);
                continue;
            }
            let (i, j) = (i % n, j % n);
            if i == j {
                b.0[i] = c;
            } else if !b.1.remove(&(i, j)) {
                b.1.insert((i, j));
                if taskverify::graph::topological_order(n, &b.1).is_err() {
                    b.1.remove(&(i, j));
                }
            }
        }
        let expected = edit_distance_bfs(&a, &b, &[0, 1, 2]);
        prop_assert_eq!(ged(&to_graph(&a), &to_graph(&b)).unwrap(), expected);
    }

    #[test]
    fn ged_is_symmetric(a in shape(4), b in shape(4)) {
        let (ga, gb) = (to_graph(&a), to_graph(&b));
        prop_assert_eq!(ged(&ga, &gb).unwrap(), ged(&gb, &ga).unwrap());
    }
}

#[test]
fn ged_basics() {
    let g = common::diamond();
    assert_eq!(ged(&g, &g).unwrap(), 0);
    let mut nodes = g.nodes().to_vec();
    nodes.push(Query::state("apple", "cold"));
    let bigger = TaskGraph::new(nodes, g.edges().iter().copied()).unwrap();
    assert_eq!(ged(&g, &bigger).unwrap(), 1);
}

#[test]
fn written_descriptions() {
    let lex = Lexicon::default();
    let g = parse_description("apple is heated, then cleaned in a sinkbasin", &lex).unwrap();
    assert_eq!(g, common::state_graph(&["hot", "clean"], &[(0, 1)]));

    let g = parse_description("apple is heated and cleaned", &lex).unwrap();
    assert_eq!(g, common::state_graph(&["hot", "clean"], &[]));

    let g = parse_description("apple is cleaned in a SinkBasin after cooling in a Fridge", &lex).unwrap();
    let clean = g.nodes().iter().position(|q| q.args()[1] == "clean").unwrap();
    let cold = g.nodes().iter().position(|q| q.args()[1] == "cold").unwrap();
    assert_eq!(g.edges().iter().copied().collect::<Vec<_>>(), vec![(cold, clean)]);

    let g = parse_description(
        "apple is heated in a microwave, then cleaned in a sinkbasin and sliced with a knife, then placed in a plate",
        &lex,
    )
    .unwrap();
    assert_eq!(g, common::diamond());
}

#[test]
fn unknown_words_fail() {
    let lex = Lexicon::default();
    assert!(matches!(
        parse_description("apple is juggled", &lex),
        Err(Error::NoTemplateMatch(_))
    ));
    let strict = DescriptionParser::new(TemplateSet::default(), lex.clone(), VocabMode::Strict).unwrap();
    assert!(strict.parse("dragonfruit is heated").is_err());
}

/// Every complexity-1..3 signature, rendered for one object through every
/// matching template, parses back to its own graph.
#[test]
fn template_family_round_trips() {
    let lex = Lexicon::default();
    let templates = TemplateSet::default();
    let parser = DescriptionParser::new(templates.clone(), lex.clone(), VocabMode::Strict).unwrap();
    let mut checked = 0;
    for sig in all_signatures(3, 5) {
        let sub_tasks: Vec<SubTask> = sig
            .0
            .iter()
            .flatten()
            .map(|&a| if a == Action::Place { SubTask::place("plate") } else { SubTask::new(a) })
            .collect();
        let spec = TaskSpec {
            object: "apple".into(),
            shape: sig.0.iter().map(Vec::len).collect(),
            sub_tasks,
        };
        let truth = spec.graph(&lex);
        for t in templates.with_shape(&spec.shape, false) {
            let slots: Vec<(Action, Option<String>)> =
                spec.sub_tasks.iter().map(|s| (s.action, s.receptacle.clone())).collect();
            let text = t.render(&lex, &spec.object, &slots, true).unwrap();
            let g = parser.parse(&text).unwrap();
            assert_eq!(ged(&g, &truth).unwrap(), 0, "{text}");
            assert_eq!(g.edges().len(), spec.difficulty().ordering);
            checked += 1;
        }
    }
    assert!(checked > 100);
}
