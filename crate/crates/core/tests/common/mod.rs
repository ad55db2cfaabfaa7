//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use taskverify::{Query, TaskGraph};

/// Best total score over every strictly increasing choice of one segment
/// per row. Candidates are summed as `s0 + (s1 + (... + 0))`; rounding is
/// monotone, so any recursion adding the same way reaches the identical float.
pub fn brute_force_score(scores: &[Vec<f64>]) -> f64 {
    fn go(scores: &[Vec<f64>], row: usize, from: usize) -> f64 {
        if row == scores.len() {
            return 0.0;
        }
        let s = scores[0].len();
        let mut best = f64::NEG_INFINITY;
        for t in from..=s - (scores.len() - row) {
            best = best.max(scores[row][t] + go(scores, row + 1, t + 1));
        }
        best
    }
    go(scores, 0, 0)
}

/// Literal reading of the alignment constraints on a binary matrix.
pub fn constraints_hold(z: &[Vec<u8>]) -> bool {
    let n = z.len();
    if n == 0 {
        return true;
    }
    let s = z[0].len();
    if z.iter().any(|r| r.len() != s || r.iter().any(|&v| v > 1)) {
        return false;
    }
    // each query exactly one segment
    if z.iter().any(|r| r.iter().map(|&v| v as usize).sum::<usize>() != 1) {
        return false;
    }
    // each segment at most one query
    for t in 0..s {
        if (0..n).map(|j| z[j][t] as usize).sum::<usize>() > 1 {
            return false;
        }
    }
    // if row v sits at segment tbar, no earlier row u sits at or after tbar
    for v in 0..n {
        for tbar in 0..s {
            if z[v][tbar] == 1 {
                for u in 0..v {
                    if (tbar..s).any(|t| z[u][t] == 1) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Total of the selected entries, folded from the last row like
/// [`brute_force_score`].
pub fn score_of(scores: &[Vec<f64>], z: &[Vec<u8>]) -> f64 {
    scores.iter().zip(z).rev().fold(0.0, |acc, (row, zr)| {
        let picked: f64 = row.iter().zip(zr).filter(|(_, &b)| b == 1).map(|(v, _)| *v).sum();
        picked + acc
    })
}

/// Random log-scores in `[-8, 0]`, occasionally with repeated values to
/// exercise ties.
pub fn random_log_scores(rng: &mut impl Rng, n: usize, s: usize) -> Vec<Vec<f64>> {
    let palette: Vec<f64> = (0..3).map(|_| -rng.random_range(0.0..8.0)).collect();
    (0..n)
        .map(|_| {
            (0..s)
                .map(|_| {
                    if rng.random_bool(0.2) {
                        palette[rng.random_range(0..palette.len())]
                    } else {
                        -rng.random_range(0.0..8.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Random DAG on `n` nodes: each forward pair of a random permutation is an
/// edge with probability `p`.
pub fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> BTreeSet<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.insert((perm[i], perm[j]));
            }
        }
    }
    edges
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(n, prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Permutations that put every edge's source before its target.
pub fn permutation_filter(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    permutations(n)
        .into_iter()
        .filter(|p| {
            let mut pos = vec![0; n];
            for (i, &v) in p.iter().enumerate() {
                pos[v] = i;
            }
            edges.iter().all(|&(u, v)| pos[u] < pos[v])
        })
        .collect()
}

pub fn state_graph(states: &[&str], edges: &[(usize, usize)]) -> TaskGraph {
    TaskGraph::new(
        states.iter().map(|s| Query::state("apple", s)).collect(),
        edges.iter().copied(),
    )
    .unwrap()
}

pub fn diamond() -> TaskGraph {
    TaskGraph::new(
        vec![
            Query::state("apple", "hot"),
            Query::state("apple", "clean"),
            Query::state("apple", "sliced"),
            Query::relation("apple", "plate", "in"),
        ],
        [(0, 1), (0, 2), (1, 3), (2, 3)],
    )
    .unwrap()
}
