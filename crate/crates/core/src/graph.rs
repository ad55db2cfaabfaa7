//! DAG utilities: topological order, enumeration of every linear extension,
//! and exact extension counting over downsets.

use std::collections::{BTreeSet, VecDeque};

use crate::dsl::TaskGraph;
use crate::error::{Error, Result};

pub const DEFAULT_EXTENSION_CAP: usize = 64;

/// Largest node count [`count_extensions`] accepts (2^N downsets).
pub const MAX_COUNT_NODES: usize = 24;

/// Kahn's algorithm, smallest available id first.
pub fn topological_order(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::DanglingEdge { from: u, to: v });
        }
        if u == v {
            return Err(Error::CycleDetected);
        }
        indegree[v] += 1;
        succ[u].push(v);
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for &v in &succ[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.insert(v);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(Error::CycleDetected)
    }
}

/// Predecessor bitmasks of a DAG with at most 64 nodes.
#[derive(Debug, Clone)]
pub struct Precedence {
    preds: Vec<u64>,
}

impl Precedence {
    pub fn new(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Self> {
        if n > 64 {
            return Err(Error::SizeLimitExceeded(format!("{n} nodes (max 64)")));
        }
        topological_order(n, edges)?;
        let mut preds = vec![0u64; n];
        for &(u, v) in edges {
            preds[v] |= 1 << u;
        }
        Ok(Precedence { preds })
    }

    pub fn of(g: &TaskGraph) -> Result<Self> {
        Precedence::new(g.len(), g.edges())
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    /// Lexicographic enumeration of linear extensions, stopping after `cap`.
    pub fn linear_extensions(&self, cap: usize) -> Extensions {
        let mut out = Extensions {
            sequences: Vec::new(),
            truncated: false,
        };
        let mut prefix = Vec::with_capacity(self.len());
        self.extend(0, &mut prefix, cap, &mut out);
        out
    }

    // Returns false once enumeration must stop.
    fn extend(&self, placed: u64, prefix: &mut Vec<usize>, cap: usize, out: &mut Extensions) -> bool {
        let n = self.len();
        if prefix.len() == n {
            if out.sequences.len() == cap {
                out.truncated = true;
                return false;
            }
            out.sequences.push(prefix.clone());
            return true;
        }
        for v in 0..n {
            let bit = 1u64 << v;
            if placed & bit == 0 && self.preds[v] & !placed == 0 {
                prefix.push(v);
                let go_on = self.extend(placed | bit, prefix, cap, out);
                prefix.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }

    /// Number of linear extensions by dynamic programming over downsets.
    pub fn count_extensions(&self) -> Result<u128> {
        let n = self.len();
        if n > MAX_COUNT_NODES {
            return Err(Error::SizeLimitExceeded(format!(
                "{n} nodes (max {MAX_COUNT_NODES} for exact counting)"
            )));
        }
        let full = (1usize << n) - 1;
        // ways[s] = number of ways to schedule exactly the downset s.
        let mut ways = vec![0u128; full + 1];
        ways[0] = 1;
        for s in 0..=full {
            if ways[s] == 0 {
                continue;
            }
            for v in 0..n {
                let bit = 1usize << v;
                if s & bit == 0 && (self.preds[v] as usize) & !s == 0 {
                    ways[s | bit] += ways[s];
                }
            }
        }
        Ok(ways[full])
    }
}

/// Result of [`linear_extensions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extensions {
    pub sequences: Vec<Vec<usize>>,
    /// More extensions exist beyond the cap.
    pub truncated: bool,
}

pub fn linear_extensions(g: &TaskGraph, cap: usize) -> Result<Extensions> {
    if cap == 0 {
        return Err(Error::Config("extension cap must be positive".into()));
    }
    Ok(Precedence::of(g)?.linear_extensions(cap))
}

pub fn count_extensions(g: &TaskGraph) -> Result<u128> {
    Precedence::of(g)?.count_extensions()
}

/// True if `seq` is a permutation of `0..n` respecting every edge.
pub fn is_linear_extension(n: usize, edges: &BTreeSet<(usize, usize)>, seq: &[usize]) -> bool {
    if seq.len() != n {
        return false;
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in seq.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = i;
    }
    edges.iter().all(|&(u, v)| pos[u] < pos[v])
}

/// Nodes with no path between them in either direction share a level set;
/// returns the longest-path layer of every node.
pub fn layers(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<usize>> {
    let order = topological_order(n, edges)?;
    let mut layer = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in edges {
        succ[u].push(v);
    }
    let mut queue: VecDeque<usize> = order.into();
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            layer[v] = layer[v].max(layer[u] + 1);
        }
    }
    Ok(layer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(e: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        e.iter().copied().collect()
    }

    #[test]
    fn diamond_has_two_extensions() {
        let p = Precedence::new(4, &edges(&[(0, 1), (0, 2), (1, 3), (2, 3)])).unwrap();
        let ext = p.linear_extensions(64);
        assert_eq!(ext.sequences, vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3]]);
        assert!(!ext.truncated);
        assert_eq!(p.count_extensions().unwrap(), 2);
    }

    #[test]
    fn chain_and_antichain() {
        let chain = Precedence::new(5, &edges(&[(0, 1), (1, 2), (2, 3), (3, 4)])).unwrap();
        assert_eq!(chain.linear_extensions(64).sequences, vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(chain.count_extensions().unwrap(), 1);

        let anti = Precedence::new(4, &BTreeSet::new()).unwrap();
        let ext = anti.linear_extensions(64);
        assert_eq!(ext.sequences.len(), 24);
        assert_eq!(ext.sequences[0], vec![0, 1, 2, 3]);
        assert_eq!(ext.sequences[23], vec![3, 2, 1, 0]);
        assert_eq!(anti.count_extensions().unwrap(), 24);
    }

    #[test]
    fn cap_truncates_with_flag() {
        let anti = Precedence::new(5, &BTreeSet::new()).unwrap();
        let ext = anti.linear_extensions(10);
        assert_eq!(ext.sequences.len(), 10);
        assert!(ext.truncated);
        let exact = anti.linear_extensions(120);
        assert_eq!(exact.sequences.len(), 120);
        assert!(!exact.truncated);
    }

    #[test]
    fn cycles_are_rejected() {
        assert_eq!(
            Precedence::new(3, &edges(&[(0, 1), (1, 2), (2, 0)])).unwrap_err(),
            Error::CycleDetected
        );
        assert_eq!(
            topological_order(1, &edges(&[(0, 0)])).unwrap_err(),
            Error::CycleDetected
        );
    }

    #[test]
    fn layer_assignment() {
        let l = layers(4, &edges(&[(0, 1), (0, 2), (1, 3), (2, 3)])).unwrap();
        assert_eq!(l, vec![0, 1, 1, 2]);
    }

    #[test]
    fn count_handles_larger_antichains() {
        let anti = Precedence::new(12, &BTreeSet::new()).unwrap();
        assert_eq!(anti.count_extensions().unwrap(), 479_001_600);
    }
}
