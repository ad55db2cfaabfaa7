//! Exact graph edit distance between small task graphs.
//!
//! Unit costs: inserting, deleting or relabelling a node, and inserting or
//! deleting a directed edge, each cost 1. Deleting a node also deletes its
//! incident edges, which are charged separately. The search enumerates
//! partial injective node maps from the first graph into the second with
//! branch-and-bound pruning.

use crate::dsl::TaskGraph;
use crate::error::{Error, Result};

/// Default bound on either graph's node count.
pub const GED_MAX_NODES: usize = 8;

const DELETED: usize = usize::MAX;

pub fn ged(g1: &TaskGraph, g2: &TaskGraph) -> Result<usize> {
    ged_with_limit(g1, g2, GED_MAX_NODES)
}

pub fn ged_with_limit(g1: &TaskGraph, g2: &TaskGraph, max_nodes: usize) -> Result<usize> {
    let (n1, n2) = (g1.len(), g2.len());
    if n1 > max_nodes || n2 > max_nodes {
        return Err(Error::SizeLimitExceeded(format!(
            "graph edit distance over {} and {} nodes (max {max_nodes})",
            n1, n2
        )));
    }
    let adj = |g: &TaskGraph| {
        let n = g.len();
        let mut m = vec![false; n * n];
        for &(u, v) in g.edges() {
            m[u * n + v] = true;
        }
        m
    };
    let search = Search {
        n1,
        n2,
        adj1: adj(g1),
        adj2: adj(g2),
        relabel: g1
            .nodes()
            .iter()
            .map(|a| g2.nodes().iter().map(|b| usize::from(a != b)).collect())
            .collect(),
    };
    // Trivial upper bound: delete everything, insert everything.
    let mut best = n1 + g1.edges().len() + n2 + g2.edges().len();
    let mut map = Vec::with_capacity(n1);
    search.descend(0, 0, &mut map, &mut vec![false; n2], &mut best);
    Ok(best)
}

struct Search {
    n1: usize,
    n2: usize,
    adj1: Vec<bool>,
    adj2: Vec<bool>,
    relabel: Vec<Vec<usize>>,
}

impl Search {
    fn e1(&self, u: usize, v: usize) -> bool {
        self.adj1[u * self.n1 + v]
    }

    fn e2(&self, u: usize, v: usize) -> bool {
        self.adj2[u * self.n2 + v]
    }

    /// Cost of fixing node `u -> target` given the already mapped prefix.
    fn step_cost(&self, u: usize, target: usize, map: &[usize]) -> usize {
        let mut cost = if target == DELETED {
            1
        } else {
            self.relabel[u][target]
        };
        for (w, &tw) in map.iter().enumerate() {
            for (a, b, ta, tb) in [(u, w, target, tw), (w, u, tw, target)] {
                let in1 = self.e1(a, b);
                let in2 = ta != DELETED && tb != DELETED && self.e2(ta, tb);
                cost += usize::from(in1 != in2);
            }
        }
        cost
    }

    /// Insertions needed for nodes of the second graph left unmapped.
    fn completion_cost(&self, used: &[bool]) -> usize {
        let mut cost = used.iter().filter(|&&x| !x).count();
        for a in 0..self.n2 {
            for b in 0..self.n2 {
                if self.e2(a, b) && (!used[a] || !used[b]) {
                    cost += 1;
                }
            }
        }
        cost
    }

    fn descend(
        &self,
        u: usize,
        cost: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut usize,
    ) {
        let free = used.iter().filter(|&&x| !x).count();
        let remaining = self.n1 - u;
        // Each unmatched node on either side costs at least one operation.
        let bound = cost + free.saturating_sub(remaining);
        if bound >= *best {
            return;
        }
        if u == self.n1 {
            *best = (*best).min(cost + self.completion_cost(used));
            return;
        }
        for target in (0..self.n2).chain(std::iter::once(DELETED)) {
            if target != DELETED && used[target] {
                continue;
            }
            let c = cost + self.step_cost(u, target, map);
            if c >= *best {
                continue;
            }
            map.push(target);
            if target != DELETED {
                used[target] = true;
            }
            self.descend(u + 1, c, map, used, best);
            if target != DELETED {
                used[target] = false;
            }
            map.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Query;

    fn q(s: &str) -> Query {
        Query::state("apple", s)
    }

    fn g(nodes: &[&str], edges: &[(usize, usize)]) -> TaskGraph {
        TaskGraph::new(nodes.iter().map(|s| q(s)).collect(), edges.iter().copied()).unwrap()
    }

    #[test]
    fn identity_is_zero() {
        let a = g(&["hot", "clean", "sliced"], &[(0, 1), (0, 2)]);
        assert_eq!(ged(&a, &a).unwrap(), 0);
    }

    #[test]
    fn single_insertion_costs_one() {
        let a = g(&["hot", "clean"], &[(0, 1)]);
        let b = g(&["hot", "clean", "sliced"], &[(0, 1)]);
        assert_eq!(ged(&a, &b).unwrap(), 1);
        assert_eq!(ged(&b, &a).unwrap(), 1);
    }

    #[test]
    fn node_order_does_not_matter() {
        let a = g(&["hot", "clean"], &[(0, 1)]);
        let b = g(&["clean", "hot"], &[(1, 0)]);
        assert_eq!(ged(&a, &b).unwrap(), 0);
    }

    #[test]
    fn relabel_and_reverse() {
        let a = g(&["hot", "clean"], &[(0, 1)]);
        let b = g(&["hot", "cold"], &[(0, 1)]);
        assert_eq!(ged(&a, &b).unwrap(), 1);
        let c = g(&["hot", "clean"], &[(1, 0)]);
        assert_eq!(ged(&a, &c).unwrap(), 2);
        let empty = TaskGraph::new(vec![], []).unwrap();
        assert_eq!(ged(&a, &empty).unwrap(), 3);
    }

    #[test]
    fn size_limit() {
        let names = ["hot"; 9];
        let big = g(&names, &[]);
        assert!(matches!(
            ged(&big, &big),
            Err(Error::SizeLimitExceeded(_))
        ));
        assert_eq!(ged_with_limit(&big, &big, 9).unwrap(), 0);
    }
}
