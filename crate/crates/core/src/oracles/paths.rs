use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, WeightedGraph};

/// Shortest-path tree rooted at `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTree {
    pub source: NodeId,
    pub dist: Vec<f64>,
    /// Arc used to reach each node; `None` for the source.
    pub parent: Vec<Option<EdgeId>>,
}

impl PathTree {
    pub fn total_distance(&self) -> f64 {
        self.dist.iter().sum()
    }

    pub fn arcs(&self) -> Vec<EdgeId> {
        let mut ids: Vec<EdgeId> = self.parent.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids
    }
}

fn check_source(g: &WeightedGraph, source: NodeId) -> Result<()> {
    if source >= g.node_count() {
        return Err(Error::param(format!("source {source} out of range")));
    }
    Ok(())
}

fn unreachable_error(dist: &[f64]) -> Error {
    let missing: Vec<usize> = dist
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_infinite())
        .map(|(v, _)| v)
        .collect();
    Error::structure(format!("nodes unreachable from source: {missing:?}"))
}

/// Dijkstra with a binary heap. Weights must be nonnegative.
pub fn dijkstra(g: &WeightedGraph, source: NodeId) -> Result<PathTree> {
    check_source(g, source)?;
    if let Some(e) = g.edges().iter().find(|e| e.w < 0.0) {
        return Err(Error::param(format!(
            "negative weight {} on ({}, {})",
            e.w, e.u, e.v
        )));
    }
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), source)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, id) in g.neighbors(u) {
            let nd = d + g.edge(id).w;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some(id);
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        }
    }
    if dist.iter().any(|d| d.is_infinite()) {
        return Err(unreachable_error(&dist));
    }
    Ok(PathTree {
        source,
        dist,
        parent,
    })
}

/// Bellman-Ford; detects negative cycles reachable from `source`.
pub fn bellman_ford(g: &WeightedGraph, source: NodeId) -> Result<PathTree> {
    check_source(g, source)?;
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    dist[source] = 0.0;
    let relax = |dist: &mut Vec<f64>, parent: &mut Vec<Option<EdgeId>>| {
        let mut changed = false;
        for (id, e) in g.edges().iter().enumerate() {
            let mut try_arc = |a: NodeId, b: NodeId| {
                if dist[a].is_finite() && dist[a] + e.w < dist[b] {
                    dist[b] = dist[a] + e.w;
                    parent[b] = Some(id);
                    changed = true;
                }
            };
            try_arc(e.u, e.v);
            if !g.is_directed() {
                try_arc(e.v, e.u);
            }
        }
        changed
    };
    for _ in 1..n {
        if !relax(&mut dist, &mut parent) {
            break;
        }
    }
    if relax(&mut dist.clone(), &mut parent.clone()) {
        return Err(Error::structure("negative cycle reachable from source"));
    }
    if dist.iter().any(|d| d.is_infinite()) {
        return Err(unreachable_error(&dist));
    }
    Ok(PathTree {
        source,
        dist,
        parent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_random_digraph, GraphKind};

    fn assert_tree_invariants(g: &WeightedGraph, t: &PathTree) {
        assert_eq!(t.dist[t.source], 0.0);
        for v in 0..g.node_count() {
            if let Some(id) = t.parent[v] {
                let e = g.edge(id);
                let from = if e.v == v { e.u } else { e.v };
                assert!((t.dist[v] - (t.dist[from] + e.w)).abs() < 1e-12);
            }
        }
        for e in g.edges() {
            assert!(t.dist[e.v] <= t.dist[e.u] + e.w + 1e-12);
        }
    }

    #[test]
    fn simple_path() {
        let g = WeightedGraph::directed(3, &[(0, 1, 0.4), (1, 2, 0.5)]).unwrap();
        let t = dijkstra(&g, 0).unwrap();
        assert_eq!(t.dist, vec![0.0, 0.4, 0.9]);
        assert_eq!(bellman_ford(&g, 0).unwrap().dist, vec![0.0, 0.4, 0.9]);
    }

    #[test]
    fn single_arc_and_shortcut() {
        let g = WeightedGraph::directed(2, &[(0, 1, 0.7)]).unwrap();
        assert_eq!(bellman_ford(&g, 0).unwrap().dist, vec![0.0, 0.7]);
        let g = WeightedGraph::directed(3, &[(0, 2, 1.0), (0, 1, 0.3), (1, 2, 0.3)]).unwrap();
        assert!((bellman_ford(&g, 0).unwrap().dist[2] - 0.6).abs() < 1e-15);
        assert!((dijkstra(&g, 0).unwrap().dist[2] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn unreachable_nodes_are_listed() {
        let g = WeightedGraph::directed(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let msg = dijkstra(&g, 0).unwrap_err().to_string();
        assert!(msg.contains("[2, 3]"), "{msg}");
        assert!(matches!(bellman_ford(&g, 0), Err(Error::Structure(_))));
    }

    #[test]
    fn negative_cycle_detected() {
        let g = WeightedGraph::directed(3, &[(0, 1, 1.0), (1, 2, -2.0), (2, 1, 0.5)]).unwrap();
        assert!(matches!(bellman_ford(&g, 0), Err(Error::Structure(_))));
        assert!(dijkstra(&g, 0).is_err());
    }

    #[test]
    fn dijkstra_matches_bellman_ford() {
        for seed in 0..500 {
            let g = generate_random_digraph(GraphKind::Er { p: 0.15 }, 25, seed).unwrap();
            let (d, b) = (dijkstra(&g, 0).unwrap(), bellman_ford(&g, 0).unwrap());
            for (x, y) in d.dist.iter().zip(&b.dist) {
                assert!((x - y).abs() < 1e-12);
            }
            assert_tree_invariants(&g, &d);
            assert_tree_invariants(&g, &b);
        }
    }
}
