use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::graph::{is_connected, EdgeId, WeightedGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSolution {
    /// Sorted edge ids.
    pub edge_ids: Vec<EdgeId>,
    pub total_weight: f64,
}

impl TreeSolution {
    fn from_edges(g: &WeightedGraph, mut edge_ids: Vec<EdgeId>) -> Self {
        edge_ids.sort_unstable();
        let total_weight = g.total_weight(&edge_ids);
        TreeSolution {
            edge_ids,
            total_weight,
        }
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

fn check_mst_input(g: &WeightedGraph) -> Result<()> {
    if g.is_directed() {
        return Err(Error::structure("spanning trees need an undirected graph"));
    }
    if !is_connected(g) {
        return Err(Error::structure("graph is disconnected"));
    }
    Ok(())
}

/// Prim's algorithm from node 0 with a binary heap; ties broken by edge id.
pub fn prim_mst(g: &WeightedGraph) -> Result<TreeSolution> {
    check_mst_input(g)?;
    let n = g.node_count();
    let mut in_tree = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let visit = |v: usize, in_tree: &mut Vec<bool>, heap: &mut BinaryHeap<_>| {
        in_tree[v] = true;
        for &(u, id) in g.neighbors(v) {
            if !in_tree[u] {
                heap.push(Reverse((OrderedFloat(g.edge(id).w), id, u)));
            }
        }
    };
    visit(0, &mut in_tree, &mut heap);
    while let Some(Reverse((_, id, u))) = heap.pop() {
        if in_tree[u] {
            continue;
        }
        chosen.push(id);
        visit(u, &mut in_tree, &mut heap);
    }
    Ok(TreeSolution::from_edges(g, chosen))
}

/// Kruskal's algorithm over edges sorted by (weight, id).
pub fn kruskal_mst(g: &WeightedGraph) -> Result<TreeSolution> {
    check_mst_input(g)?;
    let mut order: Vec<EdgeId> = (0..g.edge_count()).collect();
    order.sort_by(|&a, &b| g.edge(a).w.total_cmp(&g.edge(b).w).then(a.cmp(&b)));
    let mut dsu = DisjointSet::new(g.node_count());
    let chosen = order.into_iter().filter(|&id| {
        let e = g.edge(id);
        dsu.union(e.u, e.v)
    });
    Ok(TreeSolution::from_edges(g, chosen.collect()))
}
