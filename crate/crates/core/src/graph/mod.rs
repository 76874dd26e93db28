//! Weighted graphs, random generators, line graphs and Euclidean instances.

mod euclidean;
mod generate;
mod line_graph;

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

pub use euclidean::{EuclideanInstance, Metric};
pub use generate::{generate_euclidean, generate_random_digraph, generate_random_graph, GraphKind};
pub use line_graph::{line_graph, LineGraphMapping};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: f64,
}

/// A graph on nodes `0..n` with weighted edges.
///
/// Undirected edges are stored once and are visible from both endpoints.
/// Directed graphs store arcs `u -> v`; `out` lists arcs leaving a node and
/// `inc` lists arcs entering it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    directed: bool,
    out: Vec<Vec<(NodeId, EdgeId)>>,
    inc: Vec<Vec<(NodeId, EdgeId)>>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>, directed: bool) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::param(format!(
                    "edge {id} ({}, {}) out of range for n={n}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::param(format!("edge {id} is a self-loop on {}", e.u)));
            }
            if !e.w.is_finite() {
                return Err(Error::param(format!("edge {id} has non-finite weight")));
            }
            let key = if directed {
                (e.u, e.v)
            } else {
                (e.u.min(e.v), e.u.max(e.v))
            };
            if !seen.insert(key) {
                return Err(Error::param(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
        }
        let (out, inc) = build_adjacency(n, &edges, directed);
        Ok(WeightedGraph {
            n,
            edges,
            directed,
            out,
            inc,
        })
    }

    pub fn undirected(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        Self::new(
            n,
            edges.iter().map(|&(u, v, w)| Edge { u, v, w }).collect(),
            false,
        )
    }

    pub fn directed(n: usize, arcs: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        Self::new(
            n,
            arcs.iter().map(|&(u, v, w)| Edge { u, v, w }).collect(),
            true,
        )
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    /// `(neighbor, edge id)` pairs reachable from `v` along one edge.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.out[v]
    }

    /// `(tail, edge id)` pairs for arcs entering `v`; same as
    /// [`neighbors`](Self::neighbors) for undirected graphs.
    pub fn in_neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.inc[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.out[v].len()
    }

    /// Weight of the edge (or arc) between `u` and `v`, if any.
    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.out[u]
            .iter()
            .find(|&&(x, _)| x == v)
            .map(|&(_, id)| self.edges[id].w)
    }

    pub fn total_weight(&self, edge_ids: &[EdgeId]) -> f64 {
        edge_ids.iter().map(|&id| self.edges[id].w).sum()
    }

    /// Rebuilds the adjacency index from the edge list and checks it matches.
    pub fn adjacency_consistent(&self) -> bool {
        let (out, inc) = build_adjacency(self.n, &self.edges, self.directed);
        out == self.out && inc == self.inc
    }

    /// Line-oriented text form: `n m directed` then `u v w` per edge with
    /// weights at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "{} {} {}",
            self.n,
            self.edges.len(),
            u8::from(self.directed)
        )
        .unwrap();
        for e in &self.edges {
            writeln!(s, "{} {} {:.16e}", e.u, e.v, e.w).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format("empty graph file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::format(format!(
                "line 1: expected `n m directed`, got `{header}`"
            )));
        }
        let n: usize = parse_field(head[0], 1)?;
        let m: usize = parse_field(head[1], 1)?;
        let directed = match head[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::format(format!(
                    "line 1: directed flag must be 0 or 1, got `{other}`"
                )))
            }
        };
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::format(format!("line {}: expected `u v w`", idx + 1)));
            }
            edges.push(Edge {
                u: parse_field(f[0], idx + 1)?,
                v: parse_field(f[1], idx + 1)?,
                w: parse_field(f[2], idx + 1)?,
            });
        }
        if edges.len() != m {
            return Err(Error::format(format!(
                "header declares {m} edges, found {}",
                edges.len()
            )));
        }
        Self::new(n, edges, directed).map_err(|e| Error::format(e.to_string()))
    }

    /// Replaces every undirected edge by two opposite arcs; `weights` supplies
    /// the `(forward, backward)` weights per edge.
    pub fn to_bidirected(&self, weights: impl Fn(EdgeId, &Edge) -> (f64, f64)) -> Result<Self> {
        let mut arcs = Vec::with_capacity(2 * self.edges.len());
        for (id, e) in self.edges.iter().enumerate() {
            let (wf, wb) = weights(id, e);
            arcs.push(Edge {
                u: e.u,
                v: e.v,
                w: wf,
            });
            arcs.push(Edge {
                u: e.v,
                v: e.u,
                w: wb,
            });
        }
        Self::new(self.n, arcs, true)
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::format(format!("line {line}: cannot parse `{s}`")))
}

type Adjacency = Vec<Vec<(NodeId, EdgeId)>>;

fn build_adjacency(n: usize, edges: &[Edge], directed: bool) -> (Adjacency, Adjacency) {
    let mut out = vec![Vec::new(); n];
    let mut inc = vec![Vec::new(); n];
    for (id, e) in edges.iter().enumerate() {
        out[e.u].push((e.v, id));
        inc[e.v].push((e.u, id));
        if !directed {
            out[e.v].push((e.u, id));
            inc[e.u].push((e.v, id));
        }
    }
    (out, inc)
}

/// True when every node is reachable from node 0, ignoring arc directions.
pub fn is_connected(g: &WeightedGraph) -> bool {
    if g.n <= 1 {
        return true;
    }
    let mut seen = vec![false; g.n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &(v, _) in g.out[u].iter().chain(&g.inc[u]) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == g.n
}

/// True when `edge_ids` are exactly the edges of a spanning tree of `g`.
pub fn is_spanning_tree(g: &WeightedGraph, edge_ids: &[EdgeId]) -> bool {
    if g.n == 0 || edge_ids.len() != g.n - 1 {
        return false;
    }
    let mut adj = vec![Vec::new(); g.n];
    let mut distinct = HashSet::with_capacity(edge_ids.len());
    for &id in edge_ids {
        if id >= g.edges.len() || !distinct.insert(id) {
            return false;
        }
        let e = g.edges[id];
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    // n-1 distinct edges that connect all n nodes form a tree.
    let mut seen = vec![false; g.n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == g.n
}
