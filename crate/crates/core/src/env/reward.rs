use crate::error::Result;
use crate::graph::{is_spanning_tree, EdgeId, EuclideanInstance, NodeId, WeightedGraph};
use crate::oracles::{route_length, tour_length, validate_routes};

/// Penalty for an invalid solution: the node count, which exceeds any weight
/// sum a valid solution on `[0, 1]` weights can reach.
pub fn penalty(n: usize) -> f64 {
    n as f64
}

/// `-(I(T) + Σ w)` where `I(T)` is 0 for a spanning tree and the penalty
/// otherwise.
pub fn mst_reward(g: &WeightedGraph, edge_ids: &[EdgeId]) -> f64 {
    let indicator = if is_spanning_tree(g, edge_ids) {
        0.0
    } else {
        penalty(g.node_count())
    };
    -(indicator + g.total_weight(edge_ids))
}

/// Path from `source` to `target` inside the selected arcs, following the
/// unique selected in-arc of each node backwards. `None` when some node on
/// the way has zero or several selected in-arcs, or the walk cycles.
pub fn selected_path(
    g: &WeightedGraph,
    source: NodeId,
    in_arcs: &[Vec<EdgeId>],
    target: NodeId,
) -> Option<Vec<EdgeId>> {
    let mut path = Vec::new();
    let mut cur = target;
    while cur != source {
        let [arc] = in_arcs[cur][..] else { return None };
        path.push(arc);
        if path.len() >= g.node_count() {
            return None;
        }
        cur = g.edge(arc).u;
    }
    path.reverse();
    Some(path)
}

/// `-Σ_i (I(Q_i) + Σ_{e ∈ Q_i} w(e))` over every destination `i ≠ source`.
/// An arc shared by several paths counts once per path; a destination
/// without a valid path contributes only the penalty.
pub fn ssp_reward(g: &WeightedGraph, source: NodeId, edge_ids: &[EdgeId]) -> f64 {
    let n = g.node_count();
    let mut in_arcs = vec![Vec::new(); n];
    let mut seen = vec![false; g.edge_count()];
    for &id in edge_ids {
        if !std::mem::replace(&mut seen[id], true) {
            in_arcs[g.edge(id).v].push(id);
        }
    }
    let p = penalty(n);
    let mut total = 0.0;
    for v in (0..n).filter(|&v| v != source) {
        total += match selected_path(g, source, &in_arcs, v) {
            Some(path) => g.total_weight(&path),
            None => p,
        };
    }
    -total
}

pub fn tsp_reward(inst: &EuclideanInstance, perm: &[NodeId]) -> Result<f64> {
    Ok(-tour_length(inst, perm)?)
}

/// Negative length of the longest closed route.
pub fn vrp_reward(inst: &EuclideanInstance, routes: &[Vec<NodeId>]) -> Result<f64> {
    validate_routes(inst, routes)?;
    Ok(-routes
        .iter()
        .map(|r| route_length(inst, r))
        .fold(0.0, f64::max))
}
