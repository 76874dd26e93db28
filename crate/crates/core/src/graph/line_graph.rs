use std::collections::BTreeSet;

use super::{Edge, EdgeId, NodeId, WeightedGraph};
use crate::error::{Error, Result};

/// Edge-to-vertex dual of a graph.
///
/// Dual node `a` stands for primal edge `to_primal[a]`; two dual nodes are
/// adjacent when their primal edges share an endpoint. The primal edge
/// weights become dual node weights. Dual edges carry weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGraphMapping {
    pub dual: WeightedGraph,
    pub node_weights: Vec<f64>,
    pub to_primal: Vec<EdgeId>,
    pub to_dual: Vec<NodeId>,
}

/// Builds the line graph in `O(sum of deg^2)`.
///
/// Arcs of a directed graph are treated as undirected edges for adjacency,
/// so `u -> v` and `v -> u` are adjacent dual nodes.
pub fn line_graph(g: &WeightedGraph) -> Result<LineGraphMapping> {
    if g.edge_count() == 0 {
        return Err(Error::structure("line graph of a graph without edges"));
    }
    let m = g.edge_count();
    let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); g.node_count()];
    for (id, e) in g.edges().iter().enumerate() {
        incident[e.u].push(id);
        incident[e.v].push(id);
    }
    let mut pairs = BTreeSet::new();
    for around in &incident {
        for (i, &a) in around.iter().enumerate() {
            for &b in &around[i + 1..] {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }
    let dual_edges = pairs
        .into_iter()
        .map(|(a, b)| Edge { u: a, v: b, w: 1.0 })
        .collect();
    let dual = WeightedGraph::new(m, dual_edges, false)?;
    Ok(LineGraphMapping {
        dual,
        node_weights: g.edges().iter().map(|e| e.w).collect(),
        to_primal: (0..m).collect(),
        to_dual: (0..m).collect(),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph::{generate_random_graph, GraphKind};

    /// Six nodes, seven edges: two triangles joined by a bridge.
    fn figure_graph() -> WeightedGraph {
        WeightedGraph::undirected(
            6,
            &[
                (0, 1, 0.1),
                (1, 2, 0.2),
                (0, 2, 0.3),
                (2, 3, 0.4),
                (3, 4, 0.5),
                (4, 5, 0.6),
                (3, 5, 0.7),
            ],
        )
        .unwrap()
    }

    #[test]
    fn six_node_seven_edge_example_has_ten_dual_edges() {
        let lg = line_graph(&figure_graph()).unwrap();
        assert_eq!(lg.dual.node_count(), 7);
        assert_eq!(lg.dual.edge_count(), 10);
        assert_eq!(lg.node_weights[3], 0.4);
    }

    #[test]
    fn triangle_is_self_dual() {
        let k3 = WeightedGraph::undirected(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let lg = line_graph(&k3).unwrap();
        assert_eq!((lg.dual.node_count(), lg.dual.edge_count()), (3, 3));
    }

    #[test]
    fn star_becomes_complete_graph() {
        let k = 6;
        let edges: Vec<_> = (1..=k).map(|i| (0, i, i as f64)).collect();
        let lg = line_graph(&WeightedGraph::undirected(k + 1, &edges).unwrap()).unwrap();
        assert_eq!(lg.dual.node_count(), k);
        assert_eq!(lg.dual.edge_count(), k * (k - 1) / 2);
    }

    #[test]
    fn empty_graph_is_a_structure_error() {
        let g = WeightedGraph::undirected(3, &[]).unwrap();
        assert!(matches!(line_graph(&g), Err(Error::Structure(_))));
    }

    #[test]
    fn opposite_arcs_are_adjacent_once() {
        let g = WeightedGraph::directed(3, &[(0, 1, 0.5), (1, 0, 0.25), (1, 2, 0.1)]).unwrap();
        let lg = line_graph(&g).unwrap();
        assert_eq!(lg.dual.edge_count(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]
        #[test]
        fn line_graph_invariants_on_random_graphs(seed in any::<u64>(), n in 6usize..40, kind in 0usize..5) {
            let kind = [GraphKind::er(), GraphKind::ba(), GraphKind::sbm(), GraphKind::ws(), GraphKind::rr()][kind];
            let Ok(g) = generate_random_graph(kind, n, seed) else { return Ok(()) };
            let lg = line_graph(&g).unwrap();
            prop_assert_eq!(lg.dual.node_count(), g.edge_count());
            let handshake: usize = (0..n).map(|v| g.degree(v) * g.degree(v).saturating_sub(1) / 2).sum();
            prop_assert_eq!(lg.dual.edge_count(), handshake);
            for a in 0..lg.dual.node_count() {
                prop_assert_eq!(lg.to_dual[lg.to_primal[a]], a);
            }
            // adjacency iff shared endpoint, checked on all dual pairs
            for a in 0..g.edge_count() {
                for b in (a + 1)..g.edge_count() {
                    let (ea, eb) = (g.edge(a), g.edge(b));
                    let share = ea.u == eb.u || ea.u == eb.v || ea.v == eb.u || ea.v == eb.v;
                    prop_assert_eq!(lg.dual.weight(a, b).is_some(), share);
                }
            }
        }
    }
}
