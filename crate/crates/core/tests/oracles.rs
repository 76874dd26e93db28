use cogame::bench::{parse_tsplib, TsplibInstance};
use cogame::graph::{
    generate_euclidean, generate_random_graph, is_spanning_tree, EuclideanInstance, GraphKind,
    Metric, WeightedGraph,
};
use cogame::oracles::{brute_force_vrp, route_length, DisjointSet};
use proptest::prelude::*;

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

fn best_route(inst: &EuclideanInstance, cities: &[usize]) -> f64 {
    permutations(cities)
        .into_iter()
        .map(|p| {
            let route: Vec<usize> = std::iter::once(0)
                .chain(p)
                .chain(std::iter::once(0))
                .collect();
            route_length(inst, &route)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Every assignment of cities to two vehicles, every ordering of each route.
fn enumerate_two_vehicles(inst: &EuclideanInstance) -> f64 {
    let cities: Vec<usize> = (1..inst.len()).collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..1 << cities.len() {
        let (a, b): (Vec<usize>, Vec<usize>) =
            cities.iter().partition(|&&c| mask >> (c - 1) & 1 == 1);
        best = best.min(best_route(inst, &a).max(best_route(inst, &b)));
    }
    best
}

#[test]
fn vrp_matches_enumeration() {
    for seed in 0..10 {
        let inst = generate_euclidean(7, seed).unwrap();
        let got = brute_force_vrp(&inst, 2).unwrap();
        let want = enumerate_two_vehicles(&inst);
        assert!(
            (got.max_route_length - want).abs() < 1e-9,
            "seed {seed}: {} vs {want}",
            got.max_route_length
        );
        let longest = got
            .routes
            .iter()
            .map(|r| route_length(&inst, r))
            .fold(0.0, f64::max);
        assert!((longest - got.max_route_length).abs() < 1e-12);
    }
}

#[test]
fn one_vehicle_is_a_tour() {
    let inst = generate_euclidean(7, 99).unwrap();
    let got = brute_force_vrp(&inst, 1).unwrap();
    assert!((got.max_route_length - best_route(&inst, &(1..7).collect::<Vec<_>>())).abs() < 1e-9);
}

fn union_find_tree(g: &WeightedGraph, ids: &[usize]) -> bool {
    let n = g.node_count();
    if ids.len() + 1 != n {
        return false;
    }
    let mut ds = DisjointSet::new(n);
    ids.iter().all(|&id| {
        id < g.edge_count() && {
            let e = g.edge(id);
            ds.union(e.u, e.v)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spanning_tree_check_agrees_with_union_find(seed in any::<u64>(), n in 3usize..12, picks in prop::collection::vec(0usize..64, 0..14)) {
        let g = generate_random_graph(GraphKind::er(), n, seed).unwrap();
        let ids: Vec<usize> = picks.iter().map(|p| p % (g.edge_count() + 1)).collect();
        prop_assert_eq!(is_spanning_tree(&g, &ids), union_find_tree(&g, &ids));
    }

    #[test]
    fn tsplib_round_trip(coords in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..40)) {
        let inst = TsplibInstance::from_coords("prop", coords);
        let back = parse_tsplib(&inst.to_tsplib()).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_instance().metric, Metric::Rounded);
    }

    #[test]
    fn points_text_round_trip(n in 2usize..30, seed in any::<u64>()) {
        let inst = generate_euclidean(n, seed).unwrap();
        prop_assert_eq!(EuclideanInstance::from_text(&inst.to_text()).unwrap(), inst);
    }
}
