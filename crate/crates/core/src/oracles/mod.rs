//! Exact and heuristic classical algorithms: baselines for benchmarking and
//! ground truth for optimality gaps.
//!
//! Greedy choices break ties by the lowest node or edge id, and all lengths
//! are `f64`.

mod mst;
mod paths;
mod tsp;
mod vrp;

pub use mst::{kruskal_mst, prim_mst, DisjointSet, TreeSolution};
pub use paths::{bellman_ford, dijkstra, PathTree};
pub use tsp::{
    brute_force_tsp, check_permutation, farthest_insertion_tour, held_karp, nearest_neighbor_tour,
    tour_length, two_opt, Tour, BRUTE_FORCE_TSP_MAX, HELD_KARP_MAX,
};
pub use vrp::{
    brute_force_vrp, route_length, validate_routes, RouteSet, BRUTE_FORCE_MAX_NODES,
    BRUTE_FORCE_MAX_VEHICLES,
};
