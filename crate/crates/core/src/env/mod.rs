//! The single-player games: per-problem state, candidate actions,
//! transitions and terminal rewards, plus policy rollouts.
//!
//! Edge-selecting problems (MST, SSP) act on the line graph, so an action is
//! a primal edge id. Node-selecting problems (TSP, VRP) act on cities.
//!
//! | problem | action | candidates | episode ends after |
//! |---------|--------|------------|--------------------|
//! | MST | edge | any edge first, then unselected edges touching the covered nodes | `n - 1` edges |
//! | SSP | arc | unselected arcs leaving the reached nodes | `n - 1` arcs |
//! | TSP | city | city 0 first, then the `k` nearest unvisited cities | all `n` cities |
//! | VRP | city or depot | `k` nearest unvisited cities, plus the depot when a route is open and a spare vehicle remains | all cities routed |
//!
//! Under [`EdgeMasking::Penalty`] MST and SSP candidates may close cycles or
//! re-enter reached nodes; such episodes end in an invalid solution and earn
//! the penalty. [`EdgeMasking::Cut`] removes those candidates.

mod grid;
mod reward;
mod rollout;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{line_graph, EdgeId, EuclideanInstance, NodeId, WeightedGraph};
use crate::nn::{attention_graph, Context, Csr, Mat};
use grid::Grid;

pub use reward::{mst_reward, penalty, selected_path, ssp_reward, tsp_reward, vrp_reward};
pub use rollout::{
    replay_on_tape, rollout, rollout_on_tape, rollout_timed, rollout_with_rng, Mode, RolloutTiming,
    Step, Trajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Mst,
    Ssp,
    Tsp,
    Vrp,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Mst => "mst",
            Problem::Ssp => "ssp",
            Problem::Tsp => "tsp",
            Problem::Vrp => "vrp",
        }
    }

    /// Per-node input features of the encoder.
    pub fn input_dim(self) -> usize {
        match self {
            Problem::Mst | Problem::Ssp => 1,
            Problem::Tsp | Problem::Vrp => 2,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mst" => Ok(Problem::Mst),
            "ssp" => Ok(Problem::Ssp),
            "tsp" => Ok(Problem::Tsp),
            "vrp" => Ok(Problem::Vrp),
            _ => Err(Error::param(format!(
                "unknown problem '{s}' (expected mst, ssp, tsp or vrp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMasking {
    /// Only selected edges are masked; invalid structures are penalized.
    Penalty,
    /// Also mask edges that would close a cycle (MST) or enter a reached
    /// node (SSP).
    Cut,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvOptions {
    /// Nearest-neighbor count for TSP/VRP candidates and encoder
    /// neighborhoods; 0 means all cities.
    pub knn: usize,
    pub edge_masking: EdgeMasking,
}

impl Default for EnvOptions {
    fn default() -> Self {
        EnvOptions {
            knn: 10,
            edge_masking: EdgeMasking::Penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Mst(WeightedGraph),
    Ssp {
        graph: WeightedGraph,
        source: NodeId,
    },
    Tsp(EuclideanInstance),
    Vrp {
        cities: EuclideanInstance,
        vehicles: usize,
    },
}

impl Instance {
    pub fn problem(&self) -> Problem {
        match self {
            Instance::Mst(_) => Problem::Mst,
            Instance::Ssp { .. } => Problem::Ssp,
            Instance::Tsp(_) => Problem::Tsp,
            Instance::Vrp { .. } => Problem::Vrp,
        }
    }

    /// Primal node (or city) count.
    pub fn node_count(&self) -> usize {
        match self {
            Instance::Mst(g) | Instance::Ssp { graph: g, .. } => g.node_count(),
            Instance::Tsp(c) | Instance::Vrp { cities: c, .. } => c.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Edges(Vec<EdgeId>),
    Tour(Vec<NodeId>),
    Routes(Vec<Vec<NodeId>>),
}

/// A prepared instance: encoder features, attention neighborhoods and the
/// static indices the transition rules need.
#[derive(Debug, Clone)]
pub struct Environment {
    instance: Instance,
    options: EnvOptions,
    features: Mat,
    graph: Arc<Csr>,
    /// MST: incident edges per node. SSP: out-arcs per node.
    incident: Vec<Vec<EdgeId>>,
    grid: Option<Grid>,
}

/// Mutable state of one episode.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    pub problem: Problem,
    /// Actions taken so far (edge ids or node ids; VRP includes depot returns).
    pub selected: Vec<usize>,
    /// Current vehicle (VRP).
    pub vehicle: usize,
    /// Routes so far (VRP); the open route has no closing depot yet.
    pub routes: Vec<Vec<NodeId>>,
    pub done: bool,
    taken: Vec<bool>,
    /// Covered primal nodes (MST), reached nodes (SSP) or visited cities.
    covered: Vec<bool>,
    covered_count: usize,
    frontier: BTreeSet<usize>,
    grid: Option<Grid>,
    current: Option<usize>,
    digest: u64,
}

impl EpisodeState {
    /// Running hash of the action sequence.
    pub fn digest(&self) -> u64 {
        self.digest
    }
}

impl Environment {
    pub fn new(instance: Instance, options: EnvOptions) -> Result<Self> {
        let (features, graph, incident, grid) = match &instance {
            Instance::Mst(g) => {
                if g.is_directed() {
                    return Err(Error::structure("MST needs an undirected graph"));
                }
                if g.node_count() < 2 {
                    return Err(Error::param("MST needs at least 2 nodes"));
                }
                let lg = line_graph(g)?;
                let features =
                    Mat::from_shape_vec((g.edge_count(), 1), lg.node_weights).expect("weights");
                let mut incident = vec![Vec::new(); g.node_count()];
                for (id, e) in g.edges().iter().enumerate() {
                    incident[e.u].push(id);
                    incident[e.v].push(id);
                }
                (features, attention_graph(&lg.dual), incident, None)
            }
            Instance::Ssp { graph: g, source } => {
                if !g.is_directed() {
                    return Err(Error::structure("SSP needs a directed graph"));
                }
                if *source >= g.node_count() || g.node_count() < 2 {
                    return Err(Error::param(format!(
                        "invalid source {source} for {} nodes",
                        g.node_count()
                    )));
                }
                let lg = line_graph(g)?;
                let features =
                    Mat::from_shape_vec((g.edge_count(), 1), lg.node_weights).expect("weights");
                let incident = (0..g.node_count())
                    .map(|v| g.neighbors(v).iter().map(|&(_, id)| id).collect())
                    .collect();
                (features, attention_graph(&lg.dual), incident, None)
            }
            Instance::Tsp(c) | Instance::Vrp { cities: c, .. } => {
                if c.len() < 2 {
                    return Err(Error::param(format!(
                        "need at least 2 cities, got {}",
                        c.len()
                    )));
                }
                if let Instance::Vrp { vehicles, .. } = &instance {
                    if *vehicles == 0 || c.depot >= c.len() {
                        return Err(Error::param(format!(
                            "invalid vehicle count {vehicles} or depot {}",
                            c.depot
                        )));
                    }
                }
                let norm = c.normalized_coords();
                let features =
                    Mat::from_shape_fn(
                        (c.len(), 2),
                        |(i, j)| if j == 0 { norm[i].0 } else { norm[i].1 },
                    );
                let grid = Grid::new(&c.coords);
                let n = c.len();
                let rows: Vec<Vec<usize>> = if options.knn == 0 || options.knn >= n - 1 {
                    (0..n)
                        .map(|i| (0..n).filter(|&j| j != i).collect())
                        .collect()
                } else {
                    let mut rows: Vec<Vec<usize>> =
                        (0..n).map(|i| grid.nearest(i, options.knn)).collect();
                    for i in 0..n {
                        for j in rows[i].clone() {
                            rows[j].push(i);
                        }
                    }
                    for r in &mut rows {
                        r.sort_unstable();
                        r.dedup();
                    }
                    rows
                };
                (
                    features,
                    Csr::with_self_loops(&rows),
                    Vec::new(),
                    Some(grid),
                )
            }
        };
        Ok(Environment {
            instance,
            options,
            features,
            graph: Arc::new(graph),
            incident,
            grid,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn problem(&self) -> Problem {
        self.instance.problem()
    }

    pub fn options(&self) -> &EnvOptions {
        &self.options
    }

    pub fn features(&self) -> &Mat {
        &self.features
    }

    pub fn attention(&self) -> &Arc<Csr> {
        &self.graph
    }

    /// Size of the action space.
    pub fn action_count(&self) -> usize {
        self.features.nrows()
    }

    fn primal(&self) -> &WeightedGraph {
        match &self.instance {
            Instance::Mst(g) | Instance::Ssp { graph: g, .. } => g,
            _ => unreachable!("edge problem"),
        }
    }

    pub fn reset(&self) -> EpisodeState {
        let n = self.instance.node_count();
        let mut st = EpisodeState {
            problem: self.problem(),
            selected: Vec::new(),
            vehicle: 0,
            routes: Vec::new(),
            done: false,
            taken: vec![false; self.action_count()],
            covered: vec![false; n],
            covered_count: 0,
            frontier: BTreeSet::new(),
            grid: self.grid.clone(),
            current: None,
            digest: 0xcbf2_9ce4_8422_2325,
        };
        match &self.instance {
            Instance::Ssp { source, .. } => self.cover(&mut st, *source),
            Instance::Vrp { cities, .. } => {
                let d = cities.depot;
                st.routes.push(vec![d]);
                st.current = Some(d);
                st.covered[d] = true;
                st.covered_count = 1;
                if let Some(g) = &mut st.grid {
                    g.remove(d);
                }
            }
            _ => {}
        }
        st
    }

    /// Marks a primal node covered and updates the edge frontier.
    fn cover(&self, st: &mut EpisodeState, v: NodeId) {
        st.covered[v] = true;
        st.covered_count += 1;
        let cut = self.options.edge_masking == EdgeMasking::Cut;
        let g = self.primal();
        match self.problem() {
            Problem::Mst => {
                for &id in &self.incident[v] {
                    if st.taken[id] {
                        continue;
                    }
                    let e = g.edge(id);
                    let other = if e.u == v { e.v } else { e.u };
                    if cut && st.covered[other] {
                        st.frontier.remove(&id);
                    } else {
                        st.frontier.insert(id);
                    }
                }
            }
            Problem::Ssp => {
                if cut {
                    for &(_, id) in g.in_neighbors(v) {
                        st.frontier.remove(&id);
                    }
                }
                for &id in &self.incident[v] {
                    if !st.taken[id] && !(cut && st.covered[g.edge(id).v]) {
                        st.frontier.insert(id);
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Allowed next actions in ascending id order; empty once done.
    pub fn candidates(&self, st: &EpisodeState) -> Vec<usize> {
        if st.done {
            return Vec::new();
        }
        match &self.instance {
            Instance::Mst(_) if st.covered_count == 0 => (0..self.action_count()).collect(),
            Instance::Mst(_) | Instance::Ssp { .. } => st.frontier.iter().copied().collect(),
            Instance::Tsp(_) => match st.current {
                None => vec![0],
                Some(cur) => self.nearest_unvisited(st, cur),
            },
            Instance::Vrp { cities, vehicles } => {
                let cur = st.current.expect("vrp position");
                let mut c = self.nearest_unvisited(st, cur);
                if cur != cities.depot && st.vehicle + 1 < *vehicles {
                    c.push(cities.depot);
                }
                c.sort_unstable();
                c
            }
        }
    }

    fn nearest_unvisited(&self, st: &EpisodeState, cur: NodeId) -> Vec<usize> {
        let grid = st.grid.as_ref().expect("city grid");
        let k = if self.options.knn == 0 {
            grid.alive()
        } else {
            self.options.knn
        };
        let mut c = grid.nearest(cur, k);
        c.sort_unstable();
        c
    }

    /// Dense mask over the action space, `true` = forbidden.
    pub fn mask(&self, st: &EpisodeState) -> Vec<bool> {
        let mut mask = vec![true; self.action_count()];
        for a in self.candidates(st) {
            mask[a] = false;
        }
        mask
    }

    /// Decoder context: the last action, or the mean embedding before any.
    pub fn context(&self, st: &EpisodeState) -> Context {
        match self.problem() {
            Problem::Mst | Problem::Ssp => st
                .selected
                .last()
                .map_or(Context::Mean, |&a| Context::Node(a)),
            Problem::Tsp | Problem::Vrp => st.current.map_or(Context::Mean, Context::Node),
        }
    }

    pub fn step(&self, st: &mut EpisodeState, action: usize) -> Result<()> {
        if st.done {
            return Err(Error::Contract("episode already finished".into()));
        }
        if self.candidates(st).binary_search(&action).is_err() {
            return Err(Error::Contract(format!("action {action} is masked")));
        }
        self.apply(st, action);
        Ok(())
    }

    /// Transition for an action known to be a candidate.
    pub(crate) fn apply(&self, st: &mut EpisodeState, a: usize) {
        st.selected.push(a);
        st.digest = (st.digest ^ a as u64).wrapping_mul(0x0100_0000_01b3);
        let n = self.instance.node_count();
        match &self.instance {
            Instance::Mst(g) => {
                st.taken[a] = true;
                st.frontier.remove(&a);
                let e = g.edge(a);
                for v in [e.u, e.v] {
                    if !st.covered[v] {
                        self.cover(st, v);
                    }
                }
                st.done = st.selected.len() == n - 1;
            }
            Instance::Ssp { graph, .. } => {
                st.taken[a] = true;
                st.frontier.remove(&a);
                let head = graph.edge(a).v;
                if !st.covered[head] {
                    self.cover(st, head);
                }
                st.done = st.selected.len() == n - 1;
            }
            Instance::Tsp(_) => {
                st.taken[a] = true;
                st.covered[a] = true;
                st.covered_count += 1;
                st.current = Some(a);
                st.grid.as_mut().expect("grid").remove(a);
                st.done = st.covered_count == n;
            }
            Instance::Vrp { cities, vehicles } => {
                let depot = cities.depot;
                st.current = Some(a);
                if a == depot {
                    st.routes[st.vehicle].push(depot);
                    st.vehicle += 1;
                    st.routes.push(vec![depot]);
                    return;
                }
                st.taken[a] = true;
                st.covered[a] = true;
                st.covered_count += 1;
                st.routes[st.vehicle].push(a);
                st.grid.as_mut().expect("grid").remove(a);
                if st.covered_count == n {
                    st.done = true;
                    st.routes[st.vehicle].push(depot);
                    while st.routes.len() < *vehicles {
                        st.routes.push(vec![depot, depot]);
                    }
                }
            }
        }
    }

    pub fn solution(&self, st: &EpisodeState) -> Solution {
        match self.problem() {
            Problem::Mst | Problem::Ssp => {
                let mut ids = st.selected.clone();
                ids.sort_unstable();
                Solution::Edges(ids)
            }
            Problem::Tsp => Solution::Tour(st.selected.clone()),
            Problem::Vrp => Solution::Routes(st.routes.clone()),
        }
    }

    /// Reward of a finished solution.
    pub fn reward(&self, sol: &Solution) -> Result<f64> {
        match (&self.instance, sol) {
            (Instance::Mst(g), Solution::Edges(ids)) => Ok(mst_reward(g, ids)),
            (Instance::Ssp { graph, source }, Solution::Edges(ids)) => {
                Ok(ssp_reward(graph, *source, ids))
            }
            (Instance::Tsp(c), Solution::Tour(perm)) => tsp_reward(c, perm),
            (Instance::Vrp { cities, .. }, Solution::Routes(routes)) => vrp_reward(cities, routes),
            _ => Err(Error::param("solution kind does not match the problem")),
        }
    }

    /// Whether the solution is structurally valid (no penalty applies).
    pub fn is_valid(&self, sol: &Solution) -> bool {
        match (&self.instance, sol) {
            (Instance::Mst(g), Solution::Edges(ids)) => crate::graph::is_spanning_tree(g, ids),
            (Instance::Ssp { graph, source }, Solution::Edges(ids)) => {
                let mut in_arcs = vec![Vec::new(); graph.node_count()];
                for &id in ids {
                    in_arcs[graph.edge(id).v].push(id);
                }
                (0..graph.node_count())
                    .all(|v| selected_path(graph, *source, &in_arcs, v).is_some())
            }
            (Instance::Tsp(c), Solution::Tour(perm)) => {
                crate::oracles::check_permutation(perm, c.len()).is_ok()
            }
            (Instance::Vrp { cities, vehicles }, Solution::Routes(r)) => {
                r.len() == *vehicles && validate_routes_ok(cities, r)
            }
            _ => false,
        }
    }
}

fn validate_routes_ok(c: &EuclideanInstance, routes: &[Vec<NodeId>]) -> bool {
    crate::oracles::validate_routes(c, routes).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        generate_euclidean, generate_random_digraph, generate_random_graph, GraphKind, Metric,
    };
    use crate::oracles::{brute_force_vrp, dijkstra, held_karp, prim_mst};

    fn run_lowest(env: &Environment) -> EpisodeState {
        let mut st = env.reset();
        while !st.done {
            let a = env.candidates(&st)[0];
            env.step(&mut st, a).unwrap();
        }
        st
    }

    #[test]
    fn tsp_masking_progression() {
        let env = Environment::new(
            Instance::Tsp(generate_euclidean(4, 0).unwrap()),
            EnvOptions::default(),
        )
        .unwrap();
        let mut st = env.reset();
        assert_eq!(env.candidates(&st), vec![0]);
        assert!(matches!(env.step(&mut st, 2), Err(Error::Contract(_))));
        for _ in 0..3 {
            let a = *env.candidates(&st).last().unwrap();
            env.step(&mut st, a).unwrap();
        }
        assert_eq!(env.mask(&st).iter().filter(|&&m| !m).count(), 1);
        let a = env.candidates(&st)[0];
        env.step(&mut st, a).unwrap();
        assert!(st.done);
        assert!(env.step(&mut st, 0).is_err());
        let sol = env.solution(&st);
        assert!(env.is_valid(&sol));
    }

    #[test]
    fn mst_edges_cannot_repeat() {
        let g = generate_random_graph(GraphKind::Rr { d: 4 }, 10, 1).unwrap();
        let env = Environment::new(Instance::Mst(g), EnvOptions::default()).unwrap();
        let mut st = env.reset();
        env.step(&mut st, 3).unwrap();
        assert!(matches!(env.step(&mut st, 3), Err(Error::Contract(_))));
        assert!(env.mask(&st)[3]);
        let st = run_lowest(&env);
        assert_eq!(st.selected.len(), 9);
    }

    #[test]
    fn cut_masking_always_yields_trees() {
        for seed in 0..30 {
            let g = generate_random_graph(GraphKind::Er { p: 0.3 }, 12, seed).unwrap();
            let opts = EnvOptions {
                edge_masking: EdgeMasking::Cut,
                ..Default::default()
            };
            let env = Environment::new(Instance::Mst(g.clone()), opts).unwrap();
            let sol = env.solution(&run_lowest(&env));
            assert!(env.is_valid(&sol));
            let d = generate_random_digraph(GraphKind::Er { p: 0.3 }, 12, seed).unwrap();
            let env = Environment::new(
                Instance::Ssp {
                    graph: d,
                    source: 0,
                },
                opts,
            )
            .unwrap();
            let sol = env.solution(&run_lowest(&env));
            assert!(env.is_valid(&sol));
        }
    }

    #[test]
    fn penalty_mode_allows_cycles() {
        let g = WeightedGraph::undirected(4, &[(0, 1, 0.1), (1, 2, 0.1), (0, 2, 0.1), (2, 3, 0.1)])
            .unwrap();
        let env = Environment::new(Instance::Mst(g), EnvOptions::default()).unwrap();
        let mut st = env.reset();
        for a in [0, 1, 2] {
            env.step(&mut st, a).unwrap();
        }
        assert!(st.done);
        let sol = env.solution(&st);
        assert!(!env.is_valid(&sol));
        assert!((env.reward(&sol).unwrap() + 4.3).abs() < 1e-12);
    }

    #[test]
    fn vrp_depot_rules() {
        let inst = generate_euclidean(7, 3).unwrap();
        let env = Environment::new(
            Instance::Vrp {
                cities: inst.clone(),
                vehicles: 3,
            },
            EnvOptions::default(),
        )
        .unwrap();
        let mut st = env.reset();
        assert!(!env.candidates(&st).contains(&0));
        env.step(&mut st, 4).unwrap();
        assert!(env.candidates(&st).contains(&0));
        env.step(&mut st, 0).unwrap();
        assert_eq!(st.vehicle, 1);
        assert!(!env.candidates(&st).contains(&0));
        env.step(&mut st, 2).unwrap();
        env.step(&mut st, 0).unwrap();
        assert_eq!(st.vehicle, 2);
        env.step(&mut st, 1).unwrap();
        assert!(
            !env.candidates(&st).contains(&0),
            "last vehicle cannot return early"
        );
        while !st.done {
            let a = env.candidates(&st)[0];
            env.step(&mut st, a).unwrap();
        }
        let sol = env.solution(&st);
        assert!(env.is_valid(&sol));
        assert!(st.selected.len() <= 7 + 3);
        let best = brute_force_vrp(&inst, 3).unwrap().max_route_length;
        assert!(-env.reward(&sol).unwrap() >= best - 1e-12);
    }

    #[test]
    fn unused_vehicles_get_empty_routes() {
        let inst = generate_euclidean(4, 0).unwrap();
        let env = Environment::new(
            Instance::Vrp {
                cities: inst,
                vehicles: 2,
            },
            EnvOptions::default(),
        )
        .unwrap();
        let mut st = env.reset();
        for a in [1, 2, 3] {
            env.step(&mut st, a).unwrap();
        }
        assert!(st.done);
        assert_eq!(st.routes[1], vec![0, 0]);
        assert!(env.is_valid(&env.solution(&st)));
    }

    #[test]
    fn knn_candidates_and_encoder_graph() {
        let inst = generate_euclidean(40, 2).unwrap();
        let env = Environment::new(
            Instance::Tsp(inst.clone()),
            EnvOptions {
                knn: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let knn = inst.nearest_neighbors(5);
        for i in 0..40 {
            for &j in &knn[i] {
                assert!(env.attention().row(i).contains(&j));
                assert!(env.attention().row(j).contains(&i));
            }
        }
        let mut st = env.reset();
        env.step(&mut st, 0).unwrap();
        let mut expect = knn[0].clone();
        expect.sort_unstable();
        assert_eq!(env.candidates(&st), expect);
        let all = Environment::new(
            Instance::Tsp(inst),
            EnvOptions {
                knn: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let mut st = all.reset();
        all.step(&mut st, 0).unwrap();
        assert_eq!(all.candidates(&st).len(), 39);
    }

    /// Every subset of at most 6 edges, scored by the reward.
    fn best_subset(m: usize, score: impl Fn(&[usize]) -> f64) -> f64 {
        (0u32..1 << m)
            .map(|mask| score(&(0..m).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>()))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn reward_argmax_is_the_optimum() {
        let mut checked = 0;
        for seed in 0..200u64 {
            let Ok(g) = generate_random_graph(GraphKind::Er { p: 0.6 }, 5, seed) else {
                continue;
            };
            if g.edge_count() > 6 {
                continue;
            }
            let best = best_subset(g.edge_count(), |ids| mst_reward(&g, ids));
            assert!((best + prim_mst(&g).unwrap().total_weight).abs() < 1e-12);
            checked += 1;
        }
        assert!(checked >= 20);
        let mut checked = 0;
        for seed in 0..200u64 {
            let Ok(g) = generate_random_graph(GraphKind::Er { p: 0.5 }, 4, seed) else {
                continue;
            };
            let d = g.to_bidirected(|_, e| (e.w, e.w * 0.5 + 0.1)).unwrap();
            if d.edge_count() > 6 {
                continue;
            }
            let best = best_subset(d.edge_count(), |ids| ssp_reward(&d, 0, ids));
            assert!((best + dijkstra(&d, 0).unwrap().total_distance()).abs() < 1e-12);
            checked += 1;
        }
        assert!(checked >= 5);
    }

    #[test]
    fn tsp_best_reward_is_held_karp() {
        let inst = generate_euclidean(8, 4).unwrap();
        let env = Environment::new(Instance::Tsp(inst.clone()), EnvOptions::default()).unwrap();
        let hk = held_karp(&inst).unwrap();
        assert!((env.reward(&Solution::Tour(hk.perm)).unwrap() + hk.length).abs() < 1e-12);
        let rounded = EuclideanInstance::new(inst.coords.clone(), Metric::Rounded);
        assert!(Environment::new(Instance::Tsp(rounded), EnvOptions::default()).is_ok());
    }
}
