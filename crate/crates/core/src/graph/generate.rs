use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{is_connected, Edge, EuclideanInstance, Metric, WeightedGraph};
use crate::error::{Error, Result};
use crate::rng::{stream, Rng, Stream};

/// Connectivity rejection budget.
const MAX_ATTEMPTS: usize = 100;

/// Random graph family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphKind {
    /// Erdős–Rényi G(n, p).
    Er { p: f64 },
    /// Barabási–Albert preferential attachment, `m` edges per new node.
    Ba { m: usize },
    /// Stochastic block model with equal-size blocks.
    Sbm {
        blocks: usize,
        p_in: f64,
        p_out: f64,
    },
    /// Watts–Strogatz ring lattice of even degree `k`, rewiring probability `beta`.
    Ws { k: usize, beta: f64 },
    /// Random `d`-regular graph.
    Rr { d: usize },
}

impl GraphKind {
    pub fn er() -> Self {
        GraphKind::Er { p: 0.2 }
    }
    pub fn ba() -> Self {
        GraphKind::Ba { m: 2 }
    }
    pub fn sbm() -> Self {
        GraphKind::Sbm {
            blocks: 4,
            p_in: 0.5,
            p_out: 0.05,
        }
    }
    pub fn ws() -> Self {
        GraphKind::Ws { k: 4, beta: 0.1 }
    }
    pub fn rr() -> Self {
        GraphKind::Rr { d: 4 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::Er { .. } => "er",
            GraphKind::Ba { .. } => "ba",
            GraphKind::Sbm { .. } => "sbm",
            GraphKind::Ws { .. } => "ws",
            GraphKind::Rr { .. } => "rr",
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::param(format!(
                "graph needs at least 2 nodes, got {n}"
            )));
        }
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        match *self {
            GraphKind::Er { p } => prob("p", p),
            GraphKind::Ba { m } => {
                if m == 0 || m >= n {
                    return Err(Error::param(format!(
                        "BA needs 1 <= m < n, got m={m}, n={n}"
                    )));
                }
                Ok(())
            }
            GraphKind::Sbm {
                blocks,
                p_in,
                p_out,
            } => {
                if blocks == 0 || blocks > n {
                    return Err(Error::param(format!(
                        "SBM needs 1 <= blocks <= n, got {blocks}"
                    )));
                }
                prob("p_in", p_in)?;
                prob("p_out", p_out)
            }
            GraphKind::Ws { k, beta } => {
                if k == 0 || k % 2 == 1 || k >= n {
                    return Err(Error::param(format!(
                        "WS needs even 0 < k < n, got k={k}, n={n}"
                    )));
                }
                prob("beta", beta)
            }
            GraphKind::Rr { d } => {
                if d >= n || (n * d) % 2 == 1 {
                    return Err(Error::param(format!(
                        "RR needs d < n and n*d even, got d={d}, n={n}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn sample_topology(&self, n: usize, rng: &mut Rng) -> Option<BTreeSet<(usize, usize)>> {
        match *self {
            GraphKind::Er { p } => Some(erdos_renyi(n, p, rng)),
            GraphKind::Ba { m } => Some(barabasi_albert(n, m, rng)),
            GraphKind::Sbm {
                blocks,
                p_in,
                p_out,
            } => Some(block_model(n, blocks, p_in, p_out, rng)),
            GraphKind::Ws { k, beta } => Some(watts_strogatz(n, k, beta, rng)),
            GraphKind::Rr { d } => random_regular(n, d, rng),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphKind::Er { p } => write!(f, "er:p={p}"),
            GraphKind::Ba { m } => write!(f, "ba:m={m}"),
            GraphKind::Sbm {
                blocks,
                p_in,
                p_out,
            } => write!(f, "sbm:blocks={blocks},p_in={p_in},p_out={p_out}"),
            GraphKind::Ws { k, beta } => write!(f, "ws:k={k},beta={beta}"),
            GraphKind::Rr { d } => write!(f, "rr:d={d}"),
        }
    }
}

/// Parses `kind[:key=value,...]`, e.g. `rr:d=3` or `sbm:blocks=2`. Missing
/// keys take the family defaults.
impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kind = match name.trim().to_ascii_lowercase().as_str() {
            "er" => GraphKind::er(),
            "ba" => GraphKind::ba(),
            "sbm" => GraphKind::sbm(),
            "ws" => GraphKind::ws(),
            "rr" => GraphKind::rr(),
            other => return Err(Error::param(format!("unknown graph kind `{other}`"))),
        };
        for kv in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got `{kv}`")))?;
            let bad = || Error::param(format!("bad value for {key}: `{value}`"));
            let float = || value.parse::<f64>().map_err(|_| bad());
            let int = || value.parse::<usize>().map_err(|_| bad());
            match (&mut kind, key.trim()) {
                (GraphKind::Er { p }, "p") => *p = float()?,
                (GraphKind::Ba { m }, "m") => *m = int()?,
                (GraphKind::Sbm { blocks, .. }, "blocks") => *blocks = int()?,
                (GraphKind::Sbm { p_in, .. }, "p_in") => *p_in = float()?,
                (GraphKind::Sbm { p_out, .. }, "p_out") => *p_out = float()?,
                (GraphKind::Ws { k, .. }, "k") => *k = int()?,
                (GraphKind::Ws { beta, .. }, "beta") => *beta = float()?,
                (GraphKind::Rr { d }, "d") => *d = int()?,
                (_, key) => {
                    return Err(Error::param(format!(
                        "unknown parameter `{key}` for {name}"
                    )))
                }
            }
        }
        Ok(kind)
    }
}

impl TryFrom<String> for GraphKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GraphKind> for String {
    fn from(k: GraphKind) -> String {
        k.to_string()
    }
}

/// Samples a connected undirected graph with i.i.d. uniform(0, 1) weights.
///
/// Topology is rejection-sampled until connected (at most 100 attempts); the
/// weights come from a separate stream and are assigned in sorted edge order.
pub fn generate_random_graph(kind: GraphKind, n: usize, seed: u64) -> Result<WeightedGraph> {
    let pairs = connected_topology(kind, n, seed)?;
    let mut wrng = stream(seed, Stream::Weights);
    let edges = pairs
        .into_iter()
        .map(|(u, v)| Edge {
            u,
            v,
            w: wrng.gen::<f64>(),
        })
        .collect();
    WeightedGraph::new(n, edges, false)
}

/// Directed variant for shortest paths: each undirected edge of a connected
/// topology becomes two opposite arcs with independent uniform weights.
pub fn generate_random_digraph(kind: GraphKind, n: usize, seed: u64) -> Result<WeightedGraph> {
    let pairs = connected_topology(kind, n, seed)?;
    let mut wrng = stream(seed, Stream::Weights);
    let mut arcs = Vec::with_capacity(2 * pairs.len());
    for (u, v) in pairs {
        arcs.push(Edge {
            u,
            v,
            w: wrng.gen::<f64>(),
        });
        arcs.push(Edge {
            u: v,
            v: u,
            w: wrng.gen::<f64>(),
        });
    }
    WeightedGraph::new(n, arcs, true)
}

fn connected_topology(kind: GraphKind, n: usize, seed: u64) -> Result<BTreeSet<(usize, usize)>> {
    kind.validate(n)?;
    let mut trng = stream(seed, Stream::Topology);
    for _ in 0..MAX_ATTEMPTS {
        let Some(pairs) = kind.sample_topology(n, &mut trng) else {
            continue;
        };
        let edges: Vec<Edge> = pairs.iter().map(|&(u, v)| Edge { u, v, w: 0.0 }).collect();
        let probe = WeightedGraph::new(n, edges, false)?;
        if is_connected(&probe) {
            return Ok(pairs);
        }
    }
    Err(Error::param(format!(
        "{kind} with n={n} produced no connected graph in {MAX_ATTEMPTS} attempts"
    )))
}

/// `n` cities uniform in the unit square.
pub fn generate_euclidean(n: usize, seed: u64) -> Result<EuclideanInstance> {
    if n < 2 {
        return Err(Error::param(format!(
            "instance needs at least 2 cities, got {n}"
        )));
    }
    let mut rng = stream(seed, Stream::Coordinates);
    let coords = (0..n)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    Ok(EuclideanInstance::new(coords, Metric::Euclidean))
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn erdos_renyi(n: usize, p: f64, rng: &mut Rng) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.insert((u, v));
            }
        }
    }
    edges
}

fn block_model(
    n: usize,
    blocks: usize,
    p_in: f64,
    p_out: f64,
    rng: &mut Rng,
) -> BTreeSet<(usize, usize)> {
    let (base, extra) = (n / blocks, n % blocks);
    let mut block_of = Vec::with_capacity(n);
    for b in 0..blocks {
        let size = base + usize::from(b < extra);
        block_of.extend(std::iter::repeat(b).take(size));
    }
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block_of[u] == block_of[v] {
                p_in
            } else {
                p_out
            };
            if rng.gen::<f64>() < p {
                edges.insert((u, v));
            }
        }
    }
    edges
}

/// Starts from a star on `m + 1` nodes; each new node attaches to `m`
/// distinct targets drawn proportionally to degree.
fn barabasi_albert(n: usize, m: usize, rng: &mut Rng) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    let mut repeated = Vec::new();
    for leaf in 1..=m {
        edges.insert((0, leaf));
        repeated.push(0);
        repeated.push(leaf);
    }
    for source in (m + 1)..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(repeated[rng.gen_range(0..repeated.len())]);
        }
        for &t in &targets {
            edges.insert(ordered(source, t));
            repeated.push(t);
            repeated.push(source);
        }
    }
    edges
}

fn watts_strogatz(n: usize, k: usize, beta: f64, rng: &mut Rng) -> BTreeSet<(usize, usize)> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || rng.gen::<f64>() >= beta {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let mut edges = BTreeSet::new();
    for (u, nb) in adj.iter().enumerate() {
        for &v in nb {
            if u < v {
                edges.insert((u, v));
            }
        }
    }
    edges
}

/// Stub pairing with repair: unsuitable pairs are re-paired among themselves
/// while a legal pair still exists; otherwise the attempt is abandoned.
fn random_regular(n: usize, d: usize, rng: &mut Rng) -> Option<BTreeSet<(usize, usize)>> {
    if d == 0 {
        return Some(BTreeSet::new());
    }
    for _ in 0..MAX_ATTEMPTS {
        if let Some(edges) = try_regular(n, d, rng) {
            return Some(edges);
        }
    }
    None
}

fn try_regular(n: usize, d: usize, rng: &mut Rng) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (s1, s2) = ordered(pair[0], pair[1]);
            if s1 != s2 && !edges.contains(&(s1, s2)) {
                edges.insert((s1, s2));
            } else {
                *leftover.entry(s1).or_default() += 1;
                *leftover.entry(s2).or_default() += 1;
            }
        }
        let open: Vec<usize> = leftover.keys().copied().collect();
        let suitable = open.iter().enumerate().any(|(i, &a)| {
            open[i + 1..]
                .iter()
                .any(|&b| !edges.contains(&ordered(a, b)))
        });
        if !leftover.is_empty() && !suitable {
            return None;
        }
        stubs = leftover
            .iter()
            .flat_map(|(&v, &c)| std::iter::repeat(v).take(c))
            .collect();
    }
    Some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kinds_with_defaults_and_overrides() {
        assert_eq!("rr".parse::<GraphKind>().unwrap(), GraphKind::Rr { d: 4 });
        assert_eq!(
            "ws:k=6,beta=0".parse::<GraphKind>().unwrap(),
            GraphKind::Ws { k: 6, beta: 0.0 }
        );
        assert_eq!(
            "SBM:blocks=2".parse::<GraphKind>().unwrap(),
            GraphKind::Sbm {
                blocks: 2,
                p_in: 0.5,
                p_out: 0.05
            }
        );
        assert!("rr:p=0.1".parse::<GraphKind>().is_err());
        assert!("tree".parse::<GraphKind>().is_err());
        for k in [
            GraphKind::er(),
            GraphKind::ba(),
            GraphKind::sbm(),
            GraphKind::ws(),
            GraphKind::rr(),
        ] {
            assert_eq!(k.to_string().parse::<GraphKind>().unwrap(), k);
        }
    }

    #[test]
    fn random_regular_degrees() {
        let g = generate_random_graph(GraphKind::Rr { d: 4 }, 20, 7).unwrap();
        assert!((0..20).all(|v| g.degree(v) == 4));
        assert_eq!(g.edge_count(), 40);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(matches!(
            generate_random_graph(GraphKind::Rr { d: 3 }, 7, 1),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            generate_random_graph(GraphKind::er(), 1, 1),
            Err(Error::Parameter(_))
        ));
        assert!(generate_random_graph(GraphKind::Ws { k: 3, beta: 0.1 }, 10, 1).is_err());
        assert!(generate_random_graph(GraphKind::Ws { k: 4, beta: 1.5 }, 10, 1).is_err());
        assert!(generate_random_graph(GraphKind::Ba { m: 10 }, 10, 1).is_err());
        assert!(generate_euclidean(1, 0).is_err());
    }

    #[test]
    fn hopeless_connectivity_fails_with_parameter_error() {
        let err = generate_random_graph(GraphKind::Er { p: 0.0 }, 5, 1).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn watts_strogatz_without_rewiring_is_a_ring_lattice() {
        for seed in 0..5 {
            let g = generate_random_graph(GraphKind::Ws { k: 4, beta: 0.0 }, 50, seed).unwrap();
            for u in 0..50 {
                let mut nb: Vec<usize> = g.neighbors(u).iter().map(|&(v, _)| v).collect();
                nb.sort_unstable();
                let mut expect: Vec<usize> = [49, 48, 1, 2].iter().map(|o| (u + o) % 50).collect();
                expect.sort_unstable();
                assert_eq!(nb, expect);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [
            GraphKind::er(),
            GraphKind::ba(),
            GraphKind::sbm(),
            GraphKind::ws(),
            GraphKind::rr(),
        ] {
            let a = generate_random_graph(kind, 30, 11).unwrap();
            let b = generate_random_graph(kind, 30, 11).unwrap();
            assert_eq!(a.to_text(), b.to_text());
            assert!(is_connected(&a));
            let c = generate_random_graph(kind, 30, 12).unwrap();
            assert_ne!(a.to_text(), c.to_text());
        }
    }

    #[test]
    fn erdos_renyi_edge_count_is_binomial() {
        let (n, p) = (1000usize, 0.01);
        let pairs = (n * (n - 1) / 2) as f64;
        let (mean, sd) = (p * pairs, (pairs * p * (1.0 - p)).sqrt());
        for seed in 0..3 {
            let g = generate_random_graph(GraphKind::Er { p }, n, seed).unwrap();
            assert!(
                (g.edge_count() as f64 - mean).abs() < 4.0 * sd,
                "edges {}",
                g.edge_count()
            );
        }
    }

    #[test]
    fn digraph_has_two_independent_arcs_per_edge() {
        let g = generate_random_digraph(GraphKind::rr(), 10, 3).unwrap();
        assert!(g.is_directed());
        assert_eq!(g.edge_count(), 40);
        for pair in g.edges().chunks(2) {
            assert_eq!((pair[0].u, pair[0].v), (pair[1].v, pair[1].u));
            assert_ne!(pair[0].w, pair[1].w);
        }
    }

    #[test]
    fn euclidean_coordinates_in_unit_square_and_deterministic() {
        let inst = generate_euclidean(4, 9).unwrap();
        assert!(inst
            .coords
            .iter()
            .all(|&(x, y)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)));
        assert_eq!(
            generate_euclidean(100, 1).unwrap(),
            generate_euclidean(100, 1).unwrap()
        );
    }

    #[test]
    fn euclidean_mean_coordinate_is_centered() {
        let mean: f64 = (1..=1000u64)
            .map(|s| {
                let inst = generate_euclidean(100, s).unwrap();
                inst.coords.iter().map(|c| c.0).sum::<f64>() / 100.0
            })
            .sum::<f64>()
            / 1000.0;
        assert!((mean - 0.5).abs() < 0.01, "mean x {mean}");
    }
}
