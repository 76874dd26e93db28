use rayon::prelude::*;

use crate::error::Result;
use crate::graph::{generate_euclidean, generate_random_digraph, generate_random_graph, GraphKind};
use crate::oracles::{bellman_ford, brute_force_tsp, dijkstra, held_karp, kruskal_mst, prim_mst};
use crate::rng::derive_seed;

/// Outcome of one cross-oracle comparison suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub mismatches: usize,
    pub max_abs_diff: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// How many random cases each suite draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSizes {
    /// Undirected graphs per generator family, `n` in 20..=50.
    pub graphs_per_kind: usize,
    pub digraphs: usize,
    /// Held-Karp versus enumeration on 8 cities.
    pub tours: usize,
}

impl Default for CheckSizes {
    fn default() -> Self {
        CheckSizes {
            graphs_per_kind: 1000,
            digraphs: 500,
            tours: 50,
        }
    }
}

fn compare(name: String, pairs: Vec<(f64, f64)>, tol: f64) -> CheckResult {
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| (a - b).abs()).collect();
    CheckResult {
        name,
        cases: pairs.len(),
        mismatches: diffs.iter().filter(|&&d| !(d <= tol)).count(),
        max_abs_diff: diffs.iter().copied().fold(0.0, f64::max),
    }
}

/// Prim against Kruskal on every graph family, Dijkstra against
/// Bellman-Ford on directed graphs, and Held-Karp against enumeration.
pub fn oracle_check(seed: u64, sizes: CheckSizes) -> Result<Vec<CheckResult>> {
    let kinds = [
        GraphKind::er(),
        GraphKind::ba(),
        GraphKind::sbm(),
        GraphKind::ws(),
        GraphKind::rr(),
    ];
    let mut out = Vec::new();
    for (k, kind) in kinds.into_iter().enumerate() {
        let pairs = (0..sizes.graphs_per_kind)
            .into_par_iter()
            .map(|i| {
                let s = derive_seed(seed, &[6, k as u64, i as u64]);
                let g = generate_random_graph(kind, 20 + (s % 31) as usize, s)?;
                Ok((prim_mst(&g)?.total_weight, kruskal_mst(&g)?.total_weight))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(compare(
            format!("prim=kruskal ({})", kind.name()),
            pairs,
            1e-12,
        ));
    }
    let pairs = (0..sizes.digraphs)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, &[7, i as u64]);
            let g = generate_random_digraph(kinds[i % kinds.len()], 20 + (s % 31) as usize, s)?;
            let (d, b) = (dijkstra(&g, 0)?, bellman_ford(&g, 0)?);
            let worst = d
                .dist
                .iter()
                .zip(&b.dist)
                .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
                .fold(0.0, f64::max);
            Ok((worst, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    out.push(compare("dijkstra=bellman_ford".into(), pairs, 1e-12));
    let pairs = (0..sizes.tours)
        .into_par_iter()
        .map(|i| {
            let inst = generate_euclidean(8, derive_seed(seed, &[8, i as u64]))?;
            Ok((held_karp(&inst)?.length, brute_force_tsp(&inst)?.length))
        })
        .collect::<Result<Vec<_>>>()?;
    out.push(compare("held_karp=enumeration (n=8)".into(), pairs, 1e-9));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_check_passes() {
        let res = oracle_check(
            3,
            CheckSizes {
                graphs_per_kind: 10,
                digraphs: 10,
                tours: 3,
            },
        )
        .unwrap();
        assert_eq!(res.len(), 7);
        assert!(res.iter().all(CheckResult::passed), "{res:?}");
    }
}
