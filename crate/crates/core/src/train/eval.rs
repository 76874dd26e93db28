use rayon::prelude::*;

use crate::env::{rollout, EnvOptions, Environment, Instance, Mode};
use crate::error::{Error, Result};
use crate::nn::PolicyParameters;
use crate::oracles::{
    brute_force_vrp, dijkstra, farthest_insertion_tour, held_karp, prim_mst, two_opt,
    BRUTE_FORCE_MAX_NODES, BRUTE_FORCE_MAX_VEHICLES, HELD_KARP_MAX,
};

/// Summary of per-instance gaps (method cost / optimal cost).
#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub gaps: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// NaN gaps (no reference) are ignored.
pub fn gap_stats(gaps: &[f64]) -> GapStats {
    let mut sorted: Vec<f64> = gaps.iter().copied().filter(|g| !g.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let mean = if sorted.is_empty() {
        f64::NAN
    } else {
        sorted.iter().sum::<f64>() / sorted.len() as f64
    };
    GapStats {
        gaps: gaps.to_vec(),
        mean,
        median: quantile(&sorted, 0.5),
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
        min: sorted.first().copied().unwrap_or(f64::NAN),
        max: sorted.last().copied().unwrap_or(f64::NAN),
    }
}

/// Exact optimal cost: Prim (MST), Dijkstra (SSP, summed distances),
/// Held-Karp (TSP) or exhaustive routing (VRP). Instances beyond the exact
/// solvers' limits are a parameter error.
pub fn oracle_cost(inst: &Instance) -> Result<f64> {
    match inst {
        Instance::Mst(g) => Ok(prim_mst(g)?.total_weight),
        Instance::Ssp { graph, source } => Ok(dijkstra(graph, *source)?.total_distance()),
        Instance::Tsp(c) => {
            if c.len() > HELD_KARP_MAX {
                return Err(Error::param(format!(
                    "no exact TSP oracle beyond {HELD_KARP_MAX} cities (got {})",
                    c.len()
                )));
            }
            Ok(held_karp(c)?.length)
        }
        Instance::Vrp { cities, vehicles } => {
            if cities.len() > BRUTE_FORCE_MAX_NODES || *vehicles > BRUTE_FORCE_MAX_VEHICLES {
                return Err(Error::param(format!(
                    "no exact VRP oracle beyond {BRUTE_FORCE_MAX_NODES} nodes and {BRUTE_FORCE_MAX_VEHICLES} vehicles"
                )));
            }
            Ok(brute_force_vrp(cities, *vehicles)?.max_route_length)
        }
    }
}

/// The exact cost when available; for TSP beyond Held-Karp, 2-opt from
/// farthest insertion stands in.
pub fn reference_cost(inst: &Instance) -> Result<f64> {
    match inst {
        Instance::Tsp(c) if c.len() > HELD_KARP_MAX => {
            Ok(two_opt(c, &farthest_insertion_tour(c)?)?.length)
        }
        _ => oracle_cost(inst),
    }
}

/// Greedy-decoding gaps of `params` against the exact oracle.
pub fn evaluate(
    params: &PolicyParameters,
    instances: &[Instance],
    options: EnvOptions,
) -> Result<GapStats> {
    let gaps = instances
        .par_iter()
        .map(|inst| {
            let opt = oracle_cost(inst)?;
            let env = Environment::new(inst.clone(), options)?;
            let t = rollout(&env, params, Mode::Greedy, 0)?;
            Ok(t.cost() / opt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(gap_stats(&gaps))
}
