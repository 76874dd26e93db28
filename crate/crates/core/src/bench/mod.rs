//! Benchmark harness: solve every (method, instance, seed) triple, record
//! objective values, optimality gaps and timings, and summarize them.

mod check;
mod report;
mod scaling;
mod tsplib;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::env::{rollout_timed, EnvOptions, Environment, Instance, Problem};
use crate::error::{Error, Result};
use crate::graph::GraphKind;
use crate::nn::PolicyParameters;
use crate::oracles::{
    bellman_ford, brute_force_vrp, dijkstra, farthest_insertion_tour, held_karp, kruskal_mst,
    nearest_neighbor_tour, prim_mst, two_opt,
};
use crate::rng::derive_seed;
use crate::train::{make_instance, oracle_cost, write_atomic};

pub use check::{oracle_check, CheckResult, CheckSizes};
pub use report::{gap_report, GapReport, GapRow};
pub use scaling::{runtime_scaling, scaling_csv, ScalingRow};
pub use tsplib::{
    bundled, known_optimum, parse_tour, parse_tsplib, published_lengths, PublishedRow,
    TsplibInstance, BUNDLED,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Prim,
    Kruskal,
    Dijkstra,
    BellmanFord,
    HeldKarp,
    /// Nearest-neighbor tour from city `seed mod n`.
    Nearest,
    Farthest,
    /// 2-opt from the nearest-neighbor tour.
    TwoOpt,
    VrpExact,
    /// Greedy decoding with the learned policy.
    Policy,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Prim,
        Method::Kruskal,
        Method::Dijkstra,
        Method::BellmanFord,
        Method::HeldKarp,
        Method::Nearest,
        Method::Farthest,
        Method::TwoOpt,
        Method::VrpExact,
        Method::Policy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Prim => "prim",
            Method::Kruskal => "kruskal",
            Method::Dijkstra => "dijkstra",
            Method::BellmanFord => "bellman_ford",
            Method::HeldKarp => "held_karp",
            Method::Nearest => "nearest",
            Method::Farthest => "farthest",
            Method::TwoOpt => "two_opt",
            Method::VrpExact => "vrp_exact",
            Method::Policy => "policy",
        }
    }

    pub fn applies_to(self, problem: Problem) -> bool {
        match self {
            Method::Prim | Method::Kruskal => problem == Problem::Mst,
            Method::Dijkstra | Method::BellmanFord => problem == Problem::Ssp,
            Method::HeldKarp | Method::Nearest | Method::Farthest | Method::TwoOpt => {
                problem == Problem::Tsp
            }
            Method::VrpExact => problem == Problem::Vrp,
            Method::Policy => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::param(format!(
                    "unknown method `{s}` (known: {})",
                    names.join(", ")
                ))
            })
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchInstance {
    pub id: String,
    pub instance: Instance,
    /// Proven optimal cost, when an exact oracle or table provides one.
    pub optimum: Option<f64>,
}

impl BenchInstance {
    /// `count` random instances with optima from the exact oracles where
    /// their size limits allow.
    pub fn generated(
        problem: Problem,
        kind: GraphKind,
        n: usize,
        vehicles: usize,
        count: usize,
        seed: u64,
    ) -> Result<Vec<Self>> {
        let width = count.saturating_sub(1).to_string().len().max(4);
        (0..count)
            .into_par_iter()
            .map(|i| {
                let instance = make_instance(
                    problem,
                    kind,
                    n,
                    vehicles,
                    derive_seed(seed, &[4, i as u64]),
                )?;
                Ok(BenchInstance {
                    id: format!("{problem}-n{n}-{i:0width$}"),
                    optimum: oracle_cost(&instance).ok(),
                    instance,
                })
            })
            .collect()
    }

    pub fn from_tsplib(t: &TsplibInstance) -> Self {
        BenchInstance {
            id: t.name.clone(),
            instance: Instance::Tsp(t.to_instance()),
            optimum: t.optimum,
        }
    }
}

/// Outcome of one method on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solved {
    /// Positive objective value (tree weight, summed distances, tour or
    /// longest-route length).
    pub value: f64,
    pub decode: Duration,
    /// Encoder time of the learned policy.
    pub encode: Option<Duration>,
}

/// Runs `method` on `instance`. `seed` picks the nearest-neighbor start city.
pub fn solve(
    method: Method,
    instance: &Instance,
    seed: u64,
    policy: Option<&PolicyParameters>,
    options: EnvOptions,
) -> Result<Solved> {
    if !method.applies_to(instance.problem()) {
        return Err(Error::param(format!(
            "{method} does not apply to {}",
            instance.problem()
        )));
    }
    if let Method::Policy = method {
        let params = policy.ok_or_else(|| Error::param("the policy method needs a checkpoint"))?;
        let env = Environment::new(instance.clone(), options)?;
        let (t, timing) = rollout_timed(&env, params)?;
        return Ok(Solved {
            value: t.cost(),
            decode: timing.decode,
            encode: Some(timing.encode),
        });
    }
    let start = Instant::now();
    let value = match (method, instance) {
        (Method::Prim, Instance::Mst(g)) => prim_mst(g)?.total_weight,
        (Method::Kruskal, Instance::Mst(g)) => kruskal_mst(g)?.total_weight,
        (Method::Dijkstra, Instance::Ssp { graph, source }) => {
            dijkstra(graph, *source)?.total_distance()
        }
        (Method::BellmanFord, Instance::Ssp { graph, source }) => {
            bellman_ford(graph, *source)?.total_distance()
        }
        (Method::HeldKarp, Instance::Tsp(c)) => held_karp(c)?.length,
        (Method::Nearest, Instance::Tsp(c)) => {
            nearest_neighbor_tour(c, (seed % c.len() as u64) as usize)?.length
        }
        (Method::Farthest, Instance::Tsp(c)) => farthest_insertion_tour(c)?.length,
        (Method::TwoOpt, Instance::Tsp(c)) => {
            let init = nearest_neighbor_tour(c, (seed % c.len() as u64) as usize)?;
            two_opt(c, &init)?.length
        }
        (Method::VrpExact, Instance::Vrp { cities, vehicles }) => {
            brute_force_vrp(cities, *vehicles)?.max_route_length
        }
        _ => unreachable!("applicability checked above"),
    };
    Ok(Solved {
        value,
        decode: start.elapsed(),
        encode: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub instance: String,
    pub seed: u64,
    /// NaN on error.
    pub value: f64,
    /// `value / optimum`; NaN without an optimum or on error.
    pub gap: f64,
    pub decode_ms: f64,
    /// NaN for methods without an encoder.
    pub encode_ms: f64,
    /// Unix time in milliseconds when the record was produced.
    pub timestamp: u64,
    pub error: Option<String>,
}

impl BenchRecord {
    fn key(&self) -> (&str, &str, u64) {
        (self.method.name(), &self.instance, self.seed)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    pub policy: Option<PolicyParameters>,
    pub env: EnvOptions,
}

/// One record per (method, instance, seed), sorted by that key. A failing
/// method yields an error record and the run continues.
pub fn run_bench(
    methods: &[Method],
    instances: &[BenchInstance],
    seeds: &[u64],
    options: &BenchOptions,
) -> Vec<BenchRecord> {
    let jobs: Vec<(Method, &BenchInstance, u64)> = methods
        .iter()
        .flat_map(|&m| {
            instances
                .iter()
                .flat_map(move |i| seeds.iter().map(move |&s| (m, i, s)))
        })
        .collect();
    let mut records: Vec<BenchRecord> = jobs
        .into_par_iter()
        .map(|(method, inst, seed)| {
            let outcome = solve(
                method,
                &inst.instance,
                seed,
                options.policy.as_ref(),
                options.env,
            );
            let timestamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis() as u64);
            match outcome {
                Ok(s) => BenchRecord {
                    method,
                    instance: inst.id.clone(),
                    seed,
                    value: s.value,
                    gap: inst.optimum.map_or(f64::NAN, |o| s.value / o),
                    decode_ms: s.decode.as_secs_f64() * 1e3,
                    encode_ms: s.encode.map_or(f64::NAN, |e| e.as_secs_f64() * 1e3),
                    timestamp,
                    error: None,
                },
                Err(e) => BenchRecord {
                    method,
                    instance: inst.id.clone(),
                    seed,
                    value: f64::NAN,
                    gap: f64::NAN,
                    decode_ms: f64::NAN,
                    encode_ms: f64::NAN,
                    timestamp,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    records.sort_by(|a, b| a.key().cmp(&b.key()));
    records
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

/// Results without timings: identical across runs with the same inputs.
pub fn results_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "instance", "seed", "value", "gap", "error"])
        .expect("in-memory write");
    for r in records {
        w.write_record([
            r.method.name(),
            &r.instance,
            &r.seed.to_string(),
            &num(r.value),
            &num(r.gap),
            r.error.as_deref().unwrap_or(""),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn timing_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "instance",
        "seed",
        "decode_ms",
        "encode_ms",
        "timestamp",
    ])
    .expect("in-memory write");
    for r in records {
        w.write_record([
            r.method.name(),
            &r.instance,
            &r.seed.to_string(),
            &num(r.decode_ms),
            &num(r.encode_ms),
            &r.timestamp.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Writes `results_csv` to `path` and `timing_csv` next to it with a
/// `.timing.csv` suffix, each atomically.
pub fn write_bench(records: &[BenchRecord], path: &Path) -> Result<()> {
    write_atomic(path, results_csv(records).as_bytes())?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    write_atomic(
        &path.with_file_name(format!("{stem}.timing.csv")),
        timing_csv(records).as_bytes(),
    )
}
