use super::{solve, BenchOptions, Method};
use crate::env::Problem;
use crate::error::{Error, Result};
use crate::graph::GraphKind;
use crate::rng::derive_seed;
use crate::train::{gap_stats, make_instance};

/// Per-instance wall-clock times at one size, in milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub method: Method,
    pub n: usize,
    pub repeats: usize,
    pub median_ms: f64,
    pub q1_ms: f64,
    pub q3_ms: f64,
    /// Encoder time of the learned policy; NaN for other methods.
    pub encode_median_ms: f64,
}

/// Times `method` on `repeats` fresh instances per size, sequentially. One
/// extra warm-up instance per size is solved first and discarded. Graph
/// problems use random 4-regular graphs, routing problems random cities.
pub fn runtime_scaling(
    method: Method,
    problem: Problem,
    sizes: &[usize],
    repeats: usize,
    seed: u64,
    options: &BenchOptions,
) -> Result<Vec<ScalingRow>> {
    if repeats == 0 {
        return Err(Error::param(
            "runtime_scaling needs at least one timed repeat",
        ));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut decode = Vec::with_capacity(repeats);
        let mut encode = Vec::with_capacity(repeats);
        for r in 0..=repeats {
            let inst = make_instance(
                problem,
                GraphKind::rr(),
                n,
                2,
                derive_seed(seed, &[5, n as u64, r as u64]),
            )?;
            let s = solve(
                method,
                &inst,
                r as u64,
                options.policy.as_ref(),
                options.env,
            )?;
            if r > 0 {
                decode.push(s.decode.as_secs_f64() * 1e3);
                encode.push(s.encode.map_or(f64::NAN, |e| e.as_secs_f64() * 1e3));
            }
        }
        let d = gap_stats(&decode);
        rows.push(ScalingRow {
            method,
            n,
            repeats,
            median_ms: d.median,
            q1_ms: d.q1,
            q3_ms: d.q3,
            encode_median_ms: gap_stats(&encode).median,
        });
    }
    Ok(rows)
}

/// CSV with one row per (method, size) and the ratio of each median to the
/// previous size's median (empty on the first row).
pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "n",
        "repeats",
        "median_ms",
        "q1_ms",
        "q3_ms",
        "encode_median_ms",
        "ratio",
    ])
    .expect("in-memory write");
    let mut prev: Option<&ScalingRow> = None;
    for r in rows {
        let ratio = match prev {
            Some(p) if p.method == r.method => (r.median_ms / p.median_ms).to_string(),
            _ => String::new(),
        };
        let enc = if r.encode_median_ms.is_nan() {
            String::new()
        } else {
            r.encode_median_ms.to_string()
        };
        w.write_record([
            r.method.name().to_string(),
            r.n.to_string(),
            r.repeats.to_string(),
            r.median_ms.to_string(),
            r.q1_ms.to_string(),
            r.q3_ms.to_string(),
            enc,
            ratio,
        ])
        .expect("in-memory write");
        prev = Some(r);
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
