use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::BenchRecord;
use crate::train::gap_stats;

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub method: String,
    /// Records with a gap.
    pub count: usize,
    /// Records without an optimum or with an error; excluded from the statistics.
    pub flagged: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
}

/// Per-method gap statistics, methods in name order.
pub fn gap_report(records: &[BenchRecord]) -> GapReport {
    let mut by_method: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_method
            .entry(r.method.name())
            .or_default()
            .push(if r.error.is_some() { f64::NAN } else { r.gap });
    }
    GapReport {
        rows: by_method
            .into_iter()
            .map(|(m, gaps)| row(m, &gaps))
            .collect(),
    }
}

pub(crate) fn row(method: &str, gaps: &[f64]) -> GapRow {
    let s = gap_stats(gaps);
    let count = gaps.iter().filter(|g| !g.is_nan()).count();
    GapRow {
        method: method.to_string(),
        count,
        flagged: gaps.len() - count,
        mean: s.mean,
        median: s.median,
        q1: s.q1,
        q3: s.q3,
        min: s.min,
        max: s.max,
    }
}

impl GapReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "{:<14} {:>6} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "method", "count", "flagged", "mean", "median", "q1", "q3", "min", "max"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{:<14} {:>6} {:>7} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                r.method, r.count, r.flagged, r.mean, r.median, r.q1, r.q3, r.min, r.max
            )
            .unwrap();
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method", "count", "flagged", "mean", "median", "q1", "q3", "min", "max",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            let nums = [r.mean, r.median, r.q1, r.q3, r.min, r.max].map(|x| {
                if x.is_nan() {
                    String::new()
                } else {
                    x.to_string()
                }
            });
            let mut rec = vec![r.method.clone(), r.count.to_string(), r.flagged.to_string()];
            rec.extend(nums);
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}
