use serde::{Deserialize, Serialize};

use std::fmt::Write as _;

use super::{parse_field, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Plain Euclidean distance.
    Euclidean,
    /// TSPLIB EUC_2D: Euclidean distance rounded half-up to an integer.
    Rounded,
}

/// Cities in the plane with an optional depot (vehicle routing).
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanInstance {
    pub coords: Vec<(f64, f64)>,
    pub metric: Metric,
    pub depot: NodeId,
}

impl EuclideanInstance {
    pub fn new(coords: Vec<(f64, f64)>, metric: Metric) -> Self {
        EuclideanInstance {
            coords,
            metric,
            depot: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn distance(&self, i: NodeId, j: NodeId) -> f64 {
        let (xi, yi) = self.coords[i];
        let (xj, yj) = self.coords[j];
        let d = (xi - xj).hypot(yi - yj);
        match self.metric {
            Metric::Euclidean => d,
            Metric::Rounded => (d + 0.5).floor(),
        }
    }

    /// Full distance matrix, row-major.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = self.distance(i, j);
                d[i * n + j] = dij;
                d[j * n + i] = dij;
            }
        }
        d
    }

    /// Coordinates shifted to the origin and scaled by the larger side of the
    /// bounding box, so every instance presents features in `[0, 1]^2`.
    pub fn normalized_coords(&self) -> Vec<(f64, f64)> {
        let (mut lo_x, mut lo_y) = (f64::INFINITY, f64::INFINITY);
        let (mut hi_x, mut hi_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &self.coords {
            lo_x = lo_x.min(x);
            lo_y = lo_y.min(y);
            hi_x = hi_x.max(x);
            hi_y = hi_y.max(y);
        }
        let span = (hi_x - lo_x).max(hi_y - lo_y);
        if !(span > 0.0) {
            return vec![(0.0, 0.0); self.len()];
        }
        self.coords
            .iter()
            .map(|&(x, y)| ((x - lo_x) / span, (y - lo_y) / span))
            .collect()
    }

    /// The `k` nearest other cities of every city, closest first, ties by id.
    pub fn nearest_neighbors(&self, k: usize) -> Vec<Vec<NodeId>> {
        let n = self.len();
        let k = k.min(n.saturating_sub(1));
        (0..n)
            .map(|i| {
                let mut others: Vec<(f64, NodeId)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (self.raw_distance(i, j), j))
                    .collect();
                if k < others.len() {
                    others
                        .select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    others.truncate(k);
                }
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                others.into_iter().map(|(_, j)| j).collect()
            })
            .collect()
    }

    /// Text form: `n metric depot` then `x y` per city at full precision.
    pub fn to_text(&self) -> String {
        let metric = match self.metric {
            Metric::Euclidean => "euclidean",
            Metric::Rounded => "rounded",
        };
        let mut s = String::new();
        writeln!(s, "{} {metric} {}", self.len(), self.depot).unwrap();
        for (x, y) in &self.coords {
            writeln!(s, "{x:?} {y:?}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format("empty instance file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::format(format!(
                "line 1: expected `n metric depot`, got `{header}`"
            )));
        }
        let n: usize = parse_field(head[0], 1)?;
        let metric = match head[1] {
            "euclidean" => Metric::Euclidean,
            "rounded" => Metric::Rounded,
            other => return Err(Error::format(format!("line 1: unknown metric `{other}`"))),
        };
        let depot: usize = parse_field(head[2], 1)?;
        let mut coords = Vec::with_capacity(n);
        for (idx, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::format(format!("line {}: expected `x y`", idx + 1)));
            }
            coords.push((parse_field(f[0], idx + 1)?, parse_field(f[1], idx + 1)?));
        }
        if coords.len() != n || (n > 0 && depot >= n) {
            return Err(Error::format(format!(
                "header declares {n} cities and depot {depot}, found {} cities",
                coords.len()
            )));
        }
        Ok(EuclideanInstance {
            coords,
            metric,
            depot,
        })
    }

    fn raw_distance(&self, i: NodeId, j: NodeId) -> f64 {
        let (xi, yi) = self.coords[i];
        let (xj, yj) = self.coords[j];
        (xi - xj).hypot(yi - yj)
    }
}
