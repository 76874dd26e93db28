use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::graph::{EuclideanInstance, Metric, NodeId};

const PUBLISHED: &str = include_str!("../../data/tsplib/published_lengths.csv");

/// Instances shipped with the crate, as `(name, problem file, optimal tour file)`.
pub const BUNDLED: [(&str, &str, &str); 3] = [
    (
        "eil51",
        include_str!("../../data/tsplib/eil51.tsp"),
        include_str!("../../data/tsplib/eil51.opt.tour"),
    ),
    (
        "berlin52",
        include_str!("../../data/tsplib/berlin52.tsp"),
        include_str!("../../data/tsplib/berlin52.opt.tour"),
    ),
    (
        "pcb442",
        include_str!("../../data/tsplib/pcb442.tsp"),
        include_str!("../../data/tsplib/pcb442.opt.tour"),
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct TsplibInstance {
    pub name: String,
    pub comment: Option<String>,
    pub dimension: usize,
    /// Only `EUC_2D` is accepted.
    pub edge_weight_type: String,
    pub coords: Vec<(f64, f64)>,
    pub optimum: Option<f64>,
}

/// Published tour lengths of TSPLIB instances per method, with `optimal`
/// the proven optimum. Lengths use the rounded metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedRow {
    pub instance: String,
    pub lengths: BTreeMap<String, f64>,
}

pub fn published_lengths() -> &'static [PublishedRow] {
    static ROWS: OnceLock<Vec<PublishedRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let mut rdr = csv::Reader::from_reader(PUBLISHED.as_bytes());
        let header = rdr.headers().expect("bundled header").clone();
        rdr.records()
            .map(|rec| {
                let rec = rec.expect("bundled row");
                let lengths = header
                    .iter()
                    .zip(rec.iter())
                    .skip(1)
                    .map(|(h, v)| (h.to_string(), v.parse().expect("bundled number")))
                    .collect();
                PublishedRow {
                    instance: rec[0].to_string(),
                    lengths,
                }
            })
            .collect()
    })
}

pub fn known_optimum(name: &str) -> Option<f64> {
    published_lengths()
        .iter()
        .find(|r| r.instance == name)
        .map(|r| r.lengths["optimal"])
}

impl TsplibInstance {
    pub fn to_instance(&self) -> EuclideanInstance {
        EuclideanInstance::new(self.coords.clone(), Metric::Rounded)
    }

    /// TSPLIB text with 1-based node ids.
    pub fn to_tsplib(&self) -> String {
        let mut s = String::new();
        writeln!(s, "NAME : {}", self.name).unwrap();
        if let Some(c) = &self.comment {
            writeln!(s, "COMMENT : {c}").unwrap();
        }
        writeln!(s, "TYPE : TSP").unwrap();
        writeln!(s, "DIMENSION : {}", self.dimension).unwrap();
        writeln!(s, "EDGE_WEIGHT_TYPE : {}", self.edge_weight_type).unwrap();
        writeln!(s, "NODE_COORD_SECTION").unwrap();
        for (i, (x, y)) in self.coords.iter().enumerate() {
            writeln!(s, "{} {x:?} {y:?}", i + 1).unwrap();
        }
        writeln!(s, "EOF").unwrap();
        s
    }

    /// Wraps plane coordinates (for instance a generated one) as an instance.
    pub fn from_coords(name: &str, coords: Vec<(f64, f64)>) -> Self {
        TsplibInstance {
            name: name.to_string(),
            comment: None,
            dimension: coords.len(),
            edge_weight_type: "EUC_2D".into(),
            coords,
            optimum: known_optimum(name),
        }
    }
}

fn at(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::format(format!("line {line}: {msg}"))
}

/// Parses the `EUC_2D` subset of the TSPLIB format. The known optimum is
/// filled in from the bundled table when the name is listed there.
pub fn parse_tsplib(text: &str) -> Result<TsplibInstance> {
    let mut name = None;
    let mut comment = None;
    let mut dimension = None;
    let mut weight_type = None;
    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut in_coords = false;
    let mut seen_coords = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords && line.starts_with(|c: char| c.is_ascii_digit()) {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(at(lineno, format!("expected `id x y`, got `{line}`")));
            }
            let id: usize = f[0]
                .parse()
                .map_err(|_| at(lineno, format!("bad node id `{}`", f[0])))?;
            let x: f64 = f[1]
                .parse()
                .map_err(|_| at(lineno, format!("bad coordinate `{}`", f[1])))?;
            let y: f64 = f[2]
                .parse()
                .map_err(|_| at(lineno, format!("bad coordinate `{}`", f[2])))?;
            let n = coords.len();
            if id == 0 || id > n {
                return Err(at(lineno, format!("node id {id} outside 1..={n}")));
            }
            if coords[id - 1].replace((x, y)).is_some() {
                return Err(at(lineno, format!("node {id} listed twice")));
            }
            continue;
        }
        in_coords = false;
        if line == "NODE_COORD_SECTION" {
            let n = dimension.ok_or_else(|| at(lineno, "NODE_COORD_SECTION before DIMENSION"))?;
            match weight_type.as_deref() {
                Some("EUC_2D") => {}
                Some(other) => {
                    return Err(at(lineno, format!("unsupported EDGE_WEIGHT_TYPE {other}")))
                }
                None => return Err(at(lineno, "NODE_COORD_SECTION before EDGE_WEIGHT_TYPE")),
            }
            coords = vec![None; n];
            in_coords = true;
            seen_coords = true;
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| at(lineno, format!("unexpected `{line}`")))?;
        match key {
            "NAME" => name = Some(value.to_string()),
            "COMMENT" => comment = Some(value.to_string()),
            "TYPE" if value != "TSP" => {
                return Err(at(lineno, format!("unsupported TYPE {value}")))
            }
            "TYPE" => {}
            "DIMENSION" => {
                dimension = Some(
                    value
                        .parse()
                        .map_err(|_| at(lineno, format!("bad DIMENSION `{value}`")))?,
                )
            }
            "EDGE_WEIGHT_TYPE" => {
                if value != "EUC_2D" {
                    return Err(at(lineno, format!("unsupported EDGE_WEIGHT_TYPE {value}")));
                }
                weight_type = Some(value.to_string());
            }
            other => return Err(at(lineno, format!("unsupported keyword {other}"))),
        }
    }
    let name = name.ok_or_else(|| Error::format("missing NAME"))?;
    let dimension = dimension.ok_or_else(|| Error::format("missing DIMENSION"))?;
    if !seen_coords {
        return Err(Error::format("missing NODE_COORD_SECTION"));
    }
    let listed = coords.iter().filter(|c| c.is_some()).count();
    if listed != dimension {
        return Err(Error::format(format!(
            "DIMENSION is {dimension} but {listed} coordinates are listed"
        )));
    }
    let coords: Vec<(f64, f64)> = coords.into_iter().flatten().collect();
    let optimum = known_optimum(&name);
    Ok(TsplibInstance {
        name,
        comment,
        dimension,
        edge_weight_type: "EUC_2D".into(),
        coords,
        optimum,
    })
}

/// Reads a TSPLIB `.tour` file into a 0-based permutation.
pub fn parse_tour(text: &str) -> Result<Vec<NodeId>> {
    let mut perm = Vec::new();
    let mut in_tour = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line == "TOUR_SECTION" {
            in_tour = true;
            continue;
        }
        if !in_tour || line.is_empty() {
            continue;
        }
        for tok in line.split_whitespace() {
            let id: i64 = tok
                .parse()
                .map_err(|_| at(idx + 1, format!("bad tour entry `{tok}`")))?;
            if id == -1 {
                return Ok(perm);
            }
            if id < 1 {
                return Err(at(idx + 1, format!("tour ids are 1-based, got {id}")));
            }
            perm.push(id as usize - 1);
        }
    }
    if !in_tour {
        return Err(Error::format("missing TOUR_SECTION"));
    }
    Ok(perm)
}

/// A bundled instance with its optimal tour.
pub fn bundled(name: &str) -> Result<(TsplibInstance, Vec<NodeId>)> {
    let (_, tsp, tour) = BUNDLED
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::param(format!("no bundled instance `{name}`")))?;
    Ok((parse_tsplib(tsp)?, parse_tour(tour)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::tour_length;

    const TINY: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 0\n3 0.5 4.25\nEOF\n";

    #[test]
    fn parses_and_round_trips() {
        let t = parse_tsplib(TINY).unwrap();
        assert_eq!(t.coords, vec![(0.0, 0.0), (3.0, 0.0), (0.5, 4.25)]);
        assert_eq!(parse_tsplib(&t.to_tsplib()).unwrap(), t);
        for (name, _, _) in BUNDLED {
            let (inst, _) = bundled(name).unwrap();
            assert_eq!(parse_tsplib(&inst.to_tsplib()).unwrap(), inst);
        }
    }

    #[test]
    fn bundled_optima() {
        for (name, expected) in [("eil51", 426.0), ("berlin52", 7542.0), ("pcb442", 50778.0)] {
            let (inst, tour) = bundled(name).unwrap();
            assert_eq!(inst.dimension, inst.coords.len());
            assert_eq!(inst.optimum, Some(expected));
            assert_eq!(
                tour_length(&inst.to_instance(), &tour).unwrap(),
                expected,
                "{name}"
            );
        }
    }

    #[test]
    fn errors_name_the_line() {
        let bad_type = TINY.replace("EUC_2D", "GEO");
        assert!(parse_tsplib(&bad_type)
            .unwrap_err()
            .to_string()
            .contains("line 4"));
        let short = TINY.replace("DIMENSION : 3", "DIMENSION : 4");
        assert!(parse_tsplib(&short)
            .unwrap_err()
            .to_string()
            .contains("4 but 3"));
        let no_coords = "NAME : x\nTYPE : TSP\nDIMENSION : 1\nEDGE_WEIGHT_TYPE : EUC_2D\nEOF\n";
        assert!(parse_tsplib(no_coords)
            .unwrap_err()
            .to_string()
            .contains("NODE_COORD_SECTION"));
        let dup = TINY.replace("3 0.5 4.25", "2 0.5 4.25");
        assert!(parse_tsplib(&dup)
            .unwrap_err()
            .to_string()
            .contains("line 8"));
    }

    #[test]
    fn published_table_is_complete() {
        let rows = published_lengths();
        assert_eq!(rows.len(), 41);
        assert!(rows.iter().all(
            |r| r.lengths.len() == 7 && r.lengths.values().all(|&v| v >= r.lengths["optimal"])
        ));
    }
}
