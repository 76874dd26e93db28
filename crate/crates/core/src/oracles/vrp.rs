use crate::error::{Error, Result};
use crate::graph::{EuclideanInstance, NodeId};

pub const BRUTE_FORCE_MAX_NODES: usize = 10;
pub const BRUTE_FORCE_MAX_VEHICLES: usize = 3;

/// One closed route per vehicle, each `depot, ..., depot`. A vehicle that
/// stays home has the route `[depot, depot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteSet {
    pub routes: Vec<Vec<NodeId>>,
    pub max_route_length: f64,
}

impl RouteSet {
    pub fn new(inst: &EuclideanInstance, routes: Vec<Vec<NodeId>>) -> Result<Self> {
        validate_routes(inst, &routes)?;
        let max_route_length = routes
            .iter()
            .map(|r| route_length(inst, r))
            .fold(0.0, f64::max);
        Ok(RouteSet {
            routes,
            max_route_length,
        })
    }
}

/// Length of an open node sequence (routes already repeat the depot).
pub fn route_length(inst: &EuclideanInstance, route: &[NodeId]) -> f64 {
    route.windows(2).map(|w| inst.distance(w[0], w[1])).sum()
}

pub fn validate_routes(inst: &EuclideanInstance, routes: &[Vec<NodeId>]) -> Result<()> {
    let n = inst.len();
    let depot = inst.depot;
    let mut seen = vec![false; n];
    for (m, r) in routes.iter().enumerate() {
        if r.len() < 2 || r[0] != depot || r[r.len() - 1] != depot {
            return Err(Error::structure(format!(
                "route {m} must start and end at the depot"
            )));
        }
        for &c in &r[1..r.len() - 1] {
            if c >= n || c == depot {
                return Err(Error::structure(format!(
                    "route {m} visits invalid city {c}"
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::structure(format!("city {c} covered twice")));
            }
        }
    }
    if let Some(c) = (0..n).find(|&c| c != depot && !seen[c]) {
        return Err(Error::structure(format!("city {c} not covered")));
    }
    Ok(())
}

/// Exact min-max routing for tiny instances: the best closed route through
/// every subset of cities is computed by a subset DP, then every assignment
/// of cities to vehicles is scored.
pub fn brute_force_vrp(inst: &EuclideanInstance, vehicles: usize) -> Result<RouteSet> {
    let n = inst.len();
    if !(2..=BRUTE_FORCE_MAX_NODES).contains(&n)
        || !(1..=BRUTE_FORCE_MAX_VEHICLES).contains(&vehicles)
    {
        return Err(Error::param(format!(
            "brute_force_vrp supports 2..={BRUTE_FORCE_MAX_NODES} nodes and 1..={BRUTE_FORCE_MAX_VEHICLES} vehicles, got n={n}, M={vehicles}"
        )));
    }
    let depot = inst.depot;
    let cities: Vec<NodeId> = (0..n).filter(|&c| c != depot).collect();
    let k = cities.len();
    let full = 1usize << k;

    // path[mask][j]: shortest depot -> ... -> cities[j] covering exactly mask.
    let mut path = vec![f64::INFINITY; full * k];
    let mut prev = vec![usize::MAX; full * k];
    for j in 0..k {
        path[(1 << j) * k + j] = inst.distance(depot, cities[j]);
    }
    for mask in 1..full {
        for j in 0..k {
            let here = path[mask * k + j];
            if mask >> j & 1 == 0 || here.is_infinite() {
                continue;
            }
            for nx in 0..k {
                if mask >> nx & 1 == 0 {
                    let c = here + inst.distance(cities[j], cities[nx]);
                    let slot = (mask | 1 << nx) * k + nx;
                    if c < path[slot] {
                        path[slot] = c;
                        prev[slot] = j;
                    }
                }
            }
        }
    }
    let mut closed = vec![(0.0, usize::MAX); full];
    for (mask, slot) in closed.iter_mut().enumerate().skip(1) {
        *slot = (0..k)
            .filter(|&j| mask >> j & 1 == 1)
            .map(|j| (path[mask * k + j] + inst.distance(cities[j], depot), j))
            .fold(
                (f64::INFINITY, usize::MAX),
                |a, b| if b.0 < a.0 { b } else { a },
            );
    }

    let mut best = (f64::INFINITY, Vec::new());
    let mut assign = vec![0usize; k];
    loop {
        let mut masks = vec![0usize; vehicles];
        for (j, &v) in assign.iter().enumerate() {
            masks[v] |= 1 << j;
        }
        let worst = masks.iter().map(|&m| closed[m].0).fold(0.0, f64::max);
        if worst < best.0 - 1e-12 {
            best = (worst, masks);
        }
        // next assignment in base `vehicles`
        let mut i = 0;
        while i < k {
            assign[i] += 1;
            if assign[i] < vehicles {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }

    let routes = best
        .1
        .iter()
        .map(|&mask| {
            let mut route = vec![depot];
            if mask != 0 {
                let mut seq = Vec::new();
                let (mut m, mut j) = (mask, closed[mask].1);
                while j != usize::MAX {
                    seq.push(cities[j]);
                    let p = prev[m * k + j];
                    m &= !(1 << j);
                    j = p;
                }
                seq.reverse();
                route.extend(seq);
            }
            route.push(depot);
            route
        })
        .collect();
    RouteSet::new(inst, routes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_euclidean, Metric};
    use crate::oracles::held_karp;

    #[test]
    fn single_vehicle_is_tsp() {
        for seed in 0..20 {
            let inst = generate_euclidean(8, seed).unwrap();
            let rs = brute_force_vrp(&inst, 1).unwrap();
            assert!((rs.max_route_length - held_karp(&inst).unwrap().length).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_pair_splits_across_vehicles() {
        let inst =
            EuclideanInstance::new(vec![(0.0, 0.0), (-1.0, 0.0), (2.0, 0.0)], Metric::Euclidean);
        let rs = brute_force_vrp(&inst, 2).unwrap();
        assert_eq!(rs.max_route_length, 4.0);
        assert!(rs.routes.iter().all(|r| r.len() == 3));
    }

    #[test]
    fn route_validation() {
        let inst = generate_euclidean(4, 0).unwrap();
        assert!(RouteSet::new(&inst, vec![vec![0, 1, 2, 3, 0]]).is_ok());
        assert!(RouteSet::new(&inst, vec![vec![0, 1, 2, 0], vec![0, 2, 3, 0]]).is_err());
        assert!(RouteSet::new(&inst, vec![vec![0, 1, 2, 0]]).is_err());
        assert!(RouteSet::new(&inst, vec![vec![1, 2, 3, 0]]).is_err());
        assert!(brute_force_vrp(&generate_euclidean(11, 0).unwrap(), 2).is_err());
        assert!(brute_force_vrp(&inst, 4).is_err());
    }
}
