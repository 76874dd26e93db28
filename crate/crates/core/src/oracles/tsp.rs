use crate::error::{Error, Result};
use crate::graph::{EuclideanInstance, NodeId};

/// Improvements smaller than this are treated as ties.
const EPS: f64 = 1e-12;

pub const HELD_KARP_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub perm: Vec<NodeId>,
    pub length: f64,
}

impl Tour {
    pub fn new(inst: &EuclideanInstance, perm: Vec<NodeId>) -> Result<Self> {
        let length = tour_length(inst, &perm)?;
        Ok(Tour { perm, length })
    }
}

pub fn check_permutation(perm: &[NodeId], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::param(format!(
            "permutation has {} entries for {n} cities",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in perm {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::param(format!(
                "not a permutation: node {v} repeated or out of range"
            )));
        }
    }
    Ok(())
}

/// Closed tour length under the instance metric.
pub fn tour_length(inst: &EuclideanInstance, perm: &[NodeId]) -> Result<f64> {
    check_permutation(perm, inst.len())?;
    Ok(cycle_length(inst, perm))
}

pub(crate) fn cycle_length(inst: &EuclideanInstance, perm: &[NodeId]) -> f64 {
    if perm.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..perm.len() {
        total += inst.distance(perm[i], perm[(i + 1) % perm.len()]);
    }
    total
}

/// Exact tour by dynamic programming over subsets, `O(n^2 2^n)`.
pub fn held_karp(inst: &EuclideanInstance) -> Result<Tour> {
    let n = inst.len();
    if !(3..=HELD_KARP_MAX).contains(&n) {
        return Err(Error::param(format!(
            "held_karp supports 3..={HELD_KARP_MAX} cities, got {n}"
        )));
    }
    let d = inst.distance_matrix();
    // Node 0 is the fixed start; bit i of a mask stands for node i + 1.
    let k = n - 1;
    let full = 1usize << k;
    let mut cost = vec![f64::INFINITY; full * k];
    let mut prev = vec![u8::MAX; full * k];
    for j in 0..k {
        cost[(1 << j) * k + j] = d[j + 1];
    }
    for mask in 1..full {
        for j in 0..k {
            let here = cost[mask * k + j];
            if mask >> j & 1 == 0 || here.is_infinite() {
                continue;
            }
            for next in 0..k {
                if mask >> next & 1 == 1 {
                    continue;
                }
                let m2 = mask | 1 << next;
                let c = here + d[(j + 1) * n + next + 1];
                if c < cost[m2 * k + next] {
                    cost[m2 * k + next] = c;
                    prev[m2 * k + next] = j as u8;
                }
            }
        }
    }
    let last_mask = full - 1;
    let (mut last, mut best) = (0, f64::INFINITY);
    for j in 0..k {
        let c = cost[last_mask * k + j] + d[(j + 1) * n];
        if c < best {
            best = c;
            last = j;
        }
    }
    let mut perm = Vec::with_capacity(n);
    let mut mask = last_mask;
    let mut j = last;
    loop {
        perm.push(j + 1);
        let p = prev[mask * k + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    perm.push(0);
    perm.reverse();
    Tour::new(inst, perm)
}

pub const BRUTE_FORCE_TSP_MAX: usize = 10;

/// Exact tour by enumerating every permutation that starts at city 0.
pub fn brute_force_tsp(inst: &EuclideanInstance) -> Result<Tour> {
    let n = inst.len();
    if !(3..=BRUTE_FORCE_TSP_MAX).contains(&n) {
        return Err(Error::param(format!(
            "brute force needs 3 <= n <= {BRUTE_FORCE_TSP_MAX}, got {n}"
        )));
    }
    let mut perm: Vec<NodeId> = (0..n).collect();
    let mut best = (cycle_length(inst, &perm), perm.clone());
    // lexicographic successors of perm[1..]
    loop {
        let tail = &mut perm[1..];
        let Some(i) = (0..tail.len() - 1).rev().find(|&i| tail[i] < tail[i + 1]) else {
            break;
        };
        let j = (i + 1..tail.len())
            .rev()
            .find(|&j| tail[j] > tail[i])
            .expect("successor exists");
        tail.swap(i, j);
        tail[i + 1..].reverse();
        let len = cycle_length(inst, &perm);
        if len < best.0 - EPS {
            best = (len, perm.clone());
        }
    }
    Tour::new(inst, best.1)
}

/// Greedy tour: always move to the closest unvisited city (ties by id).
pub fn nearest_neighbor_tour(inst: &EuclideanInstance, start: NodeId) -> Result<Tour> {
    let n = inst.len();
    if n < 2 || start >= n {
        return Err(Error::param(format!(
            "nearest neighbor needs n >= 2 and a valid start, got n={n}, start={start}"
        )));
    }
    let mut visited = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    perm.push(cur);
    for _ in 1..n {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..n {
            if !visited[j] {
                let dj = inst.distance(cur, j);
                if dj < best.0 {
                    best = (dj, j);
                }
            }
        }
        cur = best.1;
        visited[cur] = true;
        perm.push(cur);
    }
    Tour::new(inst, perm)
}

/// Farthest insertion from city 0: repeatedly take the city whose distance to
/// the partial tour is largest and insert it where it lengthens the tour least.
pub fn farthest_insertion_tour(inst: &EuclideanInstance) -> Result<Tour> {
    let n = inst.len();
    if n < 3 {
        return Err(Error::param(format!(
            "farthest insertion needs at least 3 cities, got {n}"
        )));
    }
    let mut tour = vec![0];
    let mut in_tour = vec![false; n];
    in_tour[0] = true;
    let mut gap: Vec<f64> = (0..n).map(|j| inst.distance(0, j)).collect();
    for _ in 1..n {
        let mut pick = (f64::NEG_INFINITY, usize::MAX);
        for j in 0..n {
            if !in_tour[j] && gap[j] > pick.0 {
                pick = (gap[j], j);
            }
        }
        let city = pick.1;
        let mut best = (f64::INFINITY, 0);
        for i in 0..tour.len() {
            let (a, b) = (tour[i], tour[(i + 1) % tour.len()]);
            let delta = inst.distance(a, city) + inst.distance(city, b) - inst.distance(a, b);
            if delta < best.0 - EPS {
                best = (delta, i);
            }
        }
        tour.insert(best.1 + 1, city);
        in_tour[city] = true;
        for j in 0..n {
            if !in_tour[j] {
                gap[j] = gap[j].min(inst.distance(city, j));
            }
        }
    }
    Tour::new(inst, tour)
}

/// 2-opt local search. Scans `(i, j)` pairs in lexicographic order, applies
/// the first improving segment reversal and restarts, until no exchange
/// improves the tour.
pub fn two_opt(inst: &EuclideanInstance, tour: &Tour) -> Result<Tour> {
    let n = inst.len();
    check_permutation(&tour.perm, n)?;
    let mut perm = tour.perm.clone();
    if n >= 4 {
        while let Some((i, j)) = first_improvement(inst, &perm) {
            perm[i + 1..=j].reverse();
        }
    }
    Tour::new(inst, perm)
}

fn first_improvement(inst: &EuclideanInstance, perm: &[NodeId]) -> Option<(usize, usize)> {
    let n = perm.len();
    for i in 0..n - 2 {
        let (a, b) = (perm[i], perm[i + 1]);
        let dab = inst.distance(a, b);
        // j = n - 1 with i = 0 would reconnect the same two edges.
        let j_end = if i == 0 { n - 1 } else { n };
        for j in (i + 2)..j_end {
            let (c, d) = (perm[j], perm[(j + 1) % n]);
            let delta = inst.distance(a, c) + inst.distance(b, d) - dab - inst.distance(c, d);
            if delta < -EPS {
                return Some((i, j));
            }
        }
    }
    None
}
