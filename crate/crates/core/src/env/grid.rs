/// Uniform bucket grid over points in the plane supporting removal and
/// k-nearest queries; about two points per cell.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pts: Vec<(f64, f64)>,
    side: usize,
    lo: (f64, f64),
    cell: f64,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    alive: usize,
}

impl Grid {
    pub fn new(pts: &[(f64, f64)]) -> Self {
        let n = pts.len();
        let side = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in pts {
            lo_x = lo_x.min(x);
            lo_y = lo_y.min(y);
            hi_x = hi_x.max(x);
            hi_y = hi_y.max(y);
        }
        let span = (hi_x - lo_x).max(hi_y - lo_y);
        let cell = if span > 0.0 { span / side as f64 } else { 1.0 };
        let mut grid = Grid {
            pts: pts.to_vec(),
            side,
            lo: (lo_x, lo_y),
            cell,
            cells: vec![Vec::new(); side * side],
            cell_of: vec![0; n],
            alive: n,
        };
        for (i, &p) in pts.iter().enumerate() {
            let (cx, cy) = grid.coords(p);
            let c = cy * side + cx;
            grid.cells[c].push(i);
            grid.cell_of[i] = c;
        }
        grid
    }

    fn coords(&self, (x, y): (f64, f64)) -> (usize, usize) {
        let clamp = |v: f64| (v.max(0.0) as usize).min(self.side - 1);
        (
            clamp((x - self.lo.0) / self.cell),
            clamp((y - self.lo.1) / self.cell),
        )
    }

    pub fn alive(&self) -> usize {
        self.alive
    }

    pub fn remove(&mut self, i: usize) {
        let bucket = &mut self.cells[self.cell_of[i]];
        if let Some(pos) = bucket.iter().position(|&j| j == i) {
            bucket.swap_remove(pos);
            self.alive -= 1;
        }
    }

    /// Up to `k` remaining points nearest to point `i` (excluding `i`),
    /// ordered by distance then id.
    pub fn nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let p = self.pts[i];
        let (cx, cy) = self.coords(p);
        let (cx, cy) = (cx as isize, cy as isize);
        let side = self.side as isize;
        let dist = |j: usize| {
            let q = self.pts[j];
            (p.0 - q.0).hypot(p.1 - q.1)
        };
        let mut found: Vec<(f64, usize)> = Vec::new();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        for r in 0..=side {
            for y in (cy - r).max(0)..=(cy + r).min(side - 1) {
                let mut visit = |x: isize| {
                    if (0..side).contains(&x) {
                        for &j in &self.cells[(y * side + x) as usize] {
                            if j != i {
                                found.push((dist(j), j));
                            }
                        }
                    }
                };
                if y == cy - r || y == cy + r {
                    (cx - r..=cx + r).for_each(&mut visit);
                } else {
                    visit(cx - r);
                    visit(cx + r);
                }
            }
            if found.len() >= k && k > 0 {
                found.select_nth_unstable_by(k - 1, by_dist);
                found.truncate(k);
                let worst = found.iter().map(|f| f.0).fold(f64::NEG_INFINITY, f64::max);
                if worst <= r as f64 * self.cell {
                    break;
                }
            }
        }
        found.sort_by(by_dist);
        found.truncate(k);
        found.into_iter().map(|(_, j)| j).collect()
    }
}
