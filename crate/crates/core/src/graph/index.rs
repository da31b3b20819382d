use alloc::vec::Vec;

use crate::geometry::Point;

/// Uniform bucket grid over a fixed point set.
#[derive(Debug, Clone)]
pub struct GridIndex {
    origin: Point,
    cell: f64,
    nx: i64,
    ny: i64,
    buckets: Vec<Vec<usize>>,
}

impl GridIndex {
    pub fn new(points: &[Point], cell: f64) -> Self {
        let cell = if cell > 0.0 && cell.is_finite() {
            cell
        } else {
            100.0
        };
        let (origin, max) = crate::geometry::bounds(points).unwrap_or_default();
        let nx = libm::floor((max.x - origin.x) / cell) as i64 + 1;
        let ny = libm::floor((max.y - origin.y) / cell) as i64 + 1;
        let mut buckets = alloc::vec![Vec::new(); (nx * ny) as usize];
        let mut grid = GridIndex {
            origin,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = grid.cell_of(p);
            buckets[(cy * nx + cx) as usize].push(i);
        }
        grid.buckets = buckets;
        grid
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    fn cell_of(&self, p: &Point) -> (i64, i64) {
        let cx = libm::floor((p.x - self.origin.x) / self.cell) as i64;
        let cy = libm::floor((p.y - self.origin.y) / self.cell) as i64;
        (cx.clamp(0, self.nx - 1), cy.clamp(0, self.ny - 1))
    }

    fn raw_cell(&self, p: &Point) -> (i64, i64) {
        (
            libm::floor((p.x - self.origin.x) / self.cell) as i64,
            libm::floor((p.y - self.origin.y) / self.cell) as i64,
        )
    }

    fn bucket(&self, cx: i64, cy: i64) -> &[usize] {
        if cx < 0 || cy < 0 || cx >= self.nx || cy >= self.ny {
            &[]
        } else {
            &self.buckets[(cy * self.nx + cx) as usize]
        }
    }

    /// Nearest point passing `filter`, by expanding square rings of cells.
    /// Ties on distance go to the smaller index.
    pub fn nearest(
        &self,
        points: &[Point],
        p: &Point,
        filter: impl Fn(usize) -> bool,
    ) -> Option<(usize, f64)> {
        if points.is_empty() {
            return None;
        }
        let (cx, cy) = self.raw_cell(p);
        let gap = |c: i64, n: i64| {
            if c < 0 {
                -c
            } else if c >= n {
                c - n + 1
            } else {
                0
            }
        };
        let r0 = gap(cx, self.nx).max(gap(cy, self.ny));
        let reach = |c: i64, n: i64| (c).abs().max((n - 1 - c).abs());
        let r_max = reach(cx, self.nx).max(reach(cy, self.ny));
        let mut best: Option<(f64, usize)> = None;
        for r in r0..=r_max {
            if let Some((d, _)) = best {
                // Unvisited cells are at least (r - 1) whole cells away.
                if d < (r - 1).max(0) as f64 * self.cell {
                    break;
                }
            }
            let mut visit = |x: i64, y: i64| {
                for &i in self.bucket(x, y) {
                    if !filter(i) {
                        continue;
                    }
                    let d = points[i].distance(p);
                    let better = match best {
                        None => true,
                        Some((bd, bi)) => d < bd || (d == bd && i < bi),
                    };
                    if better {
                        best = Some((d, i));
                    }
                }
            };
            if r == 0 {
                visit(cx, cy);
                continue;
            }
            for x in (cx - r)..=(cx + r) {
                visit(x, cy - r);
                visit(x, cy + r);
            }
            for y in (cy - r + 1)..=(cy + r - 1) {
                visit(cx - r, y);
                visit(cx + r, y);
            }
        }
        best.map(|(d, i)| (i, d))
    }

    /// Indices of points within `radius` of `p`, ascending.
    pub fn within(&self, points: &[Point], p: &Point, radius: f64) -> Vec<usize> {
        let (lo_x, lo_y) = self.raw_cell(&Point::new(p.x - radius, p.y - radius));
        let (hi_x, hi_y) = self.raw_cell(&Point::new(p.x + radius, p.y + radius));
        let mut out = Vec::new();
        for y in lo_y.max(0)..=hi_y.min(self.ny - 1) {
            for x in lo_x.max(0)..=hi_x.min(self.nx - 1) {
                out.extend(
                    self.bucket(x, y)
                        .iter()
                        .copied()
                        .filter(|&i| points[i].distance(p) <= radius),
                );
            }
        }
        out.sort_unstable();
        out
    }
}
