//! Candidate links between seeds.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{delaunay_triangulation, segments_cross, Point, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Triangulation {
    Greedy,
    Delaunay,
}

impl Triangulation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Triangulation::Greedy => "greedy",
            Triangulation::Delaunay => "delaunay",
        }
    }
}

/// Accepted segments bucketed by the grid cells their bounding box spans.
struct SegmentGrid {
    cell: f64,
    buckets: BTreeMap<(i64, i64), Vec<usize>>,
    segments: Vec<Segment>,
}

impl SegmentGrid {
    fn new(cell: f64) -> Self {
        SegmentGrid {
            cell,
            buckets: BTreeMap::new(),
            segments: Vec::new(),
        }
    }

    fn span(&self, s: &Segment) -> ((i64, i64), (i64, i64)) {
        let c = |v: f64| libm::floor(v / self.cell) as i64;
        (
            (c(s.a.x.min(s.b.x)), c(s.a.y.min(s.b.y))),
            (c(s.a.x.max(s.b.x)), c(s.a.y.max(s.b.y))),
        )
    }

    fn cell_touches(&self, s: &Segment, cx: i64, cy: i64) -> bool {
        // Slab clip of the segment against the (slightly padded) cell.
        let pad = 1e-6;
        let (x0, y0) = (cx as f64 * self.cell - pad, cy as f64 * self.cell - pad);
        let (x1, y1) = (x0 + self.cell + 2.0 * pad, y0 + self.cell + 2.0 * pad);
        let (dx, dy) = (s.b.x - s.a.x, s.b.y - s.a.y);
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (p, q) in [
            (-dx, s.a.x - x0),
            (dx, x1 - s.a.x),
            (-dy, s.a.y - y0),
            (dy, y1 - s.a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        t0 <= t1
    }

    fn crosses_any(&self, s: &Segment) -> bool {
        let ((x0, y0), (x1, y1)) = self.span(s);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let Some(bucket) = self.buckets.get(&(cx, cy)) else {
                    continue;
                };
                if !self.cell_touches(s, cx, cy) {
                    continue;
                }
                if bucket.iter().any(|&k| segments_cross(s, &self.segments[k])) {
                    return true;
                }
            }
        }
        false
    }

    fn insert(&mut self, s: Segment) {
        let k = self.segments.len();
        let ((x0, y0), (x1, y1)) = self.span(&s);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                if self.cell_touches(&s, cx, cy) {
                    self.buckets.entry((cx, cy)).or_default().push(k);
                }
            }
        }
        self.segments.push(s);
    }
}

/// Pairs `(i, j)`, `i < j`, sorted by `(route distance, i, j)`; pairs
/// without a finite distance are left out.
pub fn sorted_pairs(
    n: usize,
    route_distance: impl Fn(usize, usize) -> Option<f64>,
) -> Vec<(f64, usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if let Some(d) = route_distance(i, j).filter(|d| d.is_finite()) {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    pairs
}

/// Greedy triangulation: scans seed pairs by ascending route distance and
/// keeps a pair when its straight segment crosses no segment kept before.
/// Returns accepted pairs in acceptance order.
pub fn greedy_triangulation(
    points: &[Point],
    route_distance: impl Fn(usize, usize) -> Option<f64>,
) -> Result<Vec<(usize, usize)>> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(
            "greedy triangulation needs two seeds",
        ));
    }
    let (lo, hi) = crate::geometry::bounds(points).expect("non-empty");
    let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1.0);
    let cell = (extent / libm::sqrt(points.len() as f64)).max(1.0);
    let mut grid = SegmentGrid::new(cell);
    let mut accepted = Vec::new();
    for (_, i, j) in sorted_pairs(points.len(), route_distance) {
        let s = Segment::new(points[i], points[j])?;
        if !grid.crosses_any(&s) {
            grid.insert(s);
            accepted.push((i, j));
        }
    }
    Ok(accepted)
}

/// Delaunay edges re-ordered like the greedy output: by route distance,
/// then index pair. Pairs without a route are dropped.
pub fn delaunay_candidates(
    points: &[Point],
    route_distance: impl Fn(usize, usize) -> Option<f64>,
) -> Result<Vec<(usize, usize)>> {
    let mut edges: Vec<(f64, usize, usize)> = delaunay_triangulation(points)?
        .into_iter()
        .filter_map(|(i, j)| {
            route_distance(i, j)
                .filter(|d| d.is_finite())
                .map(|d| (d, i, j))
        })
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(edges.into_iter().map(|(_, i, j)| (i, j)).collect())
}
