//! Delaunay triangulation by sweep-hull construction followed by Lawson
//! edge flips.
//!
//! Points are inserted in `(x, y)` order, each one fanned to the hull edges
//! it sees; the resulting triangulation is then flipped until every interior
//! edge is locally Delaunay. Co-circular quadrilaterals are finally resolved
//! toward the diagonal with the lexicographically smallest `(min, max)`
//! index pair, which makes the output independent of flip order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{orientation, Point, EPS};
use crate::error::{Error, Result};

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Signed clearance of `d` from the circumcircle of `(a, b, c)`: positive
/// when `d` lies strictly inside.
fn incircle_clearance(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let den = 2.0 * (bx * cy - by * cx);
    if den == 0.0 {
        return f64::INFINITY;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / den;
    let uy = (bx * c2 - cx * b2) / den;
    let r = libm::hypot(ux, uy);
    let dd = libm::hypot(d.x - a.x - ux, d.y - a.y - uy);
    r - dd
}

struct Mesh<'a> {
    pts: &'a [Point],
    tris: Vec<[usize; 3]>,
    edges: BTreeMap<EdgeKey, Vec<usize>>,
}

impl<'a> Mesh<'a> {
    fn add(&mut self, t: [usize; 3]) {
        let id = self.tris.len();
        self.tris.push(t);
        for i in 0..3 {
            self.edges
                .entry(key(t[i], t[(i + 1) % 3]))
                .or_default()
                .push(id);
        }
    }

    fn opposite(&self, t: usize, a: usize, b: usize) -> usize {
        self.tris[t]
            .iter()
            .copied()
            .find(|&v| v != a && v != b)
            .expect("triangle has a third vertex")
    }

    /// Orients edge `(a, b)` so that it runs counter-clockwise in `t`.
    fn ccw_in(&self, t: usize, a: usize, b: usize) -> (usize, usize) {
        let tri = self.tris[t];
        for i in 0..3 {
            if tri[i] == a && tri[(i + 1) % 3] == b {
                return (a, b);
            }
        }
        (b, a)
    }

    /// For an interior edge returns `(a, b, c, d, t1, t2)` where `(a, b, c)`
    /// is `t1` counter-clockwise and `d` is the apex of `t2`.
    fn quad(&self, e: EdgeKey) -> Option<(usize, usize, usize, usize, usize, usize)> {
        let ts = self.edges.get(&e)?;
        if ts.len() != 2 {
            return None;
        }
        let (t1, t2) = (ts[0], ts[1]);
        let (a, b) = self.ccw_in(t1, e.0, e.1);
        let c = self.opposite(t1, a, b);
        let d = self.opposite(t2, a, b);
        Some((a, b, c, d, t1, t2))
    }

    fn replace(&mut self, e: EdgeKey, from: usize, to: usize) {
        if let Some(ts) = self.edges.get_mut(&e) {
            for t in ts.iter_mut() {
                if *t == from {
                    *t = to;
                }
            }
        }
    }

    fn convex(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let p = self.pts;
        orientation(&p[a], &p[d], &p[c]) == 1 && orientation(&p[d], &p[b], &p[c]) == 1
    }

    /// Replaces diagonal `a-b` of the quad `a, d, b, c` by `c-d`.
    fn flip(&mut self, a: usize, b: usize, c: usize, d: usize, t1: usize, t2: usize) {
        self.edges.remove(&key(a, b));
        self.tris[t1] = [a, d, c];
        self.tris[t2] = [d, b, c];
        self.replace(key(a, d), t2, t1);
        self.replace(key(b, c), t1, t2);
        self.edges.insert(key(c, d), alloc::vec![t1, t2]);
    }

    fn lawson(&mut self) {
        let mut stack: Vec<EdgeKey> = self.edges.keys().copied().collect();
        let mut budget = 64 * (self.tris.len() + 16) * (self.tris.len() + 16);
        while let Some(e) = stack.pop() {
            if budget == 0 {
                break;
            }
            budget -= 1;
            let Some((a, b, c, d, t1, t2)) = self.quad(e) else {
                continue;
            };
            let p = self.pts;
            if incircle_clearance(&p[a], &p[b], &p[c], &p[d]) > EPS && self.convex(a, b, c, d) {
                self.flip(a, b, c, d, t1, t2);
                stack.extend([key(a, d), key(d, b), key(b, c), key(c, a)]);
            }
        }
    }

    fn resolve_cocircular(&mut self) {
        loop {
            let mut flipped = false;
            let keys: Vec<EdgeKey> = self.edges.keys().copied().collect();
            for e in keys {
                let Some((a, b, c, d, t1, t2)) = self.quad(e) else {
                    continue;
                };
                let p = self.pts;
                let clearance = incircle_clearance(&p[a], &p[b], &p[c], &p[d]);
                if clearance.abs() <= EPS && key(c, d) < e && self.convex(a, b, c, d) {
                    self.flip(a, b, c, d, t1, t2);
                    flipped = true;
                }
            }
            if !flipped {
                break;
            }
        }
    }
}

/// Edges `(i, j)`, `i < j`, of the Delaunay triangulation of `points`,
/// sorted ascending.
pub fn delaunay_triangulation(points: &[Point]) -> Result<Vec<(usize, usize)>> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput("Delaunay needs at least 3 points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite point"));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (&points[i], &points[j]);
        p.x.total_cmp(&q.x)
            .then(p.y.total_cmp(&q.y))
            .then(i.cmp(&j))
    });
    if order.windows(2).any(|w| points[w[0]] == points[w[1]]) {
        return Err(Error::DegenerateInput("duplicate points"));
    }

    let (o0, o1) = (order[0], order[1]);
    let Some(m) =
        (2..order.len()).find(|&k| orientation(&points[o0], &points[o1], &points[order[k]]) != 0)
    else {
        return Err(Error::DegenerateInput("all points collinear"));
    };

    let mut mesh = Mesh {
        pts: points,
        tris: Vec::new(),
        edges: BTreeMap::new(),
    };

    // Fan the collinear prefix to the first off-line point.
    let apex = order[m];
    let left = orientation(&points[o0], &points[o1], &points[apex]) > 0;
    for w in order[..m].windows(2) {
        if left {
            mesh.add([w[0], w[1], apex]);
        } else {
            mesh.add([w[1], w[0], apex]);
        }
    }
    let mut hull: Vec<usize> = if left {
        order[..=m].to_vec()
    } else {
        let mut h = alloc::vec![o0, apex];
        h.extend(order[1..m].iter().rev());
        h
    };

    for &p in &order[m + 1..] {
        let n = hull.len();
        let visible: Vec<bool> = (0..n)
            .map(|i| orientation(&points[hull[i]], &points[hull[(i + 1) % n]], &points[p]) < 0)
            .collect();
        let Some(start) = (0..n).find(|&i| visible[i] && !visible[(i + n - 1) % n]) else {
            return Err(Error::DegenerateInput("point on hull within tolerance"));
        };
        let mut run = 0;
        while run < n && visible[(start + run) % n] {
            let a = hull[(start + run) % n];
            let b = hull[(start + run + 1) % n];
            mesh.add([b, a, p]);
            run += 1;
        }
        // Keep hull[start] and hull[start + run], drop what lies between.
        let mut next = Vec::with_capacity(n + 1);
        for k in 0..=(n - run) {
            let v = hull[(start + run + k) % n];
            next.push(v);
        }
        next.push(p);
        hull = next;
    }

    mesh.lawson();
    mesh.resolve_cocircular();

    Ok(mesh.edges.keys().copied().collect())
}
