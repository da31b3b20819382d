//! Planar geometry in a projected frame (meters).

mod delaunay;

pub use delaunay::delaunay_triangulation;

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance, in meters, for orientation and on-segment tests.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Twice the signed area of `(a, b, c)`; positive when counter-clockwise.
pub fn cross(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Orientation of `c` relative to the directed line `a -> b`: +1 left,
/// -1 right, 0 when `c` is within [`EPS`] meters of the line.
pub fn orientation(a: &Point, b: &Point, c: &Point) -> i8 {
    let len = a.distance(b);
    let signed = if len > 0.0 { cross(a, b, c) / len } else { 0.0 };
    if signed > EPS {
        1
    } else if signed < -EPS {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGeometry("non-finite segment endpoint"));
        }
        if a == b {
            return Err(Error::InvalidGeometry("zero-length segment"));
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    pub fn distance_to(&self, p: &Point) -> f64 {
        point_segment_distance(p, &self.a, &self.b)
    }

    fn min_max(&self) -> (Point, Point) {
        (
            Point::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)),
            Point::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)),
        )
    }
}

/// `true` when the segments meet at a point interior to both, or overlap
/// collinearly over a positive length. Touching at endpoints (or an
/// endpoint resting on the other segment) is not a crossing.
pub fn segments_cross(s1: &Segment, s2: &Segment) -> bool {
    let (lo1, hi1) = s1.min_max();
    let (lo2, hi2) = s2.min_max();
    if lo1.x > hi2.x + EPS || lo2.x > hi1.x + EPS || lo1.y > hi2.y + EPS || lo2.y > hi1.y + EPS {
        return false;
    }
    let o1 = orientation(&s1.a, &s1.b, &s2.a);
    let o2 = orientation(&s1.a, &s1.b, &s2.b);
    let o3 = orientation(&s2.a, &s2.b, &s1.a);
    let o4 = orientation(&s2.a, &s2.b, &s1.b);

    if o1 == 0 && o2 == 0 {
        // Collinear: measure the overlap along s1.
        let len = s1.length();
        let ux = (s1.b.x - s1.a.x) / len;
        let uy = (s1.b.y - s1.a.y) / len;
        let t = |p: &Point| (p.x - s1.a.x) * ux + (p.y - s1.a.y) * uy;
        let (t3, t4) = (t(&s2.a), t(&s2.b));
        let lo = t3.min(t4).max(0.0);
        let hi = t3.max(t4).min(len);
        return hi - lo > EPS;
    }
    o1 * o2 < 0 && o3 * o4 < 0
}

pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len_sq = dx * dx + dy * dy;
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0);
    p.distance(&Point::new(a.x + t * dx, a.y + t * dy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point>,
    length: f64,
}

impl Polyline {
    /// Builds a polyline, dropping consecutive duplicate vertices.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let mut clean: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if !p.is_finite() {
                return Err(Error::InvalidGeometry("non-finite polyline vertex"));
            }
            if clean.last() != Some(&p) {
                clean.push(p);
            }
        }
        if clean.len() < 2 {
            return Err(Error::InvalidGeometry(
                "polyline needs two distinct vertices",
            ));
        }
        let length = clean.windows(2).map(|w| w[0].distance(&w[1])).sum();
        Ok(Polyline {
            points: clean,
            length,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    pub fn reversed(&self) -> Polyline {
        let mut points = self.points.clone();
        points.reverse();
        Polyline {
            points,
            length: self.length,
        }
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn extend(&mut self, other: &Polyline) {
        let skip = usize::from(other.first() == self.last());
        for p in &other.points[skip..] {
            let prev = self.last();
            self.length += prev.distance(p);
            self.points.push(*p);
        }
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        bounds(&self.points).expect("polyline has vertices")
    }
}

pub fn point_polyline_distance(p: &Point, line: &Polyline) -> f64 {
    line.points
        .windows(2)
        .map(|w| point_segment_distance(p, &w[0], &w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Polygon with an exterior ring and optional holes. Rings are closed
/// (first vertex repeated at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

impl Polygon {
    /// Closes open rings; rejects rings with fewer than three distinct vertices.
    pub fn new(exterior: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self> {
        let exterior = close_ring(exterior)?;
        let holes = holes
            .into_iter()
            .map(close_ring)
            .collect::<Result<Vec<_>>>()?;
        Ok(Polygon { exterior, holes })
    }

    pub fn exterior(&self) -> &[Point] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }
}

fn close_ring(mut ring: Vec<Point>) -> Result<Vec<Point>> {
    if ring.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite ring vertex"));
    }
    if ring.first() != ring.last() {
        let first = ring[0];
        ring.push(first);
    }
    if ring.len() < 4 {
        return Err(Error::InvalidGeometry("ring needs three distinct vertices"));
    }
    Ok(ring)
}

fn on_ring(p: &Point, ring: &[Point]) -> bool {
    ring.windows(2)
        .any(|w| point_segment_distance(p, &w[0], &w[1]) <= EPS)
}

fn ring_contains(p: &Point, ring: &[Point]) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Even-odd containment; points on any ring boundary count as inside.
pub fn point_in_polygon(p: &Point, poly: &Polygon) -> bool {
    if on_ring(p, &poly.exterior) || poly.holes.iter().any(|h| on_ring(p, h)) {
        return true;
    }
    ring_contains(p, &poly.exterior) && !poly.holes.iter().any(|h| ring_contains(p, h))
}

/// Lattice with spacing `delta` anchored at `min`, covering `[min, max]`
/// without adding a row or column past `max`. Row-major (x fastest).
pub fn grid_points(min: Point, max: Point, delta: f64) -> Result<Vec<Point>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::param("delta", "must be a positive finite length"));
    }
    if !min.is_finite() || !max.is_finite() || min.x > max.x || min.y > max.y {
        return Err(Error::param("bbox", "min must not exceed max"));
    }
    let steps = |extent: f64| libm::floor(extent / delta + 1e-9) as usize + 1;
    let nx = steps(max.x - min.x);
    let ny = steps(max.y - min.y);
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(Point::new(
                min.x + i as f64 * delta,
                min.y + j as f64 * delta,
            ));
        }
    }
    Ok(out)
}

/// Axis-aligned bounds of a point set.
pub fn bounds(points: &[Point]) -> Option<(Point, Point)> {
    let first = points.first()?;
    let mut lo = *first;
    let mut hi = *first;
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    Some((lo, hi))
}

/// Rejects point sets whose whole extent fits in lon/lat ranges.
pub fn check_projected<'a>(points: impl IntoIterator<Item = &'a Point>) -> Result<()> {
    let mut any = false;
    for p in points {
        any = true;
        if p.x.abs() > 180.0 || p.y.abs() > 90.0 {
            return Ok(());
        }
    }
    if any {
        Err(Error::GeographicCoordinates)
    } else {
        Ok(())
    }
}
