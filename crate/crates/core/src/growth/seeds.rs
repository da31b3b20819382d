use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{grid_points, Point};
use crate::graph::{EdgeKind, NodeId, SpatialNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedOrigin {
    ExistingBike,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    /// Node index in the growth network.
    pub node: usize,
    pub id: NodeId,
    pub point: Point,
    pub origin: SeedOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    pub seeds: Vec<Seed>,
    pub delta: f64,
}

impl SeedSet {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.seeds.iter().map(|s| s.point).collect()
    }
}

/// Kept seeds bucketed by `delta`-sized cells, so a separation check only
/// looks at the 3x3 neighborhood.
struct Separation {
    delta: f64,
    cells: BTreeMap<(i64, i64), Vec<Point>>,
}

impl Separation {
    fn cell(&self, p: &Point) -> (i64, i64) {
        (
            libm::floor(p.x / self.delta) as i64,
            libm::floor(p.y / self.delta) as i64,
        )
    }

    fn clear_of(&self, p: &Point) -> bool {
        let (cx, cy) = self.cell(p);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(pts) = self.cells.get(&(cx + dx, cy + dy)) {
                    if pts.iter().any(|q| q.distance(p) < self.delta) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: Point) {
        let c = self.cell(&p);
        self.cells.entry(c).or_default().push(p);
    }
}

/// Seeds on existing bike intersections (ascending id, greedily at least
/// `delta` apart), then on the network nodes nearest to a `delta` lattice
/// over the network's bounding box, discarding any closer than `delta` to
/// a kept seed.
pub fn place_seeds(net: &SpatialNetwork, delta: f64) -> Result<SeedSet> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::param("delta", "must be a positive finite length"));
    }
    let mut sep = Separation {
        delta,
        cells: BTreeMap::new(),
    };
    let mut seeds = Vec::new();
    let mut taken = alloc::vec![false; net.node_count()];
    for ix in net.nodes_on(EdgeKind::Bike) {
        let p = net.point(ix);
        if sep.clear_of(&p) {
            sep.insert(p);
            taken[ix] = true;
            seeds.push(Seed {
                node: ix,
                id: net.node_id(ix),
                point: p,
                origin: SeedOrigin::ExistingBike,
            });
        }
    }
    if let Some((lo, hi)) = net.bounds() {
        for g in grid_points(lo, hi, delta)? {
            let (id, _) = net.nearest_node(&g, |_| true)?;
            let ix = net.node_index(id).expect("snapped node exists");
            let p = net.point(ix);
            if taken[ix] || !sep.clear_of(&p) {
                continue;
            }
            sep.insert(p);
            taken[ix] = true;
            seeds.push(Seed {
                node: ix,
                id,
                point: p,
                origin: SeedOrigin::Grid,
            });
        }
    }
    Ok(SeedSet { seeds, delta })
}
