//! Synthetic cities written as input files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bikegrow_core::graph::EdgeSpec;
use bikegrow_core::ingest::{CrashPoint, OdRecord};
use bikegrow_core::{EdgeId, EdgeKind, NodeId, Point, SpatialNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Projected origin so coordinates are clearly not lon/lat.
pub const X0: f64 = 395_000.0;
pub const Y0: f64 = 4_990_000.0;

#[derive(Debug, Clone)]
pub struct City {
    pub nodes: Vec<(u64, Point)>,
    pub edges: Vec<(u64, u64, u64, EdgeKind)>,
    pub crashes: Vec<CrashPoint>,
    pub od: Vec<OdRecord>,
}

pub struct CityFiles {
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub crashes: PathBuf,
    pub od: PathBuf,
}

impl City {
    pub fn network(&self) -> SpatialNetwork {
        let nodes = self.nodes.iter().map(|(id, p)| (NodeId(*id), *p)).collect();
        let edges = self
            .edges
            .iter()
            .map(|&(id, u, v, kind)| EdgeSpec {
                id: EdgeId(id),
                u: NodeId(u),
                v: NodeId(v),
                kind,
                geometry: None,
            })
            .collect();
        SpatialNetwork::new(nodes, edges).expect("fixture network is valid")
    }

    pub fn point(&self, id: u64) -> Point {
        self.nodes.iter().find(|(n, _)| *n == id).expect("node").1
    }

    pub fn write(&self, dir: &Path) -> CityFiles {
        let mut nodes = String::from("node_id,x,y\n");
        for (id, p) in &self.nodes {
            writeln!(nodes, "{id},{},{}", p.x, p.y).unwrap();
        }
        let mut edges = String::from("edge_id,u,v,kind,length_m,geometry\n");
        for &(id, u, v, kind) in &self.edges {
            let (a, b) = (self.point(u), self.point(v));
            writeln!(
                edges,
                "{id},{u},{v},{},,{} {};{} {}",
                kind.as_str(),
                a.x,
                a.y,
                b.x,
                b.y
            )
            .unwrap();
        }
        let mut crashes = String::from("crash_id,x,y,year\n");
        for c in &self.crashes {
            writeln!(
                crashes,
                "{},{},{},{}",
                c.id, c.location.x, c.location.y, c.year
            )
            .unwrap();
        }
        let mut od = String::from("ox,oy,dx,dy,t_start,t_end\n");
        for r in &self.od {
            writeln!(
                od,
                "{},{},{},{},{},{}",
                r.origin.x, r.origin.y, r.destination.x, r.destination.y, r.start, r.end
            )
            .unwrap();
        }
        let files = CityFiles {
            nodes: dir.join("nodes.csv"),
            edges: dir.join("edges.csv"),
            crashes: dir.join("crashes.csv"),
            od: dir.join("od.csv"),
        };
        std::fs::write(&files.nodes, nodes).unwrap();
        std::fs::write(&files.edges, edges).unwrap();
        std::fs::write(&files.crashes, crashes).unwrap();
        std::fs::write(&files.od, od).unwrap();
        files
    }
}

pub const SIDE: u64 = 20;
pub const SPACING: f64 = 100.0;

pub fn grid_id(i: u64, j: u64) -> u64 {
    j * SIDE + i + 1
}

/// A 20 x 20 lattice city, 100 m blocks, with a short bike street in the
/// middle, crashes clustered in the north along streets and trip demand
/// clustered in the south.
pub fn north_south_city() -> City {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nodes = Vec::new();
    for j in 0..SIDE {
        for i in 0..SIDE {
            nodes.push((
                grid_id(i, j),
                Point::new(X0 + i as f64 * SPACING, Y0 + j as f64 * SPACING),
            ));
        }
    }
    let mut edges = Vec::new();
    let mut id = 0;
    for j in 0..SIDE {
        for i in 0..SIDE {
            if i + 1 < SIDE {
                id += 1;
                let bike = j == 10 && (8..12).contains(&i);
                let kind = if bike {
                    EdgeKind::Bike
                } else {
                    EdgeKind::Street
                };
                edges.push((id, grid_id(i, j), grid_id(i + 1, j), kind));
            }
            if j + 1 < SIDE {
                id += 1;
                edges.push((id, grid_id(i, j), grid_id(i, j + 1), EdgeKind::Street));
            }
        }
    }
    let mut crashes = Vec::new();
    for k in 0..80 {
        // A point within 20 m of a random street in rows 14..19.
        let i = rng.random_range(0..SIDE - 1) as f64;
        let j = rng.random_range(14..SIDE) as f64;
        let along = rng.random_range(0.0..SPACING);
        let off = rng.random_range(-20.0..20.0);
        let (x, y) = if rng.random_bool(0.5) {
            (i * SPACING + along, j * SPACING + off)
        } else {
            (i * SPACING + off, (j - 1.0) * SPACING + along)
        };
        crashes.push(CrashPoint {
            id: k + 1,
            location: Point::new(X0 + x, Y0 + y),
            year: 2015 + (k % 5) as i32,
        });
    }
    let mut od = Vec::new();
    for k in 0..400 {
        let p = |rng: &mut ChaCha8Rng| {
            Point::new(
                X0 + rng.random_range(0.0..1900.0),
                Y0 + rng.random_range(0.0..550.0),
            )
        };
        let (o, d) = (p(&mut rng), p(&mut rng));
        let t = 1_600_000_000 + k * 600;
        od.push(OdRecord {
            origin: o,
            destination: d,
            start: t,
            end: t + 900,
        });
    }
    City {
        nodes,
        edges,
        crashes,
        od,
    }
}
