//! Data preparation that does not touch files: the population-density
//! mask, extraction of e-scooter movements from position snapshots, and
//! routing of origin-destination records into trips.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::{bounds, point_in_polygon, Point, Polygon};
use crate::graph::{PathResult, ShortestPathTree, SpatialNetwork};

/// Minimum straight-line displacement of a movement, meters.
pub const MIN_DISPLACEMENT_M: f64 = 100.0;
/// Movements must complete in strictly less than this, seconds.
pub const MAX_GAP_S: i64 = 90 * 60;
/// Farthest an OD endpoint may be snapped to a node, meters.
pub const SNAP_CAP_M: f64 = 500.0;
/// Population density below which a statistical zone is masked, per km².
pub const DEFAULT_DENSITY_THRESHOLD: f64 = 1185.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CrashPoint {
    pub id: u64,
    pub location: Point,
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSnapshot {
    pub vehicle: String,
    pub timestamp: i64,
    pub location: Point,
    pub battery: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdRecord {
    pub origin: Point,
    pub destination: Point,
    pub start: i64,
    pub end: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trip {
    pub od: OdRecord,
    pub path: PathResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub polygons: Vec<Polygon>,
    /// Inhabitants per km².
    pub density: f64,
    pub is_park: bool,
}

impl Zone {
    pub fn contains(&self, p: &Point) -> bool {
        self.polygons.iter().any(|poly| point_in_polygon(p, poly))
    }
}

/// Drops nodes lying only in low-density, non-park zones (and their
/// edges). Nodes outside every zone, or inside at least one zone that is
/// dense enough or a park, are kept.
pub fn apply_density_mask(net: &SpatialNetwork, zones: &[Zone], threshold: f64) -> SpatialNetwork {
    let boxes: Vec<Vec<(Point, Point)>> = zones
        .iter()
        .map(|z| {
            z.polygons
                .iter()
                .map(|p| bounds(p.exterior()).expect("closed ring"))
                .collect()
        })
        .collect();
    net.retain_nodes(|ix| {
        let p = net.point(ix);
        let mut covered = false;
        for (zone, zb) in zones.iter().zip(&boxes) {
            let maybe = zb.iter().any(|(lo, hi)| {
                p.x >= lo.x - 1e-9 && p.x <= hi.x + 1e-9 && p.y >= lo.y - 1e-9 && p.y <= hi.y + 1e-9
            });
            if !maybe || !zone.contains(&p) {
                continue;
            }
            if zone.is_park || zone.density >= threshold {
                return true;
            }
            covered = true;
        }
        !covered
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MovementReport {
    pub records: Vec<OdRecord>,
    /// Consecutive snapshot pairs of the same vehicle that were examined.
    pub pairs: usize,
    pub too_short: usize,
    pub too_slow: usize,
    /// Battery rose between the two observations.
    pub charging: usize,
    /// Vehicle missed at least one query and reappeared without losing charge.
    pub relocation: usize,
}

/// Movements between consecutive observations of each vehicle.
///
/// A pair becomes a movement when the vehicle moved at least 100 m in under
/// 90 minutes. Movements are then dropped when the battery went up, or when
/// the vehicle was absent from an intermediate query (a timestamp at which
/// other vehicles were seen) and its battery did not go down. Output is
/// ordered by vehicle id, then time.
pub fn extract_movements(snapshots: &[VehicleSnapshot]) -> MovementReport {
    let mut sorted: Vec<&VehicleSnapshot> = snapshots.iter().collect();
    sorted.sort_by(|a, b| {
        a.vehicle
            .cmp(&b.vehicle)
            .then(a.timestamp.cmp(&b.timestamp))
    });
    let mut queries: Vec<i64> = snapshots.iter().map(|s| s.timestamp).collect();
    queries.sort_unstable();
    queries.dedup();
    let absent_between = |t1: i64, t2: i64| {
        let first_after = queries.partition_point(|&t| t <= t1);
        first_after < queries.len() && queries[first_after] < t2
    };

    let mut report = MovementReport::default();
    for w in sorted.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.vehicle != b.vehicle {
            continue;
        }
        report.pairs += 1;
        if a.location.distance(&b.location) < MIN_DISPLACEMENT_M {
            report.too_short += 1;
        } else if b.timestamp - a.timestamp >= MAX_GAP_S {
            report.too_slow += 1;
        } else if b.battery > a.battery {
            report.charging += 1;
        } else if b.battery >= a.battery && absent_between(a.timestamp, b.timestamp) {
            report.relocation += 1;
        } else {
            report.records.push(OdRecord {
                origin: a.location,
                destination: b.location,
                start: a.timestamp,
                end: b.timestamp,
            });
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapOutcome {
    Snapped(usize, usize),
    TooFar,
    SameNode,
}

/// Snaps both ends of every record to the nearest node within `cap` meters.
pub fn snap_od(net: &SpatialNetwork, od: &[OdRecord], cap: f64) -> Vec<SnapOutcome> {
    crate::par::map(od, |r| {
        let snap = |p: &Point| net.index().nearest(net.points(), p, |_| true);
        match (snap(&r.origin), snap(&r.destination)) {
            (Some((o, od)), Some((d, dd))) if od <= cap && dd <= cap => {
                if o == d {
                    SnapOutcome::SameNode
                } else {
                    SnapOutcome::Snapped(o, d)
                }
            }
            _ => SnapOutcome::TooFar,
        }
    })
}

/// Node and edge index sequences of a route.
pub type Route = (Vec<usize>, Vec<usize>);

/// Shortest-path routes for every snapped pair, grouped by origin so each
/// origin runs one search. `weight` is indexed by edge index. Results are in
/// input order; `None` for unsnapped or unreachable pairs.
pub fn route_pairs(
    net: &SpatialNetwork,
    pairs: &[SnapOutcome],
    weight: &[f64],
) -> Result<Vec<Option<Route>>> {
    crate::graph::check_weights(net, weight, false)?;
    let mut origins: Vec<usize> = pairs
        .iter()
        .filter_map(|p| match p {
            SnapOutcome::Snapped(o, _) => Some(*o),
            _ => None,
        })
        .collect();
    origins.sort_unstable();
    origins.dedup();
    let groups: Vec<(usize, Vec<usize>)> = origins
        .iter()
        .map(|&o| {
            let mut targets: Vec<usize> = pairs
                .iter()
                .filter_map(|p| match p {
                    SnapOutcome::Snapped(a, d) if *a == o => Some(*d),
                    _ => None,
                })
                .collect();
            targets.sort_unstable();
            targets.dedup();
            (o, targets)
        })
        .collect();
    let trees = crate::par::map(&groups, |(o, targets)| {
        let tree = ShortestPathTree::build_unchecked(net, *o, weight, Some(targets));
        targets
            .iter()
            .map(|&t| (t, tree.path_indices(t)))
            .collect::<Vec<_>>()
    });
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        out.push(match p {
            SnapOutcome::Snapped(o, d) => {
                let g = origins.binary_search(o).expect("origin listed");
                let row = &trees[g];
                let k = row
                    .binary_search_by_key(d, |(t, _)| *t)
                    .expect("target listed");
                row[k].1.clone()
            }
            _ => None,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripSet {
    pub trips: Vec<Trip>,
    pub too_far: usize,
    pub same_node: usize,
    pub unreachable: usize,
}

/// Routes each record between its nearest nodes by geometric length.
/// Records snapping farther than `cap`, snapping both ends to one node, or
/// without a route are dropped and counted.
pub fn od_to_trips(net: &SpatialNetwork, od: &[OdRecord], cap: f64) -> TripSet {
    let snapped = snap_od(net, od, cap);
    let lengths = net.lengths();
    let routes = route_pairs(net, &snapped, &lengths).expect("lengths are valid weights");
    let mut set = TripSet::default();
    for ((rec, snap), route) in od.iter().zip(&snapped).zip(routes) {
        match (snap, route) {
            (SnapOutcome::TooFar, _) => set.too_far += 1,
            (SnapOutcome::SameNode, _) => set.same_node += 1,
            (SnapOutcome::Snapped(..), None) => set.unreachable += 1,
            (SnapOutcome::Snapped(..), Some((nodes, edges))) => set.trips.push(Trip {
                od: *rec,
                path: net.to_path(&nodes, &edges, &lengths),
            }),
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{edge, net};
    use crate::graph::{EdgeKind, NodeId};
    use alloc::vec;

    fn square_zone(x0: f64, y0: f64, x1: f64, y1: f64, density: f64, is_park: bool) -> Zone {
        Zone {
            polygons: vec![Polygon::new(
                vec![
                    Point::new(x0, y0),
                    Point::new(x1, y0),
                    Point::new(x1, y1),
                    Point::new(x0, y1),
                ],
                vec![],
            )
            .unwrap()],
            density,
            is_park,
        }
    }

    fn row_network() -> SpatialNetwork {
        net(
            &[
                (1, 50., 50.),
                (2, 150., 50.),
                (3, 250., 50.),
                (4, 350., 50.),
            ],
            vec![
                edge(1, 1, 2, EdgeKind::Street),
                edge(2, 2, 3, EdgeKind::Street),
                edge(3, 3, 4, EdgeKind::Street),
            ],
        )
    }

    #[test]
    fn density_mask_rules() {
        let n = row_network();
        let zones = vec![
            square_zone(0., 0., 100., 100., 500., false),
            square_zone(100.5, 0., 200., 100., 500., true),
            square_zone(200.5, 0., 300., 100., 5000., false),
        ];
        let masked = apply_density_mask(&n, &zones, DEFAULT_DENSITY_THRESHOLD);
        let ids: Vec<NodeId> = masked.nodes().map(|(id, _)| id).collect();
        assert_eq!(ids, vec![NodeId(2), NodeId(3), NodeId(4)]);
        assert_eq!(masked.edge_count(), 2);
        let twice = apply_density_mask(&masked, &zones, DEFAULT_DENSITY_THRESHOLD);
        assert_eq!(twice.edges(), masked.edges());
        assert_eq!(twice.node_count(), masked.node_count());
    }

    #[test]
    fn dense_neighbor_on_shared_border_keeps_node() {
        let n = net(&[(1, 100., 50.)], vec![]);
        let zones = vec![
            square_zone(0., 0., 100., 100., 10., false),
            square_zone(100., 0., 200., 100., 9000., false),
        ];
        assert_eq!(apply_density_mask(&n, &zones, 1185.0).node_count(), 1);
    }

    fn snap(v: &str, t: i64, x: f64, y: f64, battery: f64) -> VehicleSnapshot {
        VehicleSnapshot {
            vehicle: v.into(),
            timestamp: t,
            location: Point::new(x, y),
            battery,
        }
    }

    #[test]
    fn movement_rules() {
        let cases = [
            (50.0, 30 * 60, 80.0, 72.0, 0usize),
            (500.0, 40 * 60, 80.0, 72.0, 1),
            (500.0, 40 * 60, 20.0, 95.0, 0),
            (500.0, 120 * 60, 80.0, 72.0, 0),
        ];
        for (dx, gap, b1, b2, expected) in cases {
            let log = [snap("a", 0, 0., 0., b1), snap("a", gap, dx, 0., b2)];
            assert_eq!(
                extract_movements(&log).records.len(),
                expected,
                "{dx} {gap} {b1} {b2}"
            );
        }
    }

    #[test]
    fn reappearance_without_discharge_is_relocation() {
        let log = [
            snap("a", 0, 0., 0., 60.),
            snap("b", 0, 9000., 0., 50.),
            snap("b", 1200, 9000., 0., 50.),
            snap("a", 2400, 800., 0., 60.),
        ];
        let r = extract_movements(&log);
        assert_eq!(r.relocation, 1);
        assert!(r.records.is_empty());
        // Seen in every query: same battery is a real (short) ride.
        let log = [snap("a", 0, 0., 0., 60.), snap("a", 2400, 800., 0., 60.)];
        assert_eq!(extract_movements(&log).records.len(), 1);
    }

    #[test]
    fn movements_sorted_by_vehicle_then_time() {
        let log = [
            snap("b", 600, 300., 0., 50.),
            snap("a", 600, 0., 400., 70.),
            snap("b", 0, 0., 0., 60.),
            snap("a", 0, 0., 0., 80.),
        ];
        let r = extract_movements(&log);
        assert_eq!(r.pairs, 2);
        assert_eq!(r.records[0].destination, Point::new(0., 400.));
        assert_eq!(r.records[1].destination, Point::new(300., 0.));
        assert!(extract_movements(&[]).records.is_empty());
    }

    fn od(ox: f64, oy: f64, dx: f64, dy: f64) -> OdRecord {
        OdRecord {
            origin: Point::new(ox, oy),
            destination: Point::new(dx, dy),
            start: 0,
            end: 600,
        }
    }

    #[test]
    fn trips_drop_rules() {
        let n = row_network();
        let set = od_to_trips(
            &n,
            &[
                od(50., 50., 350., 55.),
                od(52., 50., 55., 50.),
                od(50., 650., 350., 50.),
            ],
            SNAP_CAP_M,
        );
        assert_eq!(set.trips.len(), 1);
        assert_eq!(set.same_node, 1);
        assert_eq!(set.too_far, 1);
        assert_eq!(set.trips[0].path.length, 300.0);
        assert_eq!(set.trips[0].path.nodes.len(), 4);
    }

    #[test]
    fn unreachable_trip_dropped() {
        let n = net(
            &[(1, 0., 0.), (2, 100., 0.), (3, 400., 0.), (4, 500., 0.)],
            vec![
                edge(1, 1, 2, EdgeKind::Street),
                edge(2, 3, 4, EdgeKind::Street),
            ],
        );
        let set = od_to_trips(&n, &[od(0., 0., 500., 0.)], SNAP_CAP_M);
        assert_eq!(set.unreachable, 1);
        assert!(set.trips.is_empty());
    }
}
