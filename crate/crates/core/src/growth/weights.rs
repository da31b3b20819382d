//! Demand and safety weighting of links.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{point_polyline_distance, Polyline};
use crate::graph::{NodeId, SpatialNetwork};
use crate::ingest::{CrashPoint, Trip};

use super::Link;

/// Crashes within `buffer` meters of `geometry`, per km of geometry.
pub fn count_crashes_per_km(
    geometry: &Polyline,
    crashes: &[CrashPoint],
    buffer: f64,
) -> Result<f64> {
    if !(buffer > 0.0) {
        return Err(Error::param("buffer", "must be positive"));
    }
    let km = geometry.length() / 1000.0;
    if !(km > 0.0) {
        return Err(Error::InvalidGeometry("zero-length link"));
    }
    Ok(crashes_near(geometry, crashes, buffer) as f64 / km)
}

fn crashes_near(geometry: &Polyline, crashes: &[CrashPoint], buffer: f64) -> usize {
    let (lo, hi) = geometry.bounds();
    crashes
        .iter()
        .filter(|c| {
            let p = c.location;
            p.x >= lo.x - buffer
                && p.x <= hi.x + buffer
                && p.y >= lo.y - buffer
                && p.y <= hi.y + buffer
                && point_polyline_distance(&p, geometry) <= buffer
        })
        .count()
}

/// Node transits of `trips` through `link_nodes`, per km of routed length:
/// each trip contributes one per link node on its path.
pub fn count_trips_per_km(
    link_nodes: &[NodeId],
    trips: &[Trip],
    routed_length_km: f64,
) -> Result<f64> {
    if !(routed_length_km > 0.0) {
        return Err(Error::InvalidGeometry("zero-length link"));
    }
    let set: BTreeSet<NodeId> = link_nodes.iter().copied().collect();
    let transits: usize = trips
        .iter()
        .map(|t| t.path.nodes.iter().filter(|n| set.contains(n)).count())
        .sum();
    Ok(transits as f64 / routed_length_km)
}

/// Trips passing each node of `net`, by node index. Path nodes missing from
/// `net` are ignored.
pub fn node_transits(net: &SpatialNetwork, trips: &[Trip]) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; net.node_count()];
    for t in trips {
        for id in &t.path.nodes {
            if let Some(ix) = net.node_index(*id) {
                counts[ix] += 1;
            }
        }
    }
    counts
}

/// Weighted distance `alpha * d_trip + (1 - alpha) * d_crash` with
/// `d_x = (d + 1) / (1 + 9 N_x)`, `d` in meters and `N_x` normalized to
/// `[0, 1]`.
pub fn weighted_distance(d: f64, n_trip: f64, n_crash: f64, alpha: f64) -> f64 {
    let d_trip = (d + 1.0) / (1.0 + 9.0 * n_trip);
    let d_crash = (d + 1.0) / (1.0 + 9.0 * n_crash);
    let w = alpha * d_trip + (1.0 - alpha) * d_crash;
    // Rounding may push the blend one ulp past either term.
    w.clamp(d_trip.min(d_crash), d_trip.max(d_crash))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::param("alpha", "must lie in [0, 1]"))
    }
}

fn normalizer(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Normalizes trip and crash densities by their maximum over all links and
/// sets each link's `d_w`.
pub fn weight_links(links: &mut [Link], alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    let max_trip = normalizer(links.iter().map(|l| l.n_trip));
    let max_crash = normalizer(links.iter().map(|l| l.n_crash));
    let norm = |v: f64, max: f64| if max > 0.0 { v / max } else { 0.0 };
    for l in links.iter_mut() {
        l.d_w = weighted_distance(
            l.routed_length,
            norm(l.n_trip, max_trip),
            norm(l.n_crash, max_crash),
            alpha,
        );
    }
    Ok(())
}

/// Trip and crash densities for every link.
pub(crate) fn count_links(
    net: &SpatialNetwork,
    links: &mut [Link],
    trips: &[Trip],
    crashes: &[CrashPoint],
    buffer: f64,
) -> Result<()> {
    if !(buffer > 0.0) {
        return Err(Error::param("buffer", "must be positive"));
    }
    let transits = node_transits(net, trips);
    let counts = crate::par::map(links, |l| {
        let mut nodes: Vec<usize> = l
            .route
            .nodes
            .iter()
            .filter_map(|id| net.node_index(*id))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let t: u64 = nodes.iter().map(|&n| transits[n]).sum();
        (t, crashes_near(&l.geometry, crashes, buffer))
    });
    for (l, (t, c)) in links.iter_mut().zip(counts) {
        let km = l.routed_length / 1000.0;
        if !(km > 0.0) {
            return Err(Error::InvalidGeometry("zero-length link"));
        }
        l.n_trip = t as f64 / km;
        l.n_crash = c as f64 / (l.geometry.length() / 1000.0);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::graph::PathResult;
    use crate::ingest::OdRecord;
    use alloc::vec;

    fn crash(x: f64, y: f64) -> CrashPoint {
        CrashPoint {
            id: 0,
            location: Point::new(x, y),
            year: 2020,
        }
    }

    fn trip(nodes: &[u64]) -> Trip {
        let o = Point::new(0., 0.);
        Trip {
            od: OdRecord {
                origin: o,
                destination: o,
                start: 0,
                end: 0,
            },
            path: PathResult {
                nodes: nodes.iter().map(|&n| NodeId(n)).collect(),
                edges: vec![],
                cost: 0.0,
                length: 0.0,
            },
        }
    }

    #[test]
    fn crash_counts() {
        let km = Polyline::new(vec![Point::new(0., 0.), Point::new(1000., 0.)]).unwrap();
        assert_eq!(
            count_crashes_per_km(&km, &[crash(500., 30.)], 50.).unwrap(),
            1.0
        );
        assert_eq!(
            count_crashes_per_km(&km, &[crash(500., 80.)], 50.).unwrap(),
            0.0
        );
        let two = Polyline::new(vec![Point::new(0., 0.), Point::new(2000., 0.)]).unwrap();
        let cs = [
            crash(10., 5.),
            crash(1500., -49.),
            crash(2040., 0.),
            crash(900., 300.),
        ];
        assert_eq!(count_crashes_per_km(&two, &cs, 50.).unwrap(), 1.5);
        assert!(count_crashes_per_km(&two, &cs, 0.).is_err());
    }

    #[test]
    fn trip_transits_match_the_three_trip_scenario() {
        let link: Vec<NodeId> = (1..=10).map(NodeId).collect();
        let trips = [
            trip(&[50, 51, 1, 52]),
            trip(&[60, 3, 4, 5, 6, 7, 61]),
            trip(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
            trip(&[70, 71]),
        ];
        assert_eq!(count_trips_per_km(&link, &trips, 1.0).unwrap(), 16.0);
        assert_eq!(count_trips_per_km(&link, &trips, 2.0).unwrap(), 8.0);
        assert_eq!(count_trips_per_km(&link, &trips[3..], 2.0).unwrap(), 0.0);
        assert!(count_trips_per_km(&link, &trips, 0.0).is_err());
    }

    #[test]
    fn weighted_distance_examples() {
        for a in [0.0, 0.3, 1.0] {
            assert_eq!(weighted_distance(100., 0., 0., a), 101.0);
        }
        assert_eq!(weighted_distance(100., 1., 0., 1.0), 10.1);
        assert_eq!(weighted_distance(99., 1., 0., 0.5), 55.0);
    }

    #[test]
    fn alpha_outside_unit_interval_rejected() {
        assert!(weight_links(&mut [], 1.2).is_err());
        assert!(weight_links(&mut [], -0.1).is_err());
        assert!(weight_links(&mut [], f64::NAN).is_err());
    }

    proptest::proptest! {
        #[test]
        fn weighted_distance_bounds(d in 0.0f64..10_000.0, nt in 0.0f64..=1.0, nc in 0.0f64..=1.0, a in 0.0f64..=1.0) {
            let w = weighted_distance(d, nt, nc, a);
            let dt = (d + 1.0) / (1.0 + 9.0 * nt);
            let dc = (d + 1.0) / (1.0 + 9.0 * nc);
            proptest::prop_assert!(w >= (d + 1.0) / 10.0 && w <= d + 1.0);
            proptest::prop_assert!((w - (a * dt + (1.0 - a) * dc)).abs() <= 1e-12 * w.max(1.0));
            proptest::prop_assert_eq!(weighted_distance(d, nt, nc, 0.0), dc);
            proptest::prop_assert_eq!(weighted_distance(d, nt, nc, 1.0), dt);
        }
    }
}
