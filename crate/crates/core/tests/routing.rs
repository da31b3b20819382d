use bikegrow_core::graph::EdgeSpec;
use bikegrow_core::ingest::{od_to_trips, OdRecord, SNAP_CAP_M};
use bikegrow_core::{EdgeId, EdgeKind, NodeId, Point, SpatialNetwork};
use proptest::prelude::*;

fn build(pts: &[(f64, f64)], pairs: &[(usize, usize)]) -> Option<SpatialNetwork> {
    let nodes = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| (NodeId(i as u64), Point::new(x, y)))
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    let edges = pairs
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .filter(|&(a, b)| a != b && seen.insert((a, b)))
        .enumerate()
        .map(|(k, (a, b))| EdgeSpec {
            id: EdgeId(k as u64),
            u: NodeId(a as u64),
            v: NodeId(b as u64),
            kind: EdgeKind::Street,
            geometry: None,
        })
        .collect();
    SpatialNetwork::new(nodes, edges).ok()
}

fn all_pairs(net: &SpatialNetwork) -> Vec<Vec<f64>> {
    let n = net.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (e, edge) in net.edges().iter().enumerate() {
        let (u, v) = net.edge_ends(e);
        let w = edge.length();
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn nearest(net: &SpatialNetwork, p: Point) -> (usize, f64) {
    (0..net.node_count())
        .map(|i| (i, net.point(i).distance(&p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trips_follow_shortest_routes_between_nearest_nodes(
        pts in prop::collection::vec((0.0f64..3000.0, 0.0f64..3000.0), 2..16),
        pairs in prop::collection::vec((0usize..16, 0usize..16), 1..30),
        ends in prop::collection::vec((-400.0f64..3400.0, -400.0f64..3400.0, -400.0f64..3400.0, -400.0f64..3400.0), 1..25),
    ) {
        let n = pts.len();
        let pairs: Vec<_> = pairs.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let Some(net) = build(&pts, &pairs) else { return Ok(()) };
        let od: Vec<OdRecord> = ends
            .iter()
            .map(|&(ox, oy, dx, dy)| OdRecord { origin: Point::new(ox, oy), destination: Point::new(dx, dy), start: 0, end: 60 })
            .collect();
        let set = od_to_trips(&net, &od, SNAP_CAP_M);
        let dist = all_pairs(&net);

        let (mut too_far, mut same, mut unreachable, mut routed) = (0, 0, 0, Vec::new());
        for r in &od {
            let (o, od_) = nearest(&net, r.origin);
            let (d, dd) = nearest(&net, r.destination);
            if od_ > SNAP_CAP_M || dd > SNAP_CAP_M {
                too_far += 1;
            } else if o == d {
                same += 1;
            } else if dist[o][d].is_infinite() {
                unreachable += 1;
            } else {
                routed.push((*r, o, d));
            }
        }
        prop_assert_eq!((set.too_far, set.same_node, set.unreachable), (too_far, same, unreachable));
        prop_assert_eq!(set.trips.len(), routed.len());
        for (trip, (rec, o, d)) in set.trips.iter().zip(&routed) {
            prop_assert_eq!(&trip.od, rec);
            prop_assert_eq!(trip.path.nodes.first().copied(), Some(net.node_id(*o)));
            prop_assert_eq!(trip.path.nodes.last().copied(), Some(net.node_id(*d)));
            prop_assert!((trip.path.length - dist[*o][*d]).abs() <= 1e-9 * dist[*o][*d].max(1.0));
            let summed: f64 = trip.path.edges.iter().map(|e| net.edge(net.edge_index(*e).unwrap()).length()).sum();
            prop_assert!((summed - trip.path.length).abs() <= 1e-9 * summed.max(1.0));
            prop_assert_eq!(trip.path.edges.len() + 1, trip.path.nodes.len());
        }
    }
}
