//! Coverage, connectivity and comparison metrics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{point_polyline_distance, Point};
use crate::graph::{connected_components, EdgeId, EdgeKind, SpatialNetwork};
use crate::growth::GrowthSnapshot;
use crate::ingest::{route_pairs, CrashPoint, SnapOutcome};

pub const DEFAULT_DETOURS: [f64; 2] = [0.0, 0.25];

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub d_km: f64,
    pub crash_coverage: f64,
    /// One value per evaluated detour, in the order given.
    pub trip_coverage: Vec<f64>,
    pub components: usize,
}

/// Bike edge indices bucketed over square cells, each edge listed in every
/// cell its buffered bounding box touches.
struct BikeBuckets {
    cell: f64,
    cells: BTreeMap<(i64, i64), Vec<usize>>,
}

impl BikeBuckets {
    fn new(net: &SpatialNetwork, buffer: f64) -> Self {
        let cell = (4.0 * buffer).max(200.0);
        let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for (e, edge) in net.edges().iter().enumerate() {
            if edge.kind != EdgeKind::Bike {
                continue;
            }
            let (lo, hi) = edge.geometry.bounds();
            let c = |v: f64| libm::floor(v / cell) as i64;
            for cy in c(lo.y - buffer)..=c(hi.y + buffer) {
                for cx in c(lo.x - buffer)..=c(hi.x + buffer) {
                    cells.entry((cx, cy)).or_default().push(e);
                }
            }
        }
        BikeBuckets { cell, cells }
    }

    fn near(&self, p: &Point) -> &[usize] {
        let key = (
            libm::floor(p.x / self.cell) as i64,
            libm::floor(p.y / self.cell) as i64,
        );
        self.cells.get(&key).map_or(&[], Vec::as_slice)
    }
}

/// Share of crashes within `buffer` meters of any bike edge.
pub fn crash_coverage(net: &SpatialNetwork, crashes: &[CrashPoint], buffer: f64) -> Result<f64> {
    if crashes.is_empty() {
        return Err(Error::Empty("crash set"));
    }
    if !(buffer > 0.0) {
        return Err(Error::param("buffer", "must be positive"));
    }
    let buckets = BikeBuckets::new(net, buffer);
    let covered = crashes
        .iter()
        .filter(|c| {
            buckets
                .near(&c.location)
                .iter()
                .any(|&e| point_polyline_distance(&c.location, &net.edge(e).geometry) <= buffer)
        })
        .count();
    Ok(covered as f64 / crashes.len() as f64)
}

/// Share of routed length on bike edges. Pairs are routed with street edges
/// costing `length * (1 + detour)` and bike edges their length; shares use
/// true lengths.
pub fn trip_coverage(net: &SpatialNetwork, pairs: &[SnapOutcome], detour: f64) -> Result<f64> {
    if !(detour >= 0.0) || !detour.is_finite() {
        return Err(Error::param("detour", "must be a non-negative factor"));
    }
    let lengths = net.lengths();
    let cost: Vec<f64> = net
        .edges()
        .iter()
        .zip(&lengths)
        .map(|(e, l)| match e.kind {
            EdgeKind::Street => l * (1.0 + detour),
            EdgeKind::Bike => *l,
        })
        .collect();
    let routes = route_pairs(net, pairs, &cost)?;
    let mut bike = 0.0;
    let mut total = 0.0;
    let mut routed = 0usize;
    for (_, edges) in routes.iter().flatten() {
        routed += 1;
        for &e in edges {
            total += lengths[e];
            if net.edge(e).kind == EdgeKind::Bike {
                bike += lengths[e];
            }
        }
    }
    if routed == 0 || !(total > 0.0) {
        return Err(Error::Empty("no routable trip"));
    }
    Ok(bike / total)
}

/// Gain of a metric at budget D over the existing network.
pub fn potential_improvement(mu_d: f64, mu_0: f64) -> f64 {
    mu_d - mu_0
}

/// Connected components of the bike edges.
pub fn component_count(net: &SpatialNetwork) -> usize {
    connected_components(net, |e| net.edge(e).kind == EdgeKind::Bike).count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TradeoffWarning {
    /// Trip improvement decreases somewhere along alpha.
    TripNotIncreasing,
    /// Crash improvement increases somewhere along alpha.
    CrashNotDecreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffResult {
    pub d_km: f64,
    pub alpha_star: f64,
    /// Mean of the two interpolated improvements at `alpha_star`; both are
    /// equal when the curves cross.
    pub improvement: f64,
    /// False when the curves never meet and `alpha_star` is a boundary.
    pub crossing: bool,
    pub warnings: Vec<TradeoffWarning>,
}

/// Alpha where trip and crash improvements meet, by linear interpolation
/// between samples `(alpha, trip improvement, crash improvement)`.
pub fn tradeoff_alpha(samples: &[(f64, f64, f64)], d_km: f64) -> Result<TradeoffResult> {
    if samples.len() < 2 {
        return Err(Error::param("samples", "need at least two alpha values"));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    if s.iter()
        .any(|(a, t, c)| !(0.0..=1.0).contains(a) || !t.is_finite() || !c.is_finite())
    {
        return Err(Error::param(
            "samples",
            "alpha must lie in [0, 1] with finite values",
        ));
    }
    if s.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::param("samples", "duplicate alpha"));
    }
    let mut warnings = Vec::new();
    if s.windows(2).any(|w| w[1].1 < w[0].1) {
        warnings.push(TradeoffWarning::TripNotIncreasing);
    }
    if s.windows(2).any(|w| w[1].2 > w[0].2) {
        warnings.push(TradeoffWarning::CrashNotDecreasing);
    }
    let f: Vec<f64> = s.iter().map(|(_, t, c)| t - c).collect();
    let lerp = |k: usize, t: f64| {
        let (a, b) = (s[k], s[k + 1]);
        (a.1 + (b.1 - a.1) * t, a.2 + (b.2 - a.2) * t)
    };
    let mut found = None;
    for k in 0..s.len() {
        if f[k] == 0.0 {
            found = Some((s[k].0, s[k].1, s[k].2));
            break;
        }
        if k + 1 < s.len() && (f[k] < 0.0) != (f[k + 1] < 0.0) && f[k + 1] != 0.0 {
            let t = f[k] / (f[k] - f[k + 1]);
            let (tr, cr) = lerp(k, t);
            found = Some((s[k].0 + (s[k + 1].0 - s[k].0) * t, tr, cr));
            break;
        }
    }
    let (alpha_star, trip, crash, crossing) = match found {
        Some((a, t, c)) => (a, t, c, true),
        None => {
            let last = s.len() - 1;
            let k = if f[last].abs() < f[0].abs() { last } else { 0 };
            (s[k].0, s[k].1, s[k].2, false)
        }
    };
    Ok(TradeoffResult {
        d_km,
        alpha_star,
        improvement: 0.5 * (trip + crash),
        crossing,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    /// Share of A's km also in B.
    pub a_in_b: f64,
    /// Share of B's km also in A.
    pub b_in_a: f64,
    pub mean: f64,
}

/// Km overlap between two sets of edges of `net`.
pub fn network_overlap(net: &SpatialNetwork, a: &[EdgeId], b: &[EdgeId]) -> Result<Overlap> {
    let set = |ids: &[EdgeId]| -> Result<BTreeSet<usize>> {
        ids.iter()
            .map(|id| {
                net.edge_index(*id)
                    .ok_or(Error::Invariant("overlap edge not in network"))
            })
            .collect()
    };
    let (sa, sb) = (set(a)?, set(b)?);
    let km =
        |s: &mut dyn Iterator<Item = &usize>| -> f64 { s.map(|&e| net.edge(e).length()).sum() };
    let la = km(&mut sa.iter());
    let lb = km(&mut sb.iter());
    if !(la > 0.0) {
        return Err(Error::Empty("solution A"));
    }
    if !(lb > 0.0) {
        return Err(Error::Empty("solution B"));
    }
    let shared = km(&mut sa.intersection(&sb));
    let a_in_b = shared / la;
    let b_in_a = shared / lb;
    Ok(Overlap {
        a_in_b,
        b_in_a,
        mean: 0.5 * (a_in_b + b_in_a),
    })
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::param("y", "length differs from x"));
    }
    if x.len() < 2 {
        return Err(Error::param("x", "need at least two values"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

fn row(
    net: &SpatialNetwork,
    d_km: f64,
    crashes: &[CrashPoint],
    pairs: &[SnapOutcome],
    detours: &[f64],
    buffer: f64,
) -> Result<MetricsRow> {
    Ok(MetricsRow {
        d_km,
        crash_coverage: crash_coverage(net, crashes, buffer)?,
        trip_coverage: detours
            .iter()
            .map(|&d| trip_coverage(net, pairs, d))
            .collect::<Result<_>>()?,
        components: component_count(net),
    })
}

/// Metrics of the existing network (`D = 0`) and of `net` with each
/// snapshot's charged edges turned into bike edges, ascending in D.
/// `pairs` must be snapped on `net`.
pub fn evaluate_snapshots(
    net: &SpatialNetwork,
    snapshots: &[GrowthSnapshot],
    crashes: &[CrashPoint],
    pairs: &[SnapOutcome],
    detours: &[f64],
    buffer: f64,
) -> Result<Vec<MetricsRow>> {
    let mut rows = alloc::vec![row(net, 0.0, crashes, pairs, detours, buffer)?];
    let mut order: Vec<&GrowthSnapshot> = snapshots.iter().collect();
    order.sort_by(|a, b| a.d_km.total_cmp(&b.d_km));
    for s in order {
        let edges = s
            .charged_edges
            .iter()
            .map(|id| {
                net.edge_index(*id)
                    .ok_or(Error::Invariant("snapshot edge not in network"))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row(
            &net.relabel(&edges, EdgeKind::Bike),
            s.d_km,
            crashes,
            pairs,
            detours,
            buffer,
        )?);
    }
    Ok(rows)
}
