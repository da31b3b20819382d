//! Seeding, triangulation, weighting, ranking and budgeted selection.
//!
//! [`prepare`] does everything that does not depend on `alpha` (seeds,
//! candidate links, routes, trip and crash densities); [`Prepared::run`]
//! weights, ranks and snapshots for one `alpha`. [`grow`] chains both.

mod seeds;
mod select;
mod triangulation;
mod weights;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Polyline;
use crate::graph::{EdgeId, EdgeKind, NodeId, PathResult, ShortestPathTree, SpatialNetwork};
use crate::ingest::{CrashPoint, Trip};

pub use seeds::{place_seeds, Seed, SeedOrigin, SeedSet};
pub use select::{
    abstract_graph, charge_ranking, rank_and_select, rank_links, snapshot_at, RankedLink,
};
pub use triangulation::{delaunay_candidates, greedy_triangulation, sorted_pairs, Triangulation};
pub use weights::{
    count_crashes_per_km, count_trips_per_km, node_transits, weight_links, weighted_distance,
};

pub const DEFAULT_DELTA_M: f64 = 300.0;
pub const DEFAULT_BUFFER_M: f64 = 50.0;
pub const DEFAULT_STEP_KM: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkSource {
    /// Candidate between two seeds, by seed position.
    Candidate { seeds: (usize, usize) },
    /// Edge of the existing bike network.
    Existing { edge: EdgeId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    /// Candidates first (`0..candidates`), then existing bike edges.
    pub id: usize,
    pub source: LinkSource,
    pub ends: (NodeId, NodeId),
    /// Route on the growth network, by geometric length.
    pub route: PathResult,
    /// Route geometry from the first to the second end.
    pub geometry: Polyline,
    /// Meters.
    pub routed_length: f64,
    /// Trip node transits per km.
    pub n_trip: f64,
    /// Crashes within the buffer per km.
    pub n_crash: f64,
    pub d_w: f64,
    pub betweenness: f64,
}

impl Link {
    pub fn is_candidate(&self) -> bool {
        matches!(self.source, LinkSource::Candidate { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSnapshot {
    pub d_km: f64,
    pub alpha: f64,
    /// Candidate link ids in selection order.
    pub selected: Vec<usize>,
    /// Street edges converted by the selection, in charging order.
    pub charged_edges: Vec<EdgeId>,
    pub cumulative_km: f64,
    /// Every candidate was selected before reaching `d_km`.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub delta: f64,
    pub buffer: f64,
    pub triangulation: Triangulation,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams {
            delta: DEFAULT_DELTA_M,
            buffer: DEFAULT_BUFFER_M,
            triangulation: Triangulation::Greedy,
        }
    }
}

/// Alpha-independent state of a growth run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub net: SpatialNetwork,
    pub seeds: SeedSet,
    /// Candidates then existing bike edges, with trip and crash densities.
    pub links: Vec<Link>,
    pub candidates: usize,
    /// Triangulation pairs whose route could not be built.
    pub dropped_unroutable: usize,
    pub params: GrowthParams,
}

#[derive(Debug, Clone)]
pub struct GrowthRun {
    pub alpha: f64,
    /// Weighted links with betweenness on the abstract graph.
    pub links: Vec<Link>,
    pub ranking: Vec<RankedLink>,
    pub snapshots: Vec<GrowthSnapshot>,
}

/// Seeds, candidate links and their routes and densities on `net`, which
/// holds street and existing bike edges.
pub fn prepare(
    net: &SpatialNetwork,
    trips: &[Trip],
    crashes: &[CrashPoint],
    params: GrowthParams,
) -> Result<Prepared> {
    let net = net.reindexed(params.delta.max(100.0));
    let seeds = place_seeds(&net, params.delta)?;
    if seeds.len() < 2 {
        return Err(Error::DegenerateInput("fewer than two seeds"));
    }
    let lengths = net.lengths();
    let seed_nodes: Vec<usize> = seeds.seeds.iter().map(|s| s.node).collect();

    let rows: Vec<Vec<f64>> = crate::par::map(&seed_nodes, |&s| {
        let tree = ShortestPathTree::build_unchecked(&net, s, &lengths, Some(&seed_nodes));
        seed_nodes.iter().map(|&t| tree.distance(t)).collect()
    });
    let route = |i: usize, j: usize| {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        Some(rows[a][b]).filter(|d| d.is_finite())
    };
    let points = seeds.points();
    let pairs = match params.triangulation {
        Triangulation::Greedy => greedy_triangulation(&points, route)?,
        Triangulation::Delaunay => delaunay_candidates(&points, route)?,
    };
    drop(rows);

    // One search per source seed for the accepted pairs.
    let mut by_source: Vec<(usize, Vec<usize>)> = Vec::new();
    for &(i, j) in &pairs {
        match by_source.binary_search_by_key(&i, |(s, _)| *s) {
            Ok(k) => by_source[k].1.push(j),
            Err(k) => by_source.insert(k, (i, alloc::vec![j])),
        }
    }
    let routed = crate::par::map(&by_source, |(i, js)| {
        let targets: Vec<usize> = js.iter().map(|&j| seed_nodes[j]).collect();
        let tree =
            ShortestPathTree::build_unchecked(&net, seed_nodes[*i], &lengths, Some(&targets));
        js.iter()
            .map(|&j| (j, tree.path_indices(seed_nodes[j])))
            .collect::<Vec<_>>()
    });

    let mut links = Vec::with_capacity(pairs.len());
    let mut dropped = 0;
    for &(i, j) in &pairs {
        let k = by_source
            .binary_search_by_key(&i, |(s, _)| *s)
            .expect("source listed");
        let (_, path) = routed[k]
            .iter()
            .find(|(t, _)| *t == j)
            .expect("target listed");
        let Some((nodes, edges)) = path else {
            dropped += 1;
            continue;
        };
        let geometry = path_geometry(&net, nodes, edges)?;
        let route = net.to_path(nodes, edges, &lengths);
        links.push(Link {
            id: links.len(),
            source: LinkSource::Candidate { seeds: (i, j) },
            ends: (seeds.seeds[i].id, seeds.seeds[j].id),
            routed_length: route.length,
            route,
            geometry,
            n_trip: 0.0,
            n_crash: 0.0,
            d_w: 0.0,
            betweenness: 0.0,
        });
    }
    let candidates = links.len();
    if candidates == 0 {
        return Err(Error::Empty("no routable candidate links"));
    }
    for (e, edge) in net.edges().iter().enumerate() {
        if edge.kind != EdgeKind::Bike {
            continue;
        }
        let (u, v) = net.edge_ends(e);
        links.push(Link {
            id: links.len(),
            source: LinkSource::Existing { edge: edge.id },
            ends: (edge.u, edge.v),
            route: net.to_path(&[u, v], &[e], &lengths),
            geometry: edge.geometry.clone(),
            routed_length: edge.length(),
            n_trip: 0.0,
            n_crash: 0.0,
            d_w: 0.0,
            betweenness: 0.0,
        });
    }
    weights::count_links(&net, &mut links, trips, crashes, params.buffer)?;
    Ok(Prepared {
        net,
        seeds,
        links,
        candidates,
        dropped_unroutable: dropped,
        params,
    })
}

fn path_geometry(net: &SpatialNetwork, nodes: &[usize], edges: &[usize]) -> Result<Polyline> {
    let mut out: Option<Polyline> = None;
    for (k, &e) in edges.iter().enumerate() {
        let g = &net.edge(e).geometry;
        let forward = net.edge_ends(e).0 == nodes[k];
        let piece = if forward { g.clone() } else { g.reversed() };
        match out.as_mut() {
            Some(line) => line.extend(&piece),
            None => out = Some(piece),
        }
    }
    out.ok_or(Error::Invariant(
        "route between distinct seeds has no edges",
    ))
}

/// Budget checkpoints `step, 2 step, ...` up to `d_max`.
pub fn checkpoints(d_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::param("step", "must be positive"));
    }
    if !(d_max >= step) || !d_max.is_finite() {
        return Err(Error::param("d_max", "must be at least one step"));
    }
    let mut out = Vec::new();
    let mut k = 1u32;
    loop {
        let d = f64::from(k) * step;
        if d > d_max + 1e-9 {
            break;
        }
        out.push(d);
        k += 1;
    }
    Ok(out)
}

impl Prepared {
    /// Weights, betweenness, ranking and one snapshot per checkpoint.
    pub fn run(&self, alpha: f64, d_max: f64, step: f64) -> Result<GrowthRun> {
        let checkpoints = checkpoints(d_max, step)?;
        let mut links = self.links.clone();
        weight_links(&mut links, alpha)?;
        select::score_links(&self.net, &self.seeds, &mut links)?;
        let order = rank_links(&links);
        let ranking = charge_ranking(&self.net, &links, &order);
        let snapshots = checkpoints
            .into_iter()
            .map(|d| snapshot_at(&ranking, d, alpha))
            .collect();
        Ok(GrowthRun {
            alpha,
            links,
            ranking,
            snapshots,
        })
    }
}

/// Full pipeline on a street and bike network for one `alpha`.
pub fn grow(
    net: &SpatialNetwork,
    trips: &[Trip],
    crashes: &[CrashPoint],
    params: GrowthParams,
    alpha: f64,
    d_max: f64,
    step: f64,
) -> Result<GrowthRun> {
    weights::check_alpha(alpha)?;
    checkpoints(d_max, step)?;
    prepare(net, trips, crashes, params)?.run(alpha, d_max, step)
}
