use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeKind, EdgeSpec, NodeId, SpatialNetwork};

use super::{GrowthSnapshot, Link, LinkSource, SeedSet};

/// A candidate in rank order with the street edges it converts.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedLink {
    pub link: usize,
    pub charged_edges: Vec<EdgeId>,
    pub charged_km: f64,
    /// Charged km of this and every higher-ranked candidate.
    pub cumulative_km: f64,
}

/// Graph over seeds and existing bike intersections with one straight edge
/// per link; edge index equals link id.
pub fn abstract_graph(
    net: &SpatialNetwork,
    seeds: &SeedSet,
    links: &[Link],
) -> Result<SpatialNetwork> {
    let mut nodes: BTreeSet<usize> = seeds.seeds.iter().map(|s| s.node).collect();
    nodes.extend(net.nodes_on(EdgeKind::Bike));
    let nodes: Vec<(NodeId, crate::geometry::Point)> = nodes
        .into_iter()
        .map(|ix| (net.node_id(ix), net.point(ix)))
        .collect();
    let edges = links
        .iter()
        .map(|l| EdgeSpec {
            id: EdgeId(l.id as u64),
            u: l.ends.0,
            v: l.ends.1,
            kind: match l.source {
                LinkSource::Candidate { .. } => EdgeKind::Street,
                LinkSource::Existing { .. } => EdgeKind::Bike,
            },
            geometry: None,
        })
        .collect();
    SpatialNetwork::with_index_cell(nodes, edges, net.index().cell())
}

/// Sets each link's betweenness on the abstract graph weighted by `d_w`.
pub(crate) fn score_links(net: &SpatialNetwork, seeds: &SeedSet, links: &mut [Link]) -> Result<()> {
    let graph = abstract_graph(net, seeds, links)?;
    let weight: Vec<f64> = links.iter().map(|l| l.d_w).collect();
    let bc = crate::graph::weighted_edge_betweenness(&graph, &weight)?;
    for (l, b) in links.iter_mut().zip(bc) {
        l.betweenness = b;
    }
    Ok(())
}

/// Candidate ids by descending betweenness, ties by ascending id.
pub fn rank_links(links: &[Link]) -> Vec<usize> {
    let mut order: Vec<usize> = links
        .iter()
        .filter(|l| l.is_candidate())
        .map(|l| l.id)
        .collect();
    order.sort_by(|&a, &b| {
        links[b]
            .betweenness
            .total_cmp(&links[a].betweenness)
            .then(a.cmp(&b))
    });
    order
}

/// Walks `order`, charging each candidate for the street edges of its route
/// that are neither bike nor charged by an earlier candidate.
pub fn charge_ranking(net: &SpatialNetwork, links: &[Link], order: &[usize]) -> Vec<RankedLink> {
    let mut charged = alloc::vec![false; net.edge_count()];
    let mut cumulative = 0.0;
    order
        .iter()
        .map(|&id| {
            let mut edges = Vec::new();
            let mut km = 0.0;
            for eid in &links[id].route.edges {
                let Some(e) = net.edge_index(*eid) else {
                    continue;
                };
                if charged[e] || net.edge(e).kind == EdgeKind::Bike {
                    continue;
                }
                charged[e] = true;
                edges.push(*eid);
                km += net.edge(e).length() / 1000.0;
            }
            cumulative += km;
            RankedLink {
                link: id,
                charged_edges: edges,
                charged_km: km,
                cumulative_km: cumulative,
            }
        })
        .collect()
}

/// Shortest ranked prefix whose charged length reaches `d_km`, or the whole
/// ranking flagged as exhausted.
pub fn snapshot_at(ranking: &[RankedLink], d_km: f64, alpha: f64) -> GrowthSnapshot {
    let reach = ranking.iter().position(|r| r.cumulative_km >= d_km);
    let take = reach.map_or(ranking.len(), |k| k + 1);
    let prefix = &ranking[..take];
    GrowthSnapshot {
        d_km,
        alpha,
        selected: prefix.iter().map(|r| r.link).collect(),
        charged_edges: prefix
            .iter()
            .flat_map(|r| r.charged_edges.iter().copied())
            .collect(),
        cumulative_km: prefix.last().map_or(0.0, |r| r.cumulative_km),
        exhausted: reach.is_none(),
    }
}

/// Betweenness ranking on the abstract graph and selection up to `d_km`.
/// `links` must already carry `d_w`.
pub fn rank_and_select(
    net: &SpatialNetwork,
    seeds: &SeedSet,
    links: &mut [Link],
    d_km: f64,
    alpha: f64,
) -> Result<GrowthSnapshot> {
    if !(d_km > 0.0) {
        return Err(Error::param("budget", "must be positive"));
    }
    if !links.iter().any(Link::is_candidate) {
        return Err(Error::Empty("no candidate links"));
    }
    score_links(net, seeds, links)?;
    let order = rank_links(links);
    Ok(snapshot_at(
        &charge_ranking(net, links, &order),
        d_km,
        alpha,
    ))
}
