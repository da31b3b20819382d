//! Dijkstra with a deterministic tie-break: among equal-cost paths the one
//! with the lexicographically smallest node-id sequence wins, then the
//! smaller edge id between parallel edges.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use super::{NodeId, PathResult, SpatialNetwork};
use crate::error::{Error, Result};

/// Costs closer than this (relative, floor 1e-10) are treated as equal.
pub(crate) fn tie_tolerance(d: f64) -> f64 {
    1e-10 * d.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cost(pub f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub(crate) fn check_weights(
    net: &SpatialNetwork,
    weight: &[f64],
    strictly_positive: bool,
) -> Result<()> {
    if weight.len() != net.edge_count() {
        return Err(Error::param("weight", "one weight per edge required"));
    }
    for (e, &w) in weight.iter().enumerate() {
        let ok = w.is_finite() && if strictly_positive { w > 0.0 } else { w >= 0.0 };
        if !ok {
            return Err(Error::BadWeight {
                edge: net.edge(e).id,
                weight: w,
                expected: if strictly_positive {
                    "finite and > 0"
                } else {
                    "finite and >= 0"
                },
            });
        }
    }
    Ok(())
}

/// Single-source shortest paths with a lexicographic-minimum parent tree.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    source: usize,
    dist: Vec<f64>,
    parent: Vec<Option<(usize, usize)>>,
}

impl ShortestPathTree {
    /// Runs Dijkstra from node index `source`. With `targets`, the search
    /// stops once every target is settled (plus any node tied with the
    /// farthest one); unsettled nodes report infinite distance.
    pub fn build(
        net: &SpatialNetwork,
        source: usize,
        weight: &[f64],
        targets: Option<&[usize]>,
    ) -> Result<Self> {
        check_weights(net, weight, false)?;
        Ok(Self::build_unchecked(net, source, weight, targets))
    }

    pub(crate) fn build_unchecked(
        net: &SpatialNetwork,
        source: usize,
        weight: &[f64],
        targets: Option<&[usize]>,
    ) -> Self {
        let n = net.node_count();
        let mut dist = alloc::vec![f64::INFINITY; n];
        let mut settled = alloc::vec![false; n];
        let mut is_target = alloc::vec![false; if targets.is_some() { n } else { 0 }];
        let mut remaining = 0usize;
        if let Some(ts) = targets {
            for &t in ts {
                if !is_target[t] {
                    is_target[t] = true;
                    remaining += 1;
                }
            }
        }
        let mut bound = f64::INFINITY;
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((Cost(0.0), source)));
        while let Some(Reverse((Cost(d), u))) = heap.pop() {
            if settled[u] || d > dist[u] {
                continue;
            }
            if d > bound + tie_tolerance(bound) {
                break;
            }
            settled[u] = true;
            if targets.is_some() && is_target[u] {
                remaining -= 1;
                if remaining == 0 {
                    bound = d;
                }
            }
            for &(v, e) in net.neighbors(u) {
                let nd = d + weight[e];
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((Cost(nd), v)));
                }
            }
        }
        for (i, s) in settled.iter().enumerate() {
            if !s {
                dist[i] = f64::INFINITY;
            }
        }

        // Depth-first over the tight-edge subgraph, visiting neighbors in
        // ascending (node, edge) order: the first visit of every node is
        // along its lexicographically smallest shortest path.
        let mut parent = alloc::vec![None; n];
        let mut visited = alloc::vec![false; n];
        visited[source] = true;
        let mut stack: Vec<(usize, usize)> = alloc::vec![(source, 0)];
        while let Some(top) = stack.last_mut() {
            let (u, pos) = *top;
            let adj = net.neighbors(u);
            if pos >= adj.len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let (v, e) = adj[pos];
            if visited[v] || !dist[v].is_finite() {
                continue;
            }
            if (dist[u] + weight[e] - dist[v]).abs() <= tie_tolerance(dist[v]) {
                visited[v] = true;
                parent[v] = Some((u, e));
                stack.push((v, 0));
            }
        }
        ShortestPathTree {
            source,
            dist,
            parent,
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    /// Cost to node index `t`, `INFINITY` when unreachable.
    pub fn distance(&self, t: usize) -> f64 {
        self.dist[t]
    }

    /// Node and edge index sequences from the source to `t`.
    pub fn path_indices(&self, t: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        if !self.dist[t].is_finite() {
            return None;
        }
        let mut nodes = alloc::vec![t];
        let mut edges = Vec::new();
        let mut cur = t;
        while let Some((p, e)) = self.parent[cur] {
            nodes.push(p);
            edges.push(e);
            cur = p;
        }
        if cur != self.source {
            return None;
        }
        nodes.reverse();
        edges.reverse();
        Some((nodes, edges))
    }

    pub fn path(&self, net: &SpatialNetwork, t: usize, weight: &[f64]) -> Option<PathResult> {
        let (nodes, edges) = self.path_indices(t)?;
        Some(net.to_path(&nodes, &edges, weight))
    }
}

/// Minimum-cost path from `source` to `target` under `weight` (indexed by
/// edge index). `Ok(None)` when the target is unreachable.
pub fn shortest_path(
    net: &SpatialNetwork,
    source: NodeId,
    target: NodeId,
    weight: &[f64],
) -> Result<Option<PathResult>> {
    let s = net.node_index(source).ok_or(Error::UnknownNode(source))?;
    let t = net.node_index(target).ok_or(Error::UnknownNode(target))?;
    let tree = ShortestPathTree::build(net, s, weight, Some(&[t]))?;
    Ok(tree.path(net, t, weight))
}
