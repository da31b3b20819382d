//! Undirected spatial multigraph of intersections and street/bike links.
//!
//! Nodes and edges are stored densely, sorted by id, so a dense index
//! (`usize`) orders exactly like the id it stands for. Algorithms work on
//! indices; the public path type reports ids.

mod betweenness;
mod components;
mod index;
mod paths;

pub use betweenness::weighted_edge_betweenness;
pub use components::{connected_components, Components};
pub use index::GridIndex;
pub(crate) use paths::check_weights;
pub use paths::{shortest_path, ShortestPathTree};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polyline};

/// Distance within which edge geometry must meet its end nodes.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;

/// Default bucket size of the node index.
pub const DEFAULT_INDEX_CELL: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Street,
    Bike,
}

impl EdgeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeKind::Street => "street",
            EdgeKind::Bike => "bike",
        }
    }
}

/// Input description of an edge. A missing geometry means a straight
/// segment between the end nodes.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub id: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub kind: EdgeKind,
    pub geometry: Option<Polyline>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub kind: EdgeKind,
    /// Geometry oriented from `u` to `v`.
    pub geometry: Polyline,
}

impl Edge {
    pub fn length(&self) -> f64 {
        self.geometry.length()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    /// Sum of the routing weights along the path.
    pub cost: f64,
    /// Sum of geometric edge lengths, meters.
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct SpatialNetwork {
    node_ids: Vec<NodeId>,
    points: Vec<Point>,
    node_lookup: BTreeMap<NodeId, usize>,
    edges: Vec<Edge>,
    ends: Vec<(usize, usize)>,
    edge_lookup: BTreeMap<EdgeId, usize>,
    adjacency: Vec<Vec<(usize, usize)>>,
    index: GridIndex,
}

impl SpatialNetwork {
    pub fn new(nodes: Vec<(NodeId, Point)>, edges: Vec<EdgeSpec>) -> Result<Self> {
        Self::with_index_cell(nodes, edges, DEFAULT_INDEX_CELL)
    }

    pub fn with_index_cell(
        mut nodes: Vec<(NodeId, Point)>,
        mut edges: Vec<EdgeSpec>,
        cell: f64,
    ) -> Result<Self> {
        nodes.sort_by_key(|(id, _)| *id);
        if let Some(w) = nodes.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateNode(w[0].0));
        }
        if nodes.iter().any(|(_, p)| !p.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite node coordinate"));
        }
        let node_ids: Vec<NodeId> = nodes.iter().map(|(id, _)| *id).collect();
        let points: Vec<Point> = nodes.iter().map(|(_, p)| *p).collect();
        let node_lookup: BTreeMap<NodeId, usize> = node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, i))
            .collect();

        edges.sort_by_key(|e| e.id);
        if let Some(w) = edges.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateEdge(w[0].id));
        }
        let mut built = Vec::with_capacity(edges.len());
        let mut ends = Vec::with_capacity(edges.len());
        for spec in edges {
            let ui = *node_lookup.get(&spec.u).ok_or(Error::UnknownNode(spec.u))?;
            let vi = *node_lookup.get(&spec.v).ok_or(Error::UnknownNode(spec.v))?;
            if ui == vi {
                return Err(Error::SelfLoop(spec.id));
            }
            let (pu, pv) = (points[ui], points[vi]);
            let geometry = match spec.geometry {
                None => {
                    Polyline::new(alloc::vec![pu, pv]).map_err(|_| Error::InconsistentEdge {
                        edge: spec.id,
                        reason: "end nodes coincide",
                    })?
                }
                Some(g) => orient_geometry(spec.id, g, pu, pv)?,
            };
            built.push(Edge {
                id: spec.id,
                u: spec.u,
                v: spec.v,
                kind: spec.kind,
                geometry,
            });
            ends.push((ui, vi));
        }
        let edge_lookup = built.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
        let mut adjacency = alloc::vec![Vec::new(); points.len()];
        for (e, &(u, v)) in ends.iter().enumerate() {
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let index = GridIndex::new(&points, cell);
        Ok(SpatialNetwork {
            node_ids,
            points,
            node_lookup,
            edges: built,
            ends,
            edge_lookup,
            adjacency,
            index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.node_lookup.get(&id).copied()
    }

    pub fn edge_index(&self, id: EdgeId) -> Option<usize> {
        self.edge_lookup.get(&id).copied()
    }

    pub fn node_id(&self, ix: usize) -> NodeId {
        self.node_ids[ix]
    }

    pub fn point(&self, ix: usize) -> Point {
        self.points[ix]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, Point)> + '_ {
        self.node_ids
            .iter()
            .copied()
            .zip(self.points.iter().copied())
    }

    pub fn edge(&self, ix: usize) -> &Edge {
        &self.edges[ix]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Dense end-node indices of edge `ix`, as `(u, v)`.
    pub fn edge_ends(&self, ix: usize) -> (usize, usize) {
        self.ends[ix]
    }

    /// `(neighbor, edge)` pairs of node `ix`, sorted ascending.
    pub fn neighbors(&self, ix: usize) -> &[(usize, usize)] {
        &self.adjacency[ix]
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    /// Geometric length of every edge, indexed by edge index.
    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(Edge::length).collect()
    }

    pub fn bounds(&self) -> Option<(Point, Point)> {
        crate::geometry::bounds(&self.points)
    }

    /// Nodes incident to at least one edge of `kind`, ascending.
    pub fn nodes_on(&self, kind: EdgeKind) -> Vec<usize> {
        let mut mark = alloc::vec![false; self.node_count()];
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.kind == kind {
                let (u, v) = self.ends[e];
                mark[u] = true;
                mark[v] = true;
            }
        }
        (0..mark.len()).filter(|&i| mark[i]).collect()
    }

    /// Closest node passing `filter`; ties go to the smaller id.
    pub fn nearest_node(&self, p: &Point, filter: impl Fn(usize) -> bool) -> Result<(NodeId, f64)> {
        self.index
            .nearest(&self.points, p, filter)
            .map(|(ix, d)| (self.node_ids[ix], d))
            .ok_or(Error::Empty("no candidate node for snapping"))
    }

    /// A copy with edges from `added` appended under fresh ids (one past
    /// the current maximum, in input order). Existing ids are unchanged.
    pub fn union_network(
        &self,
        added: Vec<(NodeId, NodeId, EdgeKind, Option<Polyline>)>,
    ) -> Result<SpatialNetwork> {
        let first = self.edges.last().map_or(0, |e| e.id.0 + 1);
        let mut specs = self.edge_specs();
        for (next, (u, v, kind, geometry)) in (first..).zip(added) {
            specs.push(EdgeSpec {
                id: EdgeId(next),
                u,
                v,
                kind,
                geometry,
            });
        }
        Self::with_index_cell(self.nodes().collect(), specs, self.index.cell())
    }

    /// A copy with the listed edges relabelled as `kind`.
    pub fn relabel(&self, edges: &[usize], kind: EdgeKind) -> SpatialNetwork {
        let mut out = self.clone();
        for &e in edges {
            out.edges[e].kind = kind;
        }
        out
    }

    /// A copy keeping only nodes passing `keep` and the edges between them.
    pub fn retain_nodes(&self, keep: impl Fn(usize) -> bool) -> SpatialNetwork {
        let kept: Vec<bool> = (0..self.node_count()).map(keep).collect();
        let nodes = self
            .nodes()
            .enumerate()
            .filter(|(i, _)| kept[*i])
            .map(|(_, n)| n)
            .collect();
        let specs = self
            .edge_specs()
            .into_iter()
            .zip(&self.ends)
            .filter(|(_, (u, v))| kept[*u] && kept[*v])
            .map(|(s, _)| s)
            .collect();
        Self::with_index_cell(nodes, specs, self.index.cell()).expect("subset of a valid network")
    }

    /// Rebuilds the node index with a new bucket size.
    pub fn reindexed(&self, cell: f64) -> SpatialNetwork {
        let mut out = self.clone();
        out.index = GridIndex::new(&out.points, cell);
        out
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id,
                u: e.u,
                v: e.v,
                kind: e.kind,
                geometry: Some(e.geometry.clone()),
            })
            .collect()
    }

    pub(crate) fn to_path(&self, nodes: &[usize], edges: &[usize], weight: &[f64]) -> PathResult {
        PathResult {
            nodes: nodes.iter().map(|&n| self.node_ids[n]).collect(),
            edges: edges.iter().map(|&e| self.edges[e].id).collect(),
            cost: edges.iter().map(|&e| weight[e]).sum(),
            length: edges.iter().map(|&e| self.edges[e].length()).sum(),
        }
    }
}

fn orient_geometry(id: EdgeId, g: Polyline, pu: Point, pv: Point) -> Result<Polyline> {
    let near = |a: Point, b: Point| a.distance(&b) <= ENDPOINT_TOLERANCE;
    if near(g.first(), pu) && near(g.last(), pv) {
        Ok(g)
    } else if near(g.first(), pv) && near(g.last(), pu) {
        Ok(g.reversed())
    } else {
        Err(Error::InconsistentEdge {
            edge: id,
            reason: "geometry does not end at the edge's nodes",
        })
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use alloc::vec;

    /// Nodes `1..=n` on the x axis, 1 m apart, joined as a path.
    pub fn path(n: u64) -> SpatialNetwork {
        let nodes = (1..=n)
            .map(|i| (NodeId(i), Point::new(i as f64, 0.0)))
            .collect();
        let edges = (1..n)
            .map(|i| EdgeSpec {
                id: EdgeId(i),
                u: NodeId(i),
                v: NodeId(i + 1),
                kind: EdgeKind::Street,
                geometry: None,
            })
            .collect();
        SpatialNetwork::new(nodes, edges).unwrap()
    }

    pub fn edge(id: u64, u: u64, v: u64, kind: EdgeKind) -> EdgeSpec {
        EdgeSpec {
            id: EdgeId(id),
            u: NodeId(u),
            v: NodeId(v),
            kind,
            geometry: None,
        }
    }

    pub fn net(points: &[(u64, f64, f64)], edges: Vec<EdgeSpec>) -> SpatialNetwork {
        let nodes = points
            .iter()
            .map(|&(id, x, y)| (NodeId(id), Point::new(x, y)))
            .collect();
        SpatialNetwork::new(nodes, edges).unwrap()
    }

    #[test]
    fn rejects_bad_edges() {
        let nodes = vec![
            (NodeId(1), Point::new(0., 0.)),
            (NodeId(2), Point::new(1., 0.)),
        ];
        let err = SpatialNetwork::new(nodes.clone(), vec![edge(1, 1, 3, EdgeKind::Street)]);
        assert_eq!(err.unwrap_err(), Error::UnknownNode(NodeId(3)));
        let err = SpatialNetwork::new(nodes.clone(), vec![edge(1, 1, 1, EdgeKind::Street)]);
        assert_eq!(err.unwrap_err(), Error::SelfLoop(EdgeId(1)));
        let err = SpatialNetwork::new(
            nodes.clone(),
            vec![
                edge(1, 1, 2, EdgeKind::Street),
                edge(1, 2, 1, EdgeKind::Bike),
            ],
        );
        assert_eq!(err.unwrap_err(), Error::DuplicateEdge(EdgeId(1)));
        let mut dup = nodes.clone();
        dup.push((NodeId(2), Point::new(5., 5.)));
        assert_eq!(
            SpatialNetwork::new(dup, vec![]).unwrap_err(),
            Error::DuplicateNode(NodeId(2))
        );
        let bent = Polyline::new(vec![
            Point::new(0., 0.),
            Point::new(0.5, 3.0),
            Point::new(1.5, 0.),
        ])
        .unwrap();
        let mut spec = edge(1, 1, 2, EdgeKind::Street);
        spec.geometry = Some(bent);
        assert!(matches!(
            SpatialNetwork::new(nodes, vec![spec]),
            Err(Error::InconsistentEdge { .. })
        ));
    }

    #[test]
    fn geometry_is_oriented_and_measured() {
        let nodes = vec![
            (NodeId(1), Point::new(0., 0.)),
            (NodeId(2), Point::new(3., 0.)),
        ];
        let reversed = Polyline::new(vec![
            Point::new(3., 0.),
            Point::new(3., 4.),
            Point::new(0., 0.),
        ])
        .unwrap();
        let mut spec = edge(7, 1, 2, EdgeKind::Bike);
        spec.geometry = Some(reversed);
        let net = SpatialNetwork::new(nodes, vec![spec]).unwrap();
        let e = net.edge(0);
        assert_eq!(e.geometry.first(), Point::new(0., 0.));
        assert_eq!(e.length(), 9.0);
    }

    #[test]
    fn union_adds_edges_with_fresh_ids() {
        let base = path(3);
        let same = base.union_network(vec![]).unwrap();
        assert_eq!(same.edges(), base.edges());
        let grown = base
            .union_network(vec![(NodeId(1), NodeId(3), EdgeKind::Bike, None)])
            .unwrap();
        assert_eq!(grown.edge_count(), base.edge_count() + 1);
        assert_eq!(grown.edge(2).id, EdgeId(3));
        assert_eq!(grown.edge(2).kind, EdgeKind::Bike);
        assert_eq!(grown.edge(0), base.edge(0));
        let err = base.union_network(vec![(NodeId(1), NodeId(9), EdgeKind::Bike, None)]);
        assert_eq!(err.unwrap_err(), Error::UnknownNode(NodeId(9)));
    }

    #[test]
    fn nearest_node_rules() {
        let n = net(&[(4, 0., 0.), (9, 2., 0.), (12, 50., 50.)], vec![]);
        assert_eq!(
            n.nearest_node(&Point::new(50., 50.), |_| true).unwrap(),
            (NodeId(12), 0.0)
        );
        assert_eq!(
            n.nearest_node(&Point::new(1., 0.), |_| true).unwrap(),
            (NodeId(4), 1.0)
        );
        assert!(n.nearest_node(&Point::new(1., 0.), |_| false).is_err());
        let far = n
            .nearest_node(&Point::new(-5000., -9000.), |_| true)
            .unwrap();
        assert_eq!(far.0, NodeId(4));
    }

    #[test]
    fn retain_keeps_ids() {
        let p = path(4);
        let sub = p.retain_nodes(|ix| ix != 1);
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(sub.edge(0).id, EdgeId(3));
    }
}
