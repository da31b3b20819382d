//! Growth of a bicycle network on top of an existing street and bike network.
//!
//! The crate is `no_std` (with `alloc`). Seeds are placed on intersections,
//! joined by a greedy (or Delaunay) triangulation, weighted by a mix of trip
//! demand and crash counts, ranked by weighted edge betweenness and selected
//! under a length budget. The [`metrics`] module evaluates the result.
//!
//! Enable the `parallel` feature to spread betweenness and routing over a
//! rayon pool; results are bit-identical for any thread count.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod geometry;
pub mod graph;
pub mod growth;
pub mod ingest;
pub mod metrics;
pub mod sample;

mod par;

pub use error::{Error, Result};
pub use geometry::{Point, Polygon, Polyline, Segment};
pub use graph::{EdgeId, EdgeKind, NodeId, PathResult, SpatialNetwork};
