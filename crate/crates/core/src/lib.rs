//! Exact matchings in measure-preserving bipartite graphs on the line.
//!
//! Vertex sets are finite unions of half-open intervals with endpoints in
//! ℚ(√2); edges are finite unions of graphs of slope-±1 piecewise isometries.
//! The crate builds ε-approximate perfect matchings by colouring a conflict
//! graph of short augmenting paths and flipping colour classes in turn, checks
//! the layer-counting identity for 2-regular graphs, and extracts explicit
//! witnesses for cancellation of doubled equidecompositions.

pub mod cancellation;
pub mod coloring;
pub mod error;
pub mod flipper;
pub mod gallery;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod pathspace;
pub mod pwiso;
pub mod region;
pub mod scalar;
pub mod svg;

pub use error::{Error, Result};
pub use graph::{DefinableBipartiteGraph, Edge, Matching, Side};
pub use pwiso::{Piece, PwIsometry, Slope};
pub use region::{Interval, Region};
pub use scalar::Scalar;
