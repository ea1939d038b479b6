//! Spanning-tree sequence orders for autoregressive generation over image
//! token lattices.
//!
//! The crate samples uniform spanning trees of the token lattice with
//! Wilson's algorithm and turns them into visiting orders by breadth-first
//! traversal from a corner. For inpainting it rejection-samples trees whose
//! order places all observed tokens before all masked ones. Supporting
//! modules count spanning trees exactly, generate connected random masks,
//! benchmark the acceptance rate of the completion sampler and measure
//! conditional entropies on a small exactly solvable Gibbs model.

pub mod bench;
pub mod cli;
pub mod completion;
pub mod entropy;
pub mod error;
pub mod lattice;
pub mod masking;
pub mod orders;
pub mod rng;
pub mod spanning;
pub mod stats;
pub mod traversal;

pub use error::{Error, FormatError, Result};
pub use lattice::{manhattan, Lattice, Region, Vertex};
pub use rng::Rng;
pub use spanning::SpanningTree;
pub use traversal::SequenceOrder;
