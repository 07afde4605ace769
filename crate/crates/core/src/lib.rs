//! 2-WL graph convolutions and the machinery around them: Weisfeiler-Lehman
//! refinement, graph powers, the sparse edge encoding consumed by the
//! gather/scatter layer, a small reverse-mode tensor core and the layer zoo
//! (2-WL, GIN, 2-GNN) used for graph classification.

pub mod encoding;
pub mod error;
pub mod graphs;
pub mod layers;
pub mod tensor;
pub mod wl;

pub use error::{Error, Result};
pub use graphs::{Dataset, Graph};
