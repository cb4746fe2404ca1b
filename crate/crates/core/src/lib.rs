//! Network structure as adjacency-matrix binary (amb) images.
//!
//! The crate generates the four classic network families, canonicalizes
//! vertex order with the VRA reordering heuristic, renders amb images, builds
//! motif iteration trees, trains a small convolutional family classifier and
//! describes real networks as mixtures of families.

pub mod amb;
pub mod classifier;
pub mod generators;
pub mod graph;
pub mod manifest;
pub mod mim;
pub mod mixture;
pub mod rng;
pub mod vra;

pub use amb::{pad_center, render, AmbImage};
pub use generators::{gen_ba, gen_er, gen_ncn, gen_ws, FamilyLabel, GenParams};
pub use graph::{apply_order, degrees, read_edge_list, write_edge_list, Graph, VertexOrder};
pub use mim::{smim_decompose, MotifTree};
pub use vra::{vra_apply, vra_order, VraTrace};
