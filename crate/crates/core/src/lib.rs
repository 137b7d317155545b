//! Combinatorial engine for trisection diagrams, relative trisection diagrams
//! and bridge-trisection shadow diagrams on possibly non-orientable surfaces.

pub mod arrangement;
pub mod bridge;
pub mod cut;
pub mod fixtures;
pub mod format;
pub mod heegaard;
pub mod homology;
pub mod invariants;
pub mod isotopy;
pub mod moves;
pub mod presentation;
pub mod relative;
pub mod render;
pub mod slide;
pub mod surface;
pub mod trisection;
