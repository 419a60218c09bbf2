//! Texture descriptors from a cellular automaton driven by rotation-invariant
//! uniform local binary patterns, with the surrounding evaluation pipeline.
//!
//! The state of every cell starts as the pixel intensity and is repeatedly
//! blended with its normalized riu2 code. Histograms of the codes at every
//! time step and for every `(P, R)` neighborhood form the descriptor
//! ([`extract`]). The [`learn`] module reduces descriptors with PCA and
//! classifies them with LDA; [`dataset`] provides manifests and split
//! protocols; [`formal`] checks the 1-D operator lemmas exhaustively.

pub mod catex;
pub mod dataset;
pub mod error;
pub mod formal;
pub mod image;
pub mod lbp;
pub mod learn;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;

pub use crate::catex::{
    default_schedule, extract, transition, Automaton, CaState, CatexConfig, DescriptorLayout,
    DescriptorVector, Position,
};
pub use crate::error::{Error, Result};
pub use crate::image::{load_image, pad_symmetric, GrayImage};
pub use crate::lbp::{histogram, lbp_map, normalize_map, riu2_code, Histogram, LbpConfig, LbpMap};
