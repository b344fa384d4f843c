//! Hard-decision message passing for planted graph coloring and LDPC decoding.
//!
//! The crate covers the whole experimental pipeline:
//!
//! * [`graph`]: planted k-colorable random graphs, colorings and distances.
//! * [`spectral`]: a Lanczos eigensolver for the bottom of the adjacency
//!   spectrum and the spectral initial coloring built on it.
//! * [`mp_color`]: Gallager's hard-decision algorithm on the factor graph of a
//!   coloring instance.
//! * [`ak`]: the recolor / uncolor / exhaustive-completion refinement
//!   pipeline, its unified recolor-uncolor step, and a harness that
//!   cross-executes that step against the message passing decoder.
//! * [`structure`]: core extraction, non-core component analysis and a small
//!   dense-subgraph oracle.
//! * [`ldpc`]: Gallager's binary decoder on random (s,t)-regular codes.
//! * [`harness`]: seeded experiment runner and report emission.
//!
//! Colors are 0-based everywhere in the API; text files and the CLI use
//! 1-based colors with `0` meaning unassigned.

pub mod ak;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod ldpc;
pub mod mp_color;
pub mod ratio;
pub mod rng;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
pub use graph::{Color, Coloring, Graph, PlantedInstance};

/// `⌈log₂ n⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}
