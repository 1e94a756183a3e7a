//! Spinal branch groups on spherically homogeneous rooted trees.
//!
//! Exact level actions, stabilizer chains, wreath-product orders, partial
//! Hausdorff dimensions with Stirling envelopes, sequence synthesis for a
//! target dimension, and the rational spectrum sets.

pub mod dimension;
pub mod error;
pub mod json;
pub mod orders;
pub mod perm;
pub mod portrait;
pub mod real;
pub mod schreier;
pub mod spectrum;
pub mod synthesis;
pub mod tree;

pub use error::{Error, Result};
pub use perm::{alt_generators, embedded_alt_generators, Parity, Permutation};
pub use portrait::{Portrait, SpinalKind};
pub use real::Real;
pub use schreier::StabilizerChain;
pub use synthesis::{synthesize, Strategy, SynthesisTrace, Window};
pub use tree::{TreeSequence, Vertex};
