//! Dense-subtensor search in Gaussian random tensors: greedy and local
//! search algorithms, a brute-force oracle, the online prefix model and
//! the branching overlap-gap machinery, with a seeded experiment harness.

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod io;
pub mod ogp;
pub mod rng;
pub mod stats;
pub mod tensor;
pub mod theory;

pub use error::{Error, Result};
pub use rng::StreamKey;
pub use tensor::{make_source, GaussianSource, Selection, Tensor};
