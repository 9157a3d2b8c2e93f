//! Small-ball probabilities for sums of signs read off a reversible Markov
//! chain: exact transfer-matrix computation, Fourier bounds, sampling,
//! expander-walk sign generators and numeric checks of the supporting
//! inequalities.
#![no_std]
// `!(x >= 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod chain;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod oracles;
pub mod prg;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod transfer;

pub use chain::{MarkovChain, SignSystem, WeightSystem, WeightVariant};
pub use error::{Error, Result};
