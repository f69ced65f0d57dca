//! Cone oracles, generalized probabilistic theories, slack-matrix cone
//! factorizations, and completely positive lifts of 0/1 polytopes.

pub mod cones;
pub mod circuits;
pub mod cpext;
pub mod error;
pub mod gpt;
pub mod json;
pub mod polytopes;
pub mod protocol;

pub use error::{Error, Result};
