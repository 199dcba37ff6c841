//! Coverage of spectrum-shared millimeter-wave cellular networks under
//! directional and omnidirectional carrier sensing.
//!
//! The crate has two independent evaluators of the same network model:
//! [`analysis`] computes transmission and coverage probabilities by
//! numerical integration, and [`simulator`] estimates them by Monte Carlo
//! over Poisson deployments. The building blocks are the radio model
//! ([`radio`]), site deployment ([`deployment`]), user association
//! ([`association`]) and the sensing protocols ([`protocols`]).

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod association;
pub mod deployment;
mod error;
pub mod params;
pub mod protocols;
pub mod quadrature;
pub mod radio;
pub mod simulator;

pub use error::{Error, Result};
pub use params::NetworkParams;
pub use protocols::Protocol;

// Guide chapters, compiled as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/radio.md")]
    mod radio {}
    #[doc = include_str!("../../../book/src/deployment.md")]
    mod deployment {}
    #[doc = include_str!("../../../book/src/association.md")]
    mod association {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
