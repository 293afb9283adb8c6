//! Neuroevolution of toric-code decoders.
//!
//! The crate has two halves. The physics half ([`toric`], [`perspective`],
//! [`mwpm`]) simulates a distance-`d` toric code under Pauli noise, exposes
//! syndromes as translated "perspective" inputs, and provides an exact
//! minimum-weight perfect-matching reference decoder. The learning half
//! ([`genome`], [`network`], [`evolution`], [`transplant`]) evolves small
//! feed-forward networks with NEAT: historical innovation markers, speciation
//! with fitness sharing, and structural mutations starting from minimal
//! genomes.
//!
//! Numeric code is generic over the scalar type through [`scalar::Scalar`]
//! (implemented for `f32` and `f64`); the type aliases at the crate root pick
//! the common instantiations. All randomness flows through caller-provided
//! RNGs, and [`rng`] derives independent deterministic streams from a single
//! master seed so runs reproduce bit-for-bit regardless of thread count.

pub mod error;
pub mod evolution;
pub mod genome;
pub mod io;
pub mod mwpm;
pub mod network;
pub mod perspective;
pub mod rng;
pub mod scalar;
pub mod toric;
pub mod transplant;

pub use error::Error;
pub use scalar::Scalar;

/// Genome over the default `f64` scalar.
pub type Genome64 = genome::Genome<f64>;
/// Genome over `f32`, for memory-tight sweeps.
pub type Genome32 = genome::Genome<f32>;
/// Compiled network over the default `f64` scalar.
pub type Phenotype64 = network::Phenotype<f64>;
/// Compiled network over `f32`.
pub type Phenotype32 = network::Phenotype<f32>;

pub type Result<T> = std::result::Result<T, Error>;
