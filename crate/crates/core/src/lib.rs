//! Query routing for super-peer networks via minimal transversals of
//! super-peer communities, with a semantic two-level router as baseline.

mod bitset;

pub mod baseline;
pub mod ecclat;
pub mod hypergraph;
pub mod label;
pub mod metrics;
pub mod mining;
pub mod network;
pub mod similarity;
pub mod simulator;
pub mod transversal;

pub use label::Label;
