//! Synchronization analysis of Kuramoto oscillator networks through the
//! cutset projection `P = BᵀL†B𝒜`.

pub mod dynamics;
pub mod error;
pub mod figures;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod maf;
pub mod power;
pub mod projection;
pub mod seed;
pub mod torus;

pub use error::{Error, Result};
pub use graph::Graph;
pub use linalg::PNorm;
pub use sync_tests::OscillatorSystem;
