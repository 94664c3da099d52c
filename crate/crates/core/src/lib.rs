//! Spiking landing-controller workbench.
//!
//! A 20-10-5 spiking network reads the optic-flow divergence error through a
//! position code and commands vertical thrust through spike traces. The
//! network runs on either a real-valued reference backend or a fixed-point
//! backend that reproduces the neuromorphic chip's integer arithmetic. The
//! crate evolves such controllers in a randomized landing simulation and
//! measures how closely the two backends agree.
//!
//! Real-valued code is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix the precision used by the closed loop.

pub mod analysis;
pub mod codec;
pub mod env;
pub mod error;
pub mod evo;
pub mod rng;
pub mod scalar;
pub mod snn;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use snn::{BackendKind, ControllerGenome, LoihiBackend, Network, SpikeTrain, SpikingBackend};

/// Reference backend in double precision, as used by the simulator.
pub type ReferenceNet = snn::ReferenceBackend<f64>;
/// Single-precision reference backend.
pub type ReferenceNetF32 = snn::ReferenceBackend<f32>;
pub type BucketTable = codec::BucketTable<f64>;
pub type TraceDecoder = codec::TraceDecoder<f64>;
pub type VehicleState = env::VehicleState<f64>;
pub type PointMass = env::PointMass<f64>;
pub type CornerPairSet = env::CornerPairSet<f64>;
pub type Summary = analysis::Summary<f64>;
