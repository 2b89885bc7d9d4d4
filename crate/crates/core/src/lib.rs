//! Lattice topology and witness-filtered quantum geometry for the Haldane model.
//!
//! The numerical core is generic over the scalar type (`f32`/`f64`, see
//! [`Real`]); the aliases below fix it to `f64`, which is what the precision
//! contracts are stated for.

pub mod error;
pub mod geometry;
pub mod mesh;
pub mod model;
pub mod multi;
pub mod rng;
pub mod scalar;
pub mod witness;

pub use error::{Error, ErrorClass, Result};
pub use scalar::{Cplx, Real};

pub type ModelParams = model::ModelParams<f64>;
pub type ModelParamsF32 = model::ModelParams<f32>;
pub type DVector = model::DVector<f64>;
pub type BlochState = model::BlochState<f64>;
pub type TorusMesh = mesh::TorusMesh<f64>;
pub type TorusMeshF32 = mesh::TorusMesh<f32>;
pub type CurvatureField = mesh::CurvatureField<f64>;
pub type Complex64 = Cplx<f64>;
pub type SectorReport = witness::SectorReport<f64>;
pub type JumpRecord = witness::JumpRecord<f64>;
pub type WitnessSpec = witness::WitnessSpec<f64>;
pub type Qgt = geometry::Qgt<f64>;
pub type QgtSample = geometry::QgtSample<f64>;
pub type InequalityReport = geometry::InequalityReport<f64>;
pub type MultiState = multi::MultiState<f64>;
pub type CoherenceMatrix = multi::CoherenceMatrix<f64>;
pub use multi::{LeviType, ProbePhase};
