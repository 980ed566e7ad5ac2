//! Infinitesimal rigidity of bar-joint frameworks in finite-dimensional
//! normed spaces.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the usual double-precision instantiation.

pub mod audit;
pub mod classify;
pub mod error;
pub mod flexes;
pub mod graph;
pub mod io;
pub mod isometry;
pub mod linalg;
pub mod normed_space;
pub mod rigidity;
pub mod sampling;
mod scalar;

pub use audit::{AuditRecord, AuditStatus};
pub use classify::{ClassifyConfig, RigidityReport};
pub use error::{Error, Result};
pub use flexes::{FlexPath, ProbeConfig, ProbeRecord, TraceConfig};
pub use graph::{Framework, Graph, Placement};
pub use isometry::{IsoDims, LieAlgebraBasis, LieConfig};
pub use normed_space::{Covector, Exponent, NormKind, NormedSpace, Vector};
pub use rigidity::{MotionSpace, RigidityMatrix};
pub use scalar::Scalar;

pub type NormedSpace64 = NormedSpace<f64>;
pub type Framework64 = Framework<f64>;
pub type Placement64 = Placement<f64>;
pub type RigidityMatrix64 = RigidityMatrix<f64>;
pub type MotionSpace64 = MotionSpace<f64>;
pub type LieAlgebraBasis64 = LieAlgebraBasis<f64>;
pub type FlexPath64 = FlexPath<f64>;

pub type NormedSpace32 = NormedSpace<f32>;
pub type Framework32 = Framework<f32>;
pub type Placement32 = Placement<f32>;
