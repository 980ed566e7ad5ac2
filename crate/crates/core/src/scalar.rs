//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// A real floating-point scalar usable throughout the crate (`f32` or `f64`).
///
/// Rank decisions depend on the working precision, so each scalar carries
/// its own default relative rank tolerance.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Default relative tolerance for singular-value and smoothness decisions.
    const DEFAULT_TOL: f64;

    /// Converts an `f64` literal into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossless-or-rounded conversion used for reports and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn default_tol() -> Self {
        Self::lit(Self::DEFAULT_TOL)
    }
}

impl Scalar for f64 {
    const DEFAULT_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    const DEFAULT_TOL: f64 = 1e-4;
}
