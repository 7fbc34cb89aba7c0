use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by the numeric kernels.
///
/// Implemented for `f32` and `f64`. Algorithms that need literal constants go
/// through [`Real::lit`], and pivot/feasibility thresholds are chosen per type
/// via [`Real::pivot_tol`] and [`Real::feas_tol`].
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest magnitude accepted as a simplex pivot.
    fn pivot_tol() -> Self;

    /// Primal feasibility tolerance used by the LP solver.
    fn feas_tol() -> Self;
}

impl Real for f64 {
    fn pivot_tol() -> Self {
        1e-9
    }
    fn feas_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn pivot_tol() -> Self {
        1e-4
    }
    fn feas_tol() -> Self {
        1e-4
    }
}
