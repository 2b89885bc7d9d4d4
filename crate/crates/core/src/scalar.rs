//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the band-structure code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances in this crate are stated for
/// binary64; running the same code in `f32` is supported but the tight
/// residual contracts only hold at double precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// A double-precision tolerance, widened for lower-precision scalars so
    /// it never falls below `1e4` ulps.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(1e4))
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// Maps an angle from `atan2` (range `[-pi, pi]`) onto the half-open principal branch `(-pi, pi]`.
#[inline]
pub fn principal_angle<T: Real>(a: T) -> T {
    if a <= -T::PI() {
        a + T::PI() + T::PI()
    } else if a > T::PI() {
        a - T::PI() - T::PI()
    } else {
        a
    }
}

/// Argument of a complex number on `(-pi, pi]`.
#[inline]
pub fn arg<T: Real>(z: Cplx<T>) -> T {
    principal_angle(z.im.atan2(z.re))
}

/// Sums a slice in index order. All lattice reductions go through this so
/// reruns are bit-identical regardless of how the terms were produced.
#[inline]
pub fn ordered_sum<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v)
}

#[inline]
pub fn ordered_sum_c<T: Real>(values: &[Cplx<T>]) -> Cplx<T> {
    values
        .iter()
        .fold(Cplx::new(T::zero(), T::zero()), |acc, &v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn principal_branch_is_half_open() {
        assert_eq!(principal_angle(-PI), PI);
        assert_eq!(principal_angle(PI), PI);
        assert_eq!(arg(Cplx::new(-1.0, -0.0)), PI);
        assert_eq!(arg(Cplx::new(-0.5f64, 0.0)), PI);
        assert!((arg(Cplx::new(0.0f64, 1.0)) - PI / 2.0).abs() < 1e-16);
    }

    #[test]
    fn lit_roundtrip_f32() {
        assert_eq!(<f32 as Real>::lit(0.5), 0.5f32);
    }
}
