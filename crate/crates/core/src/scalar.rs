//! Scalar abstraction for edge weights, penalties and costs.
//!
//! Coordinates are always exact integers; only the quantities that involve
//! Euclidean lengths live in a floating-point type chosen by the caller.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type used for weights, penalties and costs: `f32` or `f64`.
pub trait Weight:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts from `f64`, rounding to the nearest representable value.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `a + b` where an infinite operand absorbs the sum.
    fn add_inf(a: Self, b: Self) -> Self {
        if a.is_infinite() || b.is_infinite() {
            Self::infinity()
        } else {
            a + b
        }
    }
}

impl Weight for f32 {}
impl Weight for f64 {}

/// `|a - b| <= tol * max(1, |a|, |b|)`, with equal infinities comparing equal.
pub fn approx_eq<S: Weight>(a: S, b: S, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    let (a, b) = (a.to_f64_lossy(), b.to_f64_lossy());
    let scale = 1f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

/// Total order on non-NaN weights, for priority queues.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrdWeight<S>(pub S);

impl<S: Weight> Eq for OrdWeight<S> {}

impl<S: Weight> PartialOrd for OrdWeight<S> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Weight> Ord for OrdWeight<S> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("NaN weight in ordered comparison")
    }
}
