//! The floating-point abstraction every numerical routine is written against.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar usable throughout the crate (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("integer representable in scalar type")
}

#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `k!` as a scalar.
pub fn factorial<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * from_usize::<T>(i))
}

/// Binomial coefficient `C(n, k)` as a scalar.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * from_usize::<T>(n - i) / from_usize::<T>(i + 1);
    }
    acc.round()
}

/// Pairwise (tree) summation in ascending index order.
///
/// The split points depend only on the slice length, so the result is
/// reproducible bit for bit.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Euclidean norm of a coefficient slice.
pub fn euclidean_norm<T: Scalar>(xs: &[T]) -> T {
    let mut acc = T::zero();
    for &x in xs {
        acc += x * x;
    }
    acc.sqrt()
}

/// Euclidean distance between two equally long slices.
pub fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}
