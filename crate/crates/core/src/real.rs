use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::Float;

/// Floating-point storage type for trainable parameters.
pub trait Real: Float + Sum + Debug + Display + Default + Send + Sync + 'static {
    type Atomic: Send + Sync;

    const NAME: &'static str;

    fn lit(x: f64) -> Self;
    fn as_f64(self) -> f64;

    fn new_atomic(self) -> Self::Atomic;
    fn load(cell: &Self::Atomic) -> Self;
    fn store(cell: &Self::Atomic, value: Self);
}

impl Real for f32 {
    type Atomic = AtomicU32;
    const NAME: &'static str = "f32";

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn new_atomic(self) -> AtomicU32 {
        AtomicU32::new(self.to_bits())
    }
    #[inline]
    fn load(cell: &AtomicU32) -> Self {
        f32::from_bits(cell.load(Ordering::Relaxed))
    }
    #[inline]
    fn store(cell: &AtomicU32, value: Self) {
        cell.store(value.to_bits(), Ordering::Relaxed)
    }
}

impl Real for f64 {
    type Atomic = AtomicU64;
    const NAME: &'static str = "f64";

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
    fn new_atomic(self) -> AtomicU64 {
        AtomicU64::new(self.to_bits())
    }
    #[inline]
    fn load(cell: &AtomicU64) -> Self {
        f64::from_bits(cell.load(Ordering::Relaxed))
    }
    #[inline]
    fn store(cell: &AtomicU64, value: Self) {
        cell.store(value.to_bits(), Ordering::Relaxed)
    }
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `-log(sigmoid(x))`, evaluated without overflow.
#[inline]
pub fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|x| (x - max).exp()).sum::<f64>().ln()
}
