//! Scalar abstraction and the global numeric policy.
//!
//! Every numerical routine in the crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. Comparisons against "sums to one",
//! "dominates" and "equal masses" all go through [`tolerance`], so a single
//! policy value controls the whole crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar usable throughout the crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Smallest tolerance that is meaningful at this precision.
    fn precision_floor() -> Self;

    /// Lossless-as-possible conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn precision_floor() -> Self {
        64.0 * f64::EPSILON
    }
}

impl Scalar for f32 {
    fn precision_floor() -> Self {
        64.0 * f32::EPSILON
    }
}

/// Default tolerance for stochasticity and domination checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Environment variable that overrides [`DEFAULT_TOLERANCE`].
pub const TOLERANCE_ENV: &str = "NHDMP_TOL";

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0);

/// Current policy tolerance in binary64.
pub fn policy_tolerance() -> f64 {
    match TOLERANCE_BITS.load(Ordering::Relaxed) {
        0 => DEFAULT_TOLERANCE,
        bits => f64::from_bits(bits),
    }
}

/// Sets the global tolerance. Non-positive or non-finite values reset to the default.
pub fn set_policy_tolerance(tol: f64) {
    let bits = if tol.is_finite() && tol > 0.0 {
        tol.to_bits()
    } else {
        0
    };
    TOLERANCE_BITS.store(bits, Ordering::Relaxed);
}

/// Reads [`TOLERANCE_ENV`] and installs it as the policy tolerance.
///
/// Returns the parsed value, or `None` when the variable is unset.
pub fn tolerance_from_env() -> Result<Option<f64>, String> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(raw) => {
            let tol: f64 = raw
                .trim()
                .parse()
                .map_err(|_| format!("{TOLERANCE_ENV}={raw:?} is not a number"))?;
            if !(tol.is_finite() && tol > 0.0) {
                return Err(format!("{TOLERANCE_ENV} must be a positive finite number"));
            }
            set_policy_tolerance(tol);
            Ok(Some(tol))
        }
        Err(_) => Ok(None),
    }
}

/// Policy tolerance at the precision of `T` (never below `T`'s floor).
pub fn tolerance<T: Scalar>() -> T {
    let tol = T::of(policy_tolerance());
    if tol < T::precision_floor() {
        T::precision_floor()
    } else {
        tol
    }
}

/// `|a - b| <= tol`.
pub fn approx_eq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    (a - b).abs() <= tol
}

/// Ordered summation so that results do not depend on scheduling.
pub fn ordered_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}
