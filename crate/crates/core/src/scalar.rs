//! Scalar abstraction shared by the metric and vector code.
//!
//! Everything that produces a real number (reciprocal rank, NDCG, cosine
//! similarity, aggregate means) is written against [`Scalar`] so the same
//! code runs in `f32` for embedding-heavy workloads and in `f64` for
//! reporting. Quantities that are exact by construction (ranks, reciprocal
//! ranks) are additionally exposed as [`num_rational::Ratio`] values.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable as float")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Rounds to six decimals, ties to even. Used for every real number that is
/// written to a score file or report so golden files do not depend on the
/// last bits of a platform's libm.
pub fn round6(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let scaled = x * 1e6;
    scaled.round_ties_even() / 1e6
}

/// Serde helper that writes an `f64` rounded with [`round6`].
pub mod serde_round6 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round6(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}
