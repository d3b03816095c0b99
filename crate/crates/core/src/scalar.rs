//! Scalar abstraction shared by the indicator and statistics code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the indicator ladder and correlation code can run on.
///
/// Implemented for `f32` and `f64`. Integer quantities (institution counts,
/// citation totals, sums of squares) are carried exactly and converted into
/// the scalar only at division time.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// Relative tolerance used for consistency checks (X <= E, S >= 0).
    fn rel_tolerance() -> Self {
        let floor = Self::from_f64(1e-12).unwrap_or_else(Self::epsilon);
        floor.max(Self::epsilon() * Self::from_u8(8).unwrap_or_else(Self::one))
    }

    /// Lossy conversion from an exact integer quantity.
    fn from_count(v: u128) -> Self {
        // u128 -> f32/f64 never fails, it only rounds
        <Self as NumCast>::from(v).unwrap_or_else(Self::infinity)
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_tracks_precision() {
        assert_eq!(f64::rel_tolerance(), 1e-12);
        assert!(f32::rel_tolerance() > 1e-7);
    }

    #[test]
    fn count_conversion() {
        assert_eq!(f64::from_count(74_852_741), 74_852_741.0);
        assert_eq!(f32::from_count(3), 3.0f32);
    }
}
