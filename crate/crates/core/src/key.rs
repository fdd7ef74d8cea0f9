//! Key types that can be indexed.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

/// On-disk tag identifying the key type of a dataset or index file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[repr(u8)]
pub enum KeyType {
    U64 = 0,
    F64 = 1,
}

impl KeyType {
    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(KeyType::U64),
            1 => Some(KeyType::F64),
            _ => None,
        }
    }

    pub fn tag(self) -> u8 {
        self as u8
    }
}

/// Scalar used by the convex-hull machinery. Integer keys use `i128` so that
/// every cross product is exact; float keys fall back to `f64`.
pub trait HullCoord:
    Copy + PartialOrd + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    const ZERO: Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(self) -> f64;
}

impl HullCoord for i128 {
    const ZERO: Self = 0;

    #[inline]
    fn from_i64(v: i64) -> Self {
        v as i128
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl HullCoord for f64 {
    const ZERO: Self = 0.0;

    #[inline]
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

/// An ordered key: `u64`, or a finite `f64`.
pub trait Key:
    Copy + PartialOrd + Debug + std::fmt::Display + std::str::FromStr + Send + Sync + 'static
{
    type Coord: HullCoord;

    const KEY_TYPE: KeyType;

    /// `self - origin` as an exact hull coordinate (rounded for floats).
    fn hull_offset(self, origin: Self) -> Self::Coord;

    /// `self - origin` as `f64`. The subtraction happens in the key domain,
    /// so large integer keys lose no precision before the conversion.
    fn offset_from(self, origin: Self) -> f64;

    fn to_f64(self) -> f64;

    fn to_bits(self) -> u64;

    fn from_bits(bits: u64) -> Self;

    /// NaN and infinities are rejected for float keys.
    fn is_valid(self) -> bool;

    /// Nearest key to `v`, saturating at the ends of the key domain.
    fn from_f64(v: f64) -> Self;
}

impl Key for u64 {
    type Coord = i128;

    const KEY_TYPE: KeyType = KeyType::U64;

    #[inline]
    fn hull_offset(self, origin: Self) -> i128 {
        self as i128 - origin as i128
    }

    #[inline]
    fn offset_from(self, origin: Self) -> f64 {
        if self >= origin {
            (self - origin) as f64
        } else {
            -((origin - self) as f64)
        }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn to_bits(self) -> u64 {
        self
    }

    #[inline]
    fn from_bits(bits: u64) -> Self {
        bits
    }

    #[inline]
    fn is_valid(self) -> bool {
        true
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v.round() as u64
    }
}

impl Key for f64 {
    type Coord = f64;

    const KEY_TYPE: KeyType = KeyType::F64;

    #[inline]
    fn hull_offset(self, origin: Self) -> f64 {
        self - origin
    }

    #[inline]
    fn offset_from(self, origin: Self) -> f64 {
        self - origin
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn to_bits(self) -> u64 {
        f64::to_bits(self)
    }

    #[inline]
    fn from_bits(bits: u64) -> Self {
        f64::from_bits(bits)
    }

    #[inline]
    fn is_valid(self) -> bool {
        self.is_finite()
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v.clamp(f64::MIN, f64::MAX)
    }
}

/// Checks that `keys` is nonempty, valid and sorted nondecreasingly.
pub(crate) fn validate_sorted<K: Key>(keys: &[K]) -> crate::Result<()> {
    if keys.is_empty() {
        return Err(crate::Error::EmptyDataset);
    }
    if let Some(i) = keys.iter().position(|k| !k.is_valid()) {
        return Err(crate::Error::InvalidKey(i));
    }
    if let Some(i) = keys.windows(2).position(|w| w[1] < w[0]) {
        return Err(crate::Error::UnsortedInput(i + 1));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u64_offsets_are_exact_for_large_keys() {
        let a = u64::MAX - 3;
        let b = u64::MAX;
        assert_eq!(b.offset_from(a), 3.0);
        assert_eq!(a.offset_from(b), -3.0);
        assert_eq!(b.hull_offset(0), u64::MAX as i128);
    }

    #[test]
    fn validation_rejects_nan_and_disorder() {
        assert_eq!(validate_sorted::<u64>(&[]), Err(crate::Error::EmptyDataset));
        assert_eq!(
            validate_sorted(&[1.0, f64::NAN]),
            Err(crate::Error::InvalidKey(1))
        );
        assert_eq!(
            validate_sorted(&[1u64, 3, 2]),
            Err(crate::Error::UnsortedInput(2))
        );
        assert!(validate_sorted(&[1u64, 1, 2]).is_ok());
    }
}
