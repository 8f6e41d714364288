//! Codistance value types.
//!
//! Codistances live in the natural numbers. Every structure in this crate is
//! generic over the unsigned primitive used to store them, so dense tables can
//! be packed into `u8` for exhaustive enumeration and widened to `u64` for long
//! generation runs.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_traits::{NumCast, PrimInt, Unsigned};

/// An unsigned primitive integer usable as a codistance value.
pub trait Codistance: PrimInt + Unsigned + Hash + Debug + Display + Send + Sync + 'static {
    /// `|d - 1|`: the value forced on a new leaf that folds toward its parent.
    #[inline]
    fn fold_down(self) -> Self {
        if self.is_zero() {
            Self::one()
        } else {
            self - Self::one()
        }
    }

    /// `d + 1`, or `None` when the storage type is exhausted.
    #[inline]
    fn raise(self) -> Option<Self> {
        self.checked_add(&Self::one())
    }

    #[inline]
    fn from_u64(v: u64) -> Option<Self> {
        <Self as NumCast>::from(v)
    }

    #[inline]
    fn as_u64(self) -> u64 {
        // Every unsigned primitive up to 64 bits fits.
        self.to_u64().unwrap_or(u64::MAX)
    }
}

impl<T> Codistance for T where T: PrimInt + Unsigned + Hash + Debug + Display + Send + Sync + 'static
{}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_down_reflects_at_zero() {
        assert_eq!(0u8.fold_down(), 1);
        assert_eq!(1u8.fold_down(), 0);
        assert_eq!(7u32.fold_down(), 6);
    }

    #[test]
    fn raise_reports_overflow() {
        assert_eq!(254u8.raise(), Some(255));
        assert_eq!(255u8.raise(), None);
        assert_eq!(<u16 as Codistance>::from_u64(70_000), None);
    }
}
