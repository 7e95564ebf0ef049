//! 32-bit machine words with wrapping arithmetic.
//!
//! [`Word32`] is the unsigned view; [`IWord32`] reinterprets the same bits as
//! two's complement.

use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word32(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IWord32(pub i32);

impl Word32 {
    pub const ZERO: Word32 = Word32(0);
    pub const MAX: Word32 = Word32(u32::MAX);

    /// Reduces an arbitrary integer modulo 2³².
    pub fn from_int(v: i128) -> Self {
        Word32(v as u32)
    }

    pub fn unsigned(self) -> u32 {
        self.0
    }

    pub fn signed(self) -> IWord32 {
        IWord32(self.0 as i32)
    }
}

impl IWord32 {
    pub fn from_int(v: i128) -> Self {
        IWord32(v as u32 as i32)
    }

    pub fn value(self) -> i32 {
        self.0
    }

    pub fn bits(self) -> Word32 {
        Word32(self.0 as u32)
    }
}

impl Add for Word32 {
    type Output = Word32;
    fn add(self, rhs: Word32) -> Word32 {
        Word32(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for Word32 {
    type Output = Word32;
    fn sub(self, rhs: Word32) -> Word32 {
        Word32(self.0.wrapping_sub(rhs.0))
    }
}

impl Mul for Word32 {
    type Output = Word32;
    fn mul(self, rhs: Word32) -> Word32 {
        Word32(self.0.wrapping_mul(rhs.0))
    }
}

impl From<u32> for Word32 {
    fn from(v: u32) -> Self {
        Word32(v)
    }
}

impl fmt::Display for Word32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for IWord32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
