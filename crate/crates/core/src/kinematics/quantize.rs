//! Conversion between SI values and 32-bit fixed-resolution words.

use thiserror::Error;

use crate::config::resolution;
use crate::word::Word32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Time,
    Distance,
    Speed,
    Accel,
    Jerk,
}

impl Quantity {
    pub const ALL: [Quantity; 5] =
        [Quantity::Time, Quantity::Distance, Quantity::Speed, Quantity::Accel, Quantity::Jerk];

    pub fn resolution(self) -> f64 {
        match self {
            Quantity::Time => resolution::TIME_S,
            Quantity::Distance => resolution::DISTANCE_M,
            Quantity::Speed => resolution::SPEED_MPS,
            Quantity::Accel => resolution::ACCEL_MPS2,
            Quantity::Jerk => resolution::JERK_MPS3,
        }
    }

    fn steps(self, value: f64) -> f64 {
        match self {
            Quantity::Time => value * 1e2,
            Quantity::Distance => value * 1e3,
            q => value / q.resolution(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{quantity:?} value {value} is outside the 32-bit word range")]
pub struct DomainError {
    pub quantity: Quantity,
    pub value: f64,
}

/// `⌊value / resolution⌋` as a word; rejects values that would wrap.
pub fn quantize(quantity: Quantity, value: f64) -> Result<Word32, DomainError> {
    let steps = quantity.steps(value);
    if !(steps.is_finite() && (0.0..4_294_967_296.0).contains(&steps)) {
        return Err(DomainError { quantity, value });
    }
    Ok(Word32(steps.floor() as u32))
}

pub fn dequantize(quantity: Quantity, w: Word32) -> f64 {
    match quantity {
        Quantity::Time => w.0 as f64 / 1e2,
        Quantity::Distance => w.0 as f64 / 1e3,
        q => w.0 as f64 * q.resolution(),
    }
}

pub fn quantize_distance(d_m: f64) -> Result<Word32, DomainError> {
    quantize(Quantity::Distance, d_m)
}

pub fn dequantize_distance(w: Word32) -> f64 {
    dequantize(Quantity::Distance, w)
}
