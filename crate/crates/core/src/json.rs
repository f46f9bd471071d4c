//! Serialization helpers: complex numbers are written as `{"re": .., "im": ..}`.

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson<T> {
    pub re: T,
    pub im: T,
}

impl<T> From<Complex<T>> for ComplexJson<T> {
    fn from(z: Complex<T>) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl<T> From<ComplexJson<T>> for Complex<T> {
    fn from(z: ComplexJson<T>) -> Self {
        Complex::new(z.re, z.im)
    }
}

/// For `#[serde(with = "crate::json::complex")]` on `Complex<T>` fields.
pub mod complex {
    use super::*;

    pub fn serialize<T: Serialize + Copy, S: Serializer>(
        z: &Complex<T>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        ComplexJson::from(*z).serialize(serializer)
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Complex<T>, D::Error> {
        ComplexJson::deserialize(deserializer).map(Complex::from)
    }
}
