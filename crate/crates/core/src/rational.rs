//! Exact rational stride arithmetic.
//!
//! Sampling instants `m * S'` and the floor/ceil sum bounds of the layer
//! algorithms are discontinuous in the stride, so they are computed in
//! integer arithmetic; only kernel evaluations happen in floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Floor of `a / b` for `b > 0`.
pub(crate) fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    let q = a / b;
    if a % b < 0 {
        q - 1
    } else {
        q
    }
}

/// Ceiling of `a / b` for `b > 0`.
pub(crate) fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    let q = a / b;
    if a % b > 0 {
        q + 1
    } else {
        q
    }
}

/// Stride in samples as a fully reduced fraction `num / den >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalStride {
    num: u64,
    den: u64,
}

impl RationalStride {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num < den {
            return Err(Error::StrideTooSmall { num, den });
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn from_integer(s: u64) -> Result<Self> {
        Self::new(s, 1)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Nearest integer, ties away from zero.
    pub fn round(&self) -> u64 {
        ((2 * self.num as u128 + self.den as u128) / (2 * self.den as u128)) as u64
    }
}

impl std::fmt::Display for RationalStride {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Best rational approximation `p / q` of a positive real with `q` bounded,
/// by continued-fraction convergents. Errors when no convergent gets within
/// `1e-9` relative, which flags an irrational sampling-frequency pair.
pub fn approximate_ratio(x: f64, max_den: u64) -> Result<(u64, u64)> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::IrrationalPeriodRatio(x));
    }
    let (mut p0, mut q0) = (1u128, 0u128);
    let (mut p1, mut q1) = (x.floor() as u128, 1u128);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        let approx = p1 as f64 / q1 as f64;
        if (approx - x).abs() <= 1e-9 * x {
            return Ok((p1 as u64, q1 as u64));
        }
        if frac.abs() < f64::EPSILON {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor() as u128;
        frac = r - r.floor();
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0) = (p1, q1);
        (p1, q1) = (p2, q2);
    }
    let approx = p1 as f64 / q1 as f64;
    if (approx - x).abs() <= 1e-9 * x {
        Ok((p1 as u64, q1 as u64))
    } else {
        Err(Error::IrrationalPeriodRatio(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        let s = RationalStride::new(35280, 640).unwrap();
        assert_eq!((s.num(), s.den()), (441, 8));
        assert_eq!(s.as_f64(), 55.125);
        assert_eq!(s.to_string(), "441/8");
    }

    #[test]
    fn rejects_sub_unit_stride() {
        assert!(RationalStride::new(1, 2).is_err());
        assert!(RationalStride::new(0, 1).is_err());
    }

    #[test]
    fn rounding_ties_away() {
        assert_eq!(RationalStride::new(441, 8).unwrap().round(), 55);
        assert_eq!(RationalStride::new(441, 16).unwrap().round(), 28);
        assert_eq!(RationalStride::new(80, 1).unwrap().round(), 80);
        // 5.5 rounds up (away from zero).
        assert_eq!(RationalStride::new(11, 2).unwrap().round(), 6);
    }

    #[test]
    fn floor_ceil_div_negative() {
        assert_eq!(floor_div(-7, 2), -4);
        assert_eq!(ceil_div(-7, 2), -3);
        assert_eq!(floor_div(7, 2), 3);
        assert_eq!(ceil_div(7, 2), 4);
        assert_eq!(floor_div(-8, 2), -4);
        assert_eq!(ceil_div(-8, 2), -4);
    }

    #[test]
    fn ratio_recovery() {
        let r = (1.0 / 32000.0) / (1.0 / 22050.0);
        assert_eq!(approximate_ratio(r, 1_000_000).unwrap(), (441, 640));
        let r = (1.0 / 32000.0) / (1.0 / 16538.0);
        assert_eq!(approximate_ratio(r, 1_000_000).unwrap(), (8269, 16000));
        assert!(approximate_ratio(std::f64::consts::SQRT_2, 10).is_err());
    }
}
