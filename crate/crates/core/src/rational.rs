//! Small helpers for exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `base^(-exp)` for `exp ≥ 0`, or `base^|exp|` for negative `exp`.
pub fn inv_pow(base: u64, exp: i64) -> BigRational {
    let b = BigInt::from(base);
    let p = num_traits::pow(b, exp.unsigned_abs() as usize);
    if exp >= 0 {
        BigRational::new(BigInt::one(), p)
    } else {
        BigRational::from_integer(p)
    }
}

fn scaled_floor(x: &BigRational, digits: usize) -> BigInt {
    let scale = num_traits::pow(BigInt::from(10), digits);
    (x.numer() * scale).div_floor(x.denom())
}

fn render(scaled: BigInt, digits: usize) -> String {
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = format!("{s:0>width$}", width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Decimal rendering rounded toward −∞.
pub fn decimal_floor(x: &BigRational, digits: usize) -> String {
    render(scaled_floor(x, digits), digits)
}

/// Decimal rendering rounded toward +∞.
pub fn decimal_ceil(x: &BigRational, digits: usize) -> String {
    render(-scaled_floor(&-x, digits), digits)
}

/// `p/q` in lowest terms (`p` alone when the denominator is 1).
pub fn fraction(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Nearest `f64`, for presentation only.
pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        if x.is_zero() {
            0.0
        } else if x.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}
