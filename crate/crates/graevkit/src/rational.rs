//! Exact rational scalars and their canonical text form.
//!
//! All exact arithmetic in this crate uses arbitrary-precision rationals.
//! The canonical text form is `p` or `p/q` with `q > 0` and `gcd(p, q) = 1`,
//! which is what [`num_rational::BigRational`]'s `Display` produces once the
//! value is normalized. Parsing is done by hand so that malformed input (for
//! example a zero denominator) surfaces as an error instead of a panic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the exact modules.
pub type Rat = BigRational;

/// Parse a rational from its text form `p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num
        .parse()
        .map_err(|_| Error::ParseRational(s.to_string()))?;
    let denom: BigInt = match den {
        Some(d) => d.parse().map_err(|_| Error::ParseRational(s.to_string()))?,
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return Err(Error::ParseRational(s.to_string()));
    }
    Ok(Rat::new(numer, denom))
}

/// Canonical text form: lowest terms, positive denominator, `p/q` or bare `p`.
pub fn format_rational(r: &Rat) -> String {
    r.to_string()
}

/// Convenience constructor for small rationals.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Convenience constructor for integers.
pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Fractional part in `[0, 1)`: `r - floor(r)`.
pub fn fract(r: &Rat) -> Rat {
    r - r.floor()
}

/// True when the value is an integer.
pub fn is_integer(r: &Rat) -> bool {
    r.is_integer()
}

/// Absolute value.
pub fn abs(r: &Rat) -> Rat {
    r.abs()
}
