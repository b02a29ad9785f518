//! Exact rational helpers: falling factorials, binomials, powers and the
//! `"numerator/denominator"` string encoding used in reports.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Reduced arbitrary-precision rational with positive denominator.
pub type ExactRational = BigRational;

pub fn int(v: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(v: &BigUint) -> ExactRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// `(a)_b = a (a-1) ... (a-b+1)`; zero when `b > a`.
pub fn falling_factorial(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
    }
    acc
}

pub fn factorial(a: u64) -> BigUint {
    falling_factorial(a, a)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    falling_factorial(n, k) / factorial(k)
}

pub fn pow(base: &ExactRational, exp: u32) -> ExactRational {
    let mut acc = ExactRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// `2^e` for a possibly negative exponent.
pub fn pow2(e: i64) -> ExactRational {
    let p = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

pub fn to_f64(q: &ExactRational) -> f64 {
    // ToPrimitive on Ratio<BigInt> handles huge numerators and denominators
    // without overflowing through intermediate integer conversions.
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(q: &ExactRational) -> ExactRational {
    q.abs()
}

/// Encodes as `"num/den"` (or `"num"` for integers).
pub fn encode(q: &ExactRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn decode(s: &str) -> Option<ExactRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Serde adapter storing a rational as a `"num/den"` string.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encode(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactRational, D::Error> {
        let s = String::deserialize(d)?;
        decode(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`")))
    }
}

/// Same as [`serde_str`] for optional values.
pub mod serde_opt_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<ExactRational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&encode(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ExactRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        match s {
            None => Ok(None),
            Some(s) => decode(&s)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`"))),
        }
    }
}
