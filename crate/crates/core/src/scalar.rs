//! Coefficient scalars and p-adic valuations of rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Field of coefficients for cyclotomic elements.
///
/// Exact fields ([`BigRational`], `Ratio<i64>`, `Ratio<i128>`) and the
/// floating types `f32`/`f64` all qualify; valuations additionally need
/// [`RationalScalar`].
pub trait Scalar:
    Num
    + Clone
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    fn from_i64(x: i64) -> Self;

    /// `self += rhs`; exact types may skip normalization where it is a no-op.
    fn add_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }

    fn sub_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }

    /// Product of two polynomials reduced mod `x^len - 1`.
    ///
    /// Zero entries are skipped, which matters for the sparse unit weights
    /// and roots of unity that dominate the moment computations.
    fn cyclic_product(a: &[Self], b: &[Self], len: usize) -> Vec<Self> {
        let mut out = vec![Self::zero(); len];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let k = (i + j) % len;
                out[k] = out[k].clone() + x.clone() * y.clone();
            }
        }
        out
    }
}

/// Exact scalars that embed into the rationals.
pub trait RationalScalar: Scalar {
    fn to_big_rational(&self) -> BigRational;
    fn from_big_rational(x: &BigRational) -> Option<Self>;
}

/// Integer sum or difference of two integral rationals, skipping the gcd
/// that `Ratio` arithmetic always runs (costly for wide numerators).
fn integral_combine(a: &mut BigRational, b: &BigRational, negate: bool) -> bool {
    if !(a.denom().is_one() && b.denom().is_one()) {
        return false;
    }
    let (mut n, d) = std::mem::take(a).into_raw();
    if negate {
        n -= b.numer();
    } else {
        n += b.numer();
    }
    *a = BigRational::new_raw(n, d);
    true
}

impl Scalar for BigRational {
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }

    fn add_ref(&mut self, rhs: &Self) {
        if !integral_combine(self, rhs, false) {
            *self += rhs;
        }
    }

    fn sub_ref(&mut self, rhs: &Self) {
        if !integral_combine(self, rhs, true) {
            *self -= rhs;
        }
    }

    fn cyclic_product(a: &[Self], b: &[Self], len: usize) -> Vec<Self> {
        // Clear denominators once, convolve integers, divide back.
        let (ia, da) = integral_form(a);
        let (ib, db) = integral_form(b);
        let mut acc = vec![BigInt::zero(); len];
        for (i, x) in ia.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in ib.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                acc[(i + j) % len] += x * y;
            }
        }
        let den = da * db;
        acc.into_iter()
            .map(|n| {
                if n.is_zero() {
                    BigRational::zero()
                } else if den.is_one() {
                    BigRational::from_integer(n)
                } else {
                    BigRational::new(n, den.clone())
                }
            })
            .collect()
    }
}

impl RationalScalar for BigRational {
    fn to_big_rational(&self) -> BigRational {
        self.clone()
    }
    fn from_big_rational(x: &BigRational) -> Option<Self> {
        Some(x.clone())
    }
}

macro_rules! small_ratio {
    ($t:ty) => {
        impl Scalar for Ratio<$t> {
            fn from_i64(x: i64) -> Self {
                Ratio::from_integer(x as $t)
            }
        }

        impl RationalScalar for Ratio<$t> {
            fn to_big_rational(&self) -> BigRational {
                BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
            }
            fn from_big_rational(x: &BigRational) -> Option<Self> {
                let n = x.numer().to_string().parse::<$t>().ok()?;
                let d = x.denom().to_string().parse::<$t>().ok()?;
                Some(Ratio::new(n, d))
            }
        }
    };
}

small_ratio!(i64);
small_ratio!(i128);

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_i64(x: i64) -> Self {
                x as $t
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

/// Common-denominator form: integers `n_k` and `d > 0` with `x_k = n_k / d`.
pub fn integral_form(xs: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let mut den = BigInt::one();
    for x in xs {
        if !x.is_zero() && !x.denom().is_one() {
            den = den.lcm(x.denom());
        }
    }
    let nums = xs
        .iter()
        .map(|x| {
            if x.is_zero() {
                BigInt::zero()
            } else {
                x.numer() * (&den / x.denom())
            }
        })
        .collect();
    (nums, den)
}

/// `v_p(n)` for a nonzero integer.
pub fn vp_int(n: &BigInt, p: u32) -> u64 {
    assert!(!n.is_zero(), "valuation of zero integer");
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `v_p(x)` for a nonzero rational.
pub fn vp_rational(x: &BigRational, p: u32) -> i64 {
    vp_int(x.numer(), p) as i64 - vp_int(x.denom(), p) as i64
}

/// A p-adic valuation: a rational number or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(BigRational),
    Infinite,
}

impl Valuation {
    pub fn integer(v: i64) -> Self {
        Valuation::Finite(BigRational::from_integer(v.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Valuation::Finite(BigRational::new(n.into(), d.into()))
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}/{}", v.numer(), v.denom()),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Valuation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "inf" || s == "+inf" {
            return Ok(Valuation::Infinite);
        }
        parse_rational(s).map(Valuation::Finite)
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| format!("bad rational `{s}`"))?;
    let d: BigInt = d.parse().map_err(|_| format!("bad rational `{s}`"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(BigRational::new(n, d))
}

/// `"num/den"` with an explicit denominator, as used in reports and caches.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Serde adapter storing a [`BigRational`] as `"num/den"`.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Nearest f64 to a rational, good enough for diagnostics.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_valuations() {
        assert_eq!(vp_rational(&q(18, 5), 3), 2);
        assert_eq!(vp_rational(&q(5, 27), 3), -3);
        assert_eq!(vp_rational(&q(-7, 1), 7), 1);
    }

    #[test]
    fn valuation_order_and_sum() {
        assert!(Valuation::Infinite > Valuation::integer(1000));
        assert_eq!(Valuation::ratio(1, 2) + Valuation::ratio(1, 3), Valuation::ratio(5, 6));
        assert_eq!(Valuation::ratio(1, 2) + Valuation::Infinite, Valuation::Infinite);
        assert_eq!(Valuation::ratio(-1, 2).to_string(), "-1/2");
        assert_eq!(Valuation::integer(0).to_string(), "0/1");
        assert_eq!("3/6".parse::<Valuation>().unwrap(), Valuation::ratio(1, 2));
        assert_eq!("inf".parse::<Valuation>().unwrap(), Valuation::Infinite);
    }

    #[test]
    fn integral_form_clears_denominators() {
        let (n, d) = integral_form(&[q(1, 2), q(0, 1), q(-2, 3)]);
        assert_eq!(d, BigInt::from(6));
        assert_eq!(n, vec![BigInt::from(3), BigInt::from(0), BigInt::from(-4)]);
    }

    #[test]
    fn fast_cyclic_product_matches_default() {
        let a = vec![q(1, 2), q(0, 1), q(3, 1), q(-1, 5)];
        let b = vec![q(2, 3), q(-1, 1), q(0, 1), q(7, 4)];
        let fast = BigRational::cyclic_product(&a, &b, 5);
        let mut slow = vec![BigRational::zero(); 5];
        for i in 0..4 {
            for j in 0..4 {
                slow[(i + j) % 5] += &a[i] * &b[j];
            }
        }
        assert_eq!(fast, slow);
    }
}
