use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::integer::{gcd_u128, Integer};
use crate::error::{Error, Result};

/// Exact fraction in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: Integer,
    den: Integer,
}

impl Rational {
    /// Builds `num/den` reduced to lowest terms. Returns `None` for a zero denominator.
    pub fn new(num: Integer, den: Integer) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if let (Some(n), Some(d)) = (num.as_i64(), den.as_i64()) {
            return Some(Self::from_i128_parts(n as i128, d as i128));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_one() { (num, den) } else { (num.div_floor(&g), den.div_floor(&g)) };
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        Some(Rational { num, den })
    }

    /// Reduces `n/d` computed in 128-bit arithmetic. `d` must be nonzero.
    fn from_i128_parts(n: i128, d: i128) -> Self {
        debug_assert!(d != 0);
        let g = gcd_u128(n.unsigned_abs(), d.unsigned_abs());
        // g >= 1 because d != 0; quotients of an i128 by g >= 1 stay in range
        // except for i128::MIN / 1, which cannot arise from i64 products.
        let (mut n, mut d) = (n / g as i128, d / g as i128);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Rational { num: Integer::from_i128(n), den: Integer::from_i128(d) }
    }

    pub fn from_integer(v: Integer) -> Self {
        Rational { num: v, den: Integer::ONE }
    }

    pub fn from_i64(num: i64, den: i64) -> Option<Self> {
        Rational::new(Integer::from(num), Integer::from(den))
    }

    pub fn zero() -> Self {
        Rational::from_integer(Integer::ZERO)
    }

    pub fn one() -> Self {
        Rational::from_integer(Integer::ONE)
    }

    pub fn numer(&self) -> &Integer {
        &self.num
    }

    pub fn denom(&self) -> &Integer {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn signum(&self) -> i32 {
        self.num.signum()
    }

    pub fn abs(&self) -> Rational {
        Rational { num: self.num.abs(), den: self.den.clone() }
    }

    pub fn recip(&self) -> Option<Rational> {
        Rational::new(self.den.clone(), self.num.clone())
    }

    pub fn floor(&self) -> Integer {
        self.num.div_floor(&self.den)
    }

    pub fn to_f64(&self) -> f64 {
        if self.num.bits() < 1000 && self.den.bits() < 1000 {
            self.num.to_f64() / self.den.to_f64()
        } else if self.is_zero() {
            0.0
        } else {
            self.signum() as f64 * self.ln_abs().exp()
        }
    }

    /// Natural logarithm of `|self|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.num.ln_abs() - self.den.ln_abs()
    }

    pub fn to_big_pair(&self) -> (BigInt, BigInt) {
        (self.num.to_big(), self.den.to_big())
    }

    fn small_parts(&self) -> Option<(i128, i128)> {
        Some((self.num.as_i64()? as i128, self.den.as_i64()? as i128))
    }
}

impl From<Integer> for Rational {
    fn from(v: Integer) -> Self {
        Rational::from_integer(v)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(Integer::from(v))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Some((a, b)), Some((c, d))) = (self.small_parts(), other.small_parts()) {
            return (a * d).cmp(&(c * b));
        }
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_impl(x: &Rational, y: &Rational, negate_y: bool) -> Rational {
    if let (Some((a, b)), Some((c, d))) = (x.small_parts(), y.small_parts()) {
        let c = if negate_y { -c } else { c };
        // |a*d|, |c*b| < 2^126, so the sum fits in an i128.
        return Rational::from_i128_parts(a * d + c * b, b * d);
    }
    let cross = &y.num * &x.den;
    let num = if negate_y { &x.num * &y.den - cross } else { &x.num * &y.den + cross };
    Rational::new(num, &x.den * &y.den).expect("nonzero product of denominators")
}

impl<'a, 'b> Add<&'b Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &'b Rational) -> Rational {
        add_impl(self, rhs, false)
    }
}

impl<'a, 'b> Sub<&'b Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &'b Rational) -> Rational {
        add_impl(self, rhs, true)
    }
}

impl<'a, 'b> Mul<&'b Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &'b Rational) -> Rational {
        if let (Some((a, b)), Some((c, d))) = (self.small_parts(), rhs.small_parts()) {
            return Rational::from_i128_parts(a * c, b * d);
        }
        Rational::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

impl<'a, 'b> Div<&'b Rational> for &'a Rational {
    type Output = Rational;
    /// Panics when dividing by zero.
    fn div(self, rhs: &'b Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational::new(&self.num * &rhs.den, &self.den * &rhs.num).expect("nonzero denominator")
    }
}

macro_rules! forward_owned {
    ($($trait:ident $method:ident),*) => {$(
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $trait<&'b Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p/q` or a bare integer `p`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: Integer = n.parse().map_err(|_| Error::parse(s, "bad numerator"))?;
        let den: Integer = d.parse().map_err(|_| Error::parse(s, "bad denominator"))?;
        Rational::new(num, den).ok_or_else(|| Error::parse(s, "zero denominator"))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_i64(n, d).unwrap()
    }

    #[test]
    fn normalizes_sign_and_terms() {
        let x = r(6, -8);
        assert_eq!(x.numer(), &Integer::from(-3));
        assert_eq!(x.denom(), &Integer::from(4));
        assert!(Rational::from_i64(1, 0).is_none());
    }

    #[test]
    fn arithmetic_small_and_big_agree() {
        let a = r(3, 7);
        let b = r(-2, 5);
        assert_eq!(&a + &b, r(1, 35));
        assert_eq!(&a - &b, r(29, 35));
        assert_eq!(&a * &b, r(-6, 35));
        assert_eq!(&a / &b, r(-15, 14));

        let big = Rational::new(Integer::from(10u64).pow(30), Integer::from(3u64).pow(40)).unwrap();
        let sum = &(&big + &a) - &a;
        assert_eq!(sum, big);
    }

    #[test]
    fn ordering_by_value() {
        assert!(r(1, 3) < r(1, 2));
        assert!(r(-1, 2) < r(0, 1));
        let tiny = Rational::new(Integer::ONE, Integer::from(10u64).pow(40)).unwrap();
        assert!(tiny > Rational::zero());
        assert!(tiny < r(1, i64::MAX));
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/7".parse::<Rational>().unwrap(), r(3, 7));
        assert_eq!(" 4 / 6 ".parse::<Rational>().unwrap(), r(2, 3));
        assert_eq!("5".parse::<Rational>().unwrap(), r(5, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("a/2".parse::<Rational>().is_err());
    }

    #[test]
    fn ln_and_f64() {
        assert!((r(1, 12).ln_abs() + 12f64.ln()).abs() < 1e-15);
        let tiny = Rational::new(Integer::ONE, Integer::from(10u64).pow(500)).unwrap();
        assert!((tiny.ln_abs() + 500.0 * 10f64.ln()).abs() < 1e-9);
        assert_eq!(tiny.to_f64(), 0.0);
    }
}
