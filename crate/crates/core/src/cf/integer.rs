//! Arbitrary-precision integers with an inline fast path.
//!
//! Values that fit in an `i64` are stored inline and combined through `i128`
//! intermediates; anything larger spills to a heap-allocated [`BigInt`]. The
//! representation is canonical: a value in `i64` range is never stored as a
//! `BigInt`, so derived equality and hashing are structural.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(i64),
    Big(BigInt),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Integer(Repr);

impl Integer {
    pub const ZERO: Integer = Integer(Repr::Small(0));
    pub const ONE: Integer = Integer(Repr::Small(1));

    pub fn from_i128(v: i128) -> Self {
        match i64::try_from(v) {
            Ok(s) => Integer(Repr::Small(s)),
            Err(_) => Integer(Repr::Big(BigInt::from(v))),
        }
    }

    pub fn from_big(v: BigInt) -> Self {
        match v.to_i64() {
            Some(s) => Integer(Repr::Small(s)),
            None => Integer(Repr::Big(v)),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match &self.0 {
            Repr::Small(s) => BigInt::from(*s),
            Repr::Big(b) => b.clone(),
        }
    }

    /// The inline value, if the integer fits in an `i64`.
    #[inline]
    pub fn as_i64(&self) -> Option<i64> {
        match self.0 {
            Repr::Small(s) => Some(s),
            Repr::Big(_) => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match &self.0 {
            Repr::Small(s) => u64::try_from(*s).ok(),
            Repr::Big(b) => b.to_u64(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1))
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(s) => s.signum() as i32,
            Repr::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Integer {
        match &self.0 {
            Repr::Small(s) => Integer::from_i128((*s as i128).abs()),
            Repr::Big(b) => Integer::from_big(b.abs()),
        }
    }

    /// Bit length of the magnitude (0 for zero).
    pub fn bits(&self) -> u64 {
        match &self.0 {
            Repr::Small(s) => 64 - s.unsigned_abs().leading_zeros() as u64,
            Repr::Big(b) => b.bits(),
        }
    }

    /// Floored division: `self = q * other + r` with `r` carrying the sign of `other`.
    ///
    /// Panics on division by zero.
    pub fn div_mod_floor(&self, other: &Integer) -> (Integer, Integer) {
        assert!(!other.is_zero(), "integer division by zero");
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => {
                if *a == i64::MIN && *b == -1 {
                    return (Integer::from_i128(-(i64::MIN as i128)), Integer::ZERO);
                }
                let (q, r) = a.div_mod_floor(b);
                (Integer(Repr::Small(q)), Integer(Repr::Small(r)))
            }
            _ => {
                let (q, r) = self.to_big().div_mod_floor(&other.to_big());
                (Integer::from_big(q), Integer::from_big(r))
            }
        }
    }

    pub fn div_floor(&self, other: &Integer) -> Integer {
        self.div_mod_floor(other).0
    }

    /// Nonnegative greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Integer) -> Integer {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => {
                let g = gcd_u64(a.unsigned_abs(), b.unsigned_abs());
                Integer::from_i128(g as i128)
            }
            _ => Integer::from_big(self.to_big().gcd(&other.to_big())),
        }
    }

    pub fn pow(&self, exp: u32) -> Integer {
        if let Repr::Small(s) = self.0 {
            if let Some(v) = (s as i128).checked_pow(exp) {
                return Integer::from_i128(v);
            }
        }
        Integer::from_big(num_traits::pow(self.to_big(), exp as usize))
    }

    /// Nearest `f64`; saturates to `±inf` beyond the double range.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(s) => *s as f64,
            Repr::Big(b) => {
                b.to_f64().unwrap_or(if b.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
            }
        }
    }

    /// Natural logarithm of the magnitude, accurate to about one ulp even
    /// for integers far outside the `f64` range. `ln(0) = -inf`.
    pub fn ln_abs(&self) -> f64 {
        match &self.0 {
            Repr::Small(s) => (s.unsigned_abs() as f64).ln(),
            Repr::Big(b) => {
                let bits = b.bits();
                if bits <= 1000 {
                    return b.abs().to_f64().unwrap_or(f64::INFINITY).ln();
                }
                let shift = bits - 64;
                let top = (b.abs() >> shift).to_u64().unwrap_or(u64::MAX);
                (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
            }
        }
    }
}

/// Binary gcd on machine words.
pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// Binary gcd on 128-bit words, dropping to 64 bits as soon as both fit.
pub(crate) fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if b <= u64::MAX as u128 {
            return (gcd_u64(a as u64, b as u64) as u128) << shift;
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Default for Integer {
    fn default() -> Self {
        Integer::ZERO
    }
}

macro_rules! from_prim {
    ($($t:ty),*) => {$(
        impl From<$t> for Integer {
            fn from(v: $t) -> Self {
                Integer::from_i128(v as i128)
            }
        }
    )*};
}
from_prim!(i8, i16, i32, i64, u8, u16, u32, u64, usize);

impl From<BigInt> for Integer {
    fn from(v: BigInt) -> Self {
        Integer::from_big(v)
    }
}

impl From<&Integer> for BigInt {
    fn from(v: &Integer) -> Self {
        v.to_big()
    }
}

impl Ord for Integer {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            // A spilled value is always outside the i64 range.
            (Repr::Big(a), Repr::Small(_)) => {
                if a.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Repr::Small(_), Repr::Big(b)) => {
                if b.is_negative() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Integer {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $small:expr, $big:expr) => {
        impl<'a, 'b> $trait<&'b Integer> for &'a Integer {
            type Output = Integer;
            #[inline]
            fn $method(self, rhs: &'b Integer) -> Integer {
                match (&self.0, &rhs.0) {
                    (Repr::Small(a), Repr::Small(b)) => Integer::from_i128(($small)(*a as i128, *b as i128)),
                    _ => Integer::from_big(($big)(self.to_big(), rhs.to_big())),
                }
            }
        }
        impl $trait<Integer> for Integer {
            type Output = Integer;
            #[inline]
            fn $method(self, rhs: Integer) -> Integer {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $trait<&'b Integer> for Integer {
            type Output = Integer;
            #[inline]
            fn $method(self, rhs: &'b Integer) -> Integer {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Integer> for &'a Integer {
            type Output = Integer;
            #[inline]
            fn $method(self, rhs: Integer) -> Integer {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a: i128, b: i128| a + b, |a: BigInt, b: BigInt| a + b);
binop!(Sub, sub, |a: i128, b: i128| a - b, |a: BigInt, b: BigInt| a - b);
binop!(Mul, mul, |a: i128, b: i128| a * b, |a: BigInt, b: BigInt| a * b);

impl Neg for &Integer {
    type Output = Integer;
    fn neg(self) -> Integer {
        match &self.0 {
            Repr::Small(s) => Integer::from_i128(-(*s as i128)),
            Repr::Big(b) => Integer::from_big(-b),
        }
    }
}

impl Neg for Integer {
    type Output = Integer;
    fn neg(self) -> Integer {
        -&self
    }
}

impl fmt::Display for Integer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(s) => write!(f, "{s}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Integer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Integer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(v) = t.parse::<i64>() {
            return Ok(Integer(Repr::Small(v)));
        }
        t.parse::<BigInt>().map(Integer::from_big).map_err(|_| Error::parse(s, "expected an integer"))
    }
}

impl Serialize for Integer {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Integer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Zero for Integer {
    fn zero() -> Self {
        Integer::ZERO
    }
    fn is_zero(&self) -> bool {
        Integer::is_zero(self)
    }
}
