//! Exact continued fraction arithmetic on finite digit words.
//!
//! Everything here is exact. A [`DigitWord`] `(a_1, ..., a_n)` names the
//! rational `[0; a_1, ..., a_n]` and, through its convergents, the cylinder
//! of reals whose expansion begins with those digits.

mod integer;
mod rational;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use integer::Integer;
pub use rational::Rational;

/// A finite sequence of partial quotients, each at least 1.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct DigitWord(Vec<u64>);

impl DigitWord {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        if let Some(pos) = digits.iter().position(|&a| a == 0) {
            return Err(Error::domain(format!("partial quotient at position {} is 0", pos + 1)));
        }
        Ok(DigitWord(digits))
    }

    pub fn empty() -> Self {
        DigitWord(Vec::new())
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Digit at 1-based position `k`.
    pub fn get(&self, k: usize) -> Option<u64> {
        k.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }

    pub fn push(&mut self, a: u64) -> Result<()> {
        if a == 0 {
            return Err(Error::domain("partial quotient 0"));
        }
        self.0.push(a);
        Ok(())
    }

    pub fn prefix(&self, n: usize) -> DigitWord {
        DigitWord(self.0[..n.min(self.0.len())].to_vec())
    }

    /// A word is canonical when it is empty, or its last digit is at least 2.
    /// The single word `[1]` names the value 1, which lies outside `[0, 1)`.
    pub fn is_canonical(&self) -> bool {
        self.0.last().map_or(true, |&a| a >= 2)
    }

    /// Rewrites a trailing `.., a, 1` as `.., a + 1`. `[1]` has no canonical form in `[0, 1)`
    /// and is returned unchanged.
    pub fn canonicalize(mut self) -> DigitWord {
        if self.0.len() >= 2 && self.0.last() == Some(&1) {
            self.0.pop();
            *self.0.last_mut().unwrap() += 1;
        }
        self
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }
}

impl<'de> Deserialize<'de> for DigitWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u64>::deserialize(d)?;
        DigitWord::new(v).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<u64>> for DigitWord {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        DigitWord::new(v)
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DigitWord {
    type Err = Error;

    /// Parses `[1,2,3]`, `1,2,3` or `1 2 3`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let digits = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|_| Error::parse(t, "expected a positive integer digit")))
            .collect::<Result<Vec<_>>>()?;
        DigitWord::new(digits)
    }
}

/// The convergent `p_n / q_n` together with its index `n >= -1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentPair {
    pub p: Integer,
    pub q: Integer,
    pub index: i64,
}

impl ConvergentPair {
    /// `p_n / q_n`; `None` for the seed pair at index -1, where `q = 0`.
    pub fn value(&self) -> Option<Rational> {
        Rational::new(self.p.clone(), self.q.clone())
    }
}

/// Running state of the recursion `p_n = a_n p_{n-1} + p_{n-2}`, same for `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentState {
    p_prev: Integer,
    q_prev: Integer,
    p: Integer,
    q: Integer,
    n: i64,
}

impl Default for ConvergentState {
    fn default() -> Self {
        Self::new()
    }
}

impl ConvergentState {
    /// State at index 0 with `(p_{-1}, q_{-1}) = (1, 0)` and `(p_0, q_0) = (0, 1)`.
    pub fn new() -> Self {
        ConvergentState {
            p_prev: Integer::ONE,
            q_prev: Integer::ZERO,
            p: Integer::ZERO,
            q: Integer::ONE,
            n: 0,
        }
    }

    pub fn push(&mut self, a: u64) {
        let a = Integer::from(a);
        let p = &(&a * &self.p) + &self.p_prev;
        let q = &(&a * &self.q) + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p, p);
        self.q_prev = std::mem::replace(&mut self.q, q);
        self.n += 1;
    }

    pub fn index(&self) -> i64 {
        self.n
    }

    pub fn p(&self) -> &Integer {
        &self.p
    }

    pub fn q(&self) -> &Integer {
        &self.q
    }

    pub fn p_prev(&self) -> &Integer {
        &self.p_prev
    }

    pub fn q_prev(&self) -> &Integer {
        &self.q_prev
    }

    pub fn current(&self) -> ConvergentPair {
        ConvergentPair { p: self.p.clone(), q: self.q.clone(), index: self.n }
    }

    pub fn previous(&self) -> ConvergentPair {
        ConvergentPair { p: self.p_prev.clone(), q: self.q_prev.clone(), index: self.n - 1 }
    }

    /// `p_n q_{n-1} - p_{n-1} q_n`, which equals `(-1)^{n-1}`.
    pub fn determinant(&self) -> Integer {
        &self.p * &self.q_prev - &self.p_prev * &self.q
    }
}

/// The convergents `(p_k, q_k)` for `k = -1, 0, ..., n`.
pub fn convergents(w: &DigitWord) -> Vec<ConvergentPair> {
    let mut state = ConvergentState::new();
    let mut out = Vec::with_capacity(w.len() + 2);
    out.push(state.previous());
    out.push(state.current());
    for &a in w.digits() {
        state.push(a);
        out.push(state.current());
    }
    out
}

fn state_of(w: &DigitWord) -> ConvergentState {
    let mut state = ConvergentState::new();
    for &a in w.digits() {
        state.push(a);
    }
    state
}

/// The exact value `[0; a_1, ..., a_n]`.
pub fn evaluate(w: &DigitWord) -> Rational {
    let s = state_of(w);
    Rational::new(s.p, s.q).expect("q_n >= 1")
}

/// The canonical expansion of `x` in `[0, 1)`.
pub fn expand(x: &Rational) -> Result<DigitWord> {
    if x.signum() < 0 || x >= &Rational::one() {
        return Err(Error::domain(format!("{x} is outside [0, 1)")));
    }
    let mut digits = Vec::new();
    if let (Some(n), Some(d)) = (x.numer().to_u64(), x.denom().to_u64()) {
        let (mut n, mut d) = (n, d);
        while n != 0 {
            digits.push(d / n);
            (n, d) = (d % n, n);
        }
        return Ok(DigitWord(digits));
    }
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    while !n.is_zero() {
        if let (Some(ns), Some(ds)) = (n.to_u64(), d.to_u64()) {
            let (mut n, mut d) = (ns, ds);
            while n != 0 {
                digits.push(d / n);
                (n, d) = (d % n, n);
            }
            break;
        }
        let (a, r) = d.div_mod_floor(&n);
        let a = a.to_u64().ok_or_else(|| Error::numeric("partial quotient exceeds 64 bits"))?;
        digits.push(a);
        d = n;
        n = r;
    }
    Ok(DigitWord(digits))
}

/// The set of reals in `[0, 1)` whose expansion begins with `word`.
///
/// `left < right` always; which of the two is the convergent `p_n / q_n`
/// depends on the parity of `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub word: DigitWord,
    pub left: Rational,
    pub right: Rational,
    pub conv_n: ConvergentPair,
    pub conv_prev: ConvergentPair,
}

impl Cylinder {
    pub fn min(&self) -> &Rational {
        &self.left
    }

    pub fn max(&self) -> &Rational {
        &self.right
    }

    /// `p_n / q_n`, the endpoint that belongs to the cylinder when the word is canonical.
    pub fn convergent_endpoint(&self) -> Rational {
        self.conv_n.value().expect("q_n >= 1")
    }

    /// `(p_n + p_{n-1}) / (q_n + q_{n-1})`.
    pub fn mediant_endpoint(&self) -> Rational {
        Rational::new(&self.conv_n.p + &self.conv_prev.p, &self.conv_n.q + &self.conv_prev.q)
            .expect("q_n + q_{n-1} >= 1")
    }

    pub fn length(&self) -> Rational {
        &self.right - &self.left
    }

    /// `1 / (q_n (q_n + q_{n-1}))`, computed from the denominators alone.
    pub fn length_from_denominators(&self) -> Rational {
        let q = &self.conv_n.q;
        let den = q * &(q + &self.conv_prev.q);
        Rational::new(Integer::ONE, den).expect("positive")
    }

    /// Natural log of the length, without forming the rational.
    pub fn ln_length(&self) -> f64 {
        let q = &self.conv_n.q;
        -(q.ln_abs() + (q + &self.conv_prev.q).ln_abs())
    }

    /// Whether the canonical expansion of `x` begins with this cylinder's word.
    pub fn contains(&self, x: &Rational) -> bool {
        if x < &self.left || x > &self.right {
            return false;
        }
        let conv = self.convergent_endpoint();
        if x == &conv {
            return self.word.is_canonical() && x < &Rational::one();
        }
        x != &self.mediant_endpoint()
    }
}

/// The cylinder of `w`; the empty word gives the root interval `[0, 1)`.
pub fn cylinder(w: &DigitWord) -> Cylinder {
    let s = state_of(w);
    let a = Rational::new(s.p.clone(), s.q.clone()).expect("q_n >= 1");
    let b = Rational::new(&s.p + &s.p_prev, &s.q + &s.q_prev).expect("q_n + q_{n-1} >= 1");
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    Cylinder { word: w.clone(), left, right, conv_n: s.current(), conv_prev: s.previous() }
}

/// Ratio `q_n(w) / q_{n-1}(w')`, where `w'` is `w` with position `k` removed,
/// with the bounds `(a_k + 1) / 2` and `a_k + 1` it is known to satisfy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalRatio {
    pub ratio: Rational,
    pub lower: Rational,
    pub upper: Rational,
}

impl RemovalRatio {
    pub fn within_bounds(&self) -> bool {
        self.lower <= self.ratio && self.ratio <= self.upper
    }
}

pub fn remove_digit_ratio(w: &DigitWord, k: usize) -> Result<RemovalRatio> {
    let n = w.len();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    let mut reduced = w.digits().to_vec();
    let a_k = reduced.remove(k - 1);
    let q_full = state_of(w).q;
    let q_cut = state_of(&DigitWord(reduced)).q;
    let a1 = Integer::from(a_k) + Integer::ONE;
    Ok(RemovalRatio {
        ratio: Rational::new(q_full, q_cut).expect("q >= 1"),
        lower: Rational::new(a1.clone(), Integer::from(2u8)).expect("nonzero"),
        upper: Rational::from_integer(a1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(d: &[u64]) -> DigitWord {
        DigitWord::new(d.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_i64(n, d).unwrap()
    }

    #[test]
    fn expand_examples() {
        assert!(expand(&Rational::zero()).unwrap().is_empty());
        assert_eq!(expand(&r(3, 7)).unwrap(), w(&[2, 3]));
        assert_eq!(expand(&r(7, 10)).unwrap(), w(&[1, 2, 3]));
        assert!(expand(&r(1, 1)).is_err());
        assert!(expand(&r(-1, 3)).is_err());
    }

    #[test]
    fn expand_big_value() {
        let long: Vec<u64> = (0..120).map(|i| i % 7 + 1).chain([2]).collect();
        let x = evaluate(&w(&long));
        assert!(x.denom().bits() > 64);
        assert_eq!(expand(&x).unwrap(), w(&long));

        let huge = Rational::new(Integer::ONE, Integer::from(10u64).pow(30)).unwrap();
        assert!(expand(&huge).is_err());
    }

    #[test]
    fn convergent_examples() {
        let c = convergents(&w(&[1, 2, 3]));
        let qs: Vec<_> = c[2..].iter().map(|c| c.q.to_u64().unwrap()).collect();
        let ps: Vec<_> = c[2..].iter().map(|c| c.p.to_u64().unwrap()).collect();
        assert_eq!(qs, [1, 3, 10]);
        assert_eq!(ps, [1, 2, 7]);
        assert_eq!(c[0].index, -1);

        let fib: Vec<_> =
            convergents(&w(&[1, 1, 1, 1, 1]))[2..].iter().map(|c| c.q.to_u64().unwrap()).collect();
        assert_eq!(fib, [1, 2, 3, 5, 8]);

        let c = convergents(&w(&[5]));
        assert_eq!((c[2].p.to_u64(), c[2].q.to_u64()), (Some(1), Some(5)));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(&DigitWord::empty()), Rational::zero());
        assert_eq!(evaluate(&w(&[2, 3])), r(3, 7));
        assert_eq!(evaluate(&w(&[1, 1, 1, 1, 1])), r(5, 8));
    }

    #[test]
    fn cylinder_examples() {
        let c = cylinder(&w(&[1]));
        assert_eq!((c.min(), c.max()), (&r(1, 2), &r(1, 1)));
        assert_eq!(c.length(), r(1, 2));

        let c = cylinder(&w(&[1, 2]));
        assert_eq!((c.min(), c.max()), (&r(2, 3), &r(3, 4)));
        assert_eq!(c.length(), r(1, 12));
        assert_eq!(c.length_from_denominators(), r(1, 12));

        for k in 1..50 {
            assert_eq!(cylinder(&w(&[k])).length(), r(1, (k * (k + 1)) as i64));
        }

        let root = cylinder(&DigitWord::empty());
        assert_eq!((root.min(), root.max()), (&r(0, 1), &r(1, 1)));
        assert!(root.contains(&Rational::zero()));
        assert!(!root.contains(&Rational::one()));
    }

    #[test]
    fn cylinder_membership_at_endpoints() {
        let c = cylinder(&w(&[2]));
        assert!(c.contains(&r(1, 2)));
        assert!(!c.contains(&r(1, 3)));
        assert!(c.contains(&r(2, 5)));

        let c = cylinder(&w(&[2, 1]));
        assert!(!c.contains(&evaluate(&w(&[2, 1]))));
    }

    #[test]
    fn removal_examples() {
        let x = remove_digit_ratio(&w(&[3]), 1).unwrap();
        assert_eq!((x.ratio.clone(), x.lower.clone(), x.upper.clone()), (r(3, 1), r(2, 1), r(4, 1)));
        let x = remove_digit_ratio(&w(&[1, 2]), 2).unwrap();
        assert_eq!((x.ratio.clone(), x.lower.clone(), x.upper.clone()), (r(3, 1), r(3, 2), r(3, 1)));
        assert!(x.within_bounds());
        let x = remove_digit_ratio(&w(&[2, 2]), 1).unwrap();
        assert_eq!(x.ratio, r(5, 2));
        assert!(x.within_bounds());
        assert!(remove_digit_ratio(&w(&[2, 2]), 3).is_err());
        assert!(remove_digit_ratio(&w(&[2, 2]), 0).is_err());
    }

    #[test]
    fn word_parsing_and_canonical_form() {
        assert_eq!("[1, 2,3]".parse::<DigitWord>().unwrap(), w(&[1, 2, 3]));
        assert_eq!("4 5".parse::<DigitWord>().unwrap(), w(&[4, 5]));
        assert!("1,0".parse::<DigitWord>().is_err());
        assert!("1,x".parse::<DigitWord>().is_err());
        assert_eq!(w(&[3, 4, 1]).canonicalize(), w(&[3, 5]));
        assert_eq!(w(&[1]).canonicalize(), w(&[1]));
        assert!(!w(&[1]).is_canonical());
        assert!(DigitWord::empty().is_canonical());
    }
}
