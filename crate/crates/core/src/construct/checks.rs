//! Finite-depth distortion and gap checks on `E_M(psi)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eliminate_sparse, for_each_word, int_ranges, ConstructedSet, SetKind};
use crate::cf::{cylinder, ConvergentState, DigitWord, Integer, Rational};
use crate::error::{Error, Result};
use crate::growth::{sparse_count, GrowthSpec};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Smallest `n0 <= limit` such that
/// `2^((n - t(n) - 1) eps) >= 2 prod_{i <= t(n)} (exp psi(2^i) + 1)^2`
/// holds for every `n` in `[n0, limit]`. `None` when it fails at `limit`.
pub fn distortion_threshold(spec: &GrowthSpec, eps: f64, limit: u64) -> Result<Option<u64>> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("epsilon must be positive, got {eps}")));
    }
    let t_max = sparse_count(limit) as usize;
    let mut rhs = vec![1.0f64; t_max + 1];
    for i in 1..=t_max {
        let psi = spec.eval_psi(1u64 << i)?;
        let log2_term = (psi + (-psi).exp().ln_1p()) * LOG2_E;
        rhs[i] = rhs[i - 1] + 2.0 * log2_term;
    }
    let holds = |n: u64| {
        let t = sparse_count(n) as usize;
        (n as f64 - t as f64 - 1.0) * eps >= rhs[t]
    };
    if limit == 0 || !holds(limit) {
        return Ok(None);
    }
    let mut n0 = limit;
    while n0 > 1 && holds(n0 - 1) {
        n0 -= 1;
    }
    Ok(Some(n0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionOptions {
    pub eps: f64,
    /// Upper end of the search for the threshold index.
    pub search_limit: u64,
    /// Families larger than this are sampled.
    pub exhaustive_limit: u128,
    pub sample_size: usize,
    pub seed: u64,
}

impl DistortionOptions {
    pub fn new(eps: f64) -> Self {
        DistortionOptions {
            eps,
            search_limit: 1 << 16,
            exhaustive_limit: 100_000,
            sample_size: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionViolation {
    pub word: DigitWord,
    pub ln_length: f64,
    pub ln_reduced_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionLevel {
    pub n: usize,
    pub words_checked: u64,
    pub exhaustive: bool,
    /// `min (ln|I_n| - (1 + eps) ln|I_bar_n|)` over the checked words.
    pub min_margin: f64,
    /// Whether `n >= N1`, where the inequality is claimed.
    pub asserted: bool,
    pub violations: Vec<DistortionViolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub eps: f64,
    pub n1: Option<u64>,
    pub search_limit: u64,
    pub level: DistortionLevel,
}

impl DistortionReport {
    /// Violations at a level where the bound is asserted.
    pub fn asserted_violations(&self) -> usize {
        if self.level.asserted {
            self.level.violations.len()
        } else {
            0
        }
    }
}

fn require_em(set: &ConstructedSet) -> Result<&GrowthSpec> {
    if set.name != SetKind::EMPsi {
        return Err(Error::precondition(format!("check needs an E_M_psi set, got {}", set.name)));
    }
    set.params.spec.as_ref().ok_or_else(|| Error::precondition("set has no growth spec"))
}

/// `q_n (q_n + q_{n-1})`, the reciprocal length of the cylinder.
fn reciprocal_length(digits: &[u64]) -> Integer {
    let mut s = ConvergentState::new();
    for &a in digits {
        s.push(a);
    }
    s.q() * &(s.q() + s.q_prev())
}

fn integer_power(eps: f64) -> Option<u32> {
    (eps.fract() == 0.0 && (0.0..=64.0).contains(&eps)).then_some(eps as u32)
}

fn distortion_of(digits: &[u64], sparse: &[u64], eps: f64) -> (f64, f64, bool) {
    let w = DigitWord::new(digits.to_vec()).expect("admissible digits are positive");
    let reduced = eliminate_sparse(&w, sparse);
    let r_full = reciprocal_length(digits);
    let r_bar = reciprocal_length(reduced.digits());
    let ln_len = -r_full.ln_abs();
    let ln_bar = -r_bar.ln_abs();
    let ok = match integer_power(eps) {
        Some(k) => r_full <= r_bar.pow(k + 1),
        None => {
            let margin = ln_len - (1.0 + eps) * ln_bar;
            margin >= -1e-12 * ln_len.abs().max(1.0)
        }
    };
    (ln_len, ln_bar, ok)
}

/// Checks `|I_n| >= |I_bar_n|^(1 + eps)` on the admissible words of length `n`.
pub fn check_distortion(
    set: &ConstructedSet,
    n: usize,
    opts: &DistortionOptions,
) -> Result<DistortionReport> {
    let spec = require_em(set)?;
    if n == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let n1 = distortion_threshold(spec, opts.eps, opts.search_limit)?;
    let ranges = int_ranges(set, n)?;
    let sparse = set.sparse_upto(n);
    let size = set.family_size(n);
    let exhaustive = size.is_some_and(|s| s <= opts.exhaustive_limit);

    let words: Vec<Vec<u64>> = if exhaustive {
        let mut all = Vec::new();
        for_each_word(set, n, |w| all.push(w.to_vec()))?;
        all
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut v: Vec<Vec<u64>> = (0..opts.sample_size)
            .map(|_| ranges.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
            .collect();
        v.push(ranges.iter().map(|r| r.0).collect());
        v.push(ranges.iter().map(|r| r.1).collect());
        v
    };

    let eps = opts.eps;
    let results: Vec<(f64, Option<DistortionViolation>)> = words
        .par_iter()
        .map(|w| {
            let (ln_len, ln_bar, ok) = distortion_of(w, &sparse, eps);
            let margin = ln_len - (1.0 + eps) * ln_bar;
            let v = (!ok).then(|| DistortionViolation {
                word: DigitWord::new(w.clone()).expect("positive digits"),
                ln_length: ln_len,
                ln_reduced_length: ln_bar,
            });
            (margin, v)
        })
        .collect();
    let min_margin = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let violations = results.into_iter().filter_map(|r| r.1).collect();

    Ok(DistortionReport {
        eps,
        n1,
        search_limit: opts.search_limit,
        level: DistortionLevel {
            n,
            words_checked: words.len() as u64,
            exhaustive,
            min_margin,
            asserted: n1.is_some_and(|n1| n as u64 >= n1),
            violations,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapViolation {
    pub parent: DigitWord,
    pub children: (u64, u64),
    pub gap: Rational,
    pub bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLevel {
    pub n: usize,
    pub parents: u64,
    pub pairs: u64,
    /// `true` when index `n + 1` is sparse, so every parent has one child.
    pub vacuous: bool,
    /// `min gap / bound` over all pairs; infinite when there are none.
    pub min_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub m: u64,
    pub level: GapLevel,
    pub violations: Vec<GapViolation>,
}

/// Parent families larger than this are refused.
pub const GAP_ENUMERATION_LIMIT: u128 = 1 << 22;

/// Hull of the order-`n + 2` cylinders below `parent, l`, over the admissible
/// range `lo..=hi` of the next digit.
fn fundamental_interval(parent: &[u64], l: u64, lo: u64, hi: u64) -> (Rational, Rational) {
    let mut w = parent.to_vec();
    w.push(l);
    w.push(lo);
    let a = cylinder(&DigitWord::new(w.clone()).expect("positive"));
    *w.last_mut().expect("nonempty") = hi;
    let b = cylinder(&DigitWord::new(w).expect("positive"));
    let left = a.left.clone().min(b.left.clone());
    let right = a.right.max(b.right);
    (left, right)
}

/// Checks that sibling fundamental intervals `J_{n+1}` below every admissible
/// parent of length `n` are at least `|I_n| / (M + 2)^3` apart.
pub fn check_gap(set: &ConstructedSet, n: usize) -> Result<GapReport> {
    require_em(set)?;
    let ranges = int_ranges(set, n + 2)?;
    let size = set.family_size(n).unwrap_or(u128::MAX);
    if size > GAP_ENUMERATION_LIMIT {
        return Err(Error::precondition(format!(
            "{size} parent words at depth {n} exceed the enumeration limit"
        )));
    }
    let (c_lo, c_hi) = ranges[n];
    let (g_lo, g_hi) = ranges[n + 1];
    let vacuous = c_lo == c_hi;
    let mut parents = Vec::new();
    for_each_word(set, n, |w| parents.push(w.to_vec()))?;
    let scale = Integer::from(set.m + 2).pow(3);

    let per_parent: Vec<(u64, f64, Vec<GapViolation>)> = parents
        .par_iter()
        .map(|p| {
            if vacuous {
                return (0, f64::INFINITY, Vec::new());
            }
            let parent_cyl = cylinder(&DigitWord::new(p.clone()).expect("positive"));
            let bound = parent_cyl.length() / Rational::from_integer(scale.clone());
            let js: Vec<(u64, (Rational, Rational))> =
                (c_lo..=c_hi).map(|l| (l, fundamental_interval(p, l, g_lo, g_hi))).collect();
            let mut pairs = 0;
            let mut min_ratio = f64::INFINITY;
            let mut bad = Vec::new();
            for i in 0..js.len() {
                for j in i + 1..js.len() {
                    let (a, b) = (&js[i].1, &js[j].1);
                    let lo_end = (&a.0).max(&b.0);
                    let hi_start = (&a.1).min(&b.1);
                    let gap = lo_end - hi_start;
                    let gap = if gap.signum() < 0 { Rational::zero() } else { gap };
                    pairs += 1;
                    min_ratio = min_ratio.min((&gap / &bound).to_f64());
                    if gap < bound {
                        bad.push(GapViolation {
                            parent: DigitWord::new(p.clone()).expect("positive"),
                            children: (js[i].0, js[j].0),
                            gap,
                            bound: bound.clone(),
                        });
                    }
                }
            }
            (pairs, min_ratio, bad)
        })
        .collect();

    let mut pairs = 0;
    let mut min_ratio = f64::INFINITY;
    let mut violations = Vec::new();
    for (p, r, v) in per_parent {
        pairs += p;
        min_ratio = min_ratio.min(r);
        violations.extend(v);
    }
    Ok(GapReport {
        m: set.m,
        level: GapLevel { n, parents: parents.len() as u64, pairs, vacuous, min_ratio },
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{make_set, SetParams};
    use super::*;

    fn em(spec: &str, m: u64, depth: usize) -> ConstructedSet {
        let params = SetParams { spec: Some(spec.parse().unwrap()), m: Some(m), ..Default::default() };
        make_set(SetKind::EMPsi, &params, depth).unwrap()
    }

    #[test]
    fn threshold_values() {
        assert_eq!(distortion_threshold(&"log".parse().unwrap(), 1.0, 1 << 16).unwrap(), Some(42));
        assert_eq!(distortion_threshold(&"lin:1".parse().unwrap(), 1.0, 1 << 16).unwrap(), None);
    }

    #[test]
    fn gap_small_depths() {
        let set = em("lin:1", 2, 8);
        let r = check_gap(&set, 2).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.level.parents, 2);
        let r = check_gap(&set, 3).unwrap();
        assert!(r.level.vacuous);
        assert_eq!(r.level.pairs, 0);
    }

    #[test]
    fn distortion_level_reports() {
        let set = em("log", 2, 12);
        let r = check_distortion(&set, 12, &DistortionOptions::new(1.0)).unwrap();
        assert_eq!(r.n1, Some(42));
        assert!(!r.level.asserted);
        assert!(r.level.exhaustive);
        assert_eq!(r.level.words_checked, 1 << 9);
    }
}
