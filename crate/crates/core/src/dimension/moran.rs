//! Finite-depth Moran roots: `sum |I|^s = 1` over the cylinders of a digit family.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::construct::{make_set, DigitRule, Magnitude, SetKind, SetParams};
use crate::error::{Error, Result};
use crate::numeric::{bisect, log_sum_exp, Chebyshev};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Families up to this many words are enumerated.
pub const LIST_LIMIT: u128 = 1 << 20;

/// Ranges wider than this use integral bounds in product mode.
pub const PRODUCT_EXPLICIT: u64 = 1_000_000;

const CHEB_NODES: usize = 32;
const OPERATOR_EXPLICIT: u64 = 256;
const OPERATOR_HEAD: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoranMethod {
    /// Explicit cylinder lengths.
    List,
    /// `prod_k sum_a a^(-2s) = 1`, bracketed through `prod a_k <= q_n <= prod (a_k + 1)`.
    Product,
    /// Exact length sums through the level-by-level transfer recursion.
    Operator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoranEstimate {
    pub method: MoranMethod,
    pub depth: usize,
    pub root: f64,
    /// Final bisection bracket.
    pub lo: f64,
    pub hi: f64,
    /// `|sum l_i^root - 1|`.
    pub residual: f64,
    /// Product mode only: the root is within this of the true finite-depth root.
    pub distortion_error: Option<f64>,
    pub ln_branch_count: f64,
    pub iterations: u32,
}

fn ln_count(rule: &DigitRule) -> f64 {
    rule.ln_count()
}

/// Root of a decreasing `f` on `[0, 1]` with `f(0) >= 0`.
fn solve(mut f: impl FnMut(f64) -> f64, tol: f64) -> Result<(f64, f64, f64, u32)> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let f0 = f(0.0);
    if f0.abs() <= 1e-14 {
        return Ok((0.0, 0.0, 0.0, 0));
    }
    let f1 = f(1.0);
    if f1.abs() <= 1e-14 {
        return Ok((1.0, 1.0, 1.0, 0));
    }
    let b = bisect(f, 0.0, 1.0, tol)?;
    Ok((b.root, b.lo, b.hi, b.iterations))
}

/// List mode over natural logs of cylinder lengths.
pub fn moran_root_lengths(ln_lengths: &[f64], tol: f64) -> Result<MoranEstimate> {
    if ln_lengths.is_empty() {
        return Err(Error::precondition("empty family"));
    }
    if ln_lengths.iter().any(|&l| !(l <= 0.0)) {
        return Err(Error::domain("lengths must lie in (0, 1]"));
    }
    let mut buf = vec![0.0; ln_lengths.len()];
    let mut f = |s: f64| {
        for (b, &l) in buf.iter_mut().zip(ln_lengths) {
            *b = s * l;
        }
        log_sum_exp(&buf)
    };
    let (root, lo, hi, iterations) = solve(&mut f, tol)?;
    let residual = f(root).exp_m1().abs();
    Ok(MoranEstimate {
        method: MoranMethod::List,
        depth: 0,
        root,
        lo,
        hi,
        residual,
        distortion_error: Some(0.0),
        ln_branch_count: (ln_lengths.len() as f64).ln(),
        iterations,
    })
}

/// `ln ((X1^p - X0^p) / p)` from `ln X0 < ln X1`, i.e. `ln` of the integral of `x^(p-1)`.
pub(crate) fn ln_int_pow(lx0: f64, lx1: f64, p: f64) -> f64 {
    let l = lx1 - lx0;
    let t = p * l;
    if t.abs() < 1e-12 {
        return p * lx0 + l.ln();
    }
    if p > 0.0 {
        p * lx1 + (-(-t).exp_m1()).ln() - p.ln()
    } else {
        p * lx0 + (-t.exp_m1()).ln() - (-p).ln()
    }
}

/// `ln sum_{a in rule} a^(-2s)` with integral bounds for wide ranges.
/// Returns `(lower, upper)`; they coincide when the sum is explicit.
fn ln_power_sum(rule: &DigitRule, s: f64, shift: u64) -> (f64, f64) {
    let p = 1.0 - 2.0 * s;
    match (rule.lo(), rule.hi()) {
        (Magnitude::Int(lo), Magnitude::Int(hi)) if hi - lo < PRODUCT_EXPLICIT => {
            let terms: Vec<f64> = (lo..=hi).map(|a| -2.0 * s * ((a + shift) as f64).ln()).collect();
            let v = log_sum_exp(&terms);
            (v, v)
        }
        (lo, hi) => {
            let shift_ln = |m: Magnitude, extra: f64| match m {
                Magnitude::Int(v) => (v as f64 + shift as f64 + extra).ln(),
                Magnitude::Log(x) => x,
            };
            let (a, b) = (shift_ln(lo, 0.0), shift_ln(hi, 0.0));
            let b1 = shift_ln(hi, 1.0);
            // decreasing terms: int_a^{b+1} <= sum <= a^{-2s} + int_a^b
            let lower = ln_int_pow(a, b1.max(a + 1e-300), p);
            let upper = if b > a {
                crate::numeric::log_add_exp(-2.0 * s * a, ln_int_pow(a, b, p))
            } else {
                -2.0 * s * a
            };
            (lower, upper)
        }
    }
}

/// Product mode. `root` solves `prod_k Phi_k(s) = 1` with `Phi_k(s) = sum a^(-2s)`;
/// the true finite-depth root lies in `[root - distortion_error, root]`.
pub fn moran_root_product(rules: &[DigitRule], tol: f64) -> Result<MoranEstimate> {
    if rules.is_empty() {
        return Err(Error::precondition("empty family"));
    }
    let upper = |s: f64| rules.iter().map(|r| ln_power_sum(r, s, 0).1).sum::<f64>();
    let lower = |s: f64| -s * LN_2 + rules.iter().map(|r| ln_power_sum(r, s, 1).0).sum::<f64>();
    let (root, lo, hi, iterations) = solve(upper, tol)?;
    let (s_minus, ..) = solve(lower, tol)?;
    Ok(MoranEstimate {
        method: MoranMethod::Product,
        depth: rules.len(),
        root,
        lo,
        hi,
        residual: upper(root).exp_m1().abs(),
        distortion_error: Some((root - s_minus).max(0.0)),
        ln_branch_count: rules.iter().map(ln_count).sum(),
        iterations,
    })
}

/// `ln sum_{a in rule} (a + y)^(-2s) g(1 / (a + y))`.
fn ln_level_sum(rule: &DigitRule, s: f64, y: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let term = |a: f64| -2.0 * s * (a + y).ln() + g(1.0 / (a + y)).ln();
    match (rule.lo(), rule.hi()) {
        (Magnitude::Int(lo), Magnitude::Int(hi)) if hi - lo < OPERATOR_EXPLICIT => {
            let logs: Vec<f64> = (lo..=hi).map(|a| term(a as f64)).collect();
            log_sum_exp(&logs)
        }
        (lo, hi) => {
            let mut logs = Vec::with_capacity(OPERATOR_HEAD as usize + 1);
            let lx0 = match lo {
                Magnitude::Int(l) => {
                    logs.extend((l..l + OPERATOR_HEAD).map(|a| term(a as f64)));
                    ((l + OPERATOR_HEAD) as f64 - 0.5 + y).ln()
                }
                Magnitude::Log(x) => x,
            };
            let lx1 = match hi {
                Magnitude::Int(h) => (h as f64 + 0.5 + y).ln(),
                Magnitude::Log(x) => x,
            };
            if lx1 > lx0 {
                logs.push(tail_integral(s, lx0, lx1, g));
            }
            log_sum_exp(&logs)
        }
    }
}

/// Midpoint-rule integral of `x^(-2s) g(1/x)` over `[X0, X1]` with `g` expanded to
/// second order at 0, plus the leading Euler-Maclaurin correction.
fn tail_integral(s: f64, lx0: f64, lx1: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let h = 1e-3;
    let (g0, g1, g2) = (g(0.0), g(h), g(2.0 * h));
    let c1 = (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * h);
    let c2 = (g0 - 2.0 * g1 + g2) / (2.0 * h * h) - s * (2.0 * s + 1.0) * g0 / 12.0;
    let i0 = ln_int_pow(lx0, lx1, 1.0 - 2.0 * s);
    let i1 = ln_int_pow(lx0, lx1, -2.0 * s);
    let i2 = ln_int_pow(lx0, lx1, -1.0 - 2.0 * s);
    let factor = g0 + c1 * (i1 - i0).exp() + c2 * (i2 - i0).exp();
    i0 + factor.max(f64::MIN_POSITIVE).ln()
}

/// `ln sum_w |I_n(w)|^s` over all words admitted by `rules`, computed by the
/// recursion `G_n(y) = (1 + y)^(-s)`, `G_k(y) = sum_a (a + y)^(-2s) G_{k+1}(1 / (a + y))`.
pub fn operator_log_sum(rules: &[DigitRule], s: f64) -> f64 {
    let cheb = Chebyshev::new(0.0, 1.0, CHEB_NODES);
    let boundary = move |u: f64| (1.0 + u).powf(-s);
    let mut scale = 0.0;
    let mut values: Option<Vec<f64>> = None;
    for k in (1..rules.len()).rev() {
        let logs: Vec<f64> = {
            let interp;
            let g: &dyn Fn(f64) -> f64 = match &values {
                None => &boundary,
                Some(v) => {
                    interp = |u: f64| cheb.eval(v, u);
                    &interp
                }
            };
            cheb.nodes().iter().map(|&y| ln_level_sum(&rules[k], s, y, g)).collect()
        };
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        scale += m;
        values = Some(logs.iter().map(|l| (l - m).exp()).collect());
    }
    let interp;
    let g: &dyn Fn(f64) -> f64 = match &values {
        None => &boundary,
        Some(v) => {
            interp = |u: f64| cheb.eval(v, u);
            &interp
        }
    };
    scale + ln_level_sum(&rules[0], s, 0.0, g)
}

pub fn moran_root_operator(rules: &[DigitRule], tol: f64) -> Result<MoranEstimate> {
    if rules.is_empty() {
        return Err(Error::precondition("empty family"));
    }
    let f = |s: f64| operator_log_sum(rules, s);
    let (root, lo, hi, iterations) = solve(f, tol)?;
    Ok(MoranEstimate {
        method: MoranMethod::Operator,
        depth: rules.len(),
        root,
        lo,
        hi,
        residual: f(root).exp_m1().abs(),
        distortion_error: None,
        ln_branch_count: rules.iter().map(ln_count).sum(),
        iterations,
    })
}

/// `ln |I_n|` for every word with digits in `1..=m` of length `depth`.
fn em_lengths(m: u64, depth: usize) -> Vec<f64> {
    let mut out = Vec::new();
    fn rec(m: u64, left: usize, q: f64, q_prev: f64, out: &mut Vec<f64>) {
        if left == 0 {
            out.push(-(q.ln() + (q + q_prev).ln()));
            return;
        }
        for a in 1..=m {
            rec(m, left - 1, a as f64 * q + q_prev, q, out);
        }
    }
    rec(m, depth, 1.0, 0.0, &mut out);
    out
}

fn em_rules(m: u64, depth: usize) -> Vec<DigitRule> {
    vec![DigitRule::Range { lo: Magnitude::Int(1), hi: Magnitude::Int(m) }; depth]
}

/// Moran root over the depth-`depth` cylinders of `E_M = {x : a_n(x) <= M}`.
pub fn estimate_em(m: u64, depth: usize, tol: f64) -> Result<MoranEstimate> {
    if m == 0 || depth == 0 {
        return Err(Error::domain("M and depth must be positive"));
    }
    let enumerable = (m as u128).checked_pow(depth as u32).is_some_and(|c| c <= LIST_LIMIT);
    let mut est = if enumerable {
        moran_root_lengths(&em_lengths(m, depth), tol)?
    } else {
        moran_root_operator(&em_rules(m, depth), tol)?
    };
    est.depth = depth;
    Ok(est)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SBracket {
    pub alpha: f64,
    pub depth: usize,
    pub lo: f64,
    pub hi: f64,
    /// Unclamped operator-mode root for each `M`.
    pub per_m: Vec<(u64, MoranEstimate)>,
}

/// Depth that reaches the third sparse index of `F_M`.
pub const S_DEFAULT_DEPTH: usize = 192;
pub const S_DEFAULT_MS: [u64; 4] = [8, 16, 32, 64];

/// Bracket for `S(alpha)` from the Moran roots of `F_M(exp alpha)` truncated at `depth`.
pub fn estimate_s(alpha: f64, ms: &[u64], depth: usize, tol: f64) -> Result<SBracket> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    if ms.is_empty() {
        return Err(Error::precondition("need at least one M"));
    }
    let mut per_m = Vec::with_capacity(ms.len());
    for &m in ms {
        let params = SetParams { alpha: Some(alpha), m: Some(m), ..Default::default() };
        let set = make_set(SetKind::FMAlpha, &params, depth)?;
        let mut est = moran_root_operator(&set.constraint.rules, tol)?;
        est.depth = depth;
        per_m.push((m, est));
    }
    let best = per_m.iter().map(|(_, e)| e.root).fold(f64::NEG_INFINITY, f64::max);
    Ok(SBracket { alpha, depth, lo: best.clamp(0.5, 1.0), hi: 1.0, per_m })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range(lo: u64, hi: u64) -> DigitRule {
        DigitRule::Range { lo: Magnitude::Int(lo), hi: Magnitude::Int(hi) }
    }

    #[test]
    fn list_mode_examples() {
        let h = 0.5f64.ln();
        assert!((moran_root_lengths(&[h, h], 1e-12).unwrap().root - 1.0).abs() < 1e-10);
        let t = (1.0f64 / 3.0).ln();
        let r = moran_root_lengths(&[t, t], 1e-12).unwrap();
        assert!((r.root - 2f64.ln() / 3f64.ln()).abs() < 1e-10);
        assert!(r.residual < 1e-9);
        assert_eq!(moran_root_lengths(&[h], 1e-12).unwrap().root, 0.0);
        assert!(moran_root_lengths(&[], 1e-12).is_err());
    }

    #[test]
    fn product_against_list() {
        let p = moran_root_product(&[range(3, 5)], 1e-12).unwrap();
        let lens: Vec<f64> = [12.0f64, 20.0, 30.0].iter().map(|d| -d.ln()).collect();
        let l = moran_root_lengths(&lens, 1e-12).unwrap();
        let r = p.distortion_error.unwrap();
        assert!(r > 0.0);
        assert!(l.root <= p.root + 1e-9 && l.root >= p.root - r - 1e-9);
    }

    #[test]
    fn product_wide_ranges_bracket() {
        let wide = moran_root_product(&[range(10, 10 + 5_000_000)], 1e-10).unwrap();
        let (lo, hi) = ln_power_sum(&range(10, 10 + 5_000_000), 0.6, 0);
        assert!(lo <= hi);
        assert!(wide.root > 0.5 && wide.root < 1.0);
    }

    #[test]
    fn operator_matches_enumeration() {
        for (m, depth) in [(2u64, 10usize), (3, 7), (5, 4)] {
            let list = moran_root_lengths(&em_lengths(m, depth), 1e-12).unwrap();
            let op = moran_root_operator(&em_rules(m, depth), 1e-12).unwrap();
            assert!((list.root - op.root).abs() < 1e-9, "{m} {depth}: {} vs {}", list.root, op.root);
        }
    }

    #[test]
    fn operator_tail_integral_accuracy() {
        let rules = vec![range(1, 3), range(2, 2000), range(1, 4)];
        for s in [0.3, 0.5, 0.7, 0.9] {
            let approx = operator_log_sum(&rules, s);
            let mut terms = Vec::new();
            for a in 1..=3u64 {
                for b in 2..=2000u64 {
                    for c in 1..=4u64 {
                        let (mut q, mut qp) = (1.0f64, 0.0f64);
                        for d in [a, b, c] {
                            let nq = d as f64 * q + qp;
                            qp = q;
                            q = nq;
                        }
                        terms.push(-s * (q * (q + qp)).ln());
                    }
                }
            }
            let exact = log_sum_exp(&terms);
            assert!((approx - exact).abs() < 1e-6, "s={s}: {approx} vs {exact}");
        }
    }

    #[test]
    fn em_values() {
        assert_eq!(estimate_em(1, 5, 1e-10).unwrap().root, 0.0);
        let e8 = estimate_em(8, 10, 1e-10).unwrap();
        assert_eq!(e8.method, MoranMethod::Operator);
        assert!(e8.root > 0.81966 && e8.root < 0.99249, "{}", e8.root);
    }

    #[test]
    fn s_bracket_monotone() {
        let a = estimate_s(1.0, &[8], S_DEFAULT_DEPTH, 1e-8).unwrap();
        let b = estimate_s(2.0, &[8], S_DEFAULT_DEPTH, 1e-8).unwrap();
        assert!(a.lo >= b.lo);
        assert!(a.lo >= 0.5 && a.hi == 1.0);
    }
}
