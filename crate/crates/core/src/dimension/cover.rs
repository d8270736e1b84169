use serde::{Deserialize, Serialize};

use crate::cf::Integer;
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;

const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverRow {
    pub n: u64,
    /// Integers in `[e^((1-eps) psi(n)), e^((1+eps) psi(n))]`, when exactly countable.
    pub count: Option<u64>,
    pub ln_count: f64,
    /// `#D_n`, exact while every factor is.
    pub total: Option<Integer>,
    pub ln_total: f64,
    /// `ln prod_{k <= n} 2 eps psi(k) exp((1 + eps) psi(k))`.
    pub ln_product_bound: f64,
    pub within_bound: bool,
    /// `(1 - eps) psi(n + 1) + 2 (1 - eps) sum_{k <= n} psi(k)`.
    pub neg_ln_length: f64,
    /// `ln #D_n / neg_ln_length`; absent when some window held no integer.
    pub quotient: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub spec: GrowthSpec,
    pub eps: f64,
    pub rows: Vec<CoverRow>,
    /// `(1 + eps) / (1 - eps) / (2 + xi)` when `xi` is known in closed form.
    pub target: Option<f64>,
    pub empty_windows: Vec<u64>,
}

impl CoverReport {
    /// Minimum of the quotient over the second half of the rows.
    pub fn liminf_proxy(&self) -> Option<f64> {
        let half = self.rows.len() / 2;
        self.rows[half..].iter().filter_map(|r| r.quotient).reduce(f64::min)
    }
}

/// Integers `>= 1` in `[e^x0, e^x1]`, exact or as a logarithm.
fn window_count(x0: f64, x1: f64) -> (Option<u64>, f64) {
    let hi = x1.exp();
    if hi < EXACT_LIMIT {
        let lo = x0.exp().ceil().max(1.0);
        let c = (hi.floor() - lo + 1.0).max(0.0) as u64;
        (Some(c), (c as f64).ln())
    } else {
        (None, crate::numeric::log_sub_exp(x1, x0))
    }
}

pub fn cover_upper_bound(spec: &GrowthSpec, eps: f64, depth: u64) -> Result<CoverReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let psi = (1..=depth + 1).map(|k| spec.eval_psi(k)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(depth as usize);
    let mut total = Some(Integer::ONE);
    let mut ln_total = 0.0;
    let mut ln_bound = 0.0;
    let mut psi_sum = 0.0;
    let mut empty_windows = Vec::new();
    let mut any_empty = false;
    for n in 1..=depth {
        let p = psi[n as usize - 1];
        let (count, ln_count) = window_count((1.0 - eps) * p, (1.0 + eps) * p);
        total = match (total, count) {
            (Some(t), Some(c)) => Some(t * Integer::from(c)),
            _ => None,
        };
        if count == Some(0) {
            empty_windows.push(n);
            any_empty = true;
        }
        ln_total += ln_count;
        ln_bound += (2.0 * eps * p).ln() + (1.0 + eps) * p;
        psi_sum += p;
        let within_bound = match &total {
            Some(t) if t.is_zero() => true,
            Some(t) => t.ln_abs() <= ln_bound + 1e-12 * ln_bound.abs().max(1.0),
            None => ln_total <= ln_bound,
        };
        let neg_ln_length = (1.0 - eps) * psi[n as usize] + 2.0 * (1.0 - eps) * psi_sum;
        let quotient = (!any_empty).then(|| ln_total / neg_ln_length);
        rows.push(CoverRow {
            n,
            count,
            ln_count,
            total: total.clone(),
            ln_total,
            ln_product_bound: ln_bound,
            within_bound,
            neg_ln_length,
            quotient,
        });
    }
    let target = spec.closed_form().map(|l| (1.0 + eps) / (1.0 - eps) / (2.0 + l.xi));
    Ok(CoverReport { spec: spec.clone(), eps, rows, target, empty_windows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_value() {
        let r = cover_upper_bound(&"lin:1".parse().unwrap(), 0.5, 2).unwrap();
        assert_eq!(r.rows[0].count, Some(3));
        assert_eq!(r.rows[1].count, Some(18));
        assert_eq!(r.rows[1].total, Some(Integer::from(54u64)));
        let bound = r.rows[1].ln_product_bound.exp();
        assert!((bound - 180.03).abs() < 0.01, "{bound}");
        assert!(r.rows[1].within_bound);
    }

    #[test]
    fn quotient_exp2() {
        let r = cover_upper_bound(&"exp:2".parse().unwrap(), 0.1, 30).unwrap();
        let q = r.rows[29].quotient.unwrap();
        assert!((q - 1.1 / 0.9 / 3.0).abs() < 0.05, "{q}");
    }

    #[test]
    fn empty_window_is_flagged() {
        let r = cover_upper_bound(&"table:0.1,0.1,5;geo:2".parse().unwrap(), 0.5, 3).unwrap();
        assert_eq!(r.empty_windows, [1, 2]);
        assert!(r.rows.iter().all(|row| row.quotient.is_none()));
    }
}
