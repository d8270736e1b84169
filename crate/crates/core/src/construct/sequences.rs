//! The auxiliary sequences `d_n` and `L_j`, kept as `ln(log d_n)` and `ln(log L_j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{GrowthSpec, Limits, Regime};
use crate::numeric::log_sum_exp;

/// Exact limits when the family has them, else the tail-window proxies at `horizon`.
pub fn spec_limits(spec: &GrowthSpec, horizon: u64) -> Result<Limits> {
    if let Some(l) = spec.closed_form() {
        return Ok(l);
    }
    let r = spec.asymptotics(horizon.max(16))?;
    Ok(Limits { a: r.a, b: r.b, xi: r.xi, regime: r.regime })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnSequence {
    pub a: f64,
    pub eps: f64,
    /// `ln(log d_n)` for `n = 1..=count`.
    pub log_log: Vec<f64>,
    /// Whether `d_n = exp theta(n)` at each index.
    pub at_theta: Vec<bool>,
    pub certified: bool,
}

impl DnSequence {
    /// `log d_n`.
    pub fn log_values(&self) -> Vec<f64> {
        self.log_log.iter().map(|x| x.exp()).collect()
    }

    /// `log d_{n+1} / (log d_1 + ... + log d_n)` for `n = 1..count-1`.
    pub fn ratios(&self) -> Vec<f64> {
        (1..self.log_log.len()).map(|n| (self.log_log[n] - log_sum_exp(&self.log_log[..n])).exp()).collect()
    }
}

pub fn build_dn(spec: &GrowthSpec, eps: f64, count: usize) -> Result<DnSequence> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("epsilon must be positive, got {eps}")));
    }
    if count == 0 {
        return Err(Error::domain("count must be at least 1"));
    }
    let limits = spec_limits(spec, (4 * count as u64).max(256))?;
    if limits.regime != Regime::Superlinear {
        return Err(Error::precondition(format!(
            "d_n needs a superlinear growth function; {spec} is {}",
            limits.regime
        )));
    }
    let a = limits.a;
    if !a.is_finite() {
        return Err(Error::precondition("d_n needs a finite A"));
    }
    let ln_factor = (a - 1.0 + eps).ln();
    let (theta, certified) = spec.log_theta_seq(count as u64)?;
    let mut log_log = Vec::with_capacity(count);
    let mut at_theta = Vec::with_capacity(count);
    for (n, &th) in theta.iter().enumerate() {
        if n == 0 {
            log_log.push(th);
            at_theta.push(true);
            continue;
        }
        let cap = ln_factor + log_sum_exp(&log_log);
        if th <= cap {
            log_log.push(th);
            at_theta.push(true);
        } else {
            log_log.push(cap);
            at_theta.push(false);
        }
    }
    Ok(DnSequence { a, eps, log_log, at_theta, certified })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LnSequence {
    pub b: f64,
    pub eps: f64,
    pub horizon: u64,
    /// `ln(log L_j)` for `j = 1..=count`.
    pub log_log: Vec<f64>,
    /// The index `n` attaining the sup for each `j`.
    pub argmax: Vec<u64>,
    /// Distinct values of `argmax`, in increasing order.
    pub subsequence: Vec<u64>,
    /// `min log L_j / psi(j)` over `j` in `[count/2, count]`.
    pub liminf_proxy: f64,
    pub certified: bool,
}

impl LnSequence {
    pub fn log_values(&self) -> Vec<f64> {
        self.log_log.iter().map(|x| x.exp()).collect()
    }
}

pub fn build_ln(spec: &GrowthSpec, eps: f64, count: usize, horizon: u64) -> Result<LnSequence> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("epsilon must be positive, got {eps}")));
    }
    if count == 0 {
        return Err(Error::domain("count must be at least 1"));
    }
    if horizon < count as u64 + 2 {
        return Err(Error::domain(format!("horizon {horizon} must exceed count {count} by 2")));
    }
    let limits = spec_limits(spec, horizon.max(256))?;
    if !limits.b.is_finite() {
        return Err(Error::precondition(format!("L_j needs a finite B; {spec} has B = infinity")));
    }
    let b = limits.b;
    let step = (b + eps).ln();
    let h = horizon as usize;
    let logs = (1..=horizon).map(|n| spec.log_psi(n)).collect::<Result<Vec<_>>>()?;

    let mut best = vec![f64::NEG_INFINITY; h + 1];
    let mut arg = vec![0u64; h + 1];
    for j in (1..=h).rev() {
        let here = logs[j - 1];
        let carried = if j < h { best[j + 1] - step } else { f64::NEG_INFINITY };
        if here >= carried {
            best[j] = here;
            arg[j] = j as u64;
        } else {
            best[j] = carried;
            arg[j] = arg[j + 1];
        }
    }
    let log_log = best[1..=count].to_vec();
    let argmax = arg[1..=count].to_vec();
    let mut subsequence = argmax.clone();
    subsequence.dedup();

    let tail_decreasing = logs[h - 1] - logs[h - 3] < 2.0 * step;
    let certified = tail_decreasing && argmax.iter().all(|&t| t < horizon);

    let lo = (count / 2).max(1);
    let liminf_proxy =
        (lo..=count).map(|j| (log_log[j - 1] - logs[j - 1]).exp()).fold(f64::INFINITY, f64::min);

    Ok(LnSequence { b, eps, horizon, log_log, argmax, subsequence, liminf_proxy, certified })
}
