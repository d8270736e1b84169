//! Monte Carlo checks of the Borel-Bernstein law with exactly sampled digits.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{DigitWord, Integer, Rational};
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;
use crate::numeric::quantile_sorted;

pub const DEFAULT_BIT_BUDGET: u32 = 4096;
const CHUNK_BITS: u32 = 32;

/// A uniform random real in `[0, 1)` whose bits are drawn on demand.
///
/// The unread tail is `r` in `[0, 1]`, and the remaining expansion is that of
/// `(a r + b) / (c r + d)`.
#[derive(Clone, Debug)]
pub struct LazyReal {
    rng: ChaCha8Rng,
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
    chunks: Vec<u32>,
    digits: Vec<u64>,
    budget: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExceeded;

impl LazyReal {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self::with_budget(seed, stream, DEFAULT_BIT_BUDGET)
    }

    pub fn with_budget(seed: u64, stream: u64, budget: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        LazyReal {
            rng,
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
            chunks: Vec::new(),
            digits: Vec::new(),
            budget,
        }
    }

    fn consume(&mut self) {
        let beta = self.rng.next_u32();
        self.chunks.push(beta);
        let beta = BigInt::from(beta);
        self.b = (&self.b << CHUNK_BITS) + &self.a * &beta;
        self.d = (&self.d << CHUNK_BITS) + &self.c * &beta;
    }

    /// `floor(1 / x)` if it is the same, and not hit exactly, at both ends of the enclosure.
    fn determined(&self) -> Option<BigInt> {
        let (n0, d0) = (&self.d, &self.b);
        let n1 = &self.c + &self.d;
        let d1 = &self.a + &self.b;
        if !d0.is_positive() || !d1.is_positive() {
            return None;
        }
        let (q0, r0) = n0.div_rem(d0);
        if r0.is_zero() {
            return None;
        }
        let (q1, r1) = n1.div_rem(&d1);
        if q1 != q0 || r1.is_zero() {
            return None;
        }
        Some(q0)
    }

    /// Emits the next partial quotient.
    pub fn next_digit(&mut self) -> std::result::Result<u64, BudgetExceeded> {
        let mut used = 0;
        let q = loop {
            if let Some(q) = self.determined() {
                break q;
            }
            if used >= self.budget {
                return Err(BudgetExceeded);
            }
            self.consume();
            used += CHUNK_BITS;
        };
        let digit = q.to_u64().filter(|&v| v >= 1).ok_or(BudgetExceeded)?;
        let na = &self.c - &q * &self.a;
        let nb = &self.d - &q * &self.b;
        self.c = std::mem::replace(&mut self.a, na);
        self.d = std::mem::replace(&mut self.b, nb);
        self.digits.push(digit);
        Ok(digit)
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn bits_consumed(&self) -> u64 {
        self.chunks.len() as u64 * CHUNK_BITS as u64
    }

    /// `[X / 2^k, (X + 1) / 2^k]` from the `k` bits read so far.
    pub fn enclosure(&self) -> (Rational, Rational) {
        let mut x = BigInt::zero();
        for &c in &self.chunks {
            x = (x << CHUNK_BITS) + BigInt::from(c);
        }
        let den = Integer::from_big(BigInt::one() << (CHUNK_BITS as usize * self.chunks.len()));
        let lo = Rational::new(Integer::from_big(x.clone()), den.clone()).expect("positive denominator");
        let hi = Rational::new(Integer::from_big(x + 1), den).expect("positive denominator");
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub digits: Vec<u64>,
    /// Restarts caused by the bit budget.
    pub resamples: u32,
    pub bits: u64,
}

const MAX_RESAMPLES: u64 = 64;

/// First `n` digits of the uniform real on stream `stream`; restarts on a fresh
/// stream whenever the bit budget runs out.
pub fn draw_stream(seed: u64, stream: u64, n: usize, budget: u32) -> Result<Draw> {
    if n == 0 {
        return Err(Error::domain("need at least one digit"));
    }
    for attempt in 0..MAX_RESAMPLES {
        let mut x = LazyReal::with_budget(seed, stream ^ (attempt << 48), budget);
        if (0..n).all(|_| x.next_digit().is_ok()) {
            return Ok(Draw {
                digits: x.digits,
                resamples: attempt as u32,
                bits: x.chunks.len() as u64 * CHUNK_BITS as u64,
            });
        }
    }
    Err(Error::numeric(format!("bit budget exhausted {MAX_RESAMPLES} times")))
}

pub fn draw_digits(seed: u64, n: usize) -> Result<DigitWord> {
    DigitWord::new(draw_stream(seed, 0, n, DEFAULT_BIT_BUDGET)?.digits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: u64,
    /// `#{n <= N : a_n >= psi(n)}`.
    pub hits: u64,
    pub hits_quarter: u64,
    /// Hits with `N/2 < n <= N`.
    pub hits_late: u64,
    /// `max_{N/2 <= n <= N} ln a_n / ln n`.
    pub statistic: Option<f64>,
    pub resamples: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_hits: f64,
    pub mean_hits_quarter: f64,
    pub mean_hits_late: f64,
    /// `sum log2(1 + 1/ceil(psi(n)))` over `n <= N`, the Gauss-measure tail.
    pub expected_hits: Option<f64>,
    pub expected_hits_quarter: Option<f64>,
    pub expected_hits_late: Option<f64>,
    /// `(p, value)` pairs for the hit counts, or the statistic in limsup runs.
    pub quantiles: Vec<(f64, f64)>,
    pub median: f64,
    pub iqr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    BorelBernstein,
    Limsup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub experiment: Experiment,
    pub spec: Option<GrowthSpec>,
    pub samples: u64,
    pub horizon: u64,
    pub seed: u64,
    pub bit_budget: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: McConfig,
    pub rows: Vec<SampleRow>,
    pub summary: Summary,
    pub resamples_total: u64,
}

const QUANTILES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

impl McReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,hits,hits_quarter,hits_late,statistic,resamples\n");
        for r in &self.rows {
            let stat = r.statistic.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.index, r.hits, r.hits_quarter, r.hits_late, stat, r.resamples
            ));
        }
        out
    }
}

fn summarize(rows: &[SampleRow], values: Vec<f64>, expected: Option<(f64, f64, f64)>) -> Summary {
    let n = rows.len().max(1) as f64;
    let mean = |f: fn(&SampleRow) -> u64| rows.iter().map(|r| f(r) as f64).sum::<f64>() / n;
    let mut sorted = values;
    sorted.sort_by(f64::total_cmp);
    let quantiles: Vec<(f64, f64)> = QUANTILES.iter().map(|&p| (p, quantile_sorted(&sorted, p))).collect();
    Summary {
        mean_hits: mean(|r| r.hits),
        mean_hits_quarter: mean(|r| r.hits_quarter),
        mean_hits_late: mean(|r| r.hits_late),
        expected_hits: expected.map(|e| e.0),
        expected_hits_quarter: expected.map(|e| e.1),
        expected_hits_late: expected.map(|e| e.2),
        median: quantile_sorted(&sorted, 0.5),
        iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
        quantiles,
    }
}

fn check_sizes(samples: u64, horizon: u64, min_horizon: u64) -> Result<()> {
    if samples < 100 {
        return Err(Error::domain(format!("need at least 100 samples, got {samples}")));
    }
    if horizon < min_horizon {
        return Err(Error::domain(format!("horizon must be at least {min_horizon}, got {horizon}")));
    }
    Ok(())
}

fn run<F>(config: McConfig, row: F) -> Result<(Vec<SampleRow>, u64)>
where
    F: Fn(u64, &Draw) -> SampleRow + Sync,
{
    let n = config.horizon as usize;
    let rows = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let draw = draw_stream(config.seed, i, n, config.bit_budget)?;
            Ok(row(i, &draw))
        })
        .collect::<Result<Vec<_>>>()?;
    let resamples = rows.iter().map(|r| r.resamples as u64).sum();
    Ok((rows, resamples))
}

/// Counts `a_n(x) >= psi(n)` along independent uniform samples.
pub fn bb_experiment(spec: &GrowthSpec, samples: u64, horizon: u64, seed: u64) -> Result<McReport> {
    check_sizes(samples, horizon, 1 << 10)?;
    let psi = (1..=horizon).map(|n| spec.eval_psi(n)).collect::<Result<Vec<_>>>()?;
    let config = McConfig {
        experiment: Experiment::BorelBernstein,
        spec: Some(spec.clone()),
        samples,
        horizon,
        seed,
        bit_budget: DEFAULT_BIT_BUDGET,
    };
    let (quarter, half) = (horizon / 4, horizon / 2);
    let (rows, resamples_total) = run(config.clone(), |i, draw| {
        let mut row = SampleRow {
            index: i,
            hits: 0,
            hits_quarter: 0,
            hits_late: 0,
            statistic: None,
            resamples: draw.resamples,
        };
        for (k, (&a, &p)) in draw.digits.iter().zip(&psi).enumerate() {
            let n = k as u64 + 1;
            if a as f64 >= p {
                row.hits += 1;
                row.hits_quarter += (n <= quarter) as u64;
                row.hits_late += (n > half) as u64;
            }
        }
        row
    })?;
    let tail = |n: u64| {
        let k = psi[n as usize - 1].ceil().max(1.0);
        (1.0 / k).ln_1p() / std::f64::consts::LN_2
    };
    let expected =
        ((1..=horizon).map(tail).sum(), (1..=quarter).map(tail).sum(), (half + 1..=horizon).map(tail).sum());
    let values = rows.iter().map(|r| r.hits as f64).collect();
    let summary = summarize(&rows, values, Some(expected));
    Ok(McReport { config, rows, summary, resamples_total })
}

/// `S_N(x) = max_{N/2 <= n <= N} ln a_n(x) / ln n` along independent uniform samples.
pub fn limsup_statistic(samples: u64, horizon: u64, seed: u64) -> Result<McReport> {
    check_sizes(samples, horizon, 1 << 12)?;
    let config = McConfig {
        experiment: Experiment::Limsup,
        spec: None,
        samples,
        horizon,
        seed,
        bit_budget: DEFAULT_BIT_BUDGET,
    };
    let half = (horizon / 2) as usize;
    let (rows, resamples_total) = run(config.clone(), |i, draw| {
        let s = draw.digits[half - 1..]
            .iter()
            .enumerate()
            .map(|(k, &a)| (a as f64).ln() / ((half + k) as f64).ln())
            .fold(f64::NEG_INFINITY, f64::max);
        SampleRow {
            index: i,
            hits: 0,
            hits_quarter: 0,
            hits_late: 0,
            statistic: Some(s),
            resamples: draw.resamples,
        }
    })?;
    let values = rows.iter().filter_map(|r| r.statistic).collect();
    let summary = summarize(&rows, values, None);
    Ok(McReport { config, rows, summary, resamples_total })
}
