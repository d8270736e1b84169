//! Cantor subsets defined by per-index digit constraints.

mod checks;
mod sequences;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cf::{cylinder, Cylinder, DigitWord};
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;

pub use checks::{
    check_distortion, check_gap, distortion_threshold, DistortionLevel, DistortionOptions, DistortionReport,
    DistortionViolation, GapLevel, GapReport, GapViolation,
};
pub use sequences::{build_dn, build_ln, spec_limits, DnSequence, LnSequence};

pub const FORMAT_VERSION: u32 = 1;

/// Largest integer that an `f64` represents exactly.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

/// A digit value, stored exactly while it fits in 53 bits and as its natural
/// logarithm beyond that.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Magnitude {
    Int(u64),
    Log(f64),
}

impl Magnitude {
    /// `floor(e^x)`.
    pub fn floor_exp(x: f64) -> Result<Magnitude> {
        if !x.is_finite() {
            return Err(Error::numeric(format!("digit magnitude e^{x} is not representable")));
        }
        let v = x.exp();
        if v < EXACT_LIMIT {
            Ok(Magnitude::Int(v.floor().max(0.0) as u64))
        } else {
            Ok(Magnitude::Log(x))
        }
    }

    pub fn ln(&self) -> f64 {
        match *self {
            Magnitude::Int(v) => (v as f64).ln(),
            Magnitude::Log(x) => x,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match *self {
            Magnitude::Int(v) => Some(v),
            Magnitude::Log(_) => None,
        }
    }

    /// `m * self`.
    pub fn scale(self, m: u64) -> Magnitude {
        match self {
            Magnitude::Int(v) if (v as f64) * (m as f64) < EXACT_LIMIT => Magnitude::Int(v * m),
            other => Magnitude::Log(other.ln() + (m as f64).ln()),
        }
    }

    /// `self + k`; the shift is below `f64` resolution in log form.
    pub fn shift(self, k: i64) -> Magnitude {
        match self {
            Magnitude::Int(v) => Magnitude::Int((v as i64 + k).max(0) as u64),
            Magnitude::Log(x) => Magnitude::Log(x + (k as f64 * (-x).exp()).ln_1p()),
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Int(v) => write!(f, "{v}"),
            Magnitude::Log(x) => write!(f, "e^{x:.6}"),
        }
    }
}

/// The admissible values of one partial quotient. Ranges are inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DigitRule {
    Exact { value: Magnitude },
    Range { lo: Magnitude, hi: Magnitude },
}

impl DigitRule {
    pub fn lo(&self) -> Magnitude {
        match *self {
            DigitRule::Exact { value } => value,
            DigitRule::Range { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> Magnitude {
        match *self {
            DigitRule::Exact { value } => value,
            DigitRule::Range { hi, .. } => hi,
        }
    }

    /// Number of admissible digits, when it is an exact integer.
    pub fn count(&self) -> Option<u64> {
        Some(self.hi().as_u64()? - self.lo().as_u64()? + 1)
    }

    /// `ln` of the number of admissible digits.
    pub fn ln_count(&self) -> f64 {
        match self.count() {
            Some(c) => (c as f64).ln(),
            None => {
                let (lo, hi) = (self.lo().ln(), self.hi().ln());
                if hi <= lo {
                    0.0
                } else {
                    crate::numeric::log_sub_exp(hi, lo)
                }
            }
        }
    }

    pub fn admits(&self, a: u64) -> bool {
        match (self.lo(), self.hi()) {
            (Magnitude::Int(lo), Magnitude::Int(hi)) => lo <= a && a <= hi,
            (lo, hi) => {
                let x = (a as f64).ln();
                let lo_ok = lo.as_u64().map_or(x >= lo.ln(), |l| a >= l);
                let hi_ok = hi.as_u64().map_or(x <= hi.ln(), |h| a <= h);
                lo_ok && hi_ok
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.lo(), self.hi());
        let ok = match (lo, hi) {
            (Magnitude::Int(l), Magnitude::Int(h)) => 1 <= l && l <= h,
            _ => lo.ln() >= 0.0 && lo.ln() <= hi.ln(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::numeric(format!("empty digit rule [{lo}, {hi}]")))
        }
    }
}

/// One rule per index `1..=depth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DigitConstraint {
    pub rules: Vec<DigitRule>,
}

impl DigitConstraint {
    pub fn depth(&self) -> usize {
        self.rules.len()
    }

    /// Rule at the 1-based index `n`.
    pub fn rule(&self, n: usize) -> Option<&DigitRule> {
        n.checked_sub(1).and_then(|i| self.rules.get(i))
    }

    pub fn admits(&self, w: &DigitWord) -> bool {
        w.len() <= self.rules.len() && w.digits().iter().zip(&self.rules).all(|(&a, r)| r.admits(a))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetKind {
    /// Digits at `m_k = 2^k` pinned to `floor(exp psi(m_k))`, all others in `[1, M]`.
    #[serde(rename = "E_M_psi")]
    EMPsi,
    /// Digits at the sparse indices in `[floor(e^(alpha m_k)) + 1, 2 floor(e^(alpha m_k))]`,
    /// all others in `[1, M]`.
    #[serde(rename = "F_M_alpha")]
    FMAlpha,
    /// `M floor(d_n) <= a_n < 2 M floor(d_n)`.
    #[serde(rename = "E_dn")]
    EDn,
    /// `M floor(exp psi(n)) <= a_n < 2 M floor(exp psi(n))`.
    #[serde(rename = "E_psi_lower")]
    EPsiLower,
    /// `M floor(L_n) <= a_n < 2 M floor(L_n)`.
    #[serde(rename = "E_inf_Ln")]
    EInfLn,
}

impl FromStr for SetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "e-m-psi" | "em-psi" => Ok(SetKind::EMPsi),
            "f-m-alpha" | "fm-alpha" => Ok(SetKind::FMAlpha),
            "e-dn" => Ok(SetKind::EDn),
            "e-lower" | "e-psi-lower" => Ok(SetKind::EPsiLower),
            "e-inf-ln" | "e-inf" => Ok(SetKind::EInfLn),
            _ => Err(Error::parse(s, "unknown set; expected e-m-psi, f-m-alpha, e-dn, e-lower or e-inf-ln")),
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetKind::EMPsi => "E_M_psi",
            SetKind::FMAlpha => "F_M_alpha",
            SetKind::EDn => "E_dn",
            SetKind::EPsiLower => "E_psi_lower",
            SetKind::EInfLn => "E_inf_Ln",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SetParams {
    pub spec: Option<GrowthSpec>,
    /// `None` asks for the smallest `M` that keeps every digit floor at least 3.
    pub m: Option<u64>,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructedSet {
    pub format_version: u32,
    pub name: SetKind,
    pub params: SetParams,
    /// The `M` actually used.
    pub m: u64,
    pub depth: usize,
    pub sparse_indices: Vec<u64>,
    pub constraint: DigitConstraint,
    pub warnings: Vec<String>,
}

/// The sparse indices `m_k` of `F_M`: `m_1 = 1` and `m_k = (k + 1)! 2^k` for `k >= 2`.
pub fn fm_sparse_indices(limit: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    let mut fact: u64 = 2;
    for k in 2u64.. {
        fact = match fact.checked_mul(k + 1) {
            Some(f) => f,
            None => break,
        };
        match fact.checked_mul(1u64 << k) {
            Some(m) if m <= limit => out.push(m),
            _ => break,
        }
    }
    out.retain(|&m| m <= limit);
    out
}

/// `2^k` for `k >= 1`, up to `limit`.
pub fn dyadic_indices(limit: u64) -> Vec<u64> {
    (1..64).map(|k| 1u64 << k).take_while(|&m| m <= limit).collect()
}

fn require_spec(params: &SetParams, kind: SetKind) -> Result<&GrowthSpec> {
    params.spec.as_ref().ok_or_else(|| Error::precondition(format!("{kind} needs a growth spec")))
}

fn require_eps(params: &SetParams, kind: SetKind) -> Result<f64> {
    match params.eps {
        Some(e) if e > 0.0 && e.is_finite() => Ok(e),
        Some(e) => Err(Error::domain(format!("epsilon must be positive, got {e}"))),
        None => Err(Error::precondition(format!("{kind} needs epsilon"))),
    }
}

/// Smallest `M` with `M * f >= 3` for every floor `f`, or a check of a given `M`.
fn choose_m(floors: &[Magnitude], given: Option<u64>) -> Result<u64> {
    let min_floor = floors.iter().filter_map(Magnitude::as_u64).min().unwrap_or(u64::MAX).max(1);
    let needed = 3u64.div_ceil(min_floor).max(1);
    match given {
        None => Ok(needed),
        Some(0) => Err(Error::domain("M must be positive")),
        Some(m) if m < needed => {
            Err(Error::precondition(format!("M = {m} leaves a digit floor below 3; need M >= {needed}")))
        }
        Some(m) => Ok(m),
    }
}

fn doubling_ranges(floors: &[Magnitude], m: u64) -> Vec<DigitRule> {
    floors.iter().map(|&f| DigitRule::Range { lo: f.scale(m), hi: f.scale(2 * m).shift(-1) }).collect()
}

pub fn make_set(kind: SetKind, params: &SetParams, depth: usize) -> Result<ConstructedSet> {
    if depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let mut warnings = Vec::new();
    let (m, sparse, rules) = match kind {
        SetKind::EMPsi => {
            let spec = require_spec(params, kind)?;
            let m =
                params.m.filter(|&m| m >= 1).ok_or_else(|| Error::precondition("E_M_psi needs M >= 1"))?;
            let sparse = dyadic_indices(depth as u64);
            let mut rules = vec![DigitRule::Range { lo: Magnitude::Int(1), hi: Magnitude::Int(m) }; depth];
            for &mk in &sparse {
                let v = Magnitude::floor_exp(spec.eval_psi(mk)?)?;
                rules[mk as usize - 1] = DigitRule::Exact { value: v.max_one() };
            }
            (m, sparse, rules)
        }
        SetKind::FMAlpha => {
            let alpha = match params.alpha {
                Some(a) if a > 0.0 && a.is_finite() => a,
                _ => return Err(Error::precondition("F_M_alpha needs alpha > 0")),
            };
            let m =
                params.m.filter(|&m| m >= 1).ok_or_else(|| Error::precondition("F_M_alpha needs M >= 1"))?;
            let sparse = fm_sparse_indices(depth as u64);
            let mut rules = vec![DigitRule::Range { lo: Magnitude::Int(1), hi: Magnitude::Int(m) }; depth];
            for &mk in &sparse {
                let f = Magnitude::floor_exp(alpha * mk as f64)?;
                rules[mk as usize - 1] = DigitRule::Range { lo: f.shift(1), hi: f.scale(2) };
            }
            (m, sparse, rules)
        }
        SetKind::EDn => {
            let spec = require_spec(params, kind)?;
            let eps = require_eps(params, kind)?;
            let dn = build_dn(spec, eps, depth)?;
            if !dn.certified {
                warnings.push("theta could not be certified for every index".into());
            }
            let floors =
                dn.log_values().iter().map(|&x| Magnitude::floor_exp(x)).collect::<Result<Vec<_>>>()?;
            let m = choose_m(&floors, params.m)?;
            (m, Vec::new(), doubling_ranges(&floors, m))
        }
        SetKind::EPsiLower => {
            let spec = require_spec(params, kind)?;
            let floors = (1..=depth as u64)
                .map(|n| Magnitude::floor_exp(spec.eval_psi(n)?))
                .collect::<Result<Vec<_>>>()?;
            let mut all = floors.clone();
            match spec.tail_certificate(1) {
                Some(h) => all.push(Magnitude::floor_exp(spec.theta(1, h.max(1))?.value)?),
                None => warnings
                    .push("global minimum of psi is not certified; M chosen from the first indices".into()),
            }
            let m = choose_m(&all, params.m)?;
            (m, Vec::new(), doubling_ranges(&floors, m))
        }
        SetKind::EInfLn => {
            let spec = require_spec(params, kind)?;
            let eps = require_eps(params, kind)?;
            let horizon = (4 * depth as u64).max(64);
            let ln = build_ln(spec, eps, depth, horizon)?;
            if !ln.certified {
                warnings.push(format!("L_n sup is not certified at horizon {horizon}"));
            }
            let floors =
                ln.log_values().iter().map(|&x| Magnitude::floor_exp(x)).collect::<Result<Vec<_>>>()?;
            let m = choose_m(&floors, params.m)?;
            (m, Vec::new(), doubling_ranges(&floors, m))
        }
    };
    for r in &rules {
        r.validate()?;
    }
    Ok(ConstructedSet {
        format_version: FORMAT_VERSION,
        name: kind,
        params: params.clone(),
        m,
        depth,
        sparse_indices: sparse,
        constraint: DigitConstraint { rules },
        warnings,
    })
}

impl Magnitude {
    fn max_one(self) -> Magnitude {
        match self {
            Magnitude::Int(0) => Magnitude::Int(1),
            other => other,
        }
    }
}

impl ConstructedSet {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: ConstructedSet = serde_json::from_str(s)?;
        if set.format_version != FORMAT_VERSION {
            return Err(Error::parse(
                set.format_version.to_string(),
                format!("unsupported set format version (expected {FORMAT_VERSION})"),
            ));
        }
        Ok(set)
    }

    pub fn admits(&self, w: &DigitWord) -> bool {
        self.constraint.admits(w)
    }

    /// Sparse indices not exceeding `n`.
    pub fn sparse_upto(&self, n: usize) -> Vec<u64> {
        self.sparse_indices.iter().copied().filter(|&m| m as usize <= n).collect()
    }

    /// Number of admissible words of length `n`, when it fits in a `u128`.
    pub fn family_size(&self, n: usize) -> Option<u128> {
        self.constraint.rules[..n.min(self.depth)]
            .iter()
            .try_fold(1u128, |acc, r| acc.checked_mul(r.count()? as u128))
    }
}

/// Deletes the digits at the given 1-based positions. Positions past the end are ignored.
pub fn eliminate_sparse(w: &DigitWord, sparse: &[u64]) -> DigitWord {
    let kept = w
        .digits()
        .iter()
        .enumerate()
        .filter(|(i, _)| !sparse.contains(&(*i as u64 + 1)))
        .map(|(_, &a)| a)
        .collect();
    DigitWord::new(kept).expect("digits of a valid word")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "seed", rename_all = "snake_case")]
pub enum Chooser {
    Min,
    Max,
    Random(u64),
}

impl FromStr for Chooser {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Chooser::Min),
            "max" => Ok(Chooser::Max),
            _ => match s.strip_prefix("random") {
                Some("") => Ok(Chooser::Random(0)),
                Some(rest) => rest
                    .trim_start_matches(':')
                    .parse()
                    .map(Chooser::Random)
                    .map_err(|_| Error::parse(s, "expected random:SEED")),
                None => Err(Error::parse(s, "expected min, max or random:SEED")),
            },
        }
    }
}

/// Two-sided bounds on `q_n` and `|I_n|` from `prod a_k <= q_n <= prod (a_k + 1)`
/// and `1 / (2 q_n^2) <= |I_n| <= 1 / q_n^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderBounds {
    pub ln_q_lo: f64,
    pub ln_q_hi: f64,
    pub ln_length_lo: f64,
    pub ln_length_hi: f64,
}

impl CylinderBounds {
    pub fn from_digits(digits: &[Magnitude]) -> Self {
        let ln_q_lo: f64 = digits.iter().map(Magnitude::ln).sum();
        let ln_q_hi: f64 = digits
            .iter()
            .map(|d| match *d {
                Magnitude::Int(v) => (v as f64).ln_1p(),
                Magnitude::Log(x) => x + (-x).exp().ln_1p(),
            })
            .sum();
        CylinderBounds {
            ln_q_lo,
            ln_q_hi,
            ln_length_lo: -std::f64::consts::LN_2 - 2.0 * ln_q_hi,
            ln_length_hi: -2.0 * ln_q_lo,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub digits: Vec<Magnitude>,
    /// Present when every digit is an exact integer and the word is small enough.
    pub word: Option<DigitWord>,
    pub cylinder: Option<Cylinder>,
    pub bounds: CylinderBounds,
    /// `true` when only the log-domain bounds are available.
    pub certified_bounds_only: bool,
}

/// Bit budget for exact cylinders of sampled points.
pub const EXACT_BITS: f64 = 65_536.0;

pub fn sample_point(set: &ConstructedSet, chooser: Chooser, depth: usize) -> Result<SamplePoint> {
    if depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    if depth > set.depth {
        return Err(Error::precondition(format!("set was built to depth {}, asked for {depth}", set.depth)));
    }
    let mut rng = match chooser {
        Chooser::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let digits: Vec<Magnitude> = set.constraint.rules[..depth]
        .iter()
        .map(|r| match (chooser, r) {
            (_, DigitRule::Exact { value }) => *value,
            (Chooser::Min, _) => r.lo(),
            (Chooser::Max, _) => r.hi(),
            (Chooser::Random(_), _) => {
                let rng = rng.as_mut().expect("seeded");
                match (r.lo(), r.hi()) {
                    (Magnitude::Int(lo), Magnitude::Int(hi)) => Magnitude::Int(rng.random_range(lo..=hi)),
                    (lo, hi) => {
                        let (a, b) = (lo.ln(), hi.ln());
                        let u: f64 = rng.random();
                        Magnitude::Log(a + (u * ((b - a).exp() - 1.0)).ln_1p())
                    }
                }
            }
        })
        .collect();
    let bounds = CylinderBounds::from_digits(&digits);
    let ints: Option<Vec<u64>> = digits.iter().map(Magnitude::as_u64).collect();
    let small = bounds.ln_q_hi / std::f64::consts::LN_2 <= EXACT_BITS;
    let (word, cyl) = match ints {
        Some(v) if small => {
            let w = DigitWord::new(v)?;
            let c = cylinder(&w);
            (Some(w), Some(c))
        }
        _ => (None, None),
    };
    Ok(SamplePoint { certified_bounds_only: word.is_none(), digits, word, cylinder: cyl, bounds })
}

/// Calls `f` on every admissible word of length `n`, in lexicographic order.
/// Fails when a rule at an index `<= n` is not an exact integer range.
pub(crate) fn for_each_word<F: FnMut(&[u64])>(set: &ConstructedSet, n: usize, mut f: F) -> Result<()> {
    let ranges = int_ranges(set, n)?;
    let mut w: Vec<u64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&w);
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if w[i] < ranges[i].1 {
                w[i] += 1;
                break;
            }
            w[i] = ranges[i].0;
        }
    }
}

pub(crate) fn int_ranges(set: &ConstructedSet, n: usize) -> Result<Vec<(u64, u64)>> {
    if n > set.depth {
        return Err(Error::precondition(format!("set was built to depth {}, need {n}", set.depth)));
    }
    set.constraint.rules[..n]
        .iter()
        .map(|r| match (r.lo(), r.hi()) {
            (Magnitude::Int(lo), Magnitude::Int(hi)) => Ok((lo, hi)),
            _ => Err(Error::precondition("digits exceed the exact enumeration range")),
        })
        .collect()
}
