//! Dimension formulas, finite-depth estimators and cover counts.

mod cover;
mod moran;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cf::{Integer, Rational};
use crate::construct::spec_limits;
use crate::error::{Error, Result};
use crate::growth::{GrowthSpec, Regime};

pub use cover::{cover_upper_bound, CoverReport, CoverRow};
pub use moran::{
    estimate_em, estimate_s, moran_root_lengths, moran_root_operator, moran_root_product, operator_log_sum,
    MoranEstimate, MoranMethod, SBracket, DEFAULT_TOLERANCE, LIST_LIMIT, S_DEFAULT_DEPTH, S_DEFAULT_MS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    /// `limsup log a_n / psi(n) = 1`.
    ESup,
    /// `lim log a_n / psi(n) = 1`.
    E,
    /// `liminf log a_n / psi(n) = 1`.
    EInf,
    EM,
    Custom,
}

impl FromStr for Which {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" | "e_sup" | "esup" => Ok(Which::ESup),
            "lim" | "e" => Ok(Which::E),
            "inf" | "e_inf" | "einf" => Ok(Which::EInf),
            _ => Err(Error::parse(s, "expected sup, lim or inf")),
        }
    }
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::ESup => "E_sup",
            Which::E => "E",
            Which::EInf => "E_inf",
            Which::EM => "E_M",
            Which::Custom => "custom",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    TruncatedLimit,
    Moran,
    CoverCount,
    Jarnik,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DimValue {
    Point { value: f64, exact: Option<Rational> },
    Bracket { lo: f64, hi: f64 },
}

impl DimValue {
    pub fn lo(&self) -> f64 {
        match self {
            DimValue::Point { value, .. } => *value,
            DimValue::Bracket { lo, .. } => *lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match self {
            DimValue::Point { value, .. } => *value,
            DimValue::Bracket { hi, .. } => *hi,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            DimValue::Point { exact, .. } => exact.as_ref(),
            DimValue::Bracket { .. } => None,
        }
    }

    /// `1 / (x + 1)`, exact when `x` is an integer.
    fn reciprocal_plus_one(x: f64) -> DimValue {
        if x.is_infinite() {
            return DimValue::Point { value: 0.0, exact: Some(Rational::zero()) };
        }
        let exact = (x.fract() == 0.0 && x.abs() < 1e15)
            .then(|| Rational::new(Integer::ONE, Integer::from(x as i64 + 1)))
            .flatten();
        DimValue::Point { value: 1.0 / (x + 1.0), exact }
    }
}

impl fmt::Display for DimValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimValue::Point { exact: Some(r), value } => write!(f, "{r} ({value:.10})"),
            DimValue::Point { value, .. } => write!(f, "{value:.10}"),
            DimValue::Bracket { lo, hi } => write!(f, "[{lo:.10}, {hi:.10}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub depth: u64,
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub set_kind: Which,
    pub regime: Option<Regime>,
    pub value: DimValue,
    pub method: Method,
    pub diagnostics: Vec<TraceRow>,
    pub warnings: Vec<String>,
}

impl DimensionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Depth trace as CSV with a header row.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("depth,value,lo,hi\n");
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.diagnostics {
            out.push_str(&format!("{},{},{},{}\n", r.depth, r.value, opt(r.lo), opt(r.hi)));
        }
        out
    }
}

/// Closed-form dimension of `E_sup`, `E` or `E_inf`.
pub fn predict(spec: &GrowthSpec, which: Which, horizon: u64) -> Result<DimensionReport> {
    let limits = spec_limits(spec, horizon)?;
    let mut warnings = Vec::new();
    let mut diagnostics = Vec::new();
    let value = match which {
        Which::ESup => match limits.regime {
            Regime::Sublinear => DimValue::Point { value: 1.0, exact: Some(Rational::one()) },
            Regime::Superlinear => DimValue::reciprocal_plus_one(limits.a),
            Regime::Linear(alpha) => {
                let s = estimate_s(alpha, &S_DEFAULT_MS, S_DEFAULT_DEPTH, 1e-8)?;
                diagnostics.extend(s.per_m.iter().map(|(m, e)| TraceRow {
                    depth: *m,
                    value: e.root,
                    lo: None,
                    hi: None,
                }));
                warnings.push(format!(
                    "S({alpha}) has no closed form; lower end from finite-depth Moran roots at depth {}",
                    s.depth
                ));
                DimValue::Bracket { lo: s.lo, hi: s.hi }
            }
            Regime::Ambiguous => {
                warnings
                    .push("regime not resolved at this horizon; bracket spans the candidate cases".into());
                let lo = if limits.a.is_finite() { 1.0 / (limits.a.max(1.0) + 1.0) } else { 0.0 };
                DimValue::Bracket { lo, hi: 1.0 }
            }
        },
        Which::E => DimValue::reciprocal_plus_one(limits.xi + 1.0),
        Which::EInf => DimValue::reciprocal_plus_one(limits.b),
        Which::EM | Which::Custom => {
            return Err(Error::precondition(format!("no closed form for {which}")));
        }
    };
    if spec.closed_form().is_none() {
        warnings.push(format!("limits estimated from the window [{}, {horizon}]", horizon / 2));
    }
    Ok(DimensionReport {
        set_kind: which,
        regime: Some(limits.regime),
        value,
        method: Method::ClosedForm,
        diagnostics,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JarnikBounds {
    pub m: u64,
    pub lo: f64,
    pub hi: f64,
}

/// `1 - 1/(M log 2) <= dim E_M <= 1 - 1/(8 M log M)` for `M >= 8`.
pub fn jarnik_bounds(m: u64) -> Result<JarnikBounds> {
    if m < 8 {
        return Err(Error::domain(format!("the bounds need M >= 8, got {m}")));
    }
    let mf = m as f64;
    Ok(JarnikBounds {
        m,
        lo: 1.0 - 1.0 / (mf * std::f64::consts::LN_2),
        hi: 1.0 - 1.0 / (8.0 * mf * mf.ln()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTrace {
    /// `log(t_1 ... t_n) / (2 log(t_1 ... t_n) + log t_{n+1})` for `n = 1..=depth`.
    pub values: Vec<f64>,
    /// Minimum of `values` over `[n/2, n]` at each `n`.
    pub liminf_proxy: Vec<f64>,
}

/// Truncated liminf formula from `log t_1, ..., log t_{depth+1}`.
pub fn limit_formula(log_t: &[f64]) -> Result<LimitTrace> {
    if log_t.len() < 2 {
        return Err(Error::domain("need log t_n for n = 1..=depth + 1 with depth >= 1"));
    }
    if let Some(i) = log_t.iter().position(|&l| !(l >= 3f64.ln() - 1e-12)) {
        return Err(Error::precondition(format!("t_{} < 3", i + 1)));
    }
    let depth = log_t.len() - 1;
    let mut values = Vec::with_capacity(depth);
    let mut s = 0.0;
    for n in 0..depth {
        s += log_t[n];
        values.push(s / (2.0 * s + log_t[n + 1]));
    }
    let liminf_proxy = (1..=depth)
        .map(|n| values[(n / 2).max(1) - 1..n].iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    Ok(LimitTrace { values, liminf_proxy })
}

/// `limit_formula` with `log t_n = psi(n)`.
pub fn limit_formula_spec(spec: &GrowthSpec, depth: u64) -> Result<LimitTrace> {
    let logs = (1..=depth + 1).map(|n| spec.eval_psi(n)).collect::<Result<Vec<_>>>()?;
    limit_formula(&logs)
}

/// Moran estimate of `dim E_M` as a report, with the Jarnik bracket as a diagnostic.
pub fn em_report(m: u64, depths: &[usize], tol: f64) -> Result<DimensionReport> {
    let mut diagnostics = Vec::with_capacity(depths.len());
    let mut last = None;
    for &d in depths {
        let e = estimate_em(m, d, tol)?;
        diagnostics.push(TraceRow { depth: d as u64, value: e.root, lo: Some(e.lo), hi: Some(e.hi) });
        last = Some(e);
    }
    let last = last.ok_or_else(|| Error::precondition("no depths given"))?;
    let mut warnings = vec![format!(
        "finite-depth {:?} root at depth {}, not the limiting dimension",
        last.method, last.depth
    )];
    if let Ok(j) = jarnik_bounds(m) {
        if last.root < j.lo || last.root > j.hi {
            warnings.push(format!("root outside [{:.5}, {:.5}]", j.lo, j.hi));
        }
    }
    Ok(DimensionReport {
        set_kind: Which::EM,
        regime: None,
        value: DimValue::Point { value: last.root, exact: None },
        method: Method::Moran,
        diagnostics,
        warnings,
    })
}
