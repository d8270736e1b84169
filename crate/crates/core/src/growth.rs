//! Growth functions `psi: N -> R+` and their asymptotic functionals.
//!
//! Evaluation happens in the log domain: [`GrowthSpec::log_psi`] is finite
//! far beyond the point where `psi` itself overflows an `f64`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cf::Integer;
use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, log_sum_exp};

/// How a table continues past its last entry.
#[derive(Clone, Debug, PartialEq)]
pub enum Extension {
    /// Evaluating past the table is an error.
    Error,
    /// `psi(n) = last * r^(n - len)` with `r > 1`.
    Geometric(f64),
    /// `psi(n)` follows another spec for `n > len`.
    Formula(Box<GrowthSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GrowthSpec {
    /// `ln(n + 1)`.
    Log,
    /// `n^rho`.
    Power(f64),
    /// `alpha * n`.
    Linear(f64),
    /// `n * ln(n + 1)^beta`.
    NLogB(f64),
    /// `a^n`.
    Exponential(f64),
    /// `a^n` for even `n`, `b^n` for odd `n`.
    Alternating(f64, f64),
    Table {
        values: Vec<f64>,
        extension: Extension,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "alpha", rename_all = "snake_case")]
pub enum Regime {
    /// `psi(n) / n -> 0`.
    Sublinear,
    /// `psi(n) / n -> alpha` with `0 < alpha < inf`.
    Linear(f64),
    /// `psi(n) / n -> inf`.
    Superlinear,
    /// The finite-horizon trace does not settle.
    Ambiguous,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Sublinear => f.write_str("sublinear"),
            Regime::Linear(a) => write!(f, "linear({a})"),
            Regime::Superlinear => f.write_str("superlinear"),
            Regime::Ambiguous => f.write_str("ambiguous"),
        }
    }
}

/// Exact limits of a named family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub a: f64,
    pub b: f64,
    pub xi: f64,
    pub regime: Regime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub value: f64,
    pub log_value: f64,
    /// The window reached far enough that the minimum is the true tail infimum.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: u64,
    /// `ln psi(n) / n`.
    pub log_psi_over_n: f64,
    /// `psi(n + 1) / (psi(1) + ... + psi(n))`.
    pub xi_ratio: f64,
    /// `ln(psi(n) / n)`.
    pub log_psi_per_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub spec: GrowthSpec,
    pub horizon: u64,
    /// Best available values: closed form when known, else the proxies.
    pub a: f64,
    pub b: f64,
    pub xi: f64,
    pub regime: Regime,
    /// Tail-window proxies over `[horizon / 2, horizon]`.
    pub a_est: f64,
    pub b_est: f64,
    pub xi_est: f64,
    pub regime_est: Regime,
    pub closed_form: Option<Limits>,
    pub trace: Vec<TracePoint>,
}

impl GrowthSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            GrowthSpec::Log => Ok(()),
            GrowthSpec::Power(r) => positive("exponent", *r),
            GrowthSpec::Linear(a) => positive("slope", *a),
            GrowthSpec::NLogB(b) => {
                if b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain("log exponent must be finite"))
                }
            }
            GrowthSpec::Exponential(a) => {
                if a.is_finite() && *a > 1.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("exponential base must exceed 1, got {a}")))
                }
            }
            GrowthSpec::Alternating(a, b) => {
                if a.is_finite() && b.is_finite() && *a > 1.0 && b > a {
                    Ok(())
                } else {
                    Err(Error::domain(format!("alternating bases need 1 < a < b, got {a}, {b}")))
                }
            }
            GrowthSpec::Table { values, extension } => {
                if values.is_empty() {
                    return Err(Error::domain("empty table"));
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::domain(format!("table entry {v} is not positive")));
                }
                match extension {
                    Extension::Error => Ok(()),
                    Extension::Geometric(r) => {
                        if r.is_finite() && *r > 1.0 {
                            Ok(())
                        } else {
                            Err(Error::domain(format!("geometric ratio must exceed 1, got {r}")))
                        }
                    }
                    Extension::Formula(f) => f.validate(),
                }
            }
        }
    }

    /// `ln psi(n)`.
    pub fn log_psi(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("psi is defined for n >= 1"));
        }
        let x = n as f64;
        Ok(match self {
            GrowthSpec::Log => x.ln_1p().ln(),
            GrowthSpec::Power(r) => r * x.ln(),
            GrowthSpec::Linear(a) => a.ln() + x.ln(),
            GrowthSpec::NLogB(b) => x.ln() + b * x.ln_1p().ln(),
            GrowthSpec::Exponential(a) => x * a.ln(),
            GrowthSpec::Alternating(a, b) => x * if n % 2 == 0 { a.ln() } else { b.ln() },
            GrowthSpec::Table { values, extension } => {
                let len = values.len() as u64;
                if n <= len {
                    values[(n - 1) as usize].ln()
                } else {
                    match extension {
                        Extension::Error => {
                            return Err(Error::domain(format!(
                                "n = {n} is past the end of a {len}-entry table with no extension"
                            )))
                        }
                        Extension::Geometric(r) => values[values.len() - 1].ln() + (n - len) as f64 * r.ln(),
                        Extension::Formula(f) => f.log_psi(n)?,
                    }
                }
            }
        })
    }

    /// `psi(n)`; `+inf` once the value leaves `f64` range.
    pub fn eval_psi(&self, n: u64) -> Result<f64> {
        let x = n as f64;
        match self {
            GrowthSpec::Log if n >= 1 => Ok(x.ln_1p()),
            GrowthSpec::Linear(a) if n >= 1 => Ok(a * x),
            GrowthSpec::Exponential(a) if n >= 1 => Ok(a.powf(x)),
            GrowthSpec::Alternating(a, b) if n >= 1 => Ok(if n % 2 == 0 { a.powf(x) } else { b.powf(x) }),
            GrowthSpec::Table { values, extension } if n >= 1 => {
                let len = values.len() as u64;
                match extension {
                    _ if n <= len => Ok(values[n as usize - 1]),
                    Extension::Geometric(r) => Ok(values[values.len() - 1] * r.powf((n - len) as f64)),
                    Extension::Formula(f) => f.eval_psi(n),
                    Extension::Error => self.log_psi(n).map(f64::exp),
                }
            }
            _ => Ok(self.log_psi(n)?.exp()),
        }
    }

    /// `psi(n)` as an exact integer, for integer-valued families with integer parameters.
    pub fn exact_value(&self, n: u64) -> Option<Integer> {
        let int = |v: f64| (v.fract() == 0.0 && v > 0.0 && v < 2f64.powi(62)).then_some(v as u64);
        let pow = |base: f64| -> Option<Integer> {
            let b = int(base)?;
            Some(Integer::from(b).pow(u32::try_from(n).ok()?))
        };
        match self {
            GrowthSpec::Linear(a) => {
                let a = int(*a)?;
                Some(Integer::from(a) * Integer::from(n))
            }
            GrowthSpec::Power(r) => {
                let r = int(*r)?;
                Some(Integer::from(n).pow(u32::try_from(r).ok()?))
            }
            GrowthSpec::Exponential(a) => pow(*a),
            GrowthSpec::Alternating(a, b) => pow(if n % 2 == 0 { *a } else { *b }),
            GrowthSpec::Table { values, extension } => {
                let len = values.len() as u64;
                if n >= 1 && n <= len {
                    int(values[n as usize - 1]).map(Integer::from)
                } else if let Extension::Formula(f) = extension {
                    f.exact_value(n)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Smallest horizon `H` such that `min_{n <= k <= H} psi(k)` equals the tail infimum.
    pub fn tail_certificate(&self, n: u64) -> Option<u64> {
        match self {
            GrowthSpec::Log | GrowthSpec::Power(_) | GrowthSpec::Linear(_) | GrowthSpec::Exponential(_) => {
                Some(n)
            }
            GrowthSpec::NLogB(b) => {
                if *b >= 0.0 {
                    Some(n)
                } else {
                    // n ln(n+1)^b is increasing once ln(n + 1) >= |b|.
                    Some(n.max(b.abs().exp().ceil() as u64))
                }
            }
            GrowthSpec::Alternating(..) => Some(n + 1),
            GrowthSpec::Table { values, extension } => {
                let past = values.len() as u64 + 1;
                match extension {
                    Extension::Error => None,
                    Extension::Geometric(_) => Some(n.max(past)),
                    Extension::Formula(f) => f.tail_certificate(n.max(past)),
                }
            }
        }
    }

    /// `theta(n) = min_{k >= n} psi(k)`, searched over `n <= k <= horizon`.
    pub fn theta(&self, n: u64, horizon: u64) -> Result<Theta> {
        if n == 0 {
            return Err(Error::domain("theta is defined for n >= 1"));
        }
        if horizon < n {
            return Err(Error::domain(format!("horizon {horizon} is below n = {n}")));
        }
        let mut best = f64::INFINITY;
        for k in n..=horizon {
            best = best.min(self.log_psi(k)?);
        }
        let certified = self.tail_certificate(n).is_some_and(|h| h <= horizon);
        Ok(Theta { value: best.exp(), log_value: best, certified })
    }

    /// `ln theta(n)` for `n = 1..=count`, using a horizon long enough to certify every entry
    /// when the family allows it. The flag reports whether all entries are certified.
    pub fn log_theta_seq(&self, count: u64) -> Result<(Vec<f64>, bool)> {
        let cert = (1..=count).map(|n| self.tail_certificate(n)).collect::<Option<Vec<_>>>();
        let horizon = cert.as_ref().and_then(|c| c.iter().copied().max()).unwrap_or(count).max(count);
        let logs = (1..=horizon).map(|k| self.log_psi(k)).collect::<Result<Vec<_>>>()?;
        let mut suffix = vec![f64::INFINITY; logs.len() + 1];
        for i in (0..logs.len()).rev() {
            suffix[i] = suffix[i + 1].min(logs[i]);
        }
        suffix.truncate(count as usize);
        Ok((suffix, cert.is_some()))
    }

    pub fn closed_form(&self) -> Option<Limits> {
        let slow = |regime| Limits { a: 1.0, b: 1.0, xi: 0.0, regime };
        match self {
            GrowthSpec::Log => Some(slow(Regime::Sublinear)),
            GrowthSpec::Power(r) => Some(slow(if *r < 1.0 {
                Regime::Sublinear
            } else if *r == 1.0 {
                Regime::Linear(1.0)
            } else {
                Regime::Superlinear
            })),
            GrowthSpec::Linear(a) => Some(slow(Regime::Linear(*a))),
            GrowthSpec::NLogB(b) => Some(slow(if *b > 0.0 {
                Regime::Superlinear
            } else if *b == 0.0 {
                Regime::Linear(1.0)
            } else {
                Regime::Sublinear
            })),
            GrowthSpec::Exponential(a) => {
                Some(Limits { a: *a, b: *a, xi: a - 1.0, regime: Regime::Superlinear })
            }
            GrowthSpec::Alternating(a, b) => {
                Some(Limits { a: *a, b: *b, xi: b * b - 1.0, regime: Regime::Superlinear })
            }
            GrowthSpec::Table { extension, .. } => match extension {
                Extension::Error => None,
                Extension::Geometric(r) => {
                    Some(Limits { a: *r, b: *r, xi: r - 1.0, regime: Regime::Superlinear })
                }
                Extension::Formula(f) => f.closed_form(),
            },
        }
    }

    pub fn asymptotics(&self, horizon: u64) -> Result<AsymptoticsReport> {
        if horizon < 16 {
            return Err(Error::domain(format!("asymptotics needs horizon >= 16, got {horizon}")));
        }
        let logs = (1..=horizon + 1).map(|k| self.log_psi(k)).collect::<Result<Vec<_>>>()?;
        let mut trace = Vec::with_capacity(horizon as usize);
        let mut log_partial = f64::NEG_INFINITY;
        for n in 1..=horizon {
            let l = logs[n as usize - 1];
            log_partial = log_add_exp(log_partial, l);
            trace.push(TracePoint {
                n,
                log_psi_over_n: l / n as f64,
                xi_ratio: (logs[n as usize] - log_partial).exp(),
                log_psi_per_n: l - (n as f64).ln(),
            });
        }
        let window = &trace[(horizon / 2) as usize - 1..];
        let lo = window.iter().map(|t| t.log_psi_over_n).fold(f64::INFINITY, f64::min);
        let hi = window.iter().map(|t| t.log_psi_over_n).fold(f64::NEG_INFINITY, f64::max);
        let xi_est = window.iter().map(|t| t.xi_ratio).fold(0.0, f64::max);
        let a_est = lo.exp().max(1.0);
        let b_est = hi.exp().max(1.0);
        let regime_est = classify(&trace);
        let closed = self.closed_form();
        let (a, b, xi, regime) = match closed {
            Some(c) => (c.a, c.b, c.xi, c.regime),
            None => (a_est, b_est, xi_est, regime_est),
        };
        Ok(AsymptoticsReport {
            spec: self.clone(),
            horizon,
            a,
            b,
            xi,
            regime,
            a_est,
            b_est,
            xi_est,
            regime_est,
            closed_form: closed,
            trace,
        })
    }

    /// Reads a table from a file: numbers separated by commas or whitespace,
    /// and an optional `extend: <rule>` line.
    pub fn table_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::new();
        let mut extension = Extension::Error;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if let Some(rule) = line.strip_prefix("extend:") {
                extension = parse_extension(rule.trim())?;
                continue;
            }
            for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                values.push(parse_f64(tok)?);
            }
        }
        let spec = GrowthSpec::Table { values, extension };
        spec.validate()?;
        Ok(spec)
    }
}

/// Reads the regime off the trend of `ln(psi(n)/n)` at `N/4`, `N/2` and `N`.
fn classify(trace: &[TracePoint]) -> Regime {
    let n = trace.len();
    let at = |k: usize| trace[k.max(1) - 1].log_psi_per_n;
    let (r1, r2, r3) = (at(n / 4), at(n / 2), at(n));
    let (d1, d2) = (r2 - r1, r3 - r2);
    const FLAT: f64 = 0.05;
    let sign = |d: f64| {
        if d > FLAT {
            1
        } else if d < -FLAT {
            -1
        } else {
            0
        }
    };
    match (sign(d1), sign(d2)) {
        (1, 1) => Regime::Superlinear,
        (-1, -1) => Regime::Sublinear,
        (0, 0) => Regime::Linear(r3.exp()),
        (_, 1) if r3 > 20.0 => Regime::Superlinear,
        _ => Regime::Ambiguous,
    }
}

/// `t(n) = #{k >= 1 : 2^k <= n}`.
pub fn sparse_count(n: u64) -> u32 {
    if n < 2 {
        0
    } else {
        63 - n.leading_zeros()
    }
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::parse(tok, "expected a number"))
}

fn parse_extension(rule: &str) -> Result<Extension> {
    match rule {
        "error" | "" => Ok(Extension::Error),
        r => {
            if let Some(x) = r.strip_prefix("geo:") {
                Ok(Extension::Geometric(parse_f64(x)?))
            } else {
                Ok(Extension::Formula(Box::new(r.parse()?)))
            }
        }
    }
}

impl FromStr for GrowthSpec {
    type Err = Error;

    /// Parses `log`, `pow:r`, `lin:a`, `nlogb:b`, `exp:a`, `alt:a,b`,
    /// `table:v1,v2,..[;ext]` and `table:@path[;ext]`, where `ext` is
    /// `error`, `geo:r` or another spec.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s, None),
        };
        let need = || arg.ok_or_else(|| Error::parse(s, format!("`{head}` needs a parameter")));
        let spec = match head {
            "log" => {
                if arg.is_some() {
                    return Err(Error::parse(s, "`log` takes no parameter"));
                }
                GrowthSpec::Log
            }
            "pow" => GrowthSpec::Power(parse_f64(need()?)?),
            "lin" => GrowthSpec::Linear(parse_f64(need()?)?),
            "nlogb" => GrowthSpec::NLogB(parse_f64(need()?)?),
            "exp" => GrowthSpec::Exponential(parse_f64(need()?)?),
            "alt" => {
                let a = need()?;
                let (x, y) = a.split_once(',').ok_or_else(|| Error::parse(a, "expected two bases `a,b`"))?;
                GrowthSpec::Alternating(parse_f64(x)?, parse_f64(y)?)
            }
            "table" => {
                let a = need()?;
                let (body, ext) = match a.split_once(';') {
                    Some((b, e)) => (b.trim(), Some(e.trim())),
                    None => (a, None),
                };
                let mut spec = if let Some(path) = body.strip_prefix('@') {
                    GrowthSpec::table_from_file(Path::new(path))?
                } else {
                    let values = body
                        .split(',')
                        .filter(|t| !t.trim().is_empty())
                        .map(parse_f64)
                        .collect::<Result<Vec<_>>>()?;
                    GrowthSpec::Table { values, extension: Extension::Error }
                };
                if let (Some(e), GrowthSpec::Table { extension, .. }) = (ext, &mut spec) {
                    *extension = parse_extension(e)?;
                }
                spec
            }
            other => return Err(Error::parse(other, "unknown growth family")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GrowthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthSpec::Log => f.write_str("log"),
            GrowthSpec::Power(r) => write!(f, "pow:{r}"),
            GrowthSpec::Linear(a) => write!(f, "lin:{a}"),
            GrowthSpec::NLogB(b) => write!(f, "nlogb:{b}"),
            GrowthSpec::Exponential(a) => write!(f, "exp:{a}"),
            GrowthSpec::Alternating(a, b) => write!(f, "alt:{a},{b}"),
            GrowthSpec::Table { values, extension } => {
                f.write_str("table:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                match extension {
                    Extension::Error => Ok(()),
                    Extension::Geometric(r) => write!(f, ";geo:{r}"),
                    Extension::Formula(g) => write!(f, ";{g}"),
                }
            }
        }
    }
}

impl Serialize for GrowthSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GrowthSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `ln(psi(1) + ... + psi(n))`.
pub fn log_partial_sum(spec: &GrowthSpec, n: u64) -> Result<f64> {
    let logs = (1..=n).map(|k| spec.log_psi(k)).collect::<Result<Vec<_>>>()?;
    Ok(log_sum_exp(&logs))
}
