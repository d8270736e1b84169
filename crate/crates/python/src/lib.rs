use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use cfdim::construct::{self, Chooser, SetKind, SetParams};
use cfdim::dimension::{self, Which, S_DEFAULT_DEPTH, S_DEFAULT_MS};
use cfdim::{stochastic, DigitWord, Rational};

create_exception!(cfdim, CfdimError, PyException);
create_exception!(cfdim, ParseError, CfdimError);
create_exception!(cfdim, DomainError, CfdimError);
create_exception!(cfdim, NumericError, CfdimError);

fn err(e: cfdim::Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        2 => ParseError::new_err(msg),
        3 => DomainError::new_err(msg),
        4 => NumericError::new_err(msg),
        _ => CfdimError::new_err(msg),
    }
}

fn word(digits: Vec<u64>) -> PyResult<DigitWord> {
    DigitWord::new(digits).map_err(err)
}

fn spec(s: &str) -> PyResult<cfdim::GrowthSpec> {
    s.parse().map_err(err)
}

#[pyclass(frozen, module = "cfdim")]
struct GrowthSpec(cfdim::GrowthSpec);

#[pymethods]
impl GrowthSpec {
    #[new]
    fn new(s: &str) -> PyResult<Self> {
        spec(s).map(GrowthSpec)
    }

    fn log_psi(&self, n: u64) -> PyResult<f64> {
        self.0.log_psi(n).map_err(err)
    }

    /// `(A, B, xi)` when the family has a closed form.
    fn closed_form(&self) -> Option<(f64, f64, f64)> {
        self.0.closed_form().map(|l| (l.a, l.b, l.xi))
    }

    #[pyo3(signature = (horizon = 4096))]
    fn asymptotics_json(&self, horizon: u64) -> PyResult<String> {
        let r = self.0.asymptotics(horizon).map_err(err)?;
        serde_json::to_string(&r).map_err(|e| err(e.into()))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("GrowthSpec('{}')", self.0)
    }
}

#[pyclass(frozen, module = "cfdim")]
struct DimensionReport(dimension::DimensionReport);

#[pymethods]
impl DimensionReport {
    #[getter]
    fn set_kind(&self) -> String {
        self.0.set_kind.to_string()
    }

    #[getter]
    fn method(&self) -> String {
        format!("{:?}", self.0.method)
    }

    #[getter]
    fn lo(&self) -> f64 {
        self.0.value.lo()
    }

    #[getter]
    fn hi(&self) -> f64 {
        self.0.value.hi()
    }

    /// The exact value as `"p/q"`, when known.
    #[getter]
    fn exact(&self) -> Option<String> {
        self.0.value.exact().map(Rational::to_string)
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    fn trace_csv(&self) -> String {
        self.0.trace_csv()
    }

    fn __repr__(&self) -> String {
        format!("DimensionReport({} = {}, {:?})", self.0.set_kind, self.0.value, self.0.method)
    }
}

#[pyclass(frozen, get_all, module = "cfdim")]
struct MoranEstimate {
    method: String,
    depth: usize,
    root: f64,
    lo: f64,
    hi: f64,
    residual: f64,
}

#[pymethods]
impl MoranEstimate {
    fn __repr__(&self) -> String {
        format!("MoranEstimate(root={}, depth={}, method={})", self.root, self.depth, self.method)
    }
}

#[pyclass(frozen, module = "cfdim")]
struct ConstructedSet(construct::ConstructedSet);

#[pymethods]
impl ConstructedSet {
    /// `kind` is one of e-m-psi, f-m-alpha, e-dn, e-lower, e-inf-ln.
    #[new]
    #[pyo3(signature = (kind, psi = None, m = None, eps = None, alpha = None, depth = 20))]
    fn new(
        kind: &str,
        psi: Option<&str>,
        m: Option<u64>,
        eps: Option<f64>,
        alpha: Option<f64>,
        depth: usize,
    ) -> PyResult<Self> {
        let kind: SetKind = kind.parse().map_err(err)?;
        let params = SetParams { spec: psi.map(spec).transpose()?, m, eps, alpha };
        construct::make_set(kind, &params, depth).map(ConstructedSet).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        construct::ConstructedSet::from_json(s).map(ConstructedSet).map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.to_string()
    }

    #[getter]
    fn m(&self) -> u64 {
        self.0.m
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth
    }

    #[getter]
    fn sparse_indices(&self) -> Vec<u64> {
        self.0.sparse_indices.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    fn admits(&self, digits: Vec<u64>) -> PyResult<bool> {
        Ok(self.0.admits(&word(digits)?))
    }

    /// Number of admissible words of length `n`, or `None` past `u128`.
    fn family_size(&self, n: usize) -> Option<u128> {
        self.0.family_size(n)
    }

    /// JSON sample point; `chooser` is min, max or random:SEED.
    #[pyo3(signature = (chooser = "min", depth = None))]
    fn sample_json(&self, chooser: &str, depth: Option<usize>) -> PyResult<String> {
        let c: Chooser = chooser.parse().map_err(err)?;
        let p = construct::sample_point(&self.0, c, depth.unwrap_or(self.0.depth)).map_err(err)?;
        serde_json::to_string(&p).map_err(|e| err(e.into()))
    }

    fn check_gap_json(&self, py: Python<'_>, n: usize) -> PyResult<String> {
        let r = py.detach(|| construct::check_gap(&self.0, n)).map_err(err)?;
        serde_json::to_string(&r).map_err(|e| err(e.into()))
    }

    #[pyo3(signature = (n, eps = 1.0))]
    fn check_distortion_json(&self, py: Python<'_>, n: usize, eps: f64) -> PyResult<String> {
        let opts = construct::DistortionOptions::new(eps);
        let r = py.detach(|| construct::check_distortion(&self.0, n, &opts)).map_err(err)?;
        serde_json::to_string(&r).map_err(|e| err(e.into()))
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ConstructedSet({}, M={}, depth={})", self.0.name, self.0.m, self.0.depth)
    }
}

#[pyclass(frozen, module = "cfdim")]
struct McReport(stochastic::McReport);

#[pymethods]
impl McReport {
    #[getter]
    fn mean_hits(&self) -> f64 {
        self.0.summary.mean_hits
    }

    #[getter]
    fn expected_hits(&self) -> Option<f64> {
        self.0.summary.expected_hits
    }

    #[getter]
    fn median(&self) -> f64 {
        self.0.summary.median
    }

    #[getter]
    fn iqr(&self) -> f64 {
        self.0.summary.iqr
    }

    #[getter]
    fn samples(&self) -> usize {
        self.0.rows.len()
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

/// Canonical digits of the rational `"p/q"` in `[0, 1)`.
#[pyfunction]
fn expand(x: &str) -> PyResult<Vec<u64>> {
    let r: Rational = x.parse().map_err(err)?;
    cfdim::expand(&r).map(DigitWord::into_vec).map_err(err)
}

/// `[0; a_1, ..., a_n]` as `"p/q"`.
#[pyfunction]
fn evaluate(digits: Vec<u64>) -> PyResult<String> {
    Ok(cfdim::evaluate(&word(digits)?).to_string())
}

/// Endpoints `(left, right)` of the cylinder of `digits`, as `"p/q"` strings.
#[pyfunction]
fn cylinder(digits: Vec<u64>) -> PyResult<(String, String)> {
    let c = cfdim::cylinder(&word(digits)?);
    Ok((c.left.to_string(), c.right.to_string()))
}

/// `which` is sup, lim or inf.
#[pyfunction]
#[pyo3(signature = (psi, which, horizon = 4096))]
fn predict(psi: &str, which: &str, horizon: u64) -> PyResult<DimensionReport> {
    let w: Which = which.parse().map_err(err)?;
    dimension::predict(&spec(psi)?, w, horizon).map(DimensionReport).map_err(err)
}

#[pyfunction]
fn jarnik_bounds(m: u64) -> PyResult<(f64, f64)> {
    dimension::jarnik_bounds(m).map(|j| (j.lo, j.hi)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (m, depth, tol = dimension::DEFAULT_TOLERANCE))]
fn estimate_em(py: Python<'_>, m: u64, depth: usize, tol: f64) -> PyResult<MoranEstimate> {
    let e = py.detach(|| dimension::estimate_em(m, depth, tol)).map_err(err)?;
    Ok(MoranEstimate {
        method: format!("{:?}", e.method),
        depth: e.depth,
        root: e.root,
        lo: e.lo,
        hi: e.hi,
        residual: e.residual,
    })
}

/// Bracket `(lo, hi)` on `S(alpha)`.
#[pyfunction]
#[pyo3(signature = (alpha, depth = S_DEFAULT_DEPTH, ms = None, tol = dimension::DEFAULT_TOLERANCE))]
fn estimate_s(
    py: Python<'_>,
    alpha: f64,
    depth: usize,
    ms: Option<Vec<u64>>,
    tol: f64,
) -> PyResult<(f64, f64)> {
    let ms = ms.unwrap_or_else(|| S_DEFAULT_MS.to_vec());
    let b = py.detach(|| dimension::estimate_s(alpha, &ms, depth, tol)).map_err(err)?;
    Ok((b.lo, b.hi))
}

#[pyfunction]
fn limit_formula(psi: &str, depth: u64) -> PyResult<Vec<f64>> {
    dimension::limit_formula_spec(&spec(psi)?, depth).map(|t| t.values).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (psi, samples, horizon, seed = 0))]
fn bb_experiment(py: Python<'_>, psi: &str, samples: u64, horizon: u64, seed: u64) -> PyResult<McReport> {
    let s = spec(psi)?;
    py.detach(|| stochastic::bb_experiment(&s, samples, horizon, seed)).map(McReport).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (samples, horizon, seed = 0))]
fn limsup_statistic(py: Python<'_>, samples: u64, horizon: u64, seed: u64) -> PyResult<McReport> {
    py.detach(|| stochastic::limsup_statistic(samples, horizon, seed)).map(McReport).map_err(err)
}

/// First `n` digits of a Gauss-distributed random point.
#[pyfunction]
fn draw_digits(seed: u64, n: usize) -> PyResult<Vec<u64>> {
    stochastic::draw_digits(seed, n).map(DigitWord::into_vec).map_err(err)
}

#[pyfunction]
fn sparse_count(n: u64) -> u32 {
    cfdim::sparse_count(n)
}

#[pymodule]
#[pyo3(name = "cfdim")]
fn cfdim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CfdimError", py.get_type::<CfdimError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("DomainError", py.get_type::<DomainError>())?;
    m.add("NumericError", py.get_type::<NumericError>())?;
    m.add_class::<GrowthSpec>()?;
    m.add_class::<DimensionReport>()?;
    m.add_class::<MoranEstimate>()?;
    m.add_class::<ConstructedSet>()?;
    m.add_class::<McReport>()?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(cylinder, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(jarnik_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_em, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_s, m)?)?;
    m.add_function(wrap_pyfunction!(limit_formula, m)?)?;
    m.add_function(wrap_pyfunction!(bb_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(limsup_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(draw_digits, m)?)?;
    m.add_function(wrap_pyfunction!(sparse_count, m)?)?;
    Ok(())
}
