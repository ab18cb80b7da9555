//! Python bindings: fields, spaces and point sets, the counting function
//! `nu_k`, `Delta_k(E)` reports, restriction measurements and the experiment
//! runner.

use std::sync::Arc;

use fqharm::field::Field;
use fqharm::lattice::{build_set_str, PointSet, Space};
use fqharm::magnitude::{self, NuMethod, RecordKind, Threshold};
use fqharm::restriction::{self, ConstantReport, RestrictionBound};
use fqharm::spectral::set_hat;
use fqharm::tolerance::{Tolerance, DEFAULT_TOLERANCE};
use fqharm::{make_field, Fq};
use fqharm_cli::ExperimentConfig;
use num_complex::Complex64;
use num_rational::Rational64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(
    fqharm,
    FqharmError,
    PyValueError,
    "Raised for refused or failed computations."
);

fn err(e: fqharm::Error) -> PyErr {
    FqharmError::new_err(format!("{}: {e}", e.kind()))
}

fn fraction(py: Python<'_>, r: Rational64) -> PyResult<Bound<'_, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((*r.numer(), *r.denom()))
}

fn element(field: &Field, a: u32) -> PyResult<Fq> {
    field
        .element(a)
        .ok_or_else(|| PyValueError::new_err(format!("element index {a} outside F_{}", field.q())))
}

fn method(name: &str) -> PyResult<NuMethod> {
    match name {
        "direct" => Ok(NuMethod::Direct),
        "spectral" => Ok(NuMethod::Spectral),
        "both" => Ok(NuMethod::Both),
        _ => Err(PyValueError::new_err(format!(
            "method must be direct, spectral or both, got `{name}`"
        ))),
    }
}

fn constant_report<'py>(py: Python<'py>, r: &ConstantReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("check", &r.check)?;
    d.set_item("hypothesis_met", r.hypothesis_met)?;
    d.set_item("lhs", r.measured_lhs)?;
    d.set_item("rhs", r.bound_rhs)?;
    d.set_item("implied_constant", r.implied_constant)?;
    d.set_item("log_slack", r.log_slack)?;
    Ok(d)
}

/// The finite field `F_{p^n}`; elements are integers in `[0, q)`.
#[pyclass(frozen, name = "Field", module = "fqharm")]
struct PyField {
    inner: Arc<Field>,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (p, n = 1))]
    fn new(p: u32, n: u32) -> PyResult<Self> {
        Ok(PyField {
            inner: Arc::new(make_field(p, n).map_err(err)?),
        })
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.p()
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    /// Monic modulus coefficients, constant term first.
    #[getter]
    fn modulus(&self) -> Vec<u32> {
        self.inner.spec().modulus.clone()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        let f = &self.inner;
        Ok(f.add(element(f, a)?, element(f, b)?).0)
    }

    fn sub(&self, a: u32, b: u32) -> PyResult<u32> {
        let f = &self.inner;
        Ok(f.sub(element(f, a)?, element(f, b)?).0)
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        let f = &self.inner;
        Ok(f.mul(element(f, a)?, element(f, b)?).0)
    }

    fn neg(&self, a: u32) -> PyResult<u32> {
        Ok(self.inner.neg(element(&self.inner, a)?).0)
    }

    /// `None` for zero.
    fn inv(&self, a: u32) -> PyResult<Option<u32>> {
        Ok(self.inner.inv(element(&self.inner, a)?).map(|x| x.0))
    }

    fn trace(&self, a: u32) -> PyResult<u32> {
        Ok(self.inner.tables().trace(element(&self.inner, a)?))
    }

    /// Coefficients of `a` in the polynomial basis, constant term first.
    fn coeffs(&self, a: u32) -> PyResult<Vec<u32>> {
        Ok(self.inner.coeffs(element(&self.inner, a)?))
    }

    fn chi(&self, a: u32) -> PyResult<Complex64> {
        Ok(self.inner.chi(element(&self.inner, a)?))
    }

    fn eta(&self, a: u32) -> PyResult<i8> {
        Ok(self.inner.eta(element(&self.inner, a)?))
    }

    fn gauss(&self) -> Complex64 {
        self.inner.gauss()
    }

    fn kloosterman(&self, a: u32, b: u32) -> PyResult<Complex64> {
        let f = &self.inner;
        Ok(f.kloosterman(element(f, a)?, element(f, b)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(q={}, modulus={})",
            self.inner.q(),
            self.inner.spec().modulus_string()
        )
    }
}

/// A subset of `F_q^d`, stored as point indices of its space.
#[pyclass(frozen, name = "PointSet", module = "fqharm")]
struct PyPointSet {
    inner: PointSet,
}

#[pymethods]
impl PyPointSet {
    #[getter]
    fn label(&self) -> &str {
        self.inner.label()
    }

    fn indices(&self) -> Vec<usize> {
        self.inner.iter().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, index: usize) -> bool {
        self.inner.contains(index)
    }

    fn __repr__(&self) -> String {
        format!("PointSet({:?}, size={})", self.inner.label(), self.inner.len())
    }
}

/// The space `F_q^d` with its spheres `S_t = {x : x.x = t}`.
#[pyclass(frozen, name = "Space", module = "fqharm")]
struct PySpace {
    inner: Arc<Space>,
}

impl PySpace {
    fn check(&self, set: &PyPointSet) -> PyResult<()> {
        if set.inner.universe() == self.inner.size() {
            Ok(())
        } else {
            Err(err(fqharm::Error::DimensionMismatch {
                expected: self.inner.size(),
                got: set.inner.universe(),
            }))
        }
    }

    fn radius(&self, t: u32) -> PyResult<Fq> {
        element(self.inner.field(), t)
    }
}

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (p, d, n = 1))]
    fn new(p: u32, d: usize, n: u32) -> PyResult<Self> {
        let field = make_field(p, n).map_err(err)?;
        Ok(PySpace {
            inner: Arc::new(Space::new(field, d).map_err(err)?),
        })
    }

    #[getter]
    fn field(&self) -> PyField {
        PyField {
            inner: self.inner.field_arc(),
        }
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    /// `q^d`.
    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn coords(&self, x: usize) -> PyResult<Vec<u32>> {
        if x >= self.inner.size() {
            return Err(PyValueError::new_err(format!(
                "point index {x} outside [0, {})",
                self.inner.size()
            )));
        }
        Ok(self.inner.coords(x).into_iter().map(|c| c.0).collect())
    }

    fn index(&self, coords: Vec<u32>) -> PyResult<usize> {
        if coords.len() != self.inner.d() {
            return Err(err(fqharm::Error::DimensionMismatch {
                expected: self.inner.d(),
                got: coords.len(),
            }));
        }
        let field = self.inner.field();
        let v = coords
            .into_iter()
            .map(|c| element(field, c))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(self.inner.index(&v))
    }

    fn norm(&self, x: usize) -> PyResult<u32> {
        self.coords(x)?;
        Ok(self.inner.norm(x).0)
    }

    /// `|S_t|` for every `t`, indexed by field element.
    fn sphere_sizes(&self) -> Vec<usize> {
        self.inner.spheres().sizes()
    }

    fn sphere(&self, t: u32) -> PyResult<Vec<usize>> {
        Ok(self.inner.spheres().members(self.radius(t)?).to_vec())
    }

    /// Builds a set from a generator string such as `random:size=10,seed=42`.
    fn set(&self, spec: &str) -> PyResult<PyPointSet> {
        Ok(PyPointSet {
            inner: build_set_str(&self.inner, spec).map_err(err)?,
        })
    }

    #[pyo3(signature = (indices, label = "explicit"))]
    fn set_from_indices(&self, indices: Vec<usize>, label: &str) -> PyResult<PyPointSet> {
        let n = self.inner.size();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(PyValueError::new_err(format!("point index {bad} outside [0, {n})")));
        }
        Ok(PyPointSet {
            inner: PointSet::from_indices(n, indices, label),
        })
    }

    /// `nu_k(t)` for every `t`, indexed by field element.
    #[pyo3(signature = (set, k, method = "both"))]
    fn nu(&self, py: Python<'_>, set: &PyPointSet, k: u32, method: &str) -> PyResult<Vec<u64>> {
        self.check(set)?;
        let m = self::method(method)?;
        let profile = py
            .detach(|| magnitude::nu_profile(&self.inner, &set.inner, k, m))
            .map_err(err)?;
        Ok(profile.counts)
    }

    /// `Delta_k(E)` with its Cauchy-Schwarz and restriction lower bounds.
    #[pyo3(signature = (set, k, method = "both"))]
    fn delta<'py>(&self, py: Python<'py>, set: &PyPointSet, k: u32, method: &str) -> PyResult<Bound<'py, PyDict>> {
        self.check(set)?;
        let m = self::method(method)?;
        let r = py
            .detach(|| magnitude::delta_report_with(&self.inner, &set.inner, k, m))
            .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("k", r.k)?;
        d.set_item("set_size", r.set_size)?;
        d.set_item("members", r.members.iter().map(|t| t.0).collect::<Vec<_>>())?;
        d.set_item("cardinality", r.cardinality)?;
        d.set_item("nu0", r.nu0)?;
        d.set_item("cauchy_schwarz_bound", r.cauchy_schwarz_bound)?;
        d.set_item("cauchy_schwarz_holds", r.cauchy_schwarz_holds)?;
        d.set_item("restriction_bound", r.restriction_bound)?;
        d.set_item("bound_ratio", r.bound_ratio)?;
        Ok(d)
    }

    /// Fourier-moment and counting inequalities; `passed` is `None` when a
    /// hypothesis is not met.
    #[pyo3(signature = (set, k, tolerance = DEFAULT_TOLERANCE))]
    fn audit<'py>(
        &self,
        py: Python<'py>,
        set: &PyPointSet,
        k: u32,
        tolerance: f64,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.check(set)?;
        let report = py
            .detach(|| magnitude::lemma_audit(&self.inner, &set.inner, k, Tolerance(tolerance)))
            .map_err(err)?;
        report
            .records
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("name", &r.name)?;
                d.set_item(
                    "kind",
                    match r.kind {
                        RecordKind::Inequality => "inequality",
                        RecordKind::Identity => "identity",
                    },
                )?;
                d.set_item("hypothesis_met", r.hypothesis_met)?;
                d.set_item("lhs", r.lhs)?;
                d.set_item("rhs", r.rhs)?;
                d.set_item("passed", r.pass)?;
                d.set_item("slack_ratio", r.slack_ratio)?;
                Ok(d)
            })
            .collect()
    }

    /// `E^(m) = q^{-d} sum_{x in E} chi(-x.m)` for every `m`.
    fn set_hat(&self, set: &PyPointSet) -> PyResult<Vec<Complex64>> {
        self.check(set)?;
        Ok(set_hat(&self.inner, &set.inner).map_err(err)?.values.clone())
    }

    /// `sum_{v in S_t} |E^(v)|^k` per radius.
    fn sphere_moment<'py>(&self, py: Python<'py>, set: &PyPointSet, k: u32) -> PyResult<Bound<'py, PyDict>> {
        self.check(set)?;
        let m = restriction::sphere_moment(&self.inner, &set.inner, k).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("k", m.k)?;
        d.set_item("per_t", m.per_t)?;
        d.set_item("max_nonzero", m.max_nonzero)?;
        d.set_item("argmax", m.argmax.0)?;
        d.set_item("total", m.total)?;
        Ok(d)
    }

    /// Implied constant of the restriction bound (`"extension"` or `"interpolated"`).
    #[pyo3(signature = (set, k, which = "extension"))]
    fn restriction<'py>(&self, py: Python<'py>, set: &PyPointSet, k: u32, which: &str) -> PyResult<Bound<'py, PyDict>> {
        self.check(set)?;
        let bound = match which {
            "extension" => RestrictionBound::Extension,
            "interpolated" => RestrictionBound::Interpolated,
            _ => return Err(PyValueError::new_err(format!("unknown bound `{which}`"))),
        };
        let r = restriction::restriction_ratio(&self.inner, &set.inner, k, bound).map_err(err)?;
        constant_report(py, &r)
    }

    /// `sum_{x in S_t} |E^(x)|^2` against `q^{(d-1)/2} |E|^2`, with the pair expansion.
    #[pyo3(signature = (set, t, tolerance = DEFAULT_TOLERANCE))]
    fn sphere_energy<'py>(
        &self,
        py: Python<'py>,
        set: &PyPointSet,
        t: u32,
        tolerance: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        self.check(set)?;
        let r = restriction::l2_sphere_energy(&self.inner, &set.inner, self.radius(t)?, Tolerance(tolerance))
            .map_err(err)?;
        let d = constant_report(py, &r.report)?;
        d.set_item("expansion", r.expansion)?;
        d.set_item("expansion_holds", r.expansion_holds)?;
        d.set_item("sigma_norm", r.sigma_norm)?;
        d.set_item("sigma_bound", r.sigma_bound)?;
        Ok(d)
    }

    /// Interpolation of the sphere `L^3` norm between `L^2` and the extension exponent.
    #[pyo3(signature = (set, t, tolerance = DEFAULT_TOLERANCE))]
    fn holder<'py>(&self, py: Python<'py>, set: &PyPointSet, t: u32, tolerance: f64) -> PyResult<Bound<'py, PyDict>> {
        self.check(set)?;
        let r =
            restriction::holder_chain(&self.inner, &set.inner, self.radius(t)?, Tolerance(tolerance)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("theta", fraction(py, r.theta)?)?;
        d.set_item("exponent_identity", r.exponent_identity)?;
        d.set_item("upper_exponent", fraction(py, r.upper_exponent)?)?;
        d.set_item("norm3", r.norm3)?;
        d.set_item("norm2", r.norm2)?;
        d.set_item("norm_upper", r.norm_upper)?;
        d.set_item("interpolated", r.interpolated)?;
        d.set_item("passed", r.pass)?;
        Ok(d)
    }

    /// Largest `L^4` extension ratio over seeded random subsets of `S_t`.
    #[pyo3(signature = (t, trials = 20, seed = 1))]
    fn extension_constant<'py>(
        &self,
        py: Python<'py>,
        t: u32,
        trials: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let t = self.radius(t)?;
        let r = py
            .detach(|| restriction::extension_constant(&self.inner, t, trials, seed))
            .map_err(err)?;
        let d = constant_report(py, &r.report)?;
        d.set_item("ratios", r.trials.iter().map(|x| x.ratio).collect::<Vec<_>>())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Space(q={}, d={})", self.inner.q(), self.inner.d())
    }
}

/// Threshold exponent for `|Delta_k(E)| >~ q` (`"extension"` or `"interpolated"`).
#[pyfunction]
#[pyo3(signature = (d, which = "extension"))]
fn theorem_exponent<'py>(py: Python<'py>, d: i64, which: &str) -> PyResult<Bound<'py, PyAny>> {
    let t = match which {
        "extension" => Threshold::Extension,
        "interpolated" => Threshold::Interpolated,
        _ => return Err(PyValueError::new_err(format!("unknown threshold `{which}`"))),
    };
    fraction(py, magnitude::theorem_exponents(d, t).map_err(err)?)
}

/// `(q exponent, |E| exponent)` of a restriction bound.
#[pyfunction]
#[pyo3(signature = (d, k, which = "extension"))]
fn restriction_exponents<'py>(
    py: Python<'py>,
    d: i64,
    k: i64,
    which: &str,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let bound = match which {
        "extension" => RestrictionBound::Extension,
        "interpolated" => RestrictionBound::Interpolated,
        _ => return Err(PyValueError::new_err(format!("unknown bound `{which}`"))),
    };
    let (a, b) = restriction::restriction_exponents(d, k, bound).map_err(err)?;
    Ok((fraction(py, a)?, fraction(py, b)?))
}

/// `(theta, exponent identity holds)` for even `d >= 8`.
#[pyfunction]
fn holder_theta(py: Python<'_>, d: i64) -> PyResult<(Bound<'_, PyAny>, bool)> {
    let (theta, holds) = restriction::holder_theta(d).map_err(err)?;
    Ok((fraction(py, theta)?, holds))
}

/// `E = F_p^d` inside `F_{p^2}^d`: returns `(|E|, |Delta_k(E)|)`.
#[pyfunction]
fn sharpness(py: Python<'_>, p: u32, d: usize, k: u32) -> PyResult<(usize, usize)> {
    py.detach(|| {
        let space = Space::new(make_field(p, 2)?, d)?;
        let set = build_set_str(&space, &format!("subfield:p={p},s=2,d={d}"))?;
        let report = magnitude::delta_report(&space, &set, k)?;
        Ok((set.len(), report.cardinality))
    })
    .map_err(err)
}

/// Runs a TOML experiment configuration; returns `(csv, exit_code)`.
#[pyfunction]
fn run_config(py: Python<'_>, toml: &str) -> PyResult<(String, i32)> {
    let config = ExperimentConfig::from_toml(toml).map_err(|e| FqharmError::new_err(e.to_string()))?;
    let report = py
        .detach(|| fqharm_cli::run(&config))
        .map_err(|e| FqharmError::new_err(e.to_string()))?;
    Ok((report.to_csv(), report.exit_code()))
}

/// The acceptance-suite configuration as TOML.
#[pyfunction]
fn acceptance_config() -> String {
    ExperimentConfig::acceptance().to_toml()
}

#[pymodule]
#[pyo3(name = "fqharm")]
fn fqharm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FqharmError", m.py().get_type::<FqharmError>())?;
    m.add("DEFAULT_TOLERANCE", DEFAULT_TOLERANCE)?;
    m.add_class::<PyField>()?;
    m.add_class::<PySpace>()?;
    m.add_class::<PyPointSet>()?;
    m.add_function(wrap_pyfunction!(theorem_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(restriction_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(holder_theta, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance_config, m)?)?;
    Ok(())
}
