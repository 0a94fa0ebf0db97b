//! Python bindings: `import pytriadne`.
//!
//! Library errors surface as Python exceptions: bad arguments as
//! `ValueError`, exhausted budgets as `ResourceError`, unmet quadrature
//! targets as `ToleranceError` and failed hypotheses as `HypothesisError`.
//! Verification reports come back as plain dicts.

use std::collections::HashMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use triadne::oscillatory::QuadratureSpec;
use triadne::{Error, VerificationReport, C64};

create_exception!(pytriadne, ResourceError, PyRuntimeError);
create_exception!(pytriadne, ToleranceError, PyRuntimeError);
create_exception!(pytriadne, HypothesisError, PyValueError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Argument(_) => PyValueError::new_err(msg),
        Error::Resource(_) => ResourceError::new_err(msg),
        Error::Tolerance { .. } => ToleranceError::new_err(msg),
        Error::Hypothesis(_) => HypothesisError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for triadne::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn report<'py>(py: Python<'py>, r: &VerificationReport) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (r.to_json(),))
}

fn triple(v: Vec<f64>, what: &str) -> PyResult<[f64; 3]> {
    v.try_into().map_err(|_| PyValueError::new_err(format!("{what} must have three components")))
}

/// A finitely supported complex function on Z^d.
#[pyclass(name = "GridFunction", module = "pytriadne", frozen)]
struct PyGridFunction(triadne::grid::GridFunction);

#[pymethods]
impl PyGridFunction {
    /// Builds a function from a mapping {coords: value}.
    #[new]
    #[pyo3(signature = (d, entries = None))]
    fn new(d: usize, entries: Option<HashMap<Vec<i64>, C64>>) -> PyResult<Self> {
        let mut items: Vec<(Vec<i64>, C64)> = entries.unwrap_or_default().into_iter().collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self(triadne::grid::GridFunction::from_entries(d, items).py()?))
    }

    #[staticmethod]
    fn delta(at: Vec<i64>) -> Self {
        Self(triadne::grid::GridFunction::delta(&at))
    }

    #[staticmethod]
    fn box_indicator(lo: Vec<i64>, hi: Vec<i64>) -> PyResult<Self> {
        if lo.len() != hi.len() {
            return Err(PyValueError::new_err("corners must have the same dimension"));
        }
        Ok(Self(triadne::grid::GridFunction::box_indicator(&lo, &hi)))
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self(triadne::grid::GridFunction::from_json(s).py()?))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, x: Vec<i64>) -> PyResult<C64> {
        if x.len() != self.0.dim() {
            return Err(PyValueError::new_err("point has the wrong dimension"));
        }
        Ok(self.0.get(&x))
    }

    /// The support as a dict {coords tuple: complex}.
    fn entries<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for (k, v) in self.0.iter() {
            out.set_item(pyo3::types::PyTuple::new(py, k)?, *v)?;
        }
        Ok(out)
    }

    /// ℓ^p norm; pass float("inf") for the sup norm.
    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        self.0.lp_norm(p).py()
    }

    fn scale(&self, c: C64) -> Self {
        Self(self.0.scale(c))
    }

    fn translate(&self, w: Vec<i64>) -> PyResult<Self> {
        if w.len() != self.0.dim() {
            return Err(PyValueError::new_err("shift has the wrong dimension"));
        }
        Ok(Self(self.0.translate(&w)))
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self(self.0.add(&other.0).py()?))
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self(self.0.sub(&other.0).py()?))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("GridFunction(d={}, support={})", self.0.dim(), self.0.len())
    }
}

/// The main-term multiplier M̂_λ, with its Gauss-sum tables built once.
#[pyclass(name = "MainTermMultiplier", module = "pytriadne", frozen)]
struct PyMainTermMultiplier(triadne::operators::MainTermMultiplier);

#[pymethods]
impl PyMainTermMultiplier {
    #[new]
    #[pyo3(signature = (lambda_, d, q_max = 32))]
    fn new(lambda_: u64, d: usize, q_max: u64) -> PyResult<Self> {
        Ok(Self(triadne::operators::MainTermMultiplier::new(lambda_, d, q_max).py()?))
    }

    fn __call__(&self, xi: Vec<f64>) -> PyResult<C64> {
        self.0.value(&xi).py()
    }

    fn term(&self, q: u64, xi: Vec<f64>) -> PyResult<C64> {
        if q == 0 || q > self.0.q_max || xi.len() != self.0.d {
            return Err(PyValueError::new_err("q or ξ out of range"));
        }
        Ok(self.0.term(q, &xi))
    }

    #[getter]
    fn c_d(&self) -> f64 {
        self.0.c_d
    }
}

/// #V_λ: ordered pairs (u, v) with |u|² = |v|² = 2u·v = λ.
#[pyfunction]
#[pyo3(signature = (lambda_, d))]
fn count_triangle_pairs(py: Python<'_>, lambda_: u64, d: usize) -> PyResult<u128> {
    py.detach(|| triadne::lattice::count_triangle_pairs(lambda_, d, false)).py().map(|s| s.count)
}

/// #V_λ by the independent coordinate dynamic program.
#[pyfunction]
#[pyo3(signature = (lambda_, d))]
fn count_triangle_pairs_dp(py: Python<'_>, lambda_: u64, d: usize) -> u128 {
    py.detach(|| triadne::lattice::count_triangle_pairs_dp(lambda_, d))
}

/// The pairs of V_λ in lexicographic order.
#[pyfunction]
#[pyo3(signature = (lambda_, d))]
fn triangle_pairs(py: Python<'_>, lambda_: u64, d: usize) -> PyResult<Vec<(Vec<i64>, Vec<i64>)>> {
    let set = py.detach(|| triadne::lattice::count_triangle_pairs(lambda_, d, true)).py()?;
    Ok(set.pairs.unwrap_or_default())
}

/// Lattice points on the sphere |x|² = λ.
#[pyfunction]
#[pyo3(signature = (lambda_, d))]
fn sum_of_squares_reps(lambda_: u64, d: usize) -> PyResult<Vec<Vec<i64>>> {
    triadne::lattice::sum_of_squares_reps(lambda_, d).py()
}

#[pyfunction]
fn triangles_in_box(py: Python<'_>, n: u64, d: usize) -> PyResult<u128> {
    py.detach(|| triadne::lattice::triangles_in_box(n, d)).py()
}

/// g(q; a, m, n).
#[pyfunction]
fn gauss_g(q: u64, a: [i64; 3], m: i64, n: i64) -> PyResult<C64> {
    triadne::gauss::gauss_g_at(q, a, m, n).py()
}

/// G_λ(q; m, n).
#[pyfunction]
#[pyo3(signature = (lambda_, q, m, n))]
fn big_g(py: Python<'_>, lambda_: u64, q: u64, m: Vec<i64>, n: Vec<i64>) -> PyResult<C64> {
    py.detach(|| triadne::gauss::big_g(lambda_, q, &m, &n)).py()
}

/// ν(q; a): solutions of a₁r² + 2a₂rs + a₃s² ≡ 0 mod q.
#[pyfunction]
fn congruence_count(q: u64, a: [i64; 3]) -> u64 {
    triadne::gauss::congruence_count_nu(q, a)
}

#[pyfunction]
fn weight_w(q: u64, a: [i64; 3]) -> f64 {
    triadne::gauss::weight_w(q, a)
}

#[pyfunction]
#[pyo3(signature = (q, sample_budget = 1_000_000, seed = 0))]
fn verify_gauss_bound<'py>(py: Python<'py>, q: u64, sample_budget: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| triadne::gauss::verify_gauss_bound(q, sample_budget, seed));
    report(py, &r)
}

/// S_N(α; ξ, η).
#[pyfunction]
fn weyl_sum(n: u64, alpha: Vec<f64>, xi: f64, eta: f64) -> PyResult<C64> {
    Ok(triadne::arcs::weyl_sum_s(n, triple(alpha, "alpha")?, xi, eta))
}

/// (q, a) with q ≤ p and |qα − a| small, by continued fractions.
#[pyfunction]
fn dirichlet_approx(alpha: f64, n: u64, p: u64) -> PyResult<(u64, u64)> {
    triadne::arcs::dirichlet_approx(alpha, n, p).py()
}

#[pyfunction]
#[pyo3(signature = (n, p, samples = 10_000, seed = 0, eta_zero = false))]
fn minor_arc_scan<'py>(py: Python<'py>, n: u64, p: u64, samples: usize, seed: u64, eta_zero: bool) -> PyResult<Bound<'py, PyAny>> {
    let r = py
        .detach(|| triadne::arcs::minor_arc_scan(n, p, samples, seed, eta_zero, triadne::arcs::ArcSystem::M))
        .py()?;
    report(py, &r)
}

/// V_N(β; ξ, η), the oscillatory integral attached to a major arc.
#[pyfunction]
fn fresnel_v(n: f64, beta: Vec<f64>, xi: f64, eta: f64) -> PyResult<C64> {
    triadne::oscillatory::fresnel_v(n, triple(beta, "beta")?, xi, eta, &QuadratureSpec::default()).py()
}

/// c_d in the sphere-transform identity.
#[pyfunction]
fn c_d(d: u32) -> PyResult<f64> {
    triadne::oscillatory::compute_c_d(d).py()
}

/// Fourier transform of the surface measure on S^{d-1}.
#[pyfunction]
fn sphere_ft(xi: Vec<f64>) -> PyResult<f64> {
    triadne::oscillatory::sphere_ft(xi.len() as u32, &xi).py()
}

/// I_λ(ξ, η) with its extrapolation error estimate.
#[pyfunction]
#[pyo3(signature = (lambda_, xi, eta = None))]
fn singular_integral(py: Python<'_>, lambda_: f64, xi: Vec<f64>, eta: Option<Vec<f64>>) -> PyResult<(C64, f64)> {
    let eta = eta.unwrap_or_else(|| vec![0.0; xi.len()]);
    let r = py
        .detach(|| triadne::oscillatory::singular_integral_i(lambda_, &xi, &eta, &QuadratureSpec::default()))
        .py()?;
    Ok((r.value, r.error_estimate))
}

/// q^{3-2d}·#{solutions mod q}, the normalized local density.
#[pyfunction]
#[pyo3(signature = (p, t, lambda_, d))]
fn local_density(py: Python<'_>, p: u64, t: u32, lambda_: u64, d: u32) -> PyResult<f64> {
    py.detach(|| triadne::singular::normalized_density(p, t, lambda_, d)).py()
}

/// Truncated singular series: (value, tail bound).
#[pyfunction]
#[pyo3(signature = (lambda_, d = 7, q_max = 32))]
fn singular_series(py: Python<'_>, lambda_: u64, d: u32, q_max: u64) -> PyResult<(f64, f64)> {
    let s = py.detach(|| triadne::singular::singular_series_sigma(lambda_, d, q_max)).py()?;
    Ok((s.sigma, s.tail_bound))
}

/// Singular series as a product of local factors over p ≤ p_max.
#[pyfunction]
#[pyo3(signature = (lambda_, d = 7, p_max = 97, tol = 1e-3))]
fn euler_product(py: Python<'_>, lambda_: u64, d: u32, p_max: u64, tol: f64) -> PyResult<f64> {
    py.detach(|| triadne::singular::singular_series_euler(lambda_, d, p_max, tol)).py().map(|e| e.value)
}

/// T̂_λ(ξ, η).
#[pyfunction]
#[pyo3(signature = (lambda_, xi, eta = None))]
fn multiplier_t_hat(py: Python<'_>, lambda_: u64, xi: Vec<f64>, eta: Option<Vec<f64>>) -> PyResult<C64> {
    let eta = eta.unwrap_or_else(|| vec![0.0; xi.len()]);
    py.detach(|| triadne::operators::multiplier_t_hat(lambda_, &xi, &eta)).py()
}

/// T_λ(f, g).
#[pyfunction]
#[pyo3(signature = (lambda_, f, g))]
fn triangle_average(py: Python<'_>, lambda_: u64, f: &PyGridFunction, g: &PyGridFunction) -> PyResult<PyGridFunction> {
    py.detach(|| triadne::operators::triangle_average_t(lambda_, &f.0, &g.0)).py().map(PyGridFunction)
}

/// T_λ f = T_λ(f, 1).
#[pyfunction]
#[pyo3(signature = (lambda_, f))]
fn linearized(py: Python<'_>, lambda_: u64, f: &PyGridFunction) -> PyResult<PyGridFunction> {
    py.detach(|| triadne::operators::linearized_t(lambda_, &f.0)).py().map(PyGridFunction)
}

/// sup over even λ in [Λ/2, Λ) of |T_λ(f, g)|, or of |T_λ f| without g.
#[pyfunction]
#[pyo3(signature = (big_lambda, f, g = None))]
fn dyadic_maximal(py: Python<'_>, big_lambda: u64, f: &PyGridFunction, g: Option<&PyGridFunction>) -> PyResult<PyGridFunction> {
    py.detach(|| triadne::operators::dyadic_maximal(big_lambda, &f.0, g.map(|g| &g.0)))
        .py()
        .map(PyGridFunction)
}

/// J_{s,2,2}(N).
#[pyfunction]
fn vinogradov_count(s: u32, n: u32) -> PyResult<u128> {
    triadne::moments::vinogradov_count(s, n).py()
}

/// T(N) = ∫|S_N|⁶.
#[pyfunction]
fn sixth_moment_count(n: u32) -> PyResult<u128> {
    triadne::moments::sixth_moment_count(n).py()
}

#[pymodule]
fn pytriadne(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ResourceError", py.get_type::<ResourceError>())?;
    m.add("ToleranceError", py.get_type::<ToleranceError>())?;
    m.add("HypothesisError", py.get_type::<HypothesisError>())?;
    m.add_class::<PyGridFunction>()?;
    m.add_class::<PyMainTermMultiplier>()?;
    m.add_function(wrap_pyfunction!(count_triangle_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(count_triangle_pairs_dp, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(sum_of_squares_reps, m)?)?;
    m.add_function(wrap_pyfunction!(triangles_in_box, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_g, m)?)?;
    m.add_function(wrap_pyfunction!(big_g, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_count, m)?)?;
    m.add_function(wrap_pyfunction!(weight_w, m)?)?;
    m.add_function(wrap_pyfunction!(verify_gauss_bound, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_sum, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_approx, m)?)?;
    m.add_function(wrap_pyfunction!(minor_arc_scan, m)?)?;
    m.add_function(wrap_pyfunction!(fresnel_v, m)?)?;
    m.add_function(wrap_pyfunction!(c_d, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_ft, m)?)?;
    m.add_function(wrap_pyfunction!(singular_integral, m)?)?;
    m.add_function(wrap_pyfunction!(local_density, m)?)?;
    m.add_function(wrap_pyfunction!(singular_series, m)?)?;
    m.add_function(wrap_pyfunction!(euler_product, m)?)?;
    m.add_function(wrap_pyfunction!(multiplier_t_hat, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_average, m)?)?;
    m.add_function(wrap_pyfunction!(linearized, m)?)?;
    m.add_function(wrap_pyfunction!(dyadic_maximal, m)?)?;
    m.add_function(wrap_pyfunction!(vinogradov_count, m)?)?;
    m.add_function(wrap_pyfunction!(sixth_moment_count, m)?)?;
    Ok(())
}
