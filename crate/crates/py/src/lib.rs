use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use sislab::fourier::{classify_decay, decay_sequences, omegas, phi_hat_derivs};
use sislab::generation::{analytic_limit_audit, construct_schedule_with_offset};
use sislab::io as sio;
use sislab::shift::{is_invariant, minimal_invariant_subspace, BlockShiftOperator, DVector};
use sislab::{
    basic_limit, check_zero_conditions, h_lambda_basis, lagrange_bound, nabla_power, run,
    verify_generation, HBasisOptions, Interval, LaurentPolynomial, MaskSchedule,
    NormalizationConvention, SampledFunction, ShiftableFunction, Subspace,
};

create_exception!(sislab, SislabError, PyException);

fn err(e: sislab::Error) -> PyErr {
    SislabError::new_err(e.to_string())
}

fn from_json<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = sio::to_json_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn samples_out(s: &SampledFunction) -> (Vec<f64>, Vec<Complex64>) {
    s.points().unzip()
}

/// Refinement mask with coefficients summing to 2.
#[pyclass(name = "Mask", frozen, from_py_object)]
#[derive(Clone)]
struct PyMask {
    inner: sislab::Mask,
}

#[pymethods]
impl PyMask {
    #[new]
    #[pyo3(signature = (coeffs, lo = 0, normalization = "sum2"))]
    fn new(coeffs: Vec<Complex64>, lo: i64, normalization: &str) -> PyResult<Self> {
        let conv = match normalization {
            "sum2" => NormalizationConvention::SubdivisionSum2,
            "unit" => NormalizationConvention::FourierUnit,
            other => return Err(SislabError::new_err(format!("unknown normalization {other:?}"))),
        };
        let f = conv.factor_to(NormalizationConvention::SubdivisionSum2);
        let poly = LaurentPolynomial::new(coeffs.into_iter().map(|c| c * f).collect(), lo);
        Ok(Self {
            inner: sislab::Mask::new(poly).map_err(err)?,
        })
    }

    #[staticmethod]
    fn hat() -> Self {
        Self {
            inner: sislab::Mask::hat(),
        }
    }

    #[staticmethod]
    fn bspline(order: u32) -> Self {
        Self {
            inner: sislab::Mask::bspline(order),
        }
    }

    #[getter]
    fn lo(&self) -> i64 {
        self.inner.symbol().lo()
    }

    #[getter]
    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.symbol().coeffs().to_vec()
    }

    /// Trigonometric symbol with value 1 at y = 0.
    fn eval(&self, y: Complex64) -> Complex64 {
        self.inner.fourier_view().eval_trig(y)
    }

    fn __repr__(&self) -> String {
        format!("Mask({})", self.inner.symbol())
    }
}

/// One mask per subdivision level.
#[pyclass(name = "Schedule", frozen, from_py_object)]
#[derive(Clone)]
struct PySchedule {
    inner: MaskSchedule,
}

#[pymethods]
impl PySchedule {
    #[new]
    fn new(head: Vec<PyMask>) -> PyResult<Self> {
        let head = head.into_iter().map(|m| m.inner).collect();
        Ok(Self {
            inner: MaskSchedule::new(head, sislab::TailRule::RepeatLast).map_err(err)?,
        })
    }

    #[staticmethod]
    fn stationary(mask: PyMask) -> Self {
        Self {
            inner: MaskSchedule::stationary(mask.inner),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: sio::parse_schedule(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        sio::schedule_to_json(&self.inner).map_err(err)
    }

    fn mask(&self, level: usize) -> PyResult<PyMask> {
        Ok(PyMask {
            inner: self.inner.mask(level).map_err(err)?,
        })
    }

    #[getter]
    fn stationary_tail(&self) -> bool {
        self.inner.is_stationary()
    }

    fn support_bound(&self) -> PyResult<(f64, f64)> {
        let s = sislab::support_bound(&self.inner).map_err(err)?;
        Ok((s.lo, s.hi))
    }
}

/// Span of t^a e^{lambda t}, 0 <= a <= k, over the spectrum entries (lambda, k).
#[pyclass(name = "ExponentialSpace", frozen, from_py_object)]
#[derive(Clone)]
struct PySpace {
    inner: sislab::ExponentialSpace,
}

#[pymethods]
impl PySpace {
    #[new]
    fn new(spectrum: Vec<(Complex64, u32)>) -> PyResult<Self> {
        Ok(Self {
            inner: sislab::ExponentialSpace::new(spectrum).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn spectrum(&self) -> Vec<(Complex64, u32)> {
        self.inner.spectrum().to_vec()
    }

    fn without_one_factor(&self, idx: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.without_one_factor(idx).map_err(err)?,
        })
    }
}

#[pyfunction(name = "basic_limit")]
fn py_basic_limit(schedule: &PySchedule, r: u32) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    Ok(samples_out(&basic_limit(&schedule.inner, r).map_err(err)?))
}

/// Runs `r` levels from integer samples `values` starting at index `lo`.
#[pyfunction(name = "run")]
fn py_run(
    schedule: &PySchedule,
    lo: i64,
    values: Vec<Complex64>,
    r: u32,
) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let c1 = SampledFunction::new(0, lo, values);
    Ok(samples_out(&run(&schedule.inner, &c1, r).map_err(err)?))
}

#[pyfunction(name = "phi_hat")]
#[pyo3(signature = (schedule, y, order = 0, depth = None))]
fn py_phi_hat(
    schedule: &PySchedule,
    y: Complex64,
    order: usize,
    depth: Option<usize>,
) -> PyResult<(Vec<Complex64>, Vec<f64>)> {
    let d = phi_hat_derivs(&schedule.inner, y, order, depth).map_err(err)?;
    Ok((d.values, d.errors))
}

#[pyfunction(name = "decay")]
#[pyo3(signature = (schedule, lam, order = 0, range = 32, depth = None))]
fn py_decay<'py>(
    py: Python<'py>,
    schedule: &PySchedule,
    lam: Complex64,
    order: usize,
    range: i64,
    depth: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let seqs = decay_sequences(&schedule.inner, lam, order, range, depth).map_err(err)?;
    seqs.iter()
        .map(|s| {
            let v = classify_decay(s).ok();
            from_json(py, &sio::decay_report_json(s, v.as_ref()))
        })
        .collect()
}

/// Fourier coefficients of the periodic factors, as `(lo, coeffs)` per order.
#[pyfunction(name = "omegas")]
#[pyo3(signature = (schedule, lam, order = 0, range = 32, depth = None))]
fn py_omegas(
    schedule: &PySchedule,
    lam: Complex64,
    order: usize,
    range: i64,
    depth: Option<usize>,
) -> PyResult<Vec<(i64, Vec<Complex64>)>> {
    let ws = omegas(&schedule.inner, lam, order, range, depth).map_err(err)?;
    Ok(ws.into_iter().map(|w| (w.lo, w.coeffs)).collect())
}

#[pyfunction(name = "h_lambda_basis")]
#[pyo3(signature = (schedule, lam, order, t0, t1, r, tol = 1e-8))]
#[allow(clippy::too_many_arguments)]
fn py_h_lambda_basis<'py>(
    py: Python<'py>,
    schedule: &PySchedule,
    lam: Complex64,
    order: usize,
    t0: f64,
    t1: f64,
    r: u32,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = HBasisOptions {
        tol,
        ..HBasisOptions::default()
    };
    let b = h_lambda_basis(&schedule.inner, lam, order, Interval::new(t0, t1), r, opts)
        .map_err(err)?;
    let out = from_json(py, &sio::hbasis_json(lam, &b, tol))?;
    let functions: Vec<_> = b.functions.iter().map(samples_out).collect();
    out.set_item("functions", functions)?;
    Ok(out)
}

#[pyfunction(name = "construct_schedule")]
#[pyo3(signature = (space, head = 1, level_offset = 0))]
fn py_construct_schedule(space: &PySpace, head: usize, level_offset: i32) -> PyResult<PySchedule> {
    Ok(PySchedule {
        inner: construct_schedule_with_offset(&space.inner, head, level_offset).map_err(err)?,
    })
}

#[pyfunction(name = "check_zero_conditions")]
#[pyo3(signature = (schedule, lam, order, levels, tol = 1e-10, level_offset = 0))]
fn py_check_zero_conditions<'py>(
    py: Python<'py>,
    schedule: &PySchedule,
    lam: Complex64,
    order: u32,
    levels: usize,
    tol: f64,
    level_offset: i32,
) -> PyResult<Bound<'py, PyAny>> {
    let t = check_zero_conditions(&schedule.inner, lam, order, 1..=levels, tol, level_offset)
        .map_err(err)?;
    from_json(py, &sio::zero_table_json(&t, tol))
}

#[pyfunction(name = "verify_generation")]
#[pyo3(signature = (schedule, space, r = 8, t0 = -2.0, t1 = 2.0, tol = 1e-6))]
fn py_verify_generation<'py>(
    py: Python<'py>,
    schedule: &PySchedule,
    space: &PySpace,
    r: u32,
    t0: f64,
    t1: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = verify_generation(&schedule.inner, &space.inner, r, Interval::new(t0, t1), tol)
        .map_err(err)?;
    from_json(py, &sio::generation_json(&rep, &space.inner, tol))
}

#[pyfunction(name = "analytic_limit_audit")]
#[pyo3(signature = (schedule, lambdas, order = 1, range = 32, depth = None))]
fn py_audit<'py>(
    py: Python<'py>,
    schedule: &PySchedule,
    lambdas: Vec<Complex64>,
    order: usize,
    range: i64,
    depth: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = analytic_limit_audit(&schedule.inner, &lambdas, order, range, depth).map_err(err)?;
    from_json(py, &sio::audit_json(&rep))
}

/// `∇_λ^n` on samples at dyadic level `level` starting at index `lo`.
#[pyfunction(name = "nabla")]
#[pyo3(signature = (lam, level, lo, values, n = 1))]
fn py_nabla(
    lam: Complex64,
    level: u32,
    lo: i64,
    values: Vec<Complex64>,
    n: usize,
) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let f = ShiftableFunction::new(SampledFunction::new(level, lo, values));
    let g = nabla_power(lam, n, &f).map_err(err)?;
    Ok(samples_out(g.samples()))
}

#[pyfunction(name = "is_invariant")]
fn py_is_invariant(basis: Vec<Vec<f64>>, order: usize) -> PyResult<bool> {
    let op = BlockShiftOperator::build(order);
    let n = Subspace::from_vectors(op.dim(), &basis).map_err(err)?;
    is_invariant(&n, &op).map_err(err)
}

#[pyfunction(name = "minimal_invariant_subspace")]
fn py_minimal_invariant_subspace(v: Vec<f64>, order: usize) -> PyResult<Vec<Vec<f64>>> {
    let op = BlockShiftOperator::build(order);
    let s = minimal_invariant_subspace(&op, &DVector::from_vec(v)).map_err(err)?;
    Ok(s.vectors())
}

#[pyfunction(name = "lagrange_bound")]
fn py_lagrange_bound<'py>(
    py: Python<'py>,
    coeffs: Vec<Complex64>,
    points: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let b = lagrange_bound(&LaurentPolynomial::new(coeffs, 0), &points).map_err(err)?;
    from_json(py, &sio::lagrange_json(&b))
}

#[pymodule(name = "sislab")]
pub fn sislab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SislabError", m.py().get_type::<SislabError>())?;
    m.add_class::<PyMask>()?;
    m.add_class::<PySchedule>()?;
    m.add_class::<PySpace>()?;
    m.add_function(wrap_pyfunction!(py_basic_limit, m)?)?;
    m.add_function(wrap_pyfunction!(py_run, m)?)?;
    m.add_function(wrap_pyfunction!(py_phi_hat, m)?)?;
    m.add_function(wrap_pyfunction!(py_decay, m)?)?;
    m.add_function(wrap_pyfunction!(py_omegas, m)?)?;
    m.add_function(wrap_pyfunction!(py_h_lambda_basis, m)?)?;
    m.add_function(wrap_pyfunction!(py_construct_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_zero_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(py_verify_generation, m)?)?;
    m.add_function(wrap_pyfunction!(py_audit, m)?)?;
    m.add_function(wrap_pyfunction!(py_nabla, m)?)?;
    m.add_function(wrap_pyfunction!(py_is_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(py_minimal_invariant_subspace, m)?)?;
    m.add_function(wrap_pyfunction!(py_lagrange_bound, m)?)?;
    Ok(())
}
