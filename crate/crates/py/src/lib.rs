//! Python bindings: radial and planar solves, the moduli metric and the
//! asymptotic checks. Grids come back as flat lists (row-major for 2D).

use hitchin_core::asymptotics;
use hitchin_core::elliptic::{self, solve_psi};
use hitchin_core::geometry::{self, ScanConfig, Surface};
use hitchin_core::grid::GridSpec;
use hitchin_core::model::{self, factorize};
use hitchin_core::poly::ComplexPoly;
use hitchin_core::radial;
use hitchin_core::{Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

/// Numerical failures raise RuntimeError, bad input ValueError.
fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn surface(sheet: &str) -> PyResult<Surface> {
    sheet.parse().map_err(to_py)
}

#[pyclass(name = "RadialProfile", frozen)]
pub struct PyRadialProfile {
    inner: radial::RadialProfile,
}

#[pymethods]
impl PyRadialProfile {
    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn r(&self) -> Vec<f64> {
        self.inner.r.clone()
    }
    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.psi.clone()
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual_sup
    }
    #[getter]
    fn newton_iterations(&self) -> usize {
        self.inner.newton_iters
    }
    fn dpsi_dr(&self) -> Vec<f64> {
        self.inner.dpsi_dr()
    }
    fn abs_f(&self) -> Vec<f64> {
        self.inner.abs_f()
    }
    /// ∫|F| d²x.
    fn flux(&self) -> PyResult<f64> {
        radial::flux(&self.inner).map_err(to_py)
    }
    /// (sup residual, |h(t_max) − 1|) of the transformed n = 1 profile.
    fn painleve(&self) -> PyResult<(f64, f64)> {
        let p = radial::painleve_residual(&self.inner).map_err(to_py)?;
        Ok((p.residual_sup, p.tail_error))
    }
    fn __repr__(&self) -> String {
        format!("RadialProfile(n={}, B={}, points={})", self.inner.n, self.inner.b, self.inner.r.len())
    }
}

#[pyfunction]
#[pyo3(signature = (n, b = 0.0, r_max = 20.0, points = 2001))]
fn solve_radial(n: u32, b: f64, r_max: f64, points: usize) -> PyResult<PyRadialProfile> {
    let inner = radial::solve_radial(n, b, r_max, points).map_err(to_py)?;
    Ok(PyRadialProfile { inner })
}

/// [(B, flux/π)] for the n = 2 family; `b_values` must start at 0 and increase.
#[pyfunction]
#[pyo3(signature = (b_values, r_max = 20.0, points = 2001))]
fn scan_b(py: Python<'_>, b_values: Vec<f64>, r_max: f64, points: usize) -> PyResult<Vec<(f64, f64)>> {
    let scan = py
        .allow_threads(|| radial::scan_b(&b_values, r_max, points, true))
        .map_err(to_py)?;
    Ok(scan.into_iter().map(|p| (p.b, p.flux_over_pi)).collect())
}

#[pyclass(name = "Field2D", frozen)]
pub struct PyField2D {
    inner: elliptic::Field2D,
}

#[pymethods]
impl PyField2D {
    #[getter]
    fn points(&self) -> usize {
        self.inner.spec.points()
    }
    #[getter]
    fn half_width(&self) -> f64 {
        self.inner.spec.half_width()
    }
    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.psi.clone()
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual_sup
    }
    #[getter]
    fn newton_iterations(&self) -> usize {
        self.inner.newton_iters
    }
    fn abs_f(&self) -> Vec<f64> {
        self.inner.abs_f()
    }
    fn flux(&self) -> f64 {
        self.inner.flux()
    }
    fn signed_flux(&self) -> f64 {
        self.inner.signed_flux()
    }
    fn __repr__(&self) -> String {
        format!(
            "Field2D(points={}, half_width={})",
            self.inner.spec.points(),
            self.inner.spec.half_width()
        )
    }
}

fn grid_for(roots: &[C64], points: usize, half_width: Option<f64>) -> PyResult<GridSpec> {
    match half_width {
        Some(l) => {
            let spec = GridSpec::new(l, points).map_err(to_py)?;
            spec.check_margin(roots).map_err(to_py)?;
            Ok(spec)
        }
        None => GridSpec::for_roots(roots, points).map_err(to_py),
    }
}

/// Planar solution at coordinate `coord` (K on "plus", W on "minus") of the a-family.
#[pyfunction]
#[pyo3(signature = (sheet, a, coord, points = 513, half_width = None))]
fn solve_2d(
    py: Python<'_>,
    sheet: &str,
    a: f64,
    coord: C64,
    points: usize,
    half_width: Option<f64>,
) -> PyResult<PyField2D> {
    let (cubic, sh) = surface(sheet)?.cubic_and_sheet(a, coord).map_err(to_py)?;
    let fac = factorize(&cubic, sh).map_err(to_py)?;
    let spec = grid_for(&cubic.roots(), points, half_width)?;
    let inner = py.allow_threads(|| solve_psi(&fac, &spec, None)).map_err(to_py)?;
    Ok(PyField2D { inner })
}

#[pyclass(name = "MetricSample", frozen, get_all)]
#[derive(Clone)]
pub struct PyMetricSample {
    coordinate: C64,
    omega: f64,
    curvature: f64,
    iso_spread: f64,
    resid_gauge: f64,
    resid_holo: f64,
    tail: f64,
}

impl From<&geometry::MetricSample> for PyMetricSample {
    fn from(s: &geometry::MetricSample) -> Self {
        PyMetricSample {
            coordinate: s.coordinate,
            omega: s.omega,
            curvature: s.curvature,
            iso_spread: s.iso_spread,
            resid_gauge: s.resid_gauge,
            resid_holo: s.resid_holo,
            tail: s.tail,
        }
    }
}

#[pymethods]
impl PyMetricSample {
    fn __repr__(&self) -> String {
        format!(
            "MetricSample(coordinate={}, omega={}, curvature={})",
            self.coordinate, self.omega, self.curvature
        )
    }
}

/// Conformal factor Ω of the induced metric at one coordinate.
#[pyfunction]
#[pyo3(signature = (a, coord, sheet = "plus", delta = 0.02, points = 513, half_width = None))]
fn omega(
    py: Python<'_>,
    a: f64,
    coord: C64,
    sheet: &str,
    delta: f64,
    points: usize,
    half_width: Option<f64>,
) -> PyResult<PyMetricSample> {
    let surf = surface(sheet)?;
    let spec = match half_width {
        Some(l) => Some(GridSpec::new(l, points).map_err(to_py)?),
        None => Some(geometry::scan_spec(a, surf, &[coord], delta, points).map_err(to_py)?),
    };
    let s = py
        .allow_threads(|| geometry::omega_at(a, coord, surf, delta, spec))
        .map_err(to_py)?;
    Ok((&s).into())
}

#[pyclass(name = "SurfaceScan", frozen)]
pub struct PySurfaceScan {
    inner: geometry::SurfaceScan,
}

#[pymethods]
impl PySurfaceScan {
    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }
    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }
    /// Row-major samples; sample (i, j) sits at (−R + i s) + i(−R + j s).
    #[getter]
    fn samples(&self) -> Vec<PyMetricSample> {
        self.inner.samples.iter().map(Into::into).collect()
    }
    #[getter]
    fn failures(&self) -> Vec<(C64, String)> {
        self.inner.failures.clone()
    }
    fn peaks(&self) -> Vec<(C64, f64)> {
        self.inner.peaks().iter().map(|e| (e.coordinate, e.curvature)).collect()
    }
    fn troughs(&self) -> Vec<(C64, f64)> {
        self.inner.troughs().iter().map(|e| (e.coordinate, e.curvature)).collect()
    }
    fn curvature_at(&self, z: C64) -> Option<f64> {
        self.inner.curvature_at(z)
    }
    fn max_resid_gauge(&self) -> f64 {
        self.inner.max_resid_gauge()
    }
}

#[pyfunction]
#[pyo3(signature = (sheet, a, radius = 3.0, steps = 21, delta = 0.02, points = 513, half_width = None, jobs = 1))]
#[allow(clippy::too_many_arguments)]
fn surface_scan(
    py: Python<'_>,
    sheet: &str,
    a: f64,
    radius: f64,
    steps: usize,
    delta: f64,
    points: usize,
    half_width: Option<f64>,
    jobs: usize,
) -> PyResult<PySurfaceScan> {
    let config = ScanConfig {
        a,
        surface: surface(sheet)?,
        radius,
        steps,
        delta,
        points,
        half_width,
        jobs,
    };
    let inner = py.allow_threads(|| geometry::surface_scan(&config)).map_err(to_py)?;
    Ok(PySurfaceScan { inner })
}

#[pyfunction]
fn constant_c() -> f64 {
    asymptotics::constant_c()
}

#[pyfunction]
fn constant_c_2d() -> f64 {
    asymptotics::constant_c_2d()
}

/// "converges" or "diverges".
#[pyfunction]
fn classify_pk(n: usize, k: usize) -> PyResult<String> {
    Ok(asymptotics::classify_pk(n, k).map_err(to_py)?.to_string())
}

#[pyfunction]
fn moduli_dimension(n: usize) -> PyResult<usize> {
    model::moduli_dimension(n).map_err(to_py)
}

/// (truncated norm, classification, fitted growth exponent) for H given by
/// its coefficients, highest degree first.
#[pyfunction]
#[pyo3(signature = (k, coeffs, r_cut = 200.0))]
fn norm_pk(k: usize, coeffs: Vec<C64>, r_cut: f64) -> PyResult<(f64, String, f64)> {
    let h = ComplexPoly::new(coeffs).map_err(to_py)?;
    let r = asymptotics::norm_pk(h.degree(), k, &h, r_cut).map_err(to_py)?;
    Ok((r.value, r.classification.to_string(), r.growth_exponent))
}

#[pymodule]
fn hitchin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRadialProfile>()?;
    m.add_class::<PyField2D>()?;
    m.add_class::<PyMetricSample>()?;
    m.add_class::<PySurfaceScan>()?;
    m.add_function(wrap_pyfunction!(solve_radial, m)?)?;
    m.add_function(wrap_pyfunction!(scan_b, m)?)?;
    m.add_function(wrap_pyfunction!(solve_2d, m)?)?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(surface_scan, m)?)?;
    m.add_function(wrap_pyfunction!(constant_c, m)?)?;
    m.add_function(wrap_pyfunction!(constant_c_2d, m)?)?;
    m.add_function(wrap_pyfunction!(classify_pk, m)?)?;
    m.add_function(wrap_pyfunction!(moduli_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(norm_pk, m)?)?;
    Ok(())
}
