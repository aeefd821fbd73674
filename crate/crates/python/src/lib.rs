//! Python module `codazzi`: catalog solitons, the warped example, scenario runs.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use codazzi_core::codazzi::{codazzi_deviation, max_codazzi_residual, SweepStats};
use codazzi_core::config::{parse_config, ScenarioConfig, SCENARIOS};
use codazzi_core::curvature::CurvatureBundle;
use codazzi_core::leaf::{mean_curvature_identity_residual, second_fundamental_form};
use codazzi_core::merton::{closed_form_christoffel, MertonExample, MertonParams};
use codazzi_core::report::{self, CheckRow, Format, VerificationReport};
use codazzi_core::soliton::{
    self, ricci_antisymmetry_residual, scalar_curvature_gradient_residual, soliton_codazzi_tensor,
    soliton_residual, verify_lemma, SolitonInstance,
};
use codazzi_core::{DiffScheme, GeomError, Point};

create_exception!(codazzi, CodazziError, PyValueError);

fn err(e: GeomError) -> PyErr {
    CodazziError::new_err(e.to_string())
}

fn point(coords: Vec<f64>) -> PyResult<Point> {
    Point::new(coords).map_err(err)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn stats(s: &SweepStats) -> BTreeMap<String, f64> {
    BTreeMap::from([("max".into(), s.max), ("mean".into(), s.mean), ("points".into(), s.count as f64)])
}

/// Finite-difference settings; `exact_jets=False` forces stencils everywhere.
#[pyclass(name = "Scheme", module = "codazzi", from_py_object)]
#[derive(Clone, Debug)]
pub struct PyScheme {
    pub inner: DiffScheme,
}

#[pymethods]
impl PyScheme {
    #[new]
    #[pyo3(signature = (h=1e-2, h3=2e-2, stencil_order=4, richardson_levels=1, exact_jets=true))]
    fn py_new(h: f64, h3: f64, stencil_order: u8, richardson_levels: u8, exact_jets: bool) -> PyResult<Self> {
        let inner = DiffScheme {
            step: h,
            step3: h3,
            stencil_order,
            richardson_levels,
            use_exact_jets: exact_jets,
            ..DiffScheme::default()
        };
        inner.validate().map_err(err)?;
        Ok(PyScheme { inner })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.step
    }

    #[getter]
    fn h3(&self) -> f64 {
        self.inner.step3
    }

    #[getter]
    fn exact_jets(&self) -> bool {
        self.inner.use_exact_jets
    }

    fn __repr__(&self) -> String {
        format!(
            "Scheme(h={}, h3={}, stencil_order={}, richardson_levels={}, exact_jets={})",
            self.inner.step,
            self.inner.step3,
            self.inner.stencil_order,
            self.inner.richardson_levels,
            if self.inner.use_exact_jets { "True" } else { "False" }
        )
    }
}

fn scheme_or_default(s: Option<PyScheme>) -> DiffScheme {
    s.map(|s| s.inner).unwrap_or_default()
}

/// A catalog gradient Ricci soliton in 3 dimensions.
#[pyclass(name = "Soliton", module = "codazzi", frozen)]
pub struct PySoliton {
    pub inner: SolitonInstance,
}

#[pymethods]
impl PySoliton {
    #[new]
    #[pyo3(signature = (name, potential_shift=0.0))]
    pub fn py_new(name: &str, potential_shift: f64) -> PyResult<Self> {
        let s = soliton::instance(name).map_err(err)?;
        let inner = if potential_shift != 0.0 { s.with_potential_shift(potential_shift) } else { s };
        Ok(PySoliton { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.inner.kind).to_lowercase()
    }

    /// The soliton constant λ in Ric + Hess f = λ g.
    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn default_resolution(&self) -> Vec<usize> {
        self.inner.default_resolution.clone()
    }

    #[pyo3(signature = (resolution=None))]
    fn grid_points(&self, resolution: Option<Vec<usize>>) -> PyResult<Vec<Vec<f64>>> {
        let grid = match resolution {
            Some(r) => self.inner.grid(&r).map_err(err)?,
            None => self.inner.default_grid(),
        };
        Ok(grid.points().iter().map(|p| p.coords().to_vec()).collect())
    }

    fn metric(&self, p: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.metric.value(&point(p)?).map_err(err)?))
    }

    fn potential(&self, p: Vec<f64>) -> PyResult<f64> {
        self.inner.potential.value(&point(p)?).map_err(err)
    }

    /// Γ^k_ij as `[k][i][j]`.
    #[pyo3(signature = (p, scheme=None))]
    fn christoffel(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        Ok(self.bundle(p, scheme)?.christoffel.to_nested())
    }

    /// R_ijkl = g(R(∂_i, ∂_j)∂_k, ∂_l).
    #[pyo3(signature = (p, scheme=None))]
    fn riemann(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<Vec<Vec<Vec<Vec<f64>>>>> {
        Ok(self.bundle(p, scheme)?.riemann.to_nested())
    }

    #[pyo3(signature = (p, scheme=None))]
    fn ricci(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.bundle(p, scheme)?.ricci))
    }

    #[pyo3(signature = (p, scheme=None))]
    fn scalar_curvature(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<f64> {
        Ok(self.bundle(p, scheme)?.scalar)
    }

    /// max-abs of Ric + Hess f − λ g.
    #[pyo3(signature = (p, scheme=None))]
    fn soliton_residual(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<f64> {
        soliton_residual(&self.inner, &point(p)?, &scheme_or_default(scheme)).map_err(err)
    }

    #[pyo3(signature = (p, scheme=None))]
    fn scalar_curvature_gradient_residual(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<f64> {
        scalar_curvature_gradient_residual(&self.inner, &point(p)?, &scheme_or_default(scheme)).map_err(err)
    }

    #[pyo3(signature = (p, scheme=None))]
    fn ricci_antisymmetry_residual(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<f64> {
        ricci_antisymmetry_residual(&self.inner, &point(p)?, &scheme_or_default(scheme)).map_err(err)
    }

    /// Codazzi deviation of (Ric − ½Rg)e^{−f} at one point.
    #[pyo3(signature = (p, scheme=None))]
    fn codazzi_residual(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<f64> {
        let scheme = scheme_or_default(scheme);
        let t = soliton_codazzi_tensor(&self.inner, &scheme);
        Ok(codazzi_deviation(&t, &self.inner.metric, &point(p)?, &scheme).map_err(err)?.norm)
    }

    /// Grid maxima of the Codazzi residual and the bracket decomposition.
    #[pyo3(signature = (resolution=None, scheme=None))]
    fn lemma(
        &self,
        resolution: Option<Vec<usize>>,
        scheme: Option<PyScheme>,
    ) -> PyResult<BTreeMap<String, BTreeMap<String, f64>>> {
        let grid = match resolution {
            Some(r) => self.inner.grid(&r).map_err(err)?,
            None => self.inner.default_grid(),
        };
        let l = verify_lemma(&self.inner, &grid, &scheme_or_default(scheme)).map_err(err)?;
        Ok(BTreeMap::from([
            ("codazzi".into(), stats(&l.codazzi)),
            ("curvature_bracket".into(), stats(&l.curvature_bracket)),
            ("f_bracket".into(), stats(&l.f_bracket)),
            ("bracket_sum".into(), stats(&l.bracket_sum)),
        ]))
    }

    fn __repr__(&self) -> String {
        format!("Soliton({:?}, kind={:?}, lam={})", self.inner.name, self.kind(), self.inner.lambda)
    }
}

impl PySoliton {
    fn bundle(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<CurvatureBundle> {
        CurvatureBundle::compute(&self.inner.metric, &point(p)?, &scheme_or_default(scheme)).map_err(err)
    }
}

/// The conformally flat warped example on t ∈ [−6, 6] with its Codazzi tensor.
#[pyclass(name = "Merton", module = "codazzi", frozen)]
pub struct PyMerton {
    pub inner: MertonExample,
}

#[pymethods]
impl PyMerton {
    #[new]
    #[pyo3(signature = (amplitude=1.0))]
    pub fn py_new(amplitude: f64) -> PyResult<Self> {
        Ok(PyMerton { inner: MertonExample::new(MertonParams { amplitude }).map_err(err)? })
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.params.amplitude
    }

    fn metric(&self, p: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.metric.value(&point(p)?).map_err(err)?))
    }

    fn tensor(&self, p: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.tensor.value(&point(p)?).map_err(err)?))
    }

    fn sigma(&self, p: Vec<f64>) -> PyResult<f64> {
        self.inner.sigma.value(&point(p)?).map_err(err)
    }

    fn rho(&self, p: Vec<f64>) -> PyResult<f64> {
        self.inner.rho.value(&point(p)?).map_err(err)
    }

    /// Γ^k_ij computed from the metric.
    #[pyo3(signature = (p, scheme=None))]
    fn christoffel(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let scheme = MertonExample::scheme(&scheme_or_default(scheme));
        let b = CurvatureBundle::compute(&self.inner.metric, &point(p)?, &scheme).map_err(err)?;
        Ok(b.christoffel.to_nested())
    }

    /// Γ^k_ij from the closed-form table in terms of σ and σ'.
    fn closed_form_christoffel(&self, p: Vec<f64>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        Ok(closed_form_christoffel(&self.inner.params, &point(p)?).map_err(err)?.to_nested())
    }

    #[pyo3(signature = (p, scheme=None))]
    fn codazzi_residual(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<f64> {
        let scheme = MertonExample::scheme(&scheme_or_default(scheme));
        let r = codazzi_deviation(&self.inner.tensor, &self.inner.metric, &point(p)?, &scheme).map_err(err)?;
        Ok(r.norm)
    }

    #[pyo3(signature = (resolution=None, scheme=None))]
    fn max_codazzi_residual(
        &self,
        resolution: Option<Vec<usize>>,
        scheme: Option<PyScheme>,
    ) -> PyResult<BTreeMap<String, f64>> {
        let grid = match resolution {
            Some(r) => MertonExample::grid(&r).map_err(err)?,
            None => MertonExample::default_grid(),
        };
        let scheme = MertonExample::scheme(&scheme_or_default(scheme));
        Ok(stats(&max_codazzi_residual(&self.inner.tensor, &self.inner.metric, &grid, &scheme).map_err(err)?))
    }

    /// Mean curvature of the t-level leaf and the eigenvalue prediction for it.
    #[pyo3(signature = (p, scheme=None))]
    fn mean_curvature(&self, p: Vec<f64>, scheme: Option<PyScheme>) -> PyResult<BTreeMap<String, f64>> {
        let scheme = MertonExample::scheme(&scheme_or_default(scheme));
        let p = point(p)?;
        let c = mean_curvature_identity_residual(&self.inner.metric, &self.inner.tensor, &p, &scheme).map_err(err)?;
        let leaf = second_fundamental_form(&self.inner.metric, &p, &scheme).map_err(err)?;
        Ok(BTreeMap::from([
            ("mean_curvature".into(), c.mean_curvature),
            ("predicted".into(), c.predicted),
            ("uncorrected".into(), c.uncorrected),
            ("residual".into(), c.residual),
            ("umbilicity".into(), leaf.umbilicity),
        ]))
    }
}

/// One row of a verification report.
#[pyclass(name = "Check", module = "codazzi", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCheck {
    pub id: String,
    pub anchor: String,
    pub max: f64,
    pub mean: f64,
    pub tolerance: f64,
    /// "at_most" or "at_least".
    pub bound: String,
    pub argmax: Option<Vec<f64>>,
    pub points: usize,
    pub passed: bool,
}

impl From<&CheckRow> for PyCheck {
    fn from(c: &CheckRow) -> Self {
        PyCheck {
            id: c.id.clone(),
            anchor: c.anchor.clone(),
            max: c.max,
            mean: c.mean,
            tolerance: c.tolerance,
            bound: match c.bound {
                report::Bound::AtMost => "at_most".into(),
                report::Bound::AtLeast => "at_least".into(),
            },
            argmax: c.argmax.clone(),
            points: c.points,
            passed: c.pass,
        }
    }
}

#[pymethods]
impl PyCheck {
    fn __repr__(&self) -> String {
        format!("Check({:?}, max={:e}, passed={})", self.id, self.max, if self.passed { "True" } else { "False" })
    }
}

#[pyclass(name = "Report", module = "codazzi", frozen)]
pub struct PyReport {
    pub inner: VerificationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn scenario(&self) -> String {
        self.inner.scenario.clone()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    #[getter]
    fn runtime_s(&self) -> f64 {
        self.inner.runtime_s
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn checks(&self) -> Vec<PyCheck> {
        self.inner.checks.iter().map(PyCheck::from).collect()
    }

    fn failures(&self) -> Vec<PyCheck> {
        self.inner.failures().map(PyCheck::from).collect()
    }

    fn check(&self, id: &str) -> PyResult<PyCheck> {
        self.inner
            .checks
            .iter()
            .find(|c| c.id == id || c.id.ends_with(&format!("/{id}")))
            .map(PyCheck::from)
            .ok_or_else(|| CodazziError::new_err(format!("no check {id:?}")))
    }

    /// Serialize as "text", "json" or "csv".
    #[pyo3(signature = (format="json"))]
    fn dumps(&self, format: &str) -> PyResult<String> {
        let f: Format = format.parse().map_err(err)?;
        report::serialize_report(&self.inner, f).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.checks.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Report({:?}, checks={}, passed={})",
            self.inner.scenario,
            self.inner.checks.len(),
            if self.inner.pass { "True" } else { "False" }
        )
    }
}

/// Run a scenario. `config` is a JSON document in the CLI config format;
/// `scenario`, `seed` and `scheme` override it when given.
#[pyfunction]
#[pyo3(signature = (scenario=None, config=None, seed=None, scheme=None))]
pub fn run_scenario(
    py: Python<'_>,
    scenario: Option<String>,
    config: Option<&str>,
    seed: Option<u64>,
    scheme: Option<PyScheme>,
) -> PyResult<PyReport> {
    let mut cfg = match config {
        Some(text) => parse_config(text).map_err(err)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = scheme {
        cfg.scheme = s.inner;
    }
    cfg.validate().map_err(err)?;
    let inner = py.detach(|| codazzi_core::runner::run_scenario(&cfg)).map_err(err)?;
    Ok(PyReport { inner })
}

#[pyfunction]
pub fn parse_report(text: &str) -> PyResult<PyReport> {
    Ok(PyReport { inner: report::parse_report(text).map_err(err)? })
}

#[pyfunction]
pub fn scenarios() -> Vec<&'static str> {
    SCENARIOS.to_vec()
}

#[pyfunction]
pub fn catalog() -> Vec<String> {
    soliton::catalog().into_iter().map(|s| s.name).collect()
}

#[pymodule]
pub fn codazzi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CodazziError", m.py().get_type::<CodazziError>())?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PySoliton>()?;
    m.add_class::<PyMerton>()?;
    m.add_class::<PyCheck>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(parse_report, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    Ok(())
}
