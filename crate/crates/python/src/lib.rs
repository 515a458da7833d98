//! Python bindings for the filament simulator.
//!
//! Exposes the curve type, flow fields, solver configuration and the
//! evolution driver; positions travel as plain lists of `[x, y, z]`
//! triples, the Hasimoto wave function as Python complex numbers.

use nalgebra::Vector3;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use vfsim_core::energy::{self, EnergyVariant};
use vfsim_core::error::Error;
use vfsim_core::filament;
use vfsim_core::flows;
use vfsim_core::solver;
use vfsim_core::validation;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Input(_) | Error::NotApplicable(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_triples(v: &[Vector3<f64>]) -> Vec<[f64; 3]> {
    v.iter().map(|p| [p.x, p.y, p.z]).collect()
}

fn from_triples(v: Vec<[f64; 3]>) -> Vec<Vector3<f64>> {
    v.into_iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect()
}

/// A closed curve sampled on the unit torus.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Filament {
    inner: filament::Filament,
}

#[pymethods]
impl Filament {
    #[new]
    #[pyo3(signature = (positions, time = 0.0))]
    fn new(positions: Vec<[f64; 3]>, time: f64) -> PyResult<Self> {
        filament::Filament::from_positions(from_triples(positions), time)
            .map(|inner| Filament { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn circle(radius: f64, n: usize) -> PyResult<Self> {
        filament::Filament::circle(radius, n)
            .map(|inner| Filament { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn ellipse(a: f64, b: f64, n: usize) -> PyResult<Self> {
        filament::Filament::ellipse(a, b, n)
            .map(|inner| Filament { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn perturbed_circle(radius: f64, mode: u32, amplitude: f64, n: usize) -> PyResult<Self> {
        filament::Filament::perturbed_circle(radius, mode, amplitude, n)
            .map(|inner| Filament { inner })
            .map_err(to_py_err)
    }

    fn positions(&self) -> Vec<[f64; 3]> {
        to_triples(self.inner.positions())
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    #[getter]
    fn grid_size(&self) -> usize {
        self.inner.grid_size()
    }

    fn min_speed(&self) -> f64 {
        self.inner.min_speed()
    }

    fn arc_length(&self) -> f64 {
        self.inner.arc_length()
    }

    fn tangent_field(&self) -> Vec<[f64; 3]> {
        to_triples(&self.inner.tangent_field())
    }

    /// Binormal self-induction velocity `(x' × x'') / |x'|^3`.
    fn lie_velocity(&self) -> PyResult<Vec<[f64; 3]>> {
        self.inner
            .lie_velocity()
            .map(|v| to_triples(&v))
            .map_err(to_py_err)
    }

    fn resampled(&self, n: usize) -> PyResult<Self> {
        self.inner
            .resampled(n)
            .map(|inner| Filament { inner })
            .map_err(to_py_err)
    }

    /// Sobolev `H^m` norm of the position field.
    fn sobolev_norm(&self, m: usize) -> f64 {
        self.inner.spectral().sobolev_norm(m)
    }

    /// Curvature, torsion, arc length and (optionally) the Hasimoto wave
    /// function.
    #[pyo3(signature = (with_hasimoto = false))]
    fn geometry(&self, with_hasimoto: bool) -> PyResult<Geometry> {
        self.inner
            .geometry_report(with_hasimoto)
            .map(|report| Geometry { report })
            .map_err(to_py_err)
    }

    /// Modified-energy report of order `k` (3 <= k <= 5).
    #[pyo3(signature = (k, with_k_factor = true))]
    fn energy_report(&self, k: usize, with_k_factor: bool) -> PyResult<EnergyReport> {
        let variant = if with_k_factor {
            EnergyVariant::WithKFactor
        } else {
            EnergyVariant::WithoutKFactor
        };
        energy::modified_energy(&self.inner, k, variant)
            .map(|report| EnergyReport { report })
            .map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Filament(n={}, t={}, L={:.6})",
            self.inner.grid_size(),
            self.inner.time(),
            self.inner.arc_length()
        )
    }
}

/// Pointwise differential geometry of one filament snapshot.
#[pyclass]
struct Geometry {
    report: filament::GeometryReport,
}

#[pymethods]
impl Geometry {
    #[getter]
    fn min_speed(&self) -> f64 {
        self.report.min_speed
    }

    #[getter]
    fn arc_length(&self) -> f64 {
        self.report.arc_length
    }

    #[getter]
    fn curvature(&self) -> Vec<f64> {
        self.report.curvature.clone()
    }

    #[getter]
    fn torsion(&self) -> Vec<f64> {
        self.report.torsion.clone()
    }

    #[getter]
    fn arclength(&self) -> Vec<f64> {
        self.report.arclength.clone()
    }

    #[getter]
    fn hasimoto(&self) -> Option<Vec<Complex64>> {
        self.report.hasimoto.clone()
    }

    #[getter]
    fn hasimoto_period_defect(&self) -> Option<f64> {
        self.report.hasimoto_period_defect
    }
}

/// Modified-energy quantities of one order.
#[pyclass]
struct EnergyReport {
    report: energy::EnergyReport,
}

#[pymethods]
impl EnergyReport {
    #[getter]
    fn k(&self) -> usize {
        self.report.k
    }

    #[getter]
    fn e_k(&self) -> f64 {
        self.report.e_k
    }

    #[getter]
    fn sobolev_sq(&self) -> f64 {
        self.report.sobolev_sq
    }

    #[getter]
    fn ratio(&self) -> f64 {
        self.report.ratio
    }

    #[getter]
    fn tangential_sq(&self) -> f64 {
        self.report.tangential_sq
    }

    #[getter]
    fn normal_sq(&self) -> f64 {
        self.report.normal_sq
    }

    #[getter]
    fn position_sq(&self) -> f64 {
        self.report.position_sq
    }

    #[getter]
    fn gauge_a(&self) -> Vec<f64> {
        self.report.gauge_a.clone()
    }

    #[getter]
    fn h_k(&self) -> Vec<f64> {
        self.report.h_k.clone()
    }

    #[getter]
    fn w_k(&self) -> Vec<[f64; 3]> {
        self.report.w_k.clone()
    }
}

/// Ambient flow field acting on the filament.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Flow {
    inner: flows::FlowField,
}

#[pymethods]
impl Flow {
    #[staticmethod]
    fn zero() -> Self {
        Flow {
            inner: flows::FlowField::Zero,
        }
    }

    #[staticmethod]
    fn uniform(velocity: [f64; 3]) -> Self {
        Flow {
            inner: flows::FlowField::Uniform { velocity },
        }
    }

    #[staticmethod]
    #[pyo3(signature = (angular_velocity, center = [0.0, 0.0, 0.0]))]
    fn rigid_rotation(angular_velocity: [f64; 3], center: [f64; 3]) -> Self {
        Flow {
            inner: flows::FlowField::RigidRotation {
                angular_velocity,
                center,
            },
        }
    }

    #[staticmethod]
    #[pyo3(signature = (matrix, offset = [0.0, 0.0, 0.0]))]
    fn linear(matrix: [[f64; 3]; 3], offset: [f64; 3]) -> Self {
        Flow {
            inner: flows::FlowField::Linear { matrix, offset },
        }
    }

    /// Scale an inner flow by `amplitude * cos(angular_frequency * t + phase)`.
    #[staticmethod]
    fn cosine_modulated(
        amplitude: f64,
        angular_frequency: f64,
        phase: f64,
        inner: &Flow,
    ) -> Self {
        Flow {
            inner: flows::FlowField::TimeModulated {
                modulation: flows::Modulation::Cosine {
                    amplitude,
                    angular_frequency,
                    phase,
                },
                inner: Box::new(inner.inner.clone()),
            },
        }
    }

    fn evaluate(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let v = self.inner.evaluate(&Vector3::new(x[0], x[1], x[2]), t);
        [v.x, v.y, v.z]
    }

    fn jacobian(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        let j = self.inner.jacobian(&Vector3::new(x[0], x[1], x[2]), t);
        [
            [j[(0, 0)], j[(0, 1)], j[(0, 2)]],
            [j[(1, 0)], j[(1, 1)], j[(1, 2)]],
            [j[(2, 0)], j[(2, 1)], j[(2, 2)]],
        ]
    }

    /// Whether the Jacobian is exactly skew-symmetric (structural test).
    fn is_skew(&self) -> PyResult<bool> {
        self.inner.is_skew().map_err(to_py_err)
    }
}

/// Time integration parameters.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct SolverConfig {
    inner: solver::SolverConfig,
}

#[pymethods]
impl SolverConfig {
    #[new]
    #[pyo3(signature = (
        epsilon = 0.0,
        alpha = 0.3,
        dt = 1e-4,
        horizon = 0.1,
        grid = 128,
        sobolev_order = 5,
        integrator = "rk4_dealiased",
        picard_tol = 1e-12,
        picard_max_iter = 50,
        degeneracy_floor = None,
        frame_stride = None,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        epsilon: f64,
        alpha: f64,
        dt: f64,
        horizon: f64,
        grid: usize,
        sobolev_order: usize,
        integrator: &str,
        picard_tol: f64,
        picard_max_iter: usize,
        degeneracy_floor: Option<f64>,
        frame_stride: Option<usize>,
    ) -> PyResult<Self> {
        let integrator = match integrator {
            "rk4_dealiased" => solver::Integrator::Rk4Dealiased,
            "exp_euler_regularized" => solver::Integrator::ExpEulerRegularized,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown integrator '{other}'; use 'rk4_dealiased' or 'exp_euler_regularized'"
                )))
            }
        };
        let inner = solver::SolverConfig {
            epsilon,
            alpha,
            dt,
            horizon,
            grid,
            sobolev_order,
            integrator,
            picard_tol,
            picard_max_iter,
            degeneracy_floor,
            frame_stride,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(SolverConfig { inner })
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// A recorded evolution.
#[pyclass]
struct Trajectory {
    inner: solver::Trajectory,
}

#[pymethods]
impl Trajectory {
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    fn __len__(&self) -> usize {
        self.inner.frames.len()
    }

    fn frame(&self, index: usize) -> PyResult<Filament> {
        self.inner
            .frames
            .get(index)
            .map(|(_, f)| Filament { inner: f.clone() })
            .ok_or_else(|| {
                PyValueError::new_err(format!(
                    "frame index {index} out of range ({} frames)",
                    self.inner.frames.len()
                ))
            })
    }

    /// "completed", "degenerated_at(t, xi)" or "picard_diverged_at(t)".
    fn termination(&self) -> String {
        match &self.inner.termination {
            solver::Termination::Completed => "completed".into(),
            solver::Termination::DegeneratedAt { t, xi } => {
                format!("degenerated_at({t}, {xi})")
            }
            solver::Termination::PicardDivergedAt { t } => {
                format!("picard_diverged_at({t})")
            }
        }
    }
}

/// Evolve a filament under a flow with the given configuration.
#[pyfunction]
fn evolve(filament: &Filament, flow: &Flow, config: &SolverConfig) -> PyResult<Trajectory> {
    solver::evolve(&filament.inner, &flow.inner, &config.inner)
        .map(|inner| Trajectory { inner })
        .map_err(to_py_err)
}

/// The exact translating-ring solution at time `t`.
#[pyfunction]
fn traveling_ring(radius: f64, t: f64, n: usize) -> PyResult<Filament> {
    validation::traveling_ring_oracle(radius, t, n)
        .map(|inner| Filament { inner })
        .map_err(to_py_err)
}

#[pymodule]
fn vfsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Filament>()?;
    m.add_class::<Geometry>()?;
    m.add_class::<EnergyReport>()?;
    m.add_class::<Flow>()?;
    m.add_class::<SolverConfig>()?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(traveling_ring, m)?)?;
    Ok(())
}
