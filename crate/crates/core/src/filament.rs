//! Closed-curve representation and differential geometry.
//!
//! A filament is a closed curve `x: T -> R^3` sampled at `N` uniform
//! parameter values, kept together with its Fourier coefficients so that all
//! `xi`-derivatives are spectral. Curvature, torsion, arc length and the
//! Hasimoto wave function `psi = kappa exp(i int tau ds)` are derived
//! quantities collected in a [`GeometryReport`].

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{complex_derivative, SpectralField};

/// Below this speed `|x_xi|` the induction velocity is treated as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

/// Below this curvature the Hasimoto transform is treated as undefined.
pub const CURVATURE_THRESHOLD: f64 = 1e-8;

/// A closed curve on the torus with cached spectral representation.
#[derive(Debug, Clone)]
pub struct Filament {
    positions: Vec<Vector3<f64>>,
    time: f64,
    spectral: SpectralField,
}

/// Pointwise differential geometry of one filament snapshot.
#[derive(Debug, Clone)]
pub struct GeometryReport {
    /// `min_j |x_xi(xi_j)|`.
    pub min_speed: f64,
    /// Total arc length `L = int_0^1 |x_xi| d xi`.
    pub arc_length: f64,
    /// Curvature `kappa(xi_j)`.
    pub curvature: Vec<f64>,
    /// Torsion `tau(xi_j)`, computed as written (no regularization near
    /// vanishing curvature).
    pub torsion: Vec<f64>,
    /// Arc length coordinate `s(xi_j) = int_0^{xi_j} |x_xi| d xi`.
    pub arclength: Vec<f64>,
    /// Hasimoto wave function `psi(xi_j)`, when requested and defined.
    pub hasimoto: Option<Vec<Complex64>>,
    /// Distance of the total torsion phase `int_0^L tau ds` from the nearest
    /// multiple of `2 pi`; a closed curve generally has a nonzero defect.
    pub hasimoto_period_defect: Option<f64>,
}

impl Filament {
    /// Build a filament from `N` position samples at `xi_j = j/N`.
    /// `N` must be a power of two, at least 4. No endpoint duplication:
    /// the curve closes by periodicity.
    pub fn from_positions(positions: Vec<Vector3<f64>>, time: f64) -> Result<Self> {
        let spectral = SpectralField::analyze(&positions)?;
        Ok(Filament {
            positions,
            time,
            spectral,
        })
    }

    /// Planar circle of the given radius in the `z = 0` plane.
    pub fn circle(radius: f64, n: usize) -> Result<Self> {
        if radius.is_nan() || radius <= 0.0 || !radius.is_finite() {
            return Err(Error::Config(format!("circle radius must be positive, got {radius}")));
        }
        let positions = (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                Vector3::new(radius * th.cos(), radius * th.sin(), 0.0)
            })
            .collect();
        Filament::from_positions(positions, 0.0)
    }

    /// Planar ellipse with semi-axes `a`, `b` in the `z = 0` plane.
    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::Config(format!(
                "ellipse semi-axes must be positive, got a = {a}, b = {b}"
            )));
        }
        let positions = (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                Vector3::new(a * th.cos(), b * th.sin(), 0.0)
            })
            .collect();
        Filament::from_positions(positions, 0.0)
    }

    /// Circle with a radial and vertical wobble of the given mode number:
    /// a nonplanar curve with nonconstant curvature and nonzero torsion.
    pub fn perturbed_circle(radius: f64, mode: u32, amplitude: f64, n: usize) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Config(format!("circle radius must be positive, got {radius}")));
        }
        if mode == 0 {
            return Err(Error::Config("perturbation mode must be at least 1".into()));
        }
        let positions = (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                let wob = amplitude * (mode as f64 * th).cos();
                let r = radius + wob;
                Vector3::new(
                    r * th.cos(),
                    r * th.sin(),
                    amplitude * (mode as f64 * th).sin(),
                )
            })
            .collect();
        Filament::from_positions(positions, 0.0)
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid_size(&self) -> usize {
        self.positions.len()
    }

    pub fn spectral(&self) -> &SpectralField {
        &self.spectral
    }

    /// Same curve with the clock set to `time`.
    pub fn at_time(&self, time: f64) -> Self {
        Filament {
            positions: self.positions.clone(),
            time,
            spectral: self.spectral.clone(),
        }
    }

    /// Rigidly translated copy.
    pub fn translated(&self, offset: Vector3<f64>) -> Result<Self> {
        Filament::from_positions(
            self.positions.iter().map(|p| p + offset).collect(),
            self.time,
        )
    }

    /// Resample the curve onto a different grid by trigonometric
    /// interpolation.
    pub fn resampled(&self, n: usize) -> Result<Self> {
        Filament::from_positions(self.spectral.synthesize(n)?, self.time)
    }

    /// Grid values of the `p`-th spectral derivative of the position.
    pub fn derivative_values(&self, order: u32) -> Result<Vec<Vector3<f64>>> {
        self.spectral.derivative(order)?.synthesize(self.grid_size())
    }

    /// Tangent field `v = x_xi` on the grid.
    pub fn tangent_field(&self) -> Vec<Vector3<f64>> {
        self.derivative_values(1)
            .expect("first derivative of a valid filament")
    }

    /// Parameter speed `|x_xi|` on the grid.
    pub fn speeds(&self) -> Vec<f64> {
        self.tangent_field().iter().map(|v| v.norm()).collect()
    }

    /// Minimum of `|x_xi|` over the grid, with the location of the minimum.
    pub fn min_speed_location(&self) -> (f64, f64) {
        let speeds = self.speeds();
        let (idx, min) = speeds
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| {
                if v < bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
        (min, idx as f64 / self.grid_size() as f64)
    }

    pub fn min_speed(&self) -> f64 {
        self.min_speed_location().0
    }

    /// Arc length by the trapezoidal rule on the grid (exact trapezoid on a
    /// periodic grid is the plain average).
    pub fn arc_length(&self) -> f64 {
        let speeds = self.speeds();
        speeds.iter().sum::<f64>() / speeds.len() as f64
    }

    /// Binormal induction velocity `(x_xi × x_xixi) / |x_xi|^3` on the grid.
    pub fn lie_velocity(&self) -> Result<Vec<Vector3<f64>>> {
        let (min_speed, xi) = self.min_speed_location();
        if min_speed < DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate {
                min_speed,
                xi,
                context: String::new(),
            });
        }
        let v = self.tangent_field();
        let v2 = self.derivative_values(2)?;
        Ok(v.iter()
            .zip(&v2)
            .map(|(a, b)| a.cross(b) / a.norm().powi(3))
            .collect())
    }

    /// Full geometry report; the Hasimoto wave function is attached when
    /// `with_hasimoto` is set and the curvature stays above
    /// [`CURVATURE_THRESHOLD`].
    pub fn geometry_report(&self, with_hasimoto: bool) -> Result<GeometryReport> {
        let (min_speed, xi) = self.min_speed_location();
        if min_speed < DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate {
                min_speed,
                xi,
                context: String::new(),
            });
        }
        let n = self.grid_size();
        let v = self.tangent_field();
        let v2 = self.derivative_values(2)?;
        let v3 = self.derivative_values(3)?;

        let mut curvature = Vec::with_capacity(n);
        let mut torsion = Vec::with_capacity(n);
        for j in 0..n {
            let cross = v[j].cross(&v2[j]);
            curvature.push(cross.norm() / v[j].norm().powi(3));
            torsion.push(cross.dot(&v3[j]) / cross.norm_squared());
        }

        // cumulative arc length s(xi_j), trapezoid with the periodic closure
        let speeds: Vec<f64> = v.iter().map(|t| t.norm()).collect();
        let h = 1.0 / n as f64;
        let mut arclength = Vec::with_capacity(n + 1);
        arclength.push(0.0);
        for j in 0..n {
            let next = speeds[(j + 1) % n];
            arclength.push(arclength[j] + 0.5 * h * (speeds[j] + next));
        }
        let total = arclength[n];
        let s_grid = arclength[..n].to_vec();

        let mut report = GeometryReport {
            min_speed,
            arc_length: total,
            curvature,
            torsion,
            arclength: s_grid,
            hasimoto: None,
            hasimoto_period_defect: None,
        };

        if with_hasimoto {
            let min_curvature = report
                .curvature
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b));
            if min_curvature < CURVATURE_THRESHOLD {
                return Err(Error::HasimotoUndefined {
                    min_curvature,
                    threshold: CURVATURE_THRESHOLD,
                    report: Box::new(report),
                });
            }
            let (psi, defect) = self.hasimoto(&report, &arclength)?;
            report.hasimoto = Some(psi);
            report.hasimoto_period_defect = Some(defect);
        }
        Ok(report)
    }

    /// Evaluate `psi_j = kappa_j exp(i int_0^{s_j} tau ds)`.
    ///
    /// The torsion integral lives in the arc length variable, while the data
    /// lives on the parameter grid, so the torsion is resampled onto a
    /// uniform `s`-grid through a monotone cubic interpolant of `xi -> s`
    /// before the trapezoidal accumulation.
    fn hasimoto(
        &self,
        report: &GeometryReport,
        s_knots: &[f64],
    ) -> Result<(Vec<Complex64>, f64)> {
        let n = self.grid_size();
        let total = report.arc_length;
        let speeds: Vec<f64> = {
            let mut sp: Vec<f64> = self.tangent_field().iter().map(|t| t.norm()).collect();
            sp.push(sp[0]);
            sp
        };
        let map = MonotoneCubic::new(
            (0..=n).map(|j| j as f64 / n as f64).collect(),
            s_knots.to_vec(),
            speeds,
        )?;

        // torsion on the uniform s-grid, evaluated spectrally at xi(s)
        let d1 = self.spectral.derivative(1)?;
        let d2 = self.spectral.derivative(2)?;
        let d3 = self.spectral.derivative(3)?;
        let torsion_at = |xi: f64| -> f64 {
            let v = d1.evaluate(xi);
            let cross = v.cross(&d2.evaluate(xi));
            cross.dot(&d3.evaluate(xi)) / cross.norm_squared()
        };
        let ds = total / n as f64;
        let tau_uniform: Vec<f64> = (0..=n)
            .map(|i| {
                let s = (i as f64 * ds).min(total);
                torsion_at(map.invert(s))
            })
            .collect();

        // cumulative trapezoid of tau in s
        let mut phase = Vec::with_capacity(n + 1);
        phase.push(0.0);
        for i in 0..n {
            phase.push(phase[i] + 0.5 * ds * (tau_uniform[i] + tau_uniform[i + 1]));
        }
        let total_phase = phase[n];

        // psi at the xi grid points: linear interpolation of the phase table
        let psi = (0..n)
            .map(|j| {
                let s = report.arclength[j];
                let pos = (s / ds).min(n as f64 - 1e-12);
                let cell = pos.floor() as usize;
                let frac = pos - cell as f64;
                let th = phase[cell] * (1.0 - frac) + phase[cell + 1] * frac;
                Complex64::from_polar(report.curvature[j], th)
            })
            .collect();

        let wraps = (total_phase / (2.0 * PI)).round();
        let defect = (total_phase - 2.0 * PI * wraps).abs();
        Ok((psi, defect))
    }
}

/// Monotone cubic Hermite interpolant of a strictly increasing function,
/// with known exact slopes, plus inversion. Slopes are clamped to the
/// Fritsch–Carlson region so the interpolant is monotone on every cell.
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    fn new(x: Vec<f64>, y: Vec<f64>, mut slope: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != slope.len() || x.len() < 2 {
            return Err(Error::Input("interpolation knots are inconsistent".into()));
        }
        for i in 0..x.len() - 1 {
            if y[i + 1] <= y[i] || y[i + 1].is_nan() {
                return Err(Error::Input(
                    "arc length map is not strictly increasing".into(),
                ));
            }
            let secant = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            slope[i] = slope[i].min(3.0 * secant);
            slope[i + 1] = slope[i + 1].min(3.0 * secant);
        }
        Ok(MonotoneCubic { x, y, slope })
    }

    fn eval_cell(&self, i: usize, t: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    /// Solve `H(x) = target` for `x`; `target` must lie in the value range.
    fn invert(&self, target: f64) -> f64 {
        let last = self.y.len() - 1;
        let target = target.clamp(self.y[0], self.y[last]);
        // locate the cell by binary search on knot values
        let mut lo = 0;
        let mut hi = last;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.y[mid] <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // bisection in the cell parameter (H is monotone there)
        let mut a = 0.0;
        let mut b = 1.0;
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if self.eval_cell(lo, mid) <= target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let t = 0.5 * (a + b);
        self.x[lo] + t * (self.x[lo + 1] - self.x[lo])
    }
}

/// Per-interior-frame norms of the nonlinear Schrödinger defect
/// `i psi_t - psi_ss - |psi|^2 psi / 2` along a trajectory of geometry
/// reports with the wave function attached.
///
/// Requires at least 3 frames at uniform time spacing and a trajectory whose
/// parametrization speed is constant, so the parameter grid is uniform in
/// arc length.
pub fn nls_residual_series(times: &[f64], reports: &[GeometryReport]) -> Result<Vec<f64>> {
    if times.len() != reports.len() {
        return Err(Error::Input(format!(
            "times and reports differ in length: {} vs {}",
            times.len(),
            reports.len()
        )));
    }
    if times.len() < 3 {
        return Err(Error::Input(format!(
            "need at least 3 frames for a time derivative, got {}",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-30) {
            return Err(Error::Input(format!(
                "non-uniform frame spacing: {} vs {}",
                w[1] - w[0],
                dt
            )));
        }
    }
    let n = reports[0].curvature.len();
    let psi: Vec<&Vec<Complex64>> = reports
        .iter()
        .map(|r| {
            r.hasimoto
                .as_ref()
                .ok_or_else(|| Error::Input("frame lacks the Hasimoto wave function".into()))
        })
        .collect::<Result<_>>()?;
    if psi.iter().any(|p| p.len() != n) {
        return Err(Error::Input("frames have inconsistent grid sizes".into()));
    }

    let mut series = Vec::with_capacity(times.len() - 2);
    for i in 1..times.len() - 1 {
        let arc = reports[i].arc_length;
        let psi_ss: Vec<Complex64> = complex_derivative(psi[i], 2)?
            .into_iter()
            .map(|c| c / (arc * arc))
            .collect();
        let inv_2dt = 1.0 / (2.0 * dt);
        let mut sum = 0.0;
        for j in 0..n {
            let psi_t = (psi[i + 1][j] - psi[i - 1][j]) * inv_2dt;
            let cubic = 0.5 * psi[i][j].norm_sqr() * psi[i][j];
            let r = Complex64::new(0.0, 1.0) * psi_t - psi_ss[j] - cubic;
            sum += r.norm_sqr();
        }
        series.push((sum * arc / n as f64).sqrt());
    }
    Ok(series)
}

/// Maximum of [`nls_residual_series`] over the interior frames.
pub fn nls_residual(times: &[f64], reports: &[GeometryReport]) -> Result<f64> {
    Ok(nls_residual_series(times, reports)?
        .into_iter()
        .fold(0.0, f64::max))
}
