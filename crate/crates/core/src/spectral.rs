//! Fourier calculus for real vector-valued periodic functions on the unit
//! torus `T = R/Z`.
//!
//! A function sampled at `N` uniform points `xi_j = j/N` is represented by
//! its Fourier coefficients `c_k ≈ ∫_0^1 u(xi) e^{-2 pi i k xi} d xi` for
//! `|k| <= N/2`. Coefficients are stored in standard FFT layout (index `i`
//! holds wavenumber `i` for `i <= N/2` and `i - N` otherwise); the slot at
//! `N/2` carries the combined Nyquist mode.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Tolerance on the Hermitian-symmetry defect, relative to the largest
/// coefficient magnitude (with an absolute floor of one).
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Highest derivative order used anywhere in the crate.
pub const MAX_DERIVATIVE_ORDER: u32 = 6;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if forward {
            planner.plan_fft_forward(len)
        } else {
            planner.plan_fft_inverse(len)
        }
    })
}

/// Unnormalized forward DFT in place: `out_k = sum_j buf_j e^{-2 pi i jk/N}`.
fn fft_forward(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Unnormalized inverse DFT in place: `out_j = sum_k buf_k e^{+2 pi i jk/N}`.
fn fft_inverse(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "grid size must be a power of two and at least 4, got {n}"
        )));
    }
    Ok(())
}

/// Signed wavenumber held by FFT slot `i` of an `n`-point transform.
fn slot_wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Fourier coefficients of a real 3-vector-valued function on the torus.
#[derive(Debug, Clone)]
pub struct SpectralField {
    /// FFT layout, length `grid_size`.
    coeffs: Vec<Vector3<Complex64>>,
    grid_size: usize,
}

impl SpectralField {
    /// Field with all coefficients zero.
    pub fn zeros(n: usize) -> Result<Self> {
        check_grid_size(n)?;
        Ok(SpectralField {
            coeffs: vec![Vector3::from_element(Complex64::new(0.0, 0.0)); n],
            grid_size: n,
        })
    }

    /// Build a field by supplying the coefficient for each stored wavenumber.
    /// The closure is called once per FFT slot with the signed wavenumber
    /// (the Nyquist slot is passed as `+n/2`). No symmetry is enforced, so
    /// this can construct invalid fields for error-path tests.
    pub fn from_wavenumbers(
        n: usize,
        mut coeff: impl FnMut(i64) -> Vector3<Complex64>,
    ) -> Result<Self> {
        check_grid_size(n)?;
        let coeffs = (0..n).map(|i| coeff(slot_wavenumber(i, n))).collect();
        Ok(SpectralField {
            coeffs,
            grid_size: n,
        })
    }

    /// Discrete Fourier analysis of `N` uniform samples on `[0, 1)`.
    ///
    /// The result is exactly Hermitian-symmetric: the transform of the real
    /// input is projected onto the symmetric subspace, which removes the
    /// last-ulp asymmetries of the FFT.
    pub fn analyze(samples: &[Vector3<f64>]) -> Result<Self> {
        let n = samples.len();
        check_grid_size(n)?;
        let scale = 1.0 / n as f64;
        let mut coeffs = vec![Vector3::from_element(Complex64::new(0.0, 0.0)); n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for comp in 0..3 {
            for (b, s) in buf.iter_mut().zip(samples) {
                *b = Complex64::new(s[comp], 0.0);
            }
            fft_forward(&mut buf);
            for (c, b) in coeffs.iter_mut().zip(&buf) {
                c[comp] = b * scale;
            }
        }
        let mut field = SpectralField {
            coeffs,
            grid_size: n,
        };
        field.hermitian_project();
        Ok(field)
    }

    /// Project onto exact Hermitian symmetry: `c_{-k} = conj(c_k)`.
    fn hermitian_project(&mut self) {
        let n = self.grid_size;
        for comp in 0..3 {
            self.coeffs[0][comp] = Complex64::new(self.coeffs[0][comp].re, 0.0);
            self.coeffs[n / 2][comp] = Complex64::new(self.coeffs[n / 2][comp].re, 0.0);
        }
        for k in 1..n / 2 {
            for comp in 0..3 {
                let a = self.coeffs[k][comp];
                let b = self.coeffs[n - k][comp];
                let avg = 0.5 * (a + b.conj());
                self.coeffs[k][comp] = avg;
                self.coeffs[n - k][comp] = avg.conj();
            }
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Largest stored wavenumber, `N/2`.
    pub fn max_wavenumber(&self) -> i64 {
        (self.grid_size / 2) as i64
    }

    /// Coefficient of wavenumber `k`, `|k| <= N/2`. The two Nyquist numbers
    /// `k = ±N/2` address the same combined slot.
    pub fn coeff(&self, k: i64) -> Vector3<Complex64> {
        let half = self.max_wavenumber();
        assert!(k.abs() <= half, "wavenumber {k} out of range (N = {})", self.grid_size);
        let idx = if k >= 0 {
            k as usize
        } else if k == -half {
            half as usize
        } else {
            (k + self.grid_size as i64) as usize
        };
        self.coeffs[idx]
    }

    /// Worst absolute deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid_size;
        let mut defect: f64 = 0.0;
        for comp in 0..3 {
            defect = defect.max(self.coeffs[0][comp].im.abs());
            defect = defect.max(self.coeffs[n / 2][comp].im.abs());
        }
        for k in 1..n / 2 {
            for comp in 0..3 {
                let d = self.coeffs[k][comp] - self.coeffs[n - k][comp].conj();
                defect = defect.max(d.norm());
            }
        }
        defect
    }

    fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| (0..3).map(|i| c[i].norm()))
            .fold(0.0, f64::max)
    }

    fn check_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        let scale = self.max_coeff_norm().max(1.0);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::DataIntegrity(format!(
                "Hermitian symmetry violated: defect {defect:.3e} exceeds \
                 {HERMITIAN_TOL:.1e} relative to coefficient scale {scale:.3e}"
            )));
        }
        Ok(())
    }

    /// Evaluate the truncated Fourier series on `n` uniform points.
    ///
    /// `n` may differ from the stored grid size: larger targets zero-pad the
    /// spectrum (trigonometric interpolation), smaller targets truncate it.
    #[allow(clippy::needless_range_loop)] // indices are wavenumbers
    pub fn synthesize(&self, n: usize) -> Result<Vec<Vector3<f64>>> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "synthesis grid size must be even and at least 4, got {n}"
            )));
        }
        self.check_hermitian()?;
        let src_half = self.grid_size / 2;
        let tgt_half = n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut out = vec![Vector3::zeros(); n];
        for comp in 0..3 {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            if n == self.grid_size {
                for (b, c) in buf.iter_mut().zip(&self.coeffs) {
                    *b = c[comp];
                }
            } else if n > self.grid_size {
                // Zero-pad; the source Nyquist slot represents the pair
                // k = ±N/2 and is split evenly over the two target slots.
                for k in 0..src_half {
                    buf[k] = self.coeffs[k][comp];
                }
                for k in 1..src_half {
                    buf[n - k] = self.coeffs[self.grid_size - k][comp];
                }
                let nyq = self.coeffs[src_half][comp];
                buf[src_half] = 0.5 * nyq;
                buf[n - src_half] = 0.5 * nyq;
            } else {
                // Truncate to the target band; the target Nyquist slot is
                // left empty (those modes are dropped, not folded).
                for k in 0..tgt_half {
                    buf[k] = self.coeffs[k][comp];
                }
                for k in 1..tgt_half {
                    buf[n - k] = self.coeffs[self.grid_size - k][comp];
                }
            }
            fft_inverse(&mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                o[comp] = b.re;
            }
        }
        Ok(out)
    }

    /// Evaluate the truncated series at one arbitrary point `xi`.
    ///
    /// The Nyquist slot is interpreted as the real cosine pair
    /// `c_{N/2} cos(pi N xi)`, which agrees with [`Self::synthesize`] on the
    /// grid.
    pub fn evaluate(&self, xi: f64) -> Vector3<f64> {
        let n = self.grid_size;
        let half = n / 2;
        let mut acc = Vector3::zeros();
        for comp in 0..3 {
            acc[comp] = self.coeffs[0][comp].re;
        }
        for k in 1..half {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * k as f64 * xi);
            for comp in 0..3 {
                // c_k e^{i th} + conj(c_k) e^{-i th} = 2 Re(c_k e^{i th})
                acc[comp] += 2.0 * (self.coeffs[k][comp] * phase).re;
            }
        }
        let nyq_angle = PI * n as f64 * xi;
        for comp in 0..3 {
            acc[comp] += self.coeffs[half][comp].re * nyq_angle.cos();
        }
        acc
    }

    /// `p`-th spectral derivative: multiply each mode by `(2 pi i k)^p` and
    /// zero the Nyquist slot (its derivative is not representable as a real
    /// field on the same grid).
    pub fn derivative(&self, order: u32) -> Result<Self> {
        if order == 0 || order > MAX_DERIVATIVE_ORDER {
            return Err(Error::Config(format!(
                "derivative order must lie in 1..={MAX_DERIVATIVE_ORDER}, got {order}"
            )));
        }
        let n = self.grid_size;
        let mut coeffs = self.coeffs.clone();
        for (i, c) in coeffs.iter_mut().enumerate() {
            let k = slot_wavenumber(i, n);
            if k.unsigned_abs() as usize == n / 2 {
                *c = Vector3::from_element(Complex64::new(0.0, 0.0));
            } else {
                let m = Complex64::new(0.0, 2.0 * PI * k as f64).powi(order as i32);
                for comp in 0..3 {
                    c[comp] *= m;
                }
            }
        }
        Ok(SpectralField {
            coeffs,
            grid_size: n,
        })
    }

    /// Zero all modes with `|k| > max_mode` (used for 2/3-rule dealiasing).
    pub fn truncated(&self, max_mode: i64) -> Self {
        let n = self.grid_size;
        let mut coeffs = self.coeffs.clone();
        for (i, c) in coeffs.iter_mut().enumerate() {
            if slot_wavenumber(i, n).abs() > max_mode {
                *c = Vector3::from_element(Complex64::new(0.0, 0.0));
            }
        }
        SpectralField {
            coeffs,
            grid_size: n,
        }
    }

    /// Sobolev `H^m` norm via Parseval:
    /// `( sum_k sum_{j=0}^m (2 pi k)^{2j} |c_k|^2 )^{1/2}`.
    pub fn sobolev_norm(&self, m: usize) -> f64 {
        let n = self.grid_size;
        let mut total = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = slot_wavenumber(i, n);
            let r = (2.0 * PI * k as f64).powi(2);
            let mut weight = 0.0;
            let mut term = 1.0;
            for _ in 0..=m {
                weight += term;
                term *= r;
            }
            let mag2: f64 = (0..3).map(|comp| c[comp].norm_sqr()).sum();
            total += weight * mag2;
        }
        total.sqrt()
    }

    /// Componentwise linear combination `a*self + b*other`.
    pub fn linear_comb(&self, a: f64, other: &SpectralField, b: f64) -> Result<Self> {
        if self.grid_size != other.grid_size {
            return Err(Error::Input(format!(
                "field grid sizes differ: {} vs {}",
                self.grid_size, other.grid_size
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| {
                Vector3::from_fn(|i, _| {
                    x[i] * Complex64::new(a, 0.0) + y[i] * Complex64::new(b, 0.0)
                })
            })
            .collect();
        Ok(SpectralField {
            coeffs,
            grid_size: self.grid_size,
        })
    }

    /// Largest coefficient distance to another field, `max_k |c_k - d_k|`.
    pub fn max_distance(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid_size, other.grid_size);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(x, y)| (0..3).map(move |i| (x[i] - y[i]).norm()))
            .fold(0.0, f64::max)
    }
}

/// Spectral derivative of a real scalar grid function (Nyquist zeroed).
pub fn scalar_derivative(values: &[f64], order: u32) -> Result<Vec<f64>> {
    let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let out = complex_derivative(&complex, order)?;
    Ok(out.into_iter().map(|c| c.re).collect())
}

/// Spectral derivative of a complex scalar grid function (no symmetry
/// assumption; Nyquist zeroed). Grid length must be even and at least 4.
pub fn complex_derivative(values: &[Complex64], order: u32) -> Result<Vec<Complex64>> {
    let n = values.len();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "grid length must be even and at least 4, got {n}"
        )));
    }
    if order == 0 || order > MAX_DERIVATIVE_ORDER {
        return Err(Error::Config(format!(
            "derivative order must lie in 1..={MAX_DERIVATIVE_ORDER}, got {order}"
        )));
    }
    let mut buf = values.to_vec();
    fft_forward(&mut buf);
    let scale = 1.0 / n as f64;
    for (i, b) in buf.iter_mut().enumerate() {
        let k = slot_wavenumber(i, n);
        if k.unsigned_abs() as usize == n / 2 {
            *b = Complex64::new(0.0, 0.0);
        } else {
            *b *= Complex64::new(0.0, 2.0 * PI * k as f64).powi(order as i32) * scale;
        }
    }
    fft_inverse(&mut buf);
    Ok(buf)
}

/// Spectral derivative of a real vector grid function.
pub fn vector_derivative(values: &[Vector3<f64>], order: u32) -> Result<Vec<Vector3<f64>>> {
    SpectralField::analyze(values)?
        .derivative(order)?
        .synthesize(values.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|j| j as f64 / n as f64).collect()
    }

    #[test]
    fn constant_samples_give_dc_coefficient_only() {
        let c = Vector3::new(1.0, 2.0, 3.0);
        let samples = vec![c; 8];
        let f = SpectralField::analyze(&samples).unwrap();
        for k in -4..=4 {
            let expect = if k == 0 { c } else { Vector3::zeros() };
            for comp in 0..3 {
                let got = f.coeff(k)[comp];
                assert!((got.re - expect[comp]).abs() < 1e-14, "k={k} comp={comp}");
                assert!(got.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_harmonic_coefficients() {
        // (cos 2 pi xi, sin 2 pi xi, 0) has c_{+1} = (1/2, -i/2, 0).
        let samples: Vec<_> = grid(8)
            .iter()
            .map(|&xi| {
                let th = 2.0 * PI * xi;
                Vector3::new(th.cos(), th.sin(), 0.0)
            })
            .collect();
        let f = SpectralField::analyze(&samples).unwrap();
        let c1 = f.coeff(1);
        assert!((c1[0] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((c1[1] - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!(c1[2].norm() < 1e-15);
        let cm1 = f.coeff(-1);
        assert!((cm1[1] - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        for k in [0i64, 2, 3, -2, -3, 4] {
            let c = f.coeff(k);
            assert!((0..3).all(|i| c[i].norm() < 1e-14), "k={k}");
        }
    }

    #[test]
    fn mode_three_isolated_by_quadrature_oracle() {
        // cos(2 pi 3 xi) in the first component, N = 16: the direct
        // rectangle-rule quadrature of u e^{-2 pi i k xi} must agree with
        // analyze for every k, and only |k| = 3 survives.
        let n = 16;
        let samples: Vec<_> = grid(n)
            .iter()
            .map(|&xi| Vector3::new((2.0 * PI * 3.0 * xi).cos(), 0.0, 0.0))
            .collect();
        let f = SpectralField::analyze(&samples).unwrap();
        for k in -(n as i64) / 2..=(n as i64) / 2 {
            // independent quadrature oracle
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let xi = j as f64 / n as f64;
                acc += Complex64::from_polar(1.0, -2.0 * PI * k as f64 * xi) * s[0];
            }
            acc /= n as f64;
            let got = f.coeff(k)[0];
            assert!((got - acc).norm() < 1e-13, "k={k}: {got} vs {acc}");
            if k.abs() != 3 {
                assert!(got.norm() < 1e-13, "k={k} should vanish");
            } else {
                assert!((got.re - 0.5).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn analyze_rejects_bad_grid_sizes() {
        for n in [0usize, 2, 6, 12, 100] {
            let samples = vec![Vector3::zeros(); n];
            assert!(matches!(
                SpectralField::analyze(&samples),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn synthesize_zero_field_and_dc_term() {
        let z = SpectralField::zeros(8).unwrap();
        assert!(z.synthesize(8).unwrap().iter().all(|v| v.norm() == 0.0));

        let f = SpectralField::from_wavenumbers(8, |k| {
            if k == 0 {
                Vector3::new(
                    Complex64::new(1.0, 0.0),
                    Complex64::new(2.0, 0.0),
                    Complex64::new(3.0, 0.0),
                )
            } else {
                Vector3::from_element(Complex64::new(0.0, 0.0))
            }
        })
        .unwrap();
        for v in f.synthesize(8).unwrap() {
            assert!((v - Vector3::new(1.0, 2.0, 3.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn synthesize_rejects_broken_symmetry() {
        let f = SpectralField::from_wavenumbers(8, |k| {
            if k == 2 {
                Vector3::new(
                    Complex64::new(1.0, 0.5),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                )
            } else {
                Vector3::from_element(Complex64::new(0.0, 0.0))
            }
        })
        .unwrap();
        assert!(matches!(
            f.synthesize(8),
            Err(Error::DataIntegrity(_))
        ));
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let samples = vec![Vector3::new(4.0, -1.0, 0.5); 16];
        let f = SpectralField::analyze(&samples).unwrap();
        let d = f.derivative(1).unwrap();
        for v in d.synthesize(16).unwrap() {
            assert!(v.norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_single_mode_multiplier() {
        let f = SpectralField::from_wavenumbers(8, |k| {
            if k == 1 {
                Vector3::new(
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                )
            } else {
                Vector3::from_element(Complex64::new(0.0, 0.0))
            }
        })
        .unwrap();
        let d = f.derivative(1).unwrap();
        let c = d.coeff(1)[0];
        assert!((c - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-15);
    }

    #[test]
    fn second_derivative_twice_equals_fourth_once() {
        let samples: Vec<_> = grid(32)
            .iter()
            .map(|&xi| {
                let th = 2.0 * PI * xi;
                Vector3::new(
                    th.cos() + 0.3 * (3.0 * th).sin(),
                    th.sin() - 0.1 * (2.0 * th).cos(),
                    0.2 * (4.0 * th).cos(),
                )
            })
            .collect();
        let f = SpectralField::analyze(&samples).unwrap();
        let twice = f.derivative(2).unwrap().derivative(2).unwrap();
        let once = f.derivative(4).unwrap();
        let scale = once.max_coeff_norm().max(1.0);
        assert!(twice.max_distance(&once) <= 1e-12 * scale);
    }

    #[test]
    fn derivative_order_range_enforced() {
        let f = SpectralField::zeros(8).unwrap();
        assert!(f.derivative(0).is_err());
        assert!(f.derivative(7).is_err());
        assert!(f.derivative(6).is_ok());
    }

    #[test]
    fn sobolev_norm_examples() {
        // constant field -> |c| for any order
        let samples = vec![Vector3::new(-2.5, 0.0, 0.0); 8];
        let f = SpectralField::analyze(&samples).unwrap();
        for m in 0..5 {
            assert!((f.sobolev_norm(m) - 2.5).abs() < 1e-13);
        }

        // single mode k = 1, unit coefficient, m = 1 -> sqrt(1 + 4 pi^2)
        let g = SpectralField::from_wavenumbers(8, |k| {
            if k == 1 {
                Vector3::new(
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                )
            } else {
                Vector3::from_element(Complex64::new(0.0, 0.0))
            }
        })
        .unwrap();
        let expect = (1.0 + 4.0 * PI * PI).sqrt();
        assert!((g.sobolev_norm(1) - expect).abs() < 1e-12);

        // monotone nondecreasing in m
        let mut prev = 0.0;
        for m in 0..8 {
            let v = g.sobolev_norm(m);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn parseval_matches_grid_quadrature() {
        let samples: Vec<_> = grid(32)
            .iter()
            .map(|&xi| {
                let th = 2.0 * PI * xi;
                Vector3::new(1.0 + th.cos(), (2.0 * th).sin(), 0.5 * (5.0 * th).cos())
            })
            .collect();
        let f = SpectralField::analyze(&samples).unwrap();
        let quad: f64 =
            samples.iter().map(|v| v.norm_squared()).sum::<f64>() / samples.len() as f64;
        let norm2 = f.sobolev_norm(0).powi(2);
        assert!((norm2 - quad).abs() <= 1e-10 * quad.max(1.0));
    }

    #[test]
    fn upsampled_synthesis_interpolates() {
        let curve = |xi: f64| {
            let th = 2.0 * PI * xi;
            Vector3::new(th.cos(), th.sin() + 0.2 * (3.0 * th).cos(), 0.1 * (2.0 * th).sin())
        };
        let samples: Vec<_> = grid(16).iter().map(|&xi| curve(xi)).collect();
        let f = SpectralField::analyze(&samples).unwrap();
        let fine = f.synthesize(64).unwrap();
        for (j, v) in fine.iter().enumerate() {
            let xi = j as f64 / 64.0;
            assert!((v - curve(xi)).norm() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn pointwise_evaluate_matches_synthesis() {
        let samples: Vec<_> = grid(16)
            .iter()
            .map(|&xi| {
                let th = 2.0 * PI * xi;
                Vector3::new(th.cos(), 0.3 * (2.0 * th).sin(), -0.2 * (3.0 * th).cos())
            })
            .collect();
        let f = SpectralField::analyze(&samples).unwrap();
        let back = f.synthesize(16).unwrap();
        for (j, v) in back.iter().enumerate() {
            let xi = j as f64 / 16.0;
            assert!((f.evaluate(xi) - v).norm() < 1e-12);
        }
    }

    #[test]
    fn complex_derivative_plane_wave() {
        let n = 32;
        let values: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * 3.0 * j as f64 / n as f64))
            .collect();
        let d = complex_derivative(&values, 2).unwrap();
        let factor = -(2.0 * PI * 3.0).powi(2);
        for (out, val) in d.iter().zip(&values) {
            assert!((out - val * factor).norm() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn round_trip_reproduces_samples(seed in 0u64..200) {
            // random band-limited smooth curve
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 64;
            let mut samples = vec![Vector3::zeros(); n];
            for k in 1..=6i32 {
                let amp = 0.5 / (k * k) as f64;
                for comp in 0..3 {
                    let a = amp * rng.random_range(-1.0..1.0);
                    let b = amp * rng.random_range(-1.0..1.0);
                    for (j, s) in samples.iter_mut().enumerate() {
                        let th = 2.0 * PI * k as f64 * j as f64 / n as f64;
                        s[comp] += a * th.cos() + b * th.sin();
                    }
                }
            }
            let f = SpectralField::analyze(&samples).unwrap();
            let back = f.synthesize(n).unwrap();
            let scale = samples.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for (orig, rec) in samples.iter().zip(&back) {
                prop_assert!((orig - rec).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn analyze_is_linear(seed in 0u64..100) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 32;
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vector3<f64>> {
                (0..n)
                    .map(|_| Vector3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ))
                    .collect()
            };
            let u = mk(&mut rng);
            let w = mk(&mut rng);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let combo: Vec<Vector3<f64>> = u.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
            let fu = SpectralField::analyze(&u).unwrap();
            let fw = SpectralField::analyze(&w).unwrap();
            let direct = SpectralField::analyze(&combo).unwrap();
            let linear = fu.linear_comb(a, &fw, b).unwrap();
            prop_assert!(direct.max_distance(&linear) < 1e-12);
        }

        #[test]
        fn derivative_preserves_hermitian_symmetry(seed in 0u64..50, order in 1u32..=6) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 32;
            let samples: Vec<Vector3<f64>> = (0..n)
                .map(|_| Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ))
                .collect();
            let f = SpectralField::analyze(&samples).unwrap();
            let d = f.derivative(order).unwrap();
            prop_assert_eq!(d.hermitian_defect(), 0.0);
        }
    }
}
