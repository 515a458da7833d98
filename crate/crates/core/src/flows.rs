//! Ambient flow fields `F(x, t)` and their spatial Jacobians.
//!
//! The builtin families split along the structural dichotomy that matters
//! for filament stretching: fields with a skew-symmetric Jacobian (uniform
//! translation, rigid rotation) transport the curve rigidly, anything with a
//! symmetric part (e.g. a planar strain) stretches it.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar time profile `g(t)` for modulated fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    Constant { value: f64 },
    Cosine {
        amplitude: f64,
        angular_frequency: f64,
        phase: f64,
    },
}

impl Modulation {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Modulation::Constant { value } => *value,
            Modulation::Cosine {
                amplitude,
                angular_frequency,
                phase,
            } => amplitude * (angular_frequency * t + phase).cos(),
        }
    }
}

/// External velocity field acting on the filament.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowField {
    /// No ambient flow.
    #[default]
    Zero,
    /// Constant translation `F = U`.
    Uniform { velocity: [f64; 3] },
    /// Rigid rotation `F = Omega × (x - c)`.
    RigidRotation {
        angular_velocity: [f64; 3],
        center: [f64; 3],
    },
    /// Affine field `F = A x + b`; unbounded at infinity, but filaments stay
    /// in bounded sets over finite horizons.
    Linear {
        matrix: [[f64; 3]; 3],
        offset: [f64; 3],
    },
    /// Scalar time modulation of an inner builtin field.
    TimeModulated {
        modulation: Modulation,
        inner: Box<FlowField>,
    },
}

fn vec3(a: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn mat3(a: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| a[r][c])
}

impl FlowField {
    /// Velocity at position `x` and time `t`.
    pub fn evaluate(&self, x: &Vector3<f64>, t: f64) -> Vector3<f64> {
        match self {
            FlowField::Zero => Vector3::zeros(),
            FlowField::Uniform { velocity } => vec3(velocity),
            FlowField::RigidRotation {
                angular_velocity,
                center,
            } => vec3(angular_velocity).cross(&(x - vec3(center))),
            FlowField::Linear { matrix, offset } => mat3(matrix) * x + vec3(offset),
            FlowField::TimeModulated { modulation, inner } => {
                modulation.value(t) * inner.evaluate(x, t)
            }
        }
    }

    /// Spatial Jacobian `DF(x, t)`.
    #[allow(clippy::only_used_in_recursion)] // x is the evaluation point
    pub fn jacobian(&self, x: &Vector3<f64>, t: f64) -> Matrix3<f64> {
        match self {
            FlowField::Zero | FlowField::Uniform { .. } => Matrix3::zeros(),
            FlowField::RigidRotation {
                angular_velocity, ..
            } => {
                let w = vec3(angular_velocity);
                Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
            }
            FlowField::Linear { matrix, .. } => mat3(matrix),
            FlowField::TimeModulated { modulation, inner } => {
                modulation.value(t) * inner.jacobian(x, t)
            }
        }
    }

    /// Structural test `DF + DF^T = 0`, exact on the parameters.
    ///
    /// Only meaningful for the kinds whose Jacobian is a fixed matrix; a
    /// time-modulated field has a time-varying Jacobian, so the query is
    /// deferred to its inner field by the caller.
    pub fn is_skew(&self) -> Result<bool> {
        match self {
            FlowField::Zero | FlowField::Uniform { .. } | FlowField::RigidRotation { .. } => {
                Ok(true)
            }
            FlowField::Linear { matrix, .. } => {
                let a = mat3(matrix);
                Ok((a + a.transpose()) == Matrix3::zeros())
            }
            FlowField::TimeModulated { .. } => Err(Error::NotApplicable(
                "is_skew is structural; query the inner field of a time-modulated flow".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_uniform_fields() {
        let zero = FlowField::Zero;
        assert_eq!(zero.evaluate(&Vector3::new(1.0, 2.0, 3.0), 0.5), Vector3::zeros());
        let uni = FlowField::Uniform {
            velocity: [1.0, 0.0, 0.0],
        };
        for x in [Vector3::zeros(), Vector3::new(-4.0, 2.0, 9.0)] {
            assert_eq!(uni.evaluate(&x, 1.0), Vector3::new(1.0, 0.0, 0.0));
        }
        assert_eq!(uni.jacobian(&Vector3::zeros(), 0.0), Matrix3::zeros());
    }

    #[test]
    fn rigid_rotation_cross_product_and_jacobian() {
        let rot = FlowField::RigidRotation {
            angular_velocity: [0.0, 0.0, 1.0],
            center: [0.0, 0.0, 0.0],
        };
        let v = rot.evaluate(&Vector3::new(1.0, 0.0, 0.0), 0.0);
        assert!((v - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        let j = rot.jacobian(&Vector3::new(2.0, -1.0, 0.5), 3.0);
        let expect = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(j, expect);
    }

    #[test]
    fn skew_classification() {
        assert!(FlowField::Zero.is_skew().unwrap());
        assert!(FlowField::Uniform { velocity: [3.0, 1.0, -2.0] }.is_skew().unwrap());
        assert!(FlowField::RigidRotation {
            angular_velocity: [0.1, 0.2, 0.3],
            center: [1.0, 0.0, 0.0],
        }
        .is_skew()
        .unwrap());

        let strain = FlowField::Linear {
            matrix: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]],
            offset: [0.0; 3],
        };
        assert!(!strain.is_skew().unwrap());

        let spin = FlowField::Linear {
            matrix: [[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            offset: [1.0, 0.0, 0.0],
        };
        assert!(spin.is_skew().unwrap());

        let modulated = FlowField::TimeModulated {
            modulation: Modulation::Constant { value: 2.0 },
            inner: Box::new(FlowField::Zero),
        };
        assert!(matches!(modulated.is_skew(), Err(Error::NotApplicable(_))));
    }

    /// Finite-difference oracle for the Jacobian of every builtin kind.
    #[test]
    fn jacobian_matches_finite_differences() {
        let fields = vec![
            FlowField::Zero,
            FlowField::Uniform {
                velocity: [0.3, -1.0, 0.7],
            },
            FlowField::RigidRotation {
                angular_velocity: [0.5, -0.2, 1.5],
                center: [0.1, 0.2, -0.3],
            },
            FlowField::Linear {
                matrix: [[1.0, 0.5, 0.0], [-0.5, -1.0, 0.2], [0.3, 0.0, 0.0]],
                offset: [0.0, 1.0, 2.0],
            },
            FlowField::TimeModulated {
                modulation: Modulation::Cosine {
                    amplitude: 1.3,
                    angular_frequency: 2.0,
                    phase: 0.4,
                },
                inner: Box::new(FlowField::RigidRotation {
                    angular_velocity: [0.0, 0.0, 2.0],
                    center: [0.0; 3],
                }),
            },
        ];
        let probes = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, -0.5, 0.7),
            Vector3::new(-2.0, 0.3, 1.1),
        ];
        let h = 1e-6;
        for field in &fields {
            for x in &probes {
                for t in [0.0, 0.37] {
                    let j = field.jacobian(x, t);
                    for c in 0..3 {
                        let mut e = Vector3::zeros();
                        e[c] = h;
                        let fd = (field.evaluate(&(x + e), t) - field.evaluate(&(x - e), t))
                            / (2.0 * h);
                        for r in 0..3 {
                            assert!(
                                (j[(r, c)] - fd[r]).abs() <= 1e-6 * (1.0 + j[(r, c)].abs()),
                                "field {field:?} entry ({r},{c})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn continuous_in_time() {
        let field = FlowField::TimeModulated {
            modulation: Modulation::Cosine {
                amplitude: 1.0,
                angular_frequency: 5.0,
                phase: 0.0,
            },
            inner: Box::new(FlowField::Uniform {
                velocity: [1.0, 0.0, 0.0],
            }),
        };
        let x = Vector3::new(0.5, 0.5, 0.0);
        let mut prev = field.evaluate(&x, 0.0);
        for i in 1..=100 {
            let t = i as f64 * 1e-3;
            let cur = field.evaluate(&x, t);
            assert!((cur - prev).norm() < 1e-2);
            prev = cur;
        }
    }
}
