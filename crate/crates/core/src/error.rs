use std::path::PathBuf;

use thiserror::Error;

use crate::filament::GeometryReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Data violates a structural invariant (e.g. Hermitian symmetry of the
    /// coefficients of a real field).
    #[error("data integrity: {0}")]
    DataIntegrity(String),

    /// The filament speed `|x_xi|` dropped below the admissible floor, so the
    /// induction velocity is not evaluable.
    #[error("degenerate filament{context}: min |x_xi| = {min_speed:.6e} at xi = {xi:.6}")]
    Degenerate {
        min_speed: f64,
        /// Grid location of the minimum.
        xi: f64,
        /// Extra location info, e.g. " (rk4 stage 3)". Empty when not needed.
        context: String,
    },

    /// The Hasimoto transform is undefined because the curvature vanishes
    /// (or nearly vanishes) somewhere on the curve. The geometry report is
    /// still available, without the complex wave function.
    #[error(
        "Hasimoto transform undefined: min curvature {min_curvature:.6e} \
         below threshold {threshold:.1e}"
    )]
    HasimotoUndefined {
        min_curvature: f64,
        threshold: f64,
        /// The report computed without the wave function.
        report: Box<GeometryReport>,
    },

    /// Per-step fixed-point iteration failed to reach the tolerance.
    #[error(
        "Picard iteration diverged at t = {t:.6}: defect {defect:.3e} after \
         {iterations} iterations (tolerance {tol:.1e})"
    )]
    PicardDiverged {
        t: f64,
        iterations: usize,
        defect: f64,
        tol: f64,
    },

    /// The requested query does not apply to this variant.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Malformed input data (ragged series, too few frames, ...).
    #[error("input error: {0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
