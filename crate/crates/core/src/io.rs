//! Run configuration and file formats.
//!
//! * Config: a JSON document (schema below, all sections optional with
//!   documented defaults).
//! * Frames: newline-delimited JSON records, one per stored frame, each
//!   carrying the time, grid size, flat position array (full-precision
//!   decimal), minimum speed and arc length. Any frame record can seed a
//!   new run as initial data.
//! * Diagnostics: comma-separated tables with a header row.
//! * Manifest: one JSON document echoing the configuration and the
//!   termination record.
//!
//! All files are written atomically (temp file + rename).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::energy::{admissible_orders, EnergyVariant};
use crate::error::{Error, Result};
use crate::filament::Filament;
use crate::flows::FlowField;
use crate::solver::{SolverConfig, Termination, Trajectory};
use crate::validation::ExperimentThresholds;

/// Initial curve selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    PerturbedCircle {
        radius: f64,
        mode: u32,
        amplitude: f64,
    },
    /// First frame record of the referenced frames file.
    File { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Circle {
            radius: 1.0 / (2.0 * std::f64::consts::PI),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Emit arc length, minimum speed and peak curvature columns.
    pub geometry: bool,
    /// Energy orders to monitor; each k needs `3 <= k <= m-2` (and `k <= 5`,
    /// the derivative budget of the spectral layer).
    pub energy_orders: Vec<usize>,
    pub energy_variant: EnergyVariant,
    /// Attach the Hasimoto wave function and emit the Schrödinger residual
    /// column.
    pub hasimoto: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            geometry: true,
            energy_orders: vec![3],
            energy_variant: EnergyVariant::WithKFactor,
            hasimoto: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Store every n-th step; overrides the solver-level stride when set.
    pub frame_stride: Option<usize>,
    pub diagnostics: DiagnosticsConfig,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            frame_stride: None,
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub flow: FlowField,
    pub initial: InitialData,
    pub outputs: OutputConfig,
    pub thresholds: ExperimentThresholds,
}

impl RunConfig {
    /// Solver configuration with the output-level stride folded in.
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = self.solver.clone();
        if self.outputs.frame_stride.is_some() {
            cfg.frame_stride = self.outputs.frame_stride;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let admissible = admissible_orders(self.solver.sobolev_order);
        for &k in &self.outputs.diagnostics.energy_orders {
            if !admissible.contains(&k) {
                return Err(Error::Config(format!(
                    "energy order k = {k} outside the admissible range \
                     {}..={} for sobolev_order m = {} (requires 3 <= k <= m-2, k <= 5)",
                    admissible.start(),
                    admissible.end(),
                    self.solver.sobolev_order
                )));
            }
        }
        match &self.initial {
            InitialData::Circle { radius } => {
                if radius.is_nan() || *radius <= 0.0 || !radius.is_finite() {
                    return Err(Error::Config(format!(
                        "initial.radius must be positive and finite, got {radius}"
                    )));
                }
            }
            InitialData::Ellipse { a, b } => {
                let axes_ok = *a > 0.0 && *b > 0.0;
                if !axes_ok {
                    return Err(Error::Config(format!(
                        "initial ellipse semi-axes must be positive, got a = {a}, b = {b}"
                    )));
                }
            }
            InitialData::PerturbedCircle {
                radius,
                mode,
                amplitude,
            } => {
                if radius.is_nan() || *radius <= 0.0 || *mode == 0 || amplitude.is_nan() || *amplitude < 0.0 {
                    return Err(Error::Config(format!(
                        "perturbed circle needs radius > 0, mode >= 1, amplitude >= 0; \
                         got radius = {radius}, mode = {mode}, amplitude = {amplitude}"
                    )));
                }
            }
            InitialData::File { .. } => {}
        }
        Ok(())
    }
}

/// Parse and validate a configuration document. Schema violations report
/// the offending key path; range violations cite the violated constraint.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut deserializer = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut deserializer)
        .map_err(|e| Error::Config(format!("at key '{}': {}", e.path(), e.inner())))?;
    config.validate()?;
    Ok(config)
}

/// Build the initial filament described by the configuration, on the
/// configured grid.
pub fn build_initial(config: &RunConfig) -> Result<Filament> {
    let n = config.solver.grid;
    match &config.initial {
        InitialData::Circle { radius } => Filament::circle(*radius, n),
        InitialData::Ellipse { a, b } => Filament::ellipse(*a, *b, n),
        InitialData::PerturbedCircle {
            radius,
            mode,
            amplitude,
        } => Filament::perturbed_circle(*radius, *mode, *amplitude, n),
        InitialData::File { path } => {
            let filament = load_initial_filament(path)?;
            if filament.grid_size() != n {
                filament.resampled(n)
            } else {
                Ok(filament)
            }
        }
    }
}

/// One stored frame. Positions are the flat array
/// `[x0, y0, z0, x1, y1, z1, ...]` in full-precision decimal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub t: f64,
    pub n: usize,
    pub positions: Vec<f64>,
    pub min_speed: f64,
    pub arc_length: f64,
}

impl FrameRecord {
    pub fn from_filament(t: f64, f: &Filament) -> Self {
        FrameRecord {
            t,
            n: f.grid_size(),
            positions: f
                .positions()
                .iter()
                .flat_map(|p| [p.x, p.y, p.z])
                .collect(),
            min_speed: f.min_speed(),
            arc_length: f.arc_length(),
        }
    }

    pub fn to_filament(&self) -> Result<Filament> {
        if self.positions.len() != 3 * self.n {
            return Err(Error::Input(format!(
                "frame record inconsistent: n = {} but {} coordinates",
                self.n,
                self.positions.len()
            )));
        }
        let positions = self
            .positions
            .chunks_exact(3)
            .map(|c| Vector3::new(c[0], c[1], c[2]))
            .collect();
        Filament::from_positions(positions, self.t)
    }
}

/// Trajectory manifest: everything needed to reproduce and read the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    /// Full configuration echo when the run came from a config file.
    pub run_config: Option<RunConfig>,
    pub solver: SolverConfig,
    pub termination: Termination,
    pub frames_file: String,
    pub frame_count: usize,
}

fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| Error::Input(format!("no parent directory for {}", path.display())))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Write the frames file and manifest for a trajectory. Returns the
/// manifest that was written to `manifest.json`.
pub fn write_trajectory(
    traj: &Trajectory,
    run_config: Option<&RunConfig>,
    dir: &Path,
) -> Result<Manifest> {
    let mut lines = String::new();
    for (t, f) in &traj.frames {
        let record = FrameRecord::from_filament(*t, f);
        lines.push_str(
            &serde_json::to_string(&record)
                .map_err(|e| Error::Input(format!("frame serialization: {e}")))?,
        );
        lines.push('\n');
    }
    let frames_file = "frames.jsonl";
    atomic_write(&dir.join(frames_file), lines.as_bytes())?;

    let manifest = Manifest {
        run_config: run_config.cloned(),
        solver: traj.config.clone(),
        termination: traj.termination.clone(),
        frames_file: frames_file.to_string(),
        frame_count: traj.frames.len(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Input(format!("manifest serialization: {e}")))?;
    atomic_write(&dir.join("manifest.json"), manifest_json.as_bytes())?;
    Ok(manifest)
}

/// Read all frame records from a frames file.
pub fn read_frames(path: &Path) -> Result<Vec<FrameRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            serde_json::from_str(line).map_err(|e| Error::Format {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path,
        message: e.to_string(),
    })
}

/// Load the first frame record of a frames file as initial data.
pub fn load_initial_filament(path: &Path) -> Result<Filament> {
    let frames = read_frames(path)?;
    let first = frames
        .first()
        .ok_or_else(|| Error::Input(format!("{}: no frame records", path.display())))?;
    first.to_filament()
}

/// Named scalar series over a shared abscissa.
#[derive(Debug, Clone)]
pub struct DiagnosticsTable {
    pub time: Vec<f64>,
    /// Header label of the abscissa column (usually "t").
    pub time_label: String,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl DiagnosticsTable {
    pub fn new(time: Vec<f64>) -> Self {
        DiagnosticsTable {
            time,
            time_label: "t".into(),
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push((name.to_string(), values));
    }
}

/// Write a comma-separated diagnostics table. Every column must match the
/// time column in length.
pub fn write_diagnostics(table: &DiagnosticsTable, dir: &Path, filename: &str) -> Result<PathBuf> {
    for (name, values) in &table.columns {
        if values.len() != table.time.len() {
            return Err(Error::Input(format!(
                "ragged series: column '{name}' has {} rows, time column has {}",
                values.len(),
                table.time.len()
            )));
        }
    }
    let mut text = String::new();
    text.push_str(&table.time_label);
    for (name, _) in &table.columns {
        text.push(',');
        text.push_str(name);
    }
    text.push('\n');
    for i in 0..table.time.len() {
        text.push_str(&format!("{}", table.time[i]));
        for (_, values) in &table.columns {
            text.push_str(&format!(",{}", values[i]));
        }
        text.push('\n');
    }
    let path = dir.join(filename);
    atomic_write(&path, text.as_bytes())?;
    Ok(path)
}
