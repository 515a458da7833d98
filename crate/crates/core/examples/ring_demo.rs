//! Minimal library walkthrough: evolve a vortex ring, compare it with the
//! exact translating solution, and print the energy diagnostics.

use std::f64::consts::PI;

use vfsim_core::energy::{modified_energy, EnergyVariant};
use vfsim_core::filament::Filament;
use vfsim_core::flows::FlowField;
use vfsim_core::solver::{evolve, SolverConfig};
use vfsim_core::validation::traveling_ring_oracle;

fn main() -> vfsim_core::Result<()> {
    let radius = 1.0 / (2.0 * PI); // unit-speed parametrization
    let ring = Filament::circle(radius, 128)?;
    let cfg = SolverConfig {
        dt: 1e-4,
        horizon: 0.05,
        grid: 128,
        frame_stride: Some(100),
        ..SolverConfig::default()
    };

    let trajectory = evolve(&ring, &FlowField::Zero, &cfg)?;
    println!("frames: {}, termination: {:?}", trajectory.frames.len(), trajectory.termination);

    let (t_end, last) = trajectory.frames.last().unwrap();
    let exact = traveling_ring_oracle(radius, *t_end, 128)?;
    let sup_error = last
        .positions()
        .iter()
        .zip(exact.positions())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    println!("t = {t_end}: sup distance to the exact translating ring = {sup_error:.3e}");

    let report = modified_energy(last, 3, EnergyVariant::WithKFactor)?;
    println!(
        "modified energy E^3 = {:.6e}, ||x||_5^2 = {:.6e}, ratio = {:.4}",
        report.e_k, report.sobolev_sq, report.ratio
    );
    Ok(())
}
