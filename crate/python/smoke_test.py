#!/usr/bin/env python3
"""Smoke test for the vfsim Python extension.

Builds nothing itself: it locates the compiled cdylib under target/
(release preferred), stages it under the importable name, and exercises
the main types end to end. Exit code 0 means every check passed.

Usage:
    cargo build -p vfsim-python --release
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    candidates = [
        REPO / "target" / "release" / "libvfsim.so",
        REPO / "target" / "debug" / "libvfsim.so",
        REPO / "target" / "release" / "libvfsim.dylib",
        REPO / "target" / "debug" / "libvfsim.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("no compiled extension found; run `cargo build -p vfsim-python` first")
    stage = Path(tempfile.mkdtemp(prefix="vfsim-smoke-"))
    shutil.copy2(built, stage / "vfsim.so")
    sys.path.insert(0, str(stage))


def close(a, b, tol):
    return abs(a - b) <= tol


def main() -> int:
    stage_module()
    import vfsim

    checks = 0

    # ring geometry: curvature 1/R, zero torsion, arc length 2 pi R
    radius = 1.0 / (2.0 * math.pi)
    ring = vfsim.Filament.circle(radius, 128)
    geometry = ring.geometry(with_hasimoto=True)
    assert close(geometry.arc_length, 1.0, 1e-12), geometry.arc_length
    assert all(close(k, 2.0 * math.pi, 1e-8) for k in geometry.curvature)
    assert all(abs(t) < 1e-6 for t in geometry.torsion)
    psi = geometry.hasimoto
    assert all(abs(p - 2.0 * math.pi) < 1e-8 for p in psi)
    checks += 1

    # self-induction velocity of the ring: (0, 0, 1/R)
    velocity = ring.lie_velocity()
    assert all(
        abs(v[0]) < 1e-10 and abs(v[1]) < 1e-10 and close(v[2], 1.0 / radius, 1e-8)
        for v in velocity
    )
    checks += 1

    # evolve under zero flow and compare against the exact translating ring
    config = vfsim.SolverConfig(dt=1e-4, horizon=0.01, grid=128, frame_stride=20)
    trajectory = vfsim.evolve(ring, vfsim.Flow.zero(), config)
    assert trajectory.termination() == "completed"
    worst = 0.0
    for index, t in enumerate(trajectory.times()):
        exact = vfsim.traveling_ring(radius, t, 128)
        frame = trajectory.frame(index)
        for p, q in zip(frame.positions(), exact.positions()):
            worst = max(worst, math.dist(p, q))
    assert worst < 1e-8, worst
    checks += 1

    # flow classification: rotation is skew, strain is not
    rotation = vfsim.Flow.rigid_rotation([0.0, 0.0, 1.0])
    assert rotation.is_skew()
    assert rotation.evaluate([1.0, 0.0, 0.0], 0.0) == [0.0, 1.0, 0.0]
    strain = vfsim.Flow.linear([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]])
    assert not strain.is_skew()
    checks += 1

    # modified energy of a wobbly curve: positive, ratio in a sane band
    wobble = vfsim.Filament.perturbed_circle(radius, 3, 0.02, 128)
    report = wobble.energy_report(3)
    assert report.e_k > 0.0
    assert 1e-3 < report.ratio < 1e3, report.ratio
    assert all(a > 0.0 for a in report.gauge_a)
    checks += 1

    # regularized integrator with Picard refinement stays close to the
    # unregularized reference over a short horizon
    reg = vfsim.SolverConfig(
        epsilon=1e-4,
        dt=1e-4,
        horizon=5e-3,
        grid=128,
        integrator="exp_euler_regularized",
        frame_stride=50,
    )
    reg_traj = vfsim.evolve(ring, vfsim.Flow.zero(), reg)
    assert reg_traj.termination() == "completed"
    final = reg_traj.frame(len(reg_traj) - 1)
    exact = vfsim.traveling_ring(radius, reg_traj.times()[-1], 128)
    drift = max(
        math.dist(p, q) for p, q in zip(final.positions(), exact.positions())
    )
    assert drift < 5e-3, drift
    checks += 1

    # bad input surfaces as ValueError
    try:
        vfsim.SolverConfig(alpha=0.5)
    except ValueError:
        checks += 1
    else:
        raise AssertionError("alpha = 0.5 should be rejected")

    print(f"smoke test passed ({checks} checks)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
