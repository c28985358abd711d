"""CSV tables for plotting proofs and homogeneous dynamics."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Sequence

import numpy as np

from nlscap import chebyshev
from nlscap.integrator import StepCertificate
from nlscap.interval import add_upper

if TYPE_CHECKING:
    from nlscap.globalexist import PhasePortrait
    from nlscap.pipeline import ProofCertificate

STEPS_HEADER = (
    "step",
    "t_start",
    "t_end",
    "h",
    "rho0",
    "rho_inf",
    "norm_upper",
    "eps0",
    "eps_inf",
    "delta0",
    "delta_inf",
    "W0",
    "kappa",
    "wall_clock",
)


def _write_rows(
    path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    with open(path, "w", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(header)
        writer.writerows(rows)


def write_steps_csv(steps: Sequence[StepCertificate], path: str | Path) -> None:
    """One row per step; ``norm_upper`` bounds ``sup_J ‖a(t)‖_ν`` inside the tube."""
    rows = []
    for step in steps:
        tube = add_upper(step.rho0, step.rho_inf)
        rows.append((
            step.index,
            step.solution.t0,
            step.t_end,
            step.h,
            step.rho0,
            step.rho_inf,
            float(add_upper(step.abar_norm, tube)),
            step.eps0,
            step.eps_inf,
            step.delta0,
            step.delta_inf,
            step.evolution.W0,
            step.evolution.kappa,
            step.wall_clock,
        ))
    _write_rows(path, STEPS_HEADER, rows)


def orbit_samples(
    certificate: ProofCertificate, x_points: int = 32
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Midpoint values of the certified orbit at the Chebyshev nodes of every step.

    Returns the times, the x grid and the complex values, one row per time. The times,
    positions and values are those of the orbit the certificate describes, so
    conjugation and rescaling are applied.
    """
    x = np.arange(x_points) / x_points
    times = []
    coefficients = []
    for step in certificate.steps:
        solution = step.solution
        t = solution.t0 + 0.5 * solution.h * (chebyshev.nodes(solution.N) + 1)
        times.append(t)
        coefficients.append(solution(t))
    t = np.concatenate(times)
    grid = np.concatenate(coefficients)
    k = np.arange(1, grid.shape[1])
    modes = 2 * np.cos(2 * np.pi * np.multiply.outer(k, x))
    values = grid[:, :1] + grid[:, 1:] @ modes
    if certificate.conjugated:
        t = -t
        values = np.conj(values)
    n = certificate.rescaling
    return (
        t / certificate.time_factor,
        x / n,
        certificate.amplitude_factor * values,
    )


def write_orbit_csv(
    certificate: ProofCertificate, path: str | Path, x_points: int = 32
) -> None:
    """Wide table: ``t``, tube radii, then ``Re u`` and ``Im u`` at every grid point."""
    t, x, values = orbit_samples(certificate, x_points)
    radii = np.repeat(
        [(step.rho0, step.rho_inf) for step in certificate.steps],
        [step.solution.N for step in certificate.steps],
        axis=0,
    )
    header = [
        "step",
        "t",
        "rho0",
        "rho_inf",
        *(f"re_u({position:.6g})" for position in x),
        *(f"im_u({position:.6g})" for position in x),
    ]
    steps = np.repeat(
        [step.index for step in certificate.steps],
        [step.solution.N for step in certificate.steps],
    )
    rows = (
        [int(index), time, *radius, *value.real, *value.imag]
        for index, time, radius, value in zip(steps, t, radii, values)
    )
    _write_rows(path, header, rows)


def write_portrait_csv(portrait: PhasePortrait, path: str | Path) -> tuple[Path, Path]:
    """Write the vector field to ``path`` and the trajectories next to it."""
    field_path = Path(path)
    trajectory_path = field_path.with_name(f"{field_path.stem}-trajectories.csv")
    _write_rows(field_path, portrait.FIELD_HEADER, portrait.vector_field.tolist())
    rows = [
        (int(index), t, x, y) for index, t, x, y in portrait.trajectories.tolist()
    ]
    _write_rows(trajectory_path, portrait.TRAJECTORY_HEADER, rows)
    return field_path, trajectory_path
