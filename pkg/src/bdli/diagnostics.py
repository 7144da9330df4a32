"""Conserved-quantity and orbit diagnostics.

For an axisymmetric field the toroidal component of the conjugate momentum
p = m v + q A is a constant of the exact motion:

    p_xi = m (x v_y - y v_x) + q R A_xi = m (x v_y - y v_x) + q (x A_y - y A_x).

The magnetic moment mu = |v_perp|^2 / (2 |B|) is the adiabatic invariant of
the gyro-motion (for a field with |B| = R this is the familiar
v_perp^2 / 2R).  Errors are reported as absolute differences
Q(z_n) - Q(z_0); relative errors are available via a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import ChargedParticleSystem, PhaseState, energy
from .integrators import Trajectory

QUANTITIES = ("H", "p_xi", "mu")


class ZeroFieldError(ValueError):
    """Raised when the magnetic moment is requested where |B| = 0."""


@dataclass(frozen=True)
class DiagnosticRecord:
    """Per-step diagnostic row: invariants plus cylindrical position."""

    time: float
    H: float
    p_xi: float
    mu: float
    R: float
    z_coord: float
    iterations: int


def toroidal_momentum(sys: ChargedParticleSystem, z: PhaseState) -> float:
    """Toroidal canonical momentum m (x v_y - y v_x) + q R A_xi."""
    x, v = z.x, z.v
    ax, ay, _ = sys.field.a_at(x[0], x[1], x[2])
    return sys.mass * (x[0] * v[1] - x[1] * v[0]) + sys.charge * (
        x[0] * ay - x[1] * ax
    )


def magnetic_moment(sys: ChargedParticleSystem, z: PhaseState) -> float:
    """Magnetic moment |v_perp|^2 / (2 |B|) with v_perp orthogonal to B."""
    x, v = z.x, z.v
    bx, by, bz = sys.field.b_at(x[0], x[1], x[2])
    b2 = bx * bx + by * by + bz * bz
    if b2 == 0.0:
        raise ZeroFieldError(f"magnetic moment undefined where B = 0 (at {x})")
    bnorm = math.sqrt(b2)
    vpar = (v[0] * bx + v[1] * by + v[2] * bz) / bnorm
    vperp2 = float(v @ v) - vpar * vpar
    return vperp2 / (2.0 * bnorm)


def _evaluate(sys: ChargedParticleSystem, quantity: str, z: PhaseState) -> float:
    if quantity == "H":
        return energy(sys, z)
    if quantity == "p_xi":
        return toroidal_momentum(sys, z)
    if quantity == "mu":
        return magnetic_moment(sys, z)
    raise ValueError(f"unknown quantity {quantity!r} (expected one of {QUANTITIES})")


def quantity_series(
    sys: ChargedParticleSystem, traj: Trajectory, quantity: str
) -> np.ndarray:
    """Value of a conserved quantity at every recorded state."""
    return np.array(
        [_evaluate(sys, quantity, traj.state(i)) for i in range(len(traj))]
    )


def error_series(
    sys: ChargedParticleSystem,
    traj: Trajectory,
    quantity: str,
    relative: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Times and errors Q(z_n) - Q(z_0) along a trajectory.

    With ``relative=True`` errors are divided by |Q(z_0)| (left absolute
    when the reference value is exactly zero).
    """
    values = quantity_series(sys, traj, quantity)
    err = values - values[0]
    if relative and values[0] != 0.0:
        err = err / abs(values[0])
    return traj.times, err


def cylindrical_projection(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """(R, z) pairs of the trajectory positions, R = sqrt(x^2 + y^2)."""
    p = traj.positions
    return np.hypot(p[:, 0], p[:, 1]), p[:, 2].copy()


def diagnostic_records(
    sys: ChargedParticleSystem, traj: Trajectory
) -> list[DiagnosticRecord]:
    """Full per-state diagnostic rows for a trajectory."""
    has_A = sys.field.provides_vector_potential
    R, zc = cylindrical_projection(traj)
    t = traj.times
    out = []
    for i in range(len(traj)):
        z = traj.state(i)
        out.append(
            DiagnosticRecord(
                time=float(t[i]),
                H=energy(sys, z),
                p_xi=toroidal_momentum(sys, z) if has_A else math.nan,
                mu=magnetic_moment(sys, z),
                R=float(R[i]),
                z_coord=float(zc[i]),
                iterations=int(traj.iterations[i - 1]) if i > 0 else 0,
            )
        )
    return out
