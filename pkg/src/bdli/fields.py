"""Analytic electromagnetic field models.

Each model bundles evaluators for the magnetic field B(x), the electric
field E(x), the scalar potential phi(x) and (where available) the vector
potential A(x), all in normalized units and Cartesian components.  The
models are immutable and their evaluators are pure functions of position,
so they are safe to share between concurrent callers.

Two hot-path conventions keep the integrators fast: every model exposes
scalar evaluators ``b_at``/``e_at``/``phi_at``/``a_at`` taking three floats
and returning tuples, and the numpy-facing ``eval_*`` wrappers are built on
top of those.  Models whose electric field vanishes identically advertise
it through ``zero_electric`` so the implicit solver can skip the segment
quadrature entirely.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .linalg import Vec3, as_vec3

# Evaluation this close to a model's singular axis is refused outright;
# the reference scenarios never come near it, and silent garbage from a
# 1/R blow-up is worse than a hard error.
SINGULAR_RADIUS = 1e-12


class FieldSingularityError(ValueError):
    """Raised when a field is evaluated inside its singular set."""


class PotentialUnavailableError(ValueError):
    """Raised when a model is asked for a potential it does not provide."""


class FieldModel(ABC):
    """Abstract analytic field: B, E, phi and optionally A evaluators."""

    name: str = "custom"
    #: True when E(x) == 0 everywhere (lets solvers skip quadrature sums).
    zero_electric: bool = False
    #: True when ``a_at`` / ``eval_A`` are implemented.
    provides_vector_potential: bool = False
    #: human-readable description of the excluded points, if any
    singular_set: str = "none"

    # --- scalar core (hot path) -----------------------------------------
    @abstractmethod
    def b_at(self, x: float, y: float, z: float) -> tuple[float, float, float]:
        """Magnetic field components at (x, y, z)."""

    @abstractmethod
    def e_at(self, x: float, y: float, z: float) -> tuple[float, float, float]:
        """Electric field components at (x, y, z)."""

    @abstractmethod
    def phi_at(self, x: float, y: float, z: float) -> float:
        """Scalar potential (potential energy per unit charge) at (x, y, z)."""

    def a_at(self, x: float, y: float, z: float) -> tuple[float, float, float]:
        """Vector potential components at (x, y, z)."""
        raise PotentialUnavailableError(
            f"field model {self.name!r} does not provide a vector potential"
        )

    # --- array-facing wrappers -------------------------------------------
    def eval_B(self, x) -> Vec3:
        p = as_vec3(x)
        return np.array(self.b_at(p[0], p[1], p[2]))

    def eval_E(self, x) -> Vec3:
        p = as_vec3(x)
        return np.array(self.e_at(p[0], p[1], p[2]))

    def eval_phi(self, x) -> float:
        p = as_vec3(x)
        return self.phi_at(p[0], p[1], p[2])

    def eval_A(self, x) -> Vec3:
        p = as_vec3(x)
        return np.array(self.a_at(p[0], p[1], p[2]))

    def parameters(self) -> dict:
        """Constructor parameters, for config round-tripping."""
        return {}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.parameters().items())
        return f"{type(self).__name__}({args})"


def _checked_R(x: float, y: float, name: str) -> float:
    R = math.sqrt(x * x + y * y)
    if R < SINGULAR_RADIUS:
        raise FieldSingularityError(
            f"{name} field evaluated on its singular axis (R = {R:.3e})"
        )
    return R


class CylindricalDriftField(FieldModel):
    """Non-uniform field B = R e_z with a weak repulsive radial E field.

    In cylindrical coordinates (R, xi, z) with R = sqrt(x^2 + y^2):

        B = R e_z,   phi = eps / R,   E = -grad phi = (eps / R^2) e_R,
        A = (R^2 / 3) e_xi   so that   curl A = B.

    Singular on the axis R = 0.
    """

    name = "cylindrical_drift"
    provides_vector_potential = True
    singular_set = "the axis R = sqrt(x^2+y^2) = 0"

    def __init__(self, epsilon: float = 1e-2):
        self.epsilon = float(epsilon)

    def b_at(self, x, y, z):
        R = _checked_R(x, y, self.name)
        return (0.0, 0.0, R)

    def e_at(self, x, y, z):
        R = _checked_R(x, y, self.name)
        k = self.epsilon / (R * R * R)
        return (k * x, k * y, 0.0)

    def phi_at(self, x, y, z):
        R = _checked_R(x, y, self.name)
        return self.epsilon / R

    def a_at(self, x, y, z):
        R = _checked_R(x, y, self.name)
        # A_xi = R^2/3 along e_xi = (-y/R, x/R, 0)
        k = R / 3.0
        return (-k * y, k * x, 0.0)

    def parameters(self):
        return {"epsilon": self.epsilon}


class TokamakField(FieldModel):
    """Axisymmetric tokamak-like magnetic field, no electric field.

    In toroidal coordinates (r, theta, xi) around the magnetic axis at
    major radius R0:

        B = (B0 r / (q R)) e_theta + (B0 R0 / R) e_xi

    with safety factor q.  The Cartesian components (the canonical form
    used by the integrators) are

        B_x = -B0 (q R0 y + x z) / (q R^2)
        B_y =  B0 (q R0 x - y z) / (q R^2)
        B_z =  B0 (R - R0) / (q R)

    and the vector potential reproducing curl A = B is

        A_R  = B0 z / (q R)
        A_xi = B0 ((R0 - R)^2 + z^2) / (2 q R)
        A_z  = -B0 (q R0 - 1) ln(R) / q.

    Singular at R = 0; E and phi vanish identically.
    """

    name = "tokamak"
    zero_electric = True
    provides_vector_potential = True
    singular_set = "the axis R = sqrt(x^2+y^2) = 0"

    def __init__(self, B0: float = 1.0, R0: float = 1.0, safety_factor: float = 2.0):
        if safety_factor == 0:
            raise ValueError("safety_factor must be nonzero")
        self.B0 = float(B0)
        self.R0 = float(R0)
        self.safety_factor = float(safety_factor)

    def b_at(self, x, y, z):
        R = _checked_R(x, y, self.name)
        q = self.safety_factor
        k = self.B0 / (q * R * R)
        return (
            -k * (q * self.R0 * y + x * z),
            k * (q * self.R0 * x - y * z),
            self.B0 * (R - self.R0) / (q * R),
        )

    def e_at(self, x, y, z):
        return (0.0, 0.0, 0.0)

    def phi_at(self, x, y, z):
        return 0.0

    def a_at(self, x, y, z):
        R = _checked_R(x, y, self.name)
        q = self.safety_factor
        a_R = self.B0 * z / (q * R)
        a_xi = self.B0 * ((self.R0 - R) ** 2 + z * z) / (2.0 * q * R)
        a_z = -self.B0 * (q * self.R0 - 1.0) * math.log(R) / q
        # e_R = (x/R, y/R, 0), e_xi = (-y/R, x/R, 0)
        return ((a_R * x - a_xi * y) / R, (a_R * y + a_xi * x) / R, a_z)

    def parameters(self):
        return {"B0": self.B0, "R0": self.R0, "safety_factor": self.safety_factor}


class UniformField(FieldModel):
    """Constant B and E fields (test/baseline model, no singularity).

    phi(x) = -E0 . x and A(x) = (B0 x x) / 2, so E = -grad phi and
    B = curl A hold exactly.
    """

    name = "uniform"
    provides_vector_potential = True

    def __init__(self, B=(0.0, 0.0, 1.0), E=(0.0, 0.0, 0.0)):
        self.B = tuple(float(c) for c in as_vec3(B))
        self.E = tuple(float(c) for c in as_vec3(E))
        self.zero_electric = self.E == (0.0, 0.0, 0.0)

    def b_at(self, x, y, z):
        return self.B

    def e_at(self, x, y, z):
        return self.E

    def phi_at(self, x, y, z):
        return -(self.E[0] * x + self.E[1] * y + self.E[2] * z)

    def a_at(self, x, y, z):
        bx, by, bz = self.B
        return (
            0.5 * (by * z - bz * y),
            0.5 * (bz * x - bx * z),
            0.5 * (bx * y - by * x),
        )

    def parameters(self):
        return {"B": list(self.B), "E": list(self.E)}


class QuarticWellField(FieldModel):
    """Uniform B plus the confining quartic potential phi = k (x.x)^2.

    The energy of a unit-mass, unit-charge particle in this field is a
    polynomial of degree 4 in the phase-space variables, which makes the
    model the standard separator between quadrature rules of different
    degrees of exactness.  E = -grad phi = -4 k (x.x) x.
    """

    name = "quartic_well"
    provides_vector_potential = True

    def __init__(self, B=(0.0, 0.0, 1.0), strength: float = 1.0):
        self.B = tuple(float(c) for c in as_vec3(B))
        self.strength = float(strength)
        self.zero_electric = self.strength == 0.0

    def b_at(self, x, y, z):
        return self.B

    def e_at(self, x, y, z):
        k = -4.0 * self.strength * (x * x + y * y + z * z)
        return (k * x, k * y, k * z)

    def phi_at(self, x, y, z):
        r2 = x * x + y * y + z * z
        return self.strength * r2 * r2

    def a_at(self, x, y, z):
        bx, by, bz = self.B
        return (
            0.5 * (by * z - bz * y),
            0.5 * (bz * x - bx * z),
            0.5 * (bx * y - by * x),
        )

    def parameters(self):
        return {"B": list(self.B), "strength": self.strength}


FIELD_MODELS: dict[str, type[FieldModel]] = {
    CylindricalDriftField.name: CylindricalDriftField,
    TokamakField.name: TokamakField,
    UniformField.name: UniformField,
    QuarticWellField.name: QuarticWellField,
}


def make_field(name: str, **params) -> FieldModel:
    """Instantiate a registered field model by name."""
    try:
        cls = FIELD_MODELS[name]
    except KeyError:
        known = ", ".join(sorted(FIELD_MODELS))
        raise ValueError(f"unknown field model {name!r} (known: {known})") from None
    return cls(**params)
