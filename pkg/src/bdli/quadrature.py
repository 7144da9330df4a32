"""Quadrature rules on [0, 1] for the discrete line integral.

The implicit step replaces the line integral of grad H along the straight
segment from z0 to z1 by a weighted sum over segment points; the degree of
exactness of the rule decides for which polynomial energies the step
conserves H exactly.  Built-in rules:

    trapezoid   nodes (0, 1),            weights (1, 1)/2,        exactness 1
    simpson     nodes (0, 1/2, 1),       weights (1, 4, 1)/6,     exactness 3
    boole       nodes (0, 1/4, .., 1),   weights (7,32,12,32,7)/90, exactness 5

Custom rules may be registered from (node, weight) pairs; they are checked
against the same invariants at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import ChargedParticleSystem, PhaseState, grad_energy
from .linalg import PhaseVec

_WEIGHT_SUM_TOL = 1e-15
_EXACTNESS_TOL = 1e-14


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights on [0, 1] with a verified degree of exactness."""

    name: str
    nodes: tuple[float, ...]
    weights: tuple[float, ...]
    degree_of_exactness: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(float(c) for c in self.nodes))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.nodes) != len(self.weights) or not self.nodes:
            raise ValueError("nodes and weights must be nonempty and equally long")
        if any(not 0.0 <= c <= 1.0 for c in self.nodes):
            raise ValueError(f"rule {self.name!r}: nodes must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise ValueError(f"rule {self.name!r}: nodes must be strictly ascending")
        if abs(sum(self.weights) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(
                f"rule {self.name!r}: weights sum to {sum(self.weights)!r}, not 1"
            )
        if self.degree_of_exactness < 0:
            raise ValueError("degree_of_exactness must be >= 0")
        for k in range(self.degree_of_exactness + 1):
            err = abs(self.integrate_monomial(k) - 1.0 / (k + 1))
            if err > _EXACTNESS_TOL:
                raise ValueError(
                    f"rule {self.name!r} misses monomial c^{k} by {err:.2e}; "
                    f"declared degree of exactness {self.degree_of_exactness} is wrong"
                )

    @property
    def first_moment(self) -> float:
        """Sum of w_i * c_i; equals 1/2 for node-symmetric rules."""
        return float(sum(w * c for c, w in zip(self.nodes, self.weights)))

    def integrate_monomial(self, k: int) -> float:
        """Apply the rule to f(c) = c^k."""
        return float(sum(w * c**k for c, w in zip(self.nodes, self.weights)))

    def apply(self, f) -> float:
        """Apply the rule to a scalar function on [0, 1]."""
        return float(sum(w * f(c) for c, w in zip(self.nodes, self.weights)))


_BUILTIN_RULES = {
    "trapezoid": QuadratureRule("trapezoid", (0.0, 1.0), (0.5, 0.5), 1),
    "simpson": QuadratureRule("simpson", (0.0, 0.5, 1.0), (1 / 6, 4 / 6, 1 / 6), 3),
    "boole": QuadratureRule(
        "boole",
        (0.0, 0.25, 0.5, 0.75, 1.0),
        (7 / 90, 32 / 90, 12 / 90, 32 / 90, 7 / 90),
        5,
    ),
}

_custom_rules: dict[str, QuadratureRule] = {}


def builtin_rule(name: str) -> QuadratureRule:
    """Look up a rule by name (built-in or previously registered custom)."""
    rule = _BUILTIN_RULES.get(name) or _custom_rules.get(name)
    if rule is None:
        known = ", ".join(sorted(_BUILTIN_RULES) + sorted(_custom_rules))
        raise ValueError(f"unknown quadrature rule {name!r} (known: {known})")
    return rule


def register_rule(
    name: str, pairs, degree_of_exactness: int = 0
) -> QuadratureRule:
    """Validate and register a custom rule from (node, weight) pairs.

    The invariants (nodes ascending in [0,1], weights summing to 1, the
    declared exactness holding on monomials) are enforced at registration;
    note that the implicit step is time-symmetric only for rules whose
    nodes are symmetric about 1/2 with palindromic weights.
    """
    if name in _BUILTIN_RULES:
        raise ValueError(f"cannot shadow built-in rule {name!r}")
    nodes, weights = zip(*((float(c), float(w)) for c, w in pairs))
    rule = QuadratureRule(name, nodes, weights, int(degree_of_exactness))
    _custom_rules[name] = rule
    return rule


def weighted_gradient(
    sys: ChargedParticleSystem,
    rule: QuadratureRule,
    z0: PhaseState,
    z1: PhaseState,
) -> PhaseVec:
    """Quadrature approximation of the segment-averaged energy gradient.

    Returns sum_i w_i grad H((1 - c_i) z0 + c_i z1).  The velocity block of
    grad H is linear along the segment, so for any rule that integrates
    linears exactly it collapses to m ((1 - s) v0 + s v1) with s the rule's
    first moment.
    """
    a0 = z0.as_vector()
    a1 = z1.as_vector()
    out = np.zeros(6)
    for c, w in zip(rule.nodes, rule.weights):
        zc = PhaseState.from_vector((1.0 - c) * a0 + c * a1)
        out += w * grad_energy(sys, zc)
    return out
