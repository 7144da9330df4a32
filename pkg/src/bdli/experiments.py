"""Scenario definitions, config parsing, runs and study drivers.

A :class:`Scenario` pins down everything needed to reproduce a run: the
field model, particle parameters, initial state, step size, step count,
method and solver options.  Step sizes tied to the gyro-period are stored
as exact expressions such as ``"pi/10"`` and expanded to float at load
time, so configs round-trip without precision loss.

Built-in scenarios:

    drift2d   gyration plus slow drift in the cylindrical_drift field
    banana    trapped (bouncing) orbit in the tokamak field
    transit   passing orbit in the tokamak field (doubled toroidal kick)

Output: a comma-separated series file (one row per recorded state) plus a
key-value summary file; both are deterministic for identical scenarios.
"""

from __future__ import annotations

import json
import math
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .diagnostics import error_series, quantity_series
from .fields import FIELD_MODELS, make_field
from .hamiltonian import ChargedParticleSystem, PhaseState
from .integrators import (
    SolverOptions,
    Trajectory,
    integrate,
    resolve_rule,
)
from .quadrature import register_rule

SERIES_COLUMNS = (
    "t,x,y,z,vx,vy,vz,H,p_xi,mu,err_H,err_p_xi,err_mu,iters"
)
BUILTIN_SCENARIOS = ("drift2d", "banana", "transit")


class ConfigError(ValueError):
    """Invalid configuration; names the offending field where possible."""


_PI_EXPR = re.compile(
    r"(-?)(?:(\d+(?:\.\d*)?(?:e-?\d+)?)\*)?pi(?:/(\d+(?:\.\d*)?(?:e-?\d+)?))?"
)


def parse_step_size(value) -> tuple[float, str | None]:
    """Expand a step size that may be a number or an expression like "pi/10".

    Returns the float value and the original expression (None when the
    input was already numeric).
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value), None
    if isinstance(value, str):
        s = value.strip().lower().replace(" ", "")
        m = _PI_EXPR.fullmatch(s)
        if m:
            sign = -1.0 if m.group(1) else 1.0
            num = float(m.group(2)) if m.group(2) else 1.0
            den = float(m.group(3)) if m.group(3) else 1.0
            return sign * num * math.pi / den, value
        try:
            return float(s), value
        except ValueError:
            pass
    raise ConfigError(
        f"h: expected a number or an expression like 'pi/10', got {value!r}"
    )


@dataclass(frozen=True)
class Scenario:
    """A fully pinned-down run."""

    name: str
    field_name: str
    field_params: dict = field(default_factory=dict)
    mass: float = 1.0
    charge: float = 1.0
    x0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    v0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    h: float = 0.1
    h_expr: str | None = None
    n_steps: int = 1
    method: str = "bdli"
    rule: str | None = "boole"
    solver: SolverOptions = field(default_factory=SolverOptions)
    output: str | None = None
    stride: int = 1

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError(f"n_steps: must be >= 1, got {self.n_steps}")
        if self.h == 0.0:
            raise ConfigError("h: must be nonzero")
        if self.stride < 1:
            raise ConfigError(f"stride: must be >= 1, got {self.stride}")
        if self.field_name not in FIELD_MODELS:
            raise ConfigError(
                f"field: unknown model {self.field_name!r} "
                f"(known: {', '.join(sorted(FIELD_MODELS))})"
            )
        object.__setattr__(self, "x0", tuple(float(c) for c in self.x0))
        object.__setattr__(self, "v0", tuple(float(c) for c in self.v0))
        if len(self.x0) != 3 or len(self.v0) != 3:
            raise ConfigError("x0/v0: must have exactly three components")
        implied = resolve_rule(self.method)  # validates the method name
        if implied is not None:
            if self.rule is None:
                object.__setattr__(self, "rule", implied.name)
            elif self.rule != implied.name:
                raise ConfigError(
                    f"rule: {self.rule!r} contradicts method {self.method!r} "
                    f"(which implies {implied.name!r})"
                )
        else:
            object.__setattr__(self, "rule", None)

    @property
    def total_time(self) -> float:
        return self.h * self.n_steps

    def system(self) -> ChargedParticleSystem:
        return ChargedParticleSystem(
            self.mass, self.charge, make_field(self.field_name, **self.field_params)
        )

    def initial_state(self) -> PhaseState:
        return PhaseState(self.x0, self.v0)

    def run_trajectory(self) -> Trajectory:
        return integrate(
            self.system(),
            self.method,
            self.initial_state(),
            self.h,
            self.n_steps,
            self.solver,
        )


def builtin_scenario(name: str) -> Scenario:
    """One of the reference scenarios: drift2d, banana or transit."""
    h, h_expr = parse_step_size("pi/10")
    if name == "drift2d":
        return Scenario(
            name="drift2d",
            field_name="cylindrical_drift",
            field_params={"epsilon": 1e-2},
            x0=(0.0, 0.1, 0.0),
            v0=(0.1, 0.01, 0.0),
            h=h,
            h_expr=h_expr,
            n_steps=50_000,
        )
    if name == "banana":
        return Scenario(
            name="banana",
            field_name="tokamak",
            field_params={"B0": 1.0, "R0": 1.0, "safety_factor": 2.0},
            x0=(1.05, 0.0, 0.0),
            v0=(0.0, 4.816e-4, 2.059e-3),
            h=h,
            h_expr=h_expr,
            n_steps=50_000,
        )
    if name == "transit":
        return replace(builtin_scenario("banana"), name="transit",
                       v0=(0.0, 2 * 4.816e-4, 2.059e-3))
    raise ConfigError(
        f"unknown builtin scenario {name!r} (known: {', '.join(BUILTIN_SCENARIOS)})"
    )


# ---------------------------------------------------------------------------
# config documents
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {
    "name", "field", "mass", "charge", "x0", "v0", "h", "n_steps",
    "method", "rule", "solver", "output", "stride",
}
_RESERVED_KEYS = {"builtin", "study", "methods"}
_SOLVER_KEYS = {"tolerance", "max_iterations", "predictor"}


def _scenario_from_dict(doc: dict, source: str) -> Scenario:
    unknown = set(doc) - _SCENARIO_KEYS - _RESERVED_KEYS
    if unknown:
        raise ConfigError(
            f"{source}: unknown key(s) {', '.join(sorted(unknown))!s}"
        )

    base = builtin_scenario(doc["builtin"]) if "builtin" in doc else None
    updates: dict = {}

    if "field" in doc:
        fspec = doc["field"]
        if isinstance(fspec, str):
            updates["field_name"], updates["field_params"] = fspec, {}
        elif isinstance(fspec, dict):
            extra = set(fspec) - {"name", "params"}
            if extra:
                raise ConfigError(f"field: unknown key(s) {sorted(extra)}")
            updates["field_name"] = fspec.get("name")
            updates["field_params"] = dict(fspec.get("params", {}))
        else:
            raise ConfigError("field: expected a name or {name, params}")
    if "name" in doc:
        updates["name"] = str(doc["name"])
    for key in ("mass", "charge"):
        if key in doc:
            updates[key] = float(doc[key])
    for key in ("x0", "v0"):
        if key in doc:
            seq = doc[key]
            if not isinstance(seq, (list, tuple)) or len(seq) != 3:
                raise ConfigError(f"{key}: expected a list of three numbers")
            updates[key] = tuple(float(c) for c in seq)
    if "h" in doc:
        updates["h"], updates["h_expr"] = parse_step_size(doc["h"])
    if "n_steps" in doc:
        updates["n_steps"] = int(doc["n_steps"])
    if "method" in doc:
        updates["method"] = str(doc["method"])
    if "rule" in doc:
        rspec = doc["rule"]
        if isinstance(rspec, dict):
            extra = set(rspec) - {"name", "pairs", "degree"}
            if extra:
                raise ConfigError(f"rule: unknown key(s) {sorted(extra)}")
            try:
                register_rule(
                    rspec["name"], rspec["pairs"], rspec.get("degree", 0)
                )
            except KeyError as exc:
                raise ConfigError(f"rule: missing key {exc}") from None
            except ValueError as exc:
                raise ConfigError(f"rule: {exc}") from None
            updates["rule"] = rspec["name"]
        else:
            updates["rule"] = str(rspec)
        if "method" not in doc and base is not None:
            # a bare rule override retargets the DLI stepper
            updates["method"] = f"dli:{updates['rule']}"
    if "solver" in doc:
        sspec = doc["solver"]
        extra = set(sspec) - _SOLVER_KEYS
        if extra:
            raise ConfigError(f"solver: unknown key(s) {sorted(extra)}")
        defaults = base.solver if base is not None else SolverOptions()
        try:
            updates["solver"] = replace(defaults, **sspec)
        except ValueError as exc:
            raise ConfigError(f"solver: {exc}") from None
    if "output" in doc:
        updates["output"] = str(doc["output"]) if doc["output"] else None
    if "stride" in doc:
        updates["stride"] = int(doc["stride"])

    if base is not None:
        if updates.get("method") not in (None, base.method) and "rule" not in doc:
            # method override wins over the builtin's rule pin
            updates.setdefault("rule", None)
        return replace(base, **updates)
    required = {
        "name": "name", "field_name": "field", "x0": "x0", "v0": "v0",
        "h": "h", "n_steps": "n_steps",
    }
    for attr, key in required.items():
        if attr not in updates:
            raise ConfigError(f"{key}: required unless 'builtin' is given")
    return Scenario(**updates)


def _load_document(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top-level value must be an object")
    return doc


def load_config(path) -> Scenario:
    """Parse and validate a JSON scenario config."""
    doc = _load_document(path)
    return _scenario_from_dict(doc, str(path))


def scenario_to_config(scn: Scenario) -> dict:
    """Serializable dict that :func:`load_config` maps back to ``scn``."""
    return {
        "name": scn.name,
        "field": {"name": scn.field_name, "params": dict(scn.field_params)},
        "mass": scn.mass,
        "charge": scn.charge,
        "x0": list(scn.x0),
        "v0": list(scn.v0),
        "h": scn.h_expr if scn.h_expr is not None else scn.h,
        "n_steps": scn.n_steps,
        "method": scn.method,
        "rule": scn.rule,
        "solver": {
            "tolerance": scn.solver.tolerance,
            "max_iterations": scn.solver.max_iterations,
            "predictor": scn.solver.predictor,
        },
        "output": scn.output,
        "stride": scn.stride,
    }


# ---------------------------------------------------------------------------
# running and reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunSummary:
    """Headline numbers of one completed run."""

    scenario: str
    method: str
    max_abs_err_H: float
    max_abs_err_p_xi: float
    max_abs_err_mu: float
    final_abs_err_H: float
    final_abs_err_p_xi: float
    final_abs_err_mu: float
    mean_iters: float
    wall_time_s: float
    failures: int
    series_path: str | None = None

    def as_text(self) -> str:
        lines = [
            f"scenario = {self.scenario}",
            f"method = {self.method}",
            f"max_abs_err_H = {self.max_abs_err_H:.17g}",
            f"max_abs_err_p_xi = {self.max_abs_err_p_xi:.17g}",
            f"max_abs_err_mu = {self.max_abs_err_mu:.17g}",
            f"final_abs_err_H = {self.final_abs_err_H:.17g}",
            f"final_abs_err_p_xi = {self.final_abs_err_p_xi:.17g}",
            f"final_abs_err_mu = {self.final_abs_err_mu:.17g}",
            f"mean_iters = {self.mean_iters:.17g}",
            f"failures = {self.failures}",
            f"wall_time_s = {self.wall_time_s:.3f}",
        ]
        return "\n".join(lines) + "\n"


def run_scenario(
    scn: Scenario,
    out=None,
    relative_errors: bool = False,
) -> RunSummary:
    """Integrate a scenario, write its series and summary files.

    ``out`` overrides the scenario's output path; by default the files are
    ``<name>_series.csv`` and ``<name>_series.summary.txt`` in the current
    directory.  The run is deterministic: identical scenarios produce
    byte-identical series files.
    """
    t0 = time.perf_counter()
    traj = scn.run_trajectory()
    sys = scn.system()

    t = traj.times
    H = quantity_series(sys, traj, "H")
    if sys.field.provides_vector_potential:
        p = quantity_series(sys, traj, "p_xi")
    else:
        p = np.full(len(traj), math.nan)
    mu = quantity_series(sys, traj, "mu")
    errs = []
    for series in (H, p, mu):
        e = series - series[0]
        if relative_errors and series[0] != 0.0:
            e = e / abs(series[0])
        errs.append(e)

    emitted = list(range(0, len(traj), scn.stride))
    lines = [SERIES_COLUMNS]
    for i in emitted:
        it = traj.iterations[i - 1] if i > 0 else 0
        vals = [t[i], *traj.states[i], H[i], p[i], mu[i],
                errs[0][i], errs[1][i], errs[2][i]]
        lines.append(",".join(f"{v:.17g}" for v in vals) + f",{it}")
    series_path = Path(out) if out else Path(scn.output or f"{scn.name}_series.csv")
    series_path.parent.mkdir(parents=True, exist_ok=True)
    series_path.write_text("\n".join(lines) + "\n")

    abs_errs = {
        q: np.abs(series - series[0])[emitted]
        for q, series in (("H", H), ("p_xi", p), ("mu", mu))
    }
    wall = time.perf_counter() - t0
    mean_iters = float(traj.iterations.mean()) if len(traj.iterations) else 0.0
    summary = RunSummary(
        scenario=scn.name,
        method=scn.method,
        max_abs_err_H=float(abs_errs["H"].max()),
        max_abs_err_p_xi=float(abs_errs["p_xi"].max()),
        max_abs_err_mu=float(abs_errs["mu"].max()),
        final_abs_err_H=float(abs_errs["H"][-1]),
        final_abs_err_p_xi=float(abs_errs["p_xi"][-1]),
        final_abs_err_mu=float(abs_errs["mu"][-1]),
        mean_iters=mean_iters,
        wall_time_s=wall,
        failures=0,
        series_path=str(series_path),
    )
    summary_path = series_path.with_suffix(".summary.txt")
    summary_path.write_text(summary.as_text())
    return summary


@dataclass(frozen=True)
class ConvergenceStudy:
    """Global-error ladder of one method against its own fine-step run."""

    method: str
    reference_h: float
    rows: tuple[tuple[float, float], ...]  # (h, endpoint error)
    slope: float

    def as_text(self) -> str:
        lines = [f"method = {self.method}", f"reference_h = {self.reference_h:.17g}"]
        lines += [f"{h:.17g} {e:.17g}" for h, e in self.rows]
        lines.append(f"slope = {self.slope:.6f}")
        return "\n".join(lines) + "\n"


def _endpoint(scn: Scenario, h: float, n: int) -> np.ndarray:
    traj = integrate(
        scn.system(), scn.method, scn.initial_state(), h, n, scn.solver
    )
    return traj.states[-1]


def convergence_study(
    scn: Scenario, h_list, reference_h: float
) -> ConvergenceStudy:
    """Self-convergence of the scenario's method over its total time.

    Every h (and the reference) must divide the scenario's total time to
    within round-off; the reference step must be the finest.  The reported
    slope is the least-squares fit of log(error) against log(h).
    """
    T = scn.total_time
    hs = [float(h) for h in h_list]
    if not hs:
        raise ValueError("h_list must be nonempty")
    if not reference_h < min(abs(h) for h in hs):
        raise ValueError("reference_h must be finer than every h in h_list")
    steps = []
    for h in [*hs, reference_h]:
        n = round(T / h)
        if n < 1 or abs(n * h - T) > 1e-9 * abs(T):
            raise ValueError(f"step {h!r} does not divide the total time {T!r}")
        steps.append(n)
    ref = _endpoint(scn, reference_h, steps[-1])
    rows = []
    for h, n in zip(hs, steps[:-1]):
        err = float(np.linalg.norm(_endpoint(scn, h, n) - ref))
        rows.append((h, err))
    slope = float(
        np.polyfit(np.log([h for h, _ in rows]), np.log([e for _, e in rows]), 1)[0]
    )
    return ConvergenceStudy(scn.method, reference_h, tuple(rows), slope)


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side run summaries of several methods on one scenario."""

    scenario: str
    summaries: tuple[RunSummary, ...]

    def as_text(self) -> str:
        header = (
            f"{'method':<14} {'max|err H|':>13} {'max|err p_xi|':>14} "
            f"{'max|err mu|':>13} {'mean_iters':>11}"
        )
        lines = [f"scenario = {self.scenario}", header]
        for s in self.summaries:
            lines.append(
                f"{s.method:<14} {s.max_abs_err_H:>13.6g} "
                f"{s.max_abs_err_p_xi:>14.6g} {s.max_abs_err_mu:>13.6g} "
                f"{s.mean_iters:>11.2f}"
            )
        return "\n".join(lines) + "\n"


def compare_methods(
    scn: Scenario, methods, out_dir=None, relative_errors: bool = False
) -> ComparisonReport:
    """Run several methods on one scenario and collect their summaries.

    Each method writes its own series file (method name mangled into the
    file name); a combined table file is written next to them.
    """
    methods = list(methods)
    if len(methods) < 2:
        raise ValueError("compare_methods needs at least two methods")
    base = Path(out_dir) if out_dir else Path(".")
    base.mkdir(parents=True, exist_ok=True)
    summaries = []
    for method in methods:
        sub = replace(scn, method=method, rule=None, output=None)
        fname = f"{scn.name}_{method.replace(':', '-')}_series.csv"
        summaries.append(
            run_scenario(sub, out=base / fname, relative_errors=relative_errors)
        )
    report = ComparisonReport(scn.name, tuple(summaries))
    (base / f"{scn.name}_compare.txt").write_text(report.as_text())
    return report
