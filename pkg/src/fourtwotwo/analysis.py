"""Post-processing: weighted logical error rates, analytic curves and noise fitting.

An error configuration assigns a Pauli to each data qubit.  Configurations of
weight 0 and 1 are always used in full; weight 2 can be covered in full, by
one representative per symmetry orbit, or by a seeded random half with
doubled weight.  Weights 3 and 4 are left out of both sums.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .code import PauliString, RejectedShot, decode_logical
from .experiments import (
    ExperimentPlan,
    InjectionRow,
    build_prep,
    build_stabilizer,
    run_injection_campaign,
)
from .sim import (
    Circuit,
    NoiseModel,
    apply_pauli,
    apply_spam,
    measure_distribution,
    run,
    run_pure,
)

SCHEMES = ("orbit", "random27", "full54")
DEFAULT_SEED = 20160519

# qubit relabelings that map each of ZZII, ZIZI, XIXI, XXII to itself up to a stabilizer
CODE_SYMMETRIES = ((0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0))


def config_count(w: int) -> int:
    """Number of weight-``w`` configurations on four qubits, ``3**w * C(4, w)``."""
    if not 0 <= w <= 4:
        raise ValueError(f"weight must be in 0..4, got {w}")
    return 3 ** w * math.comb(4, w)


@dataclass(frozen=True)
class ErrorConfiguration:
    pauli: PauliString
    multiplicity: float = 1.0

    def __post_init__(self):
        if isinstance(self.pauli, str):
            object.__setattr__(self, "pauli", PauliString.parse(self.pauli))
        if len(self.pauli) != 4:
            raise ValueError("configurations act on the 4 data qubits")
        object.__setattr__(self, "pauli", self.pauli.unsigned())

    @property
    def weight(self) -> int:
        return self.pauli.weight

    @property
    def key(self) -> str:
        return self.pauli.letters


def configurations(w: int) -> list[PauliString]:
    """All weight-``w`` data Paulis in lexicographic order."""
    out = []
    for t in product("IXYZ", repeat=4):
        if sum(c != "I" for c in t) == w:
            out.append(PauliString("".join(t)))
    return out


def _relabel(letters: str, perm: Sequence[int]) -> str:
    out = ["I"] * 4
    for i, c in enumerate(letters):
        out[perm[i]] = c
    return "".join(out)


def weight2_orbits() -> list[list[str]]:
    """Orbits of the weight-2 configurations under the code's qubit symmetries."""
    seen, orbits = set(), []
    for p in configurations(2):
        if p.letters in seen:
            continue
        orbit = sorted({_relabel(p.letters, g) for g in CODE_SYMMETRIES})
        seen.update(orbit)
        orbits.append(orbit)
    return orbits


@dataclass(frozen=True)
class ConfigScheme:
    """A weighted set of error configurations."""

    name: str
    configs: tuple[ErrorConfiguration, ...]

    @classmethod
    def build(cls, name: str = "orbit", seed: int = DEFAULT_SEED) -> "ConfigScheme":
        if name not in SCHEMES:
            raise ValueError(f"unknown scheme {name!r}; choose from {SCHEMES}")
        base = [ErrorConfiguration(p) for w in (0, 1) for p in configurations(w)]
        if name == "full54":
            extra = [ErrorConfiguration(p) for p in configurations(2)]
        elif name == "orbit":
            extra = [ErrorConfiguration(o[0], len(o)) for o in weight2_orbits()]
        else:
            pool = configurations(2)
            idx = np.random.default_rng(seed).choice(len(pool), 27, replace=False)
            extra = [ErrorConfiguration(pool[i], 2.0) for i in sorted(idx)]
        return cls(name, tuple(base + extra))

    def total_weight(self, w: int | None = None) -> float:
        return sum(c.multiplicity for c in self.configs if w is None or c.weight == w)

    def keys(self) -> list[str]:
        return [c.key for c in self.configs]


@dataclass(frozen=True)
class CurvePoint:
    p: float
    p_L: float
    which: str

    def __post_init__(self):
        if self.which not in ("La", "Lb", "combined", "analytic", "physical"):
            raise ValueError(f"unknown curve {self.which!r}")


def statistical_importance(config, p: float) -> float:
    """Probability ``(p/3)**w (1-p)**(4-w)`` of one weight-``w`` configuration."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    w = config if isinstance(config, int) else (
        config.weight if isinstance(config, (ErrorConfiguration, PauliString))
        else PauliString.parse(config).weight)
    return (p / 3) ** w * (1 - p) ** (4 - w)


_FAILURE_FIELD = {"a": "p_f_a", "La": "p_f_a", "b": "p_f_b", "Lb": "p_f_b",
                  "any": "p_f_any", "combined": "p_f_any"}


def logical_error_rate(table: Mapping[str, InjectionRow], scheme: ConfigScheme, p: float,
                       which: str = "a") -> float:
    """Importance-weighted logical error probability after post-selection.

    Parameters
    ----------
    table : mapping
        Injection rows keyed by Pauli letters; must cover ``scheme``.
    which : {"a", "b", "any"}
        Failure definition: ``L_a`` wrong, ``L_b`` wrong, or any decode error.

    Raises
    ------
    ValueError
        If no accepted mass enters the denominator.
    """
    attr = _FAILURE_FIELD[which]
    num = den = 0.0
    for cfg in scheme.configs:
        try:
            row = table[cfg.key]
        except KeyError:
            raise KeyError(f"table has no row for configuration {cfg.key}") from None
        w = statistical_importance(cfg.weight, p) * cfg.multiplicity * row.p_a
        den += w
        num += w * getattr(row, attr)
    if den <= 0:
        raise ValueError("no accepted configurations: logical error rate undefined")
    return num / den


def analytic_no_intrinsic(p: float) -> float:
    """Logical error probability with ideal gates and injected errors only."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must be in [0, 1), got {p}")
    q, r = 1 - p, p / 3
    return 16 * q**2 * r**2 / (q**4 + 4 * q**3 * r + 30 * q**2 * r**2)


def oracle_coefficients(which: str = "a") -> dict[str, dict[int, float]]:
    """Accepted and failed mass per weight, by direct ideal simulation.

    Each configuration of weight <= 2 is applied to the exact |00>_L state
    followed by the Sz circuit; every outcome string is decoded on its own.
    """
    prep, stab = build_prep("00"), build_stabilizer("Sz")
    psi0 = run_pure(prep)
    accepted = {0: 0.0, 1: 0.0, 2: 0.0}
    failed = {0: 0.0, 1: 0.0, 2: 0.0}
    for w in (0, 1, 2):
        for pauli in configurations(w):
            psi = run_pure(stab, input=apply_pauli(psi0, pauli))
            probs = np.abs(psi.amplitudes) ** 2
            for idx in np.flatnonzero(probs > 1e-15):
                if idx & 1:
                    continue  # ancilla fired
                bits = format(idx >> 1, "04b")
                try:
                    out = decode_logical(bits, "Z")
                except RejectedShot:
                    continue
                accepted[w] += float(probs[idx])
                wrong = {"a": out.la != 0, "b": out.lb != 0,
                         "any": (out.la, out.lb) != (0, 0)}[which]
                if wrong:
                    failed[w] += float(probs[idx])
    return {"accepted": accepted, "failed": failed}


def brute_force_oracle(p: float, which: str = "a",
                       coefficients: Mapping | None = None) -> float:
    """Ideal-gate logical error probability by exhaustive enumeration."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    c = coefficients or oracle_coefficients(which)
    num = sum(c["failed"][w] * statistical_importance(w, p) for w in (0, 1, 2))
    den = sum(c["accepted"][w] * statistical_importance(w, p) for w in (0, 1, 2))
    if den <= 0:
        raise ValueError("no accepted configurations")
    return num / den


def physical_baseline(p: float, r: float = 0.003, F_x: float = 0.997) -> float:
    """Error probability of a bare physical qubit: readout error plus ``(2/3) F_x p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return r + (2 / 3) * F_x * p


def parse_grid(text: str) -> list[float]:
    """``"a:b:step"`` (inclusive of ``b``) or a comma list."""
    text = text.strip()
    if not text:
        raise ValueError("empty p grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be a:b:step, got {text!r}")
        a, b, step = map(float, parts)
        if step <= 0 or b < a:
            raise ValueError(f"bad grid {text!r}")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 12) for i in range(n)]
    return [float(x) for x in text.split(",")]


@dataclass(frozen=True)
class CurveRow:
    p: float
    pL_a: float
    pL_b: float
    pL_analytic: float
    p_physical: float

    def points(self) -> list[CurvePoint]:
        return [CurvePoint(self.p, self.pL_a, "La"), CurvePoint(self.p, self.pL_b, "Lb"),
                CurvePoint(self.p, self.pL_analytic, "analytic"),
                CurvePoint(self.p, self.p_physical, "physical")]


def error_curves(p_grid: Iterable[float], table: Mapping[str, InjectionRow],
                 scheme: ConfigScheme) -> list[CurveRow]:
    rows = []
    for p in p_grid:
        rows.append(CurveRow(p, logical_error_rate(table, scheme, p, "a"),
                             logical_error_rate(table, scheme, p, "b"),
                             analytic_no_intrinsic(p), physical_baseline(p)))
    if not rows:
        raise ValueError("empty p grid")
    return rows


def sweep_error(p_grid: Sequence[float], scheme: ConfigScheme,
                noise: NoiseModel | None = None) -> list[CurveRow]:
    """Run the injection campaign for ``scheme`` and assemble the curves."""
    if not p_grid:
        raise ValueError("empty p grid")
    table = run_injection_campaign([c.pauli for c in scheme.configs], noise)
    return error_curves(p_grid, table, scheme)


def curve_csv(rows: Iterable[CurveRow]) -> str:
    buf = io.StringIO()
    buf.write("p,pL_a,pL_b,pL_analytic,p_physical\n")
    for r in rows:
        buf.write(",".join(f"{v:.12g}" for v in (r.p, r.pL_a, r.pL_b, r.pL_analytic, r.p_physical)))
        buf.write("\n")
    return buf.getvalue()


# --- fitting -----------------------------------------------------------------

PARAM_NAMES = ("eps1", "eps2", "eps_stark")
FIT_BOUNDS = (0.0, 0.2)


@dataclass
class FitResult:
    params: tuple[float, float, float]
    objective: float
    iterations: int
    evaluations: int
    converged: bool
    flat_params: tuple[str, ...] = ()
    warnings: list[str] = field(default_factory=list)

    @property
    def warning_flag(self) -> bool:
        return bool(self.warnings)

    def noise(self, spam=None) -> NoiseModel:
        base = NoiseModel(spam=spam) if spam is not None else NoiseModel()
        return base.with_params(*self.params)

    def report_text(self) -> str:
        lines = ["{"]
        for name, v in zip(PARAM_NAMES, self.params):
            lines.append(f'  "{name}": {v:.6g},')
        lines.append(f'  "objective": {self.objective:.6g},')
        lines.append(f'  "iterations": {self.iterations},')
        lines.append(f'  "evaluations": {self.evaluations},')
        lines.append(f'  "converged": {str(self.converged).lower()},')
        lines.append('  "warnings": [' + ", ".join(f'"{w}"' for w in self.warnings) + "]")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _simulate_target(target, noise: NoiseModel) -> np.ndarray:
    if isinstance(target, ExperimentPlan):
        return target.observed_distribution(noise)
    if isinstance(target, Circuit):
        return apply_spam(measure_distribution(run(target, noise)), noise.spam)
    raise TypeError(f"fit targets must be ExperimentPlan or Circuit, got {type(target).__name__}")


def fit_objective(targets, params, base: NoiseModel) -> float:
    """Summed L2 distance between simulated and observed distributions."""
    noise = base.with_params(*params)
    return float(sum(np.linalg.norm(_simulate_target(t, noise) - np.asarray(obs))
                     for t, obs in targets))


def restart_points(n: int = 5, seed: int = DEFAULT_SEED, span: float = 0.05) -> list[np.ndarray]:
    """Cube centre followed by seeded uniform draws in ``[0, span]**3``."""
    rng = np.random.default_rng(seed)
    pts = [np.full(3, span / 2)]
    pts += [rng.uniform(0.0, span, 3) for _ in range(n - 1)]
    return pts[:n]


def fit_noise_params(targets, base: NoiseModel | None = None, seed: int = DEFAULT_SEED,
                     restarts: int = 5, max_iter: int = 2000, xatol: float = 1e-7,
                     fatol: float = 1e-12, flat_step: float = 1e-3,
                     flat_tol: float = 1e-9) -> FitResult:
    """Fit ``(eps1, eps2, eps_stark)`` by bounded Nelder-Mead with restarts.

    Parameters
    ----------
    targets : sequence of (ExperimentPlan | Circuit, array)
        Simulated protocols and their observed 32-outcome distributions.
    base : NoiseModel, optional
        Supplies the fixed readout matrix and the coherent/twirled choice;
        defaults to the plans' own noise (or the default readout matrix).

    Returns
    -------
    FitResult
        Best point over all restarts.  ``warnings`` lists non-convergence
        and parameters whose objective is flat around the optimum.
    """
    targets = [(t, np.asarray(o, dtype=float)) for t, o in targets]
    if not targets:
        raise ValueError("at least one fit target is required")
    if base is None:
        first = targets[0][0]
        base = first.noise if isinstance(first, ExperimentPlan) else NoiseModel.fitted()

    def f(x):
        return fit_objective(targets, np.clip(x, *FIT_BOUNDS), base)

    best, iters, evals, converged = None, 0, 0, True
    for x0 in restart_points(restarts, seed):
        res = minimize(f, x0, method="Nelder-Mead", bounds=[FIT_BOUNDS] * 3,
                       options={"maxiter": max_iter, "xatol": xatol, "fatol": fatol,
                                "initial_simplex": _simplex(x0)})
        iters += res.nit
        evals += res.nfev
        converged &= bool(res.success)
        if best is None or res.fun < best.fun:
            best = res

    x = np.clip(best.x, *FIT_BOUNDS)
    msgs = [] if converged else ["max_iter reached before convergence in at least one restart"]
    flat = []
    for i, name in enumerate(PARAM_NAMES):
        changes = []
        for sign in (1, -1):
            y = x.copy()
            y[i] = np.clip(y[i] + sign * flat_step, *FIT_BOUNDS)
            if y[i] != x[i]:
                changes.append(abs(f(y) - best.fun))
        if max(changes, default=0.0) < flat_tol:
            flat.append(name)
            msgs.append(f"objective flat in {name}: parameter not identifiable")
    for m in msgs:
        warnings.warn(m, RuntimeWarning, stacklevel=2)
    return FitResult(tuple(float(v) for v in x), float(best.fun), iters, evals,
                     converged, tuple(flat), msgs)


def _simplex(x0: np.ndarray, step: float = 0.01) -> np.ndarray:
    pts = [x0]
    for i in range(3):
        y = x0.copy()
        y[i] = y[i] + step if y[i] + step <= FIT_BOUNDS[1] else y[i] - step
        pts.append(y)
    return np.array(pts)
