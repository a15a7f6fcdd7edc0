"""Circuits and protocols of the [[4,2,2]] detection experiment.

Data qubits are 1-4 and the bare ancilla is qubit 5.  Every encoder and
syndrome circuit orders its CNOTs so that a single Pauli fault anywhere can
only flip the gauge qubit ``Lb`` undetected, never ``La``:

* X faults on a CNOT control fan out to the pairs {1,2} or {3,4}, which
  equal ``Xb`` modulo ``XXXX``;
* Z faults on a CNOT target fan out to the pairs {1,3} or {2,4}, which
  equal ``Zb`` modulo ``ZZZZ``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .code import CODE, DECODE_TABLE, PauliString, pauli_multiply
from .sim import (
    DIM,
    Circuit,
    DensityMatrix,
    GateOp,
    NoiseModel,
    StateVector,
    apply_pauli,
    apply_spam,
    measure_distribution,
    run,
    run_pure,
)

ANCILLA = 5
LOGICAL_LABELS = ("00", "01", "10", "11")
_X_LABELS = ("++", "+-", "-+", "--")


def _c(*ops: tuple) -> tuple[GateOp, ...]:
    return tuple(GateOp(kind, tuple(qs)) for kind, *qs in ops)


# native encoders, one per mix of logical bases
PREP_CIRCUITS = {
    "00": Circuit(_c(("H", 1), ("CNOT", 1, 3), ("CNOT", 1, 2), ("CNOT", 3, 4)), name="prep00"),
    "++": Circuit(_c(("H", 2), ("H", 3), ("H", 4),
                     ("CNOT", 2, 1), ("CNOT", 3, 1), ("CNOT", 4, 2)), name="prep++"),
    "0+": Circuit(_c(("H", 1), ("CNOT", 1, 2), ("H", 3), ("CNOT", 3, 4)), name="prep0+"),
    "-1": Circuit(_c(("X", 1), ("X", 2), ("X", 3), ("X", 4), ("H", 1), ("H", 2),
                     ("CNOT", 1, 3), ("CNOT", 2, 4)), name="prep-1"),
}

STABILIZER_CIRCUITS = {
    "Sz": Circuit(_c(("CNOT", 1, 5), ("CNOT", 3, 5), ("CNOT", 2, 5), ("CNOT", 4, 5)), name="Sz"),
    "Sx": Circuit(_c(("H", 5), ("CNOT", 5, 1), ("CNOT", 5, 2), ("CNOT", 5, 3), ("CNOT", 5, 4),
                     ("H", 5)), name="Sx"),
}

# slot and Pauli of the undetectable hook in the |00>_L encoder: an X on
# qubit 1 between CNOT(1,3) and CNOT(1,2) spreads to X1 X2 = Xb
HOOK_00 = (2, PauliString("XIIII"))


def normalize_label(label: str) -> str:
    """Canonical two-character logical label: ``"|-1>_L"`` -> ``"-1"``."""
    s = label.strip()
    for junk in ("|", ">", "_L", "_l"):
        s = s.replace(junk, "")
    if len(s) == 3 and s[-1] in "Ll":
        s = s[:-1]
    if len(s) != 2 or any(c not in "01+-" for c in s):
        raise ValueError(f"unknown logical state label {label!r}")
    return s


def _family(ch: str) -> str:
    return "Z" if ch in "01" else "X"


_NATIVE_FOR_FAMILY = {("Z", "Z"): "00", ("X", "X"): "++", ("Z", "X"): "0+", ("X", "Z"): "-1"}


def transversal_correction(label: str) -> PauliString:
    """Logical Pauli taking the native encoder of ``label``'s family to ``label``."""
    label = normalize_label(label)
    native = _NATIVE_FOR_FAMILY[_family(label[0]), _family(label[1])]
    flips = {
        0: CODE.logical_ops["Xa"] if _family(label[0]) == "Z" else CODE.logical_ops["Za"],
        1: CODE.logical_ops["Xb"] if _family(label[1]) == "Z" else CODE.logical_ops["Zb"],
    }
    out = PauliString.identity(4)
    for i in (0, 1):
        if label[i] != native[i]:
            out = pauli_multiply(out, flips[i])
    return out


def build_prep(label: str) -> Circuit:
    """Encoder for logical state ``label`` (e.g. ``"00"``, ``"++"``, ``"11"``).

    Labels outside the four native encoders reuse the encoder of the same
    basis mix followed by transversal X and Z gates.
    """
    label = normalize_label(label)
    native = _NATIVE_FOR_FAMILY[_family(label[0]), _family(label[1])]
    base = PREP_CIRCUITS[native]
    fix = transversal_correction(label)
    extra = [GateOp("Z", (q,)) for q, z in enumerate(fix.z_bits(), 1) if z]
    extra += [GateOp("X", (q,)) for q, x in enumerate(fix.x_bits(), 1) if x]
    return Circuit(base.ops + tuple(extra), name=f"prep{label}")


def build_stabilizer(kind: str) -> Circuit:
    """Bare-ancilla syndrome extraction for ``"Sx"`` or ``"Sz"``."""
    key = {"SX": "Sx", "SZ": "Sz"}.get(kind.upper().replace("_", ""))
    if key is None:
        raise ValueError(f"unknown stabilizer {kind!r}")
    return STABILIZER_CIRCUITS[key]


_ONE_QUBIT = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
}


def codeword(la: int, lb: int) -> np.ndarray:
    """Four-qubit Z-basis codeword ``|la lb>_L`` (even string and complement)."""
    v = np.zeros(16, dtype=complex)
    base = (0, la, lb, la ^ lb)  # b1 = 0: la = b2, lb = b3, even parity
    i = int("".join(map(str, base)), 2)
    v[i] = v[15 - i] = 1 / math.sqrt(2)
    return v


def logical_state(label: str, with_ancilla: bool = True) -> StateVector:
    """Exact codeword for ``label`` built from the logical basis states."""
    label = normalize_label(label)
    a, b = _ONE_QUBIT[label[0]], _ONE_QUBIT[label[1]]
    v = sum(a[i] * b[j] * codeword(i, j) for i in (0, 1) for j in (0, 1))
    if with_ancilla:
        v = np.kron(v, _ONE_QUBIT["0"])
    return StateVector(v)


def expected_logical(label: str, basis: str) -> tuple[int | None, int | None]:
    """Ideal (la, lb) read in ``basis``; None where that qubit is random."""
    label = normalize_label(label)
    want = "01" if basis.upper() == "Z" else "+-"
    return tuple(want.index(ch) if ch in want else None for ch in label)  # type: ignore[return-value]


@dataclass
class SelectionReport:
    """Outcome of post-selection on one 32-outcome distribution.

    ``yield_`` is the accepted probability mass; ``logical_pops`` is the
    accepted distribution over ``|La Lb>`` ordered 00, 01, 10, 11 (or ++, +-,
    -+, -- in the X basis).  When nothing is accepted the populations are NaN
    and ``undefined`` is set.
    """

    yield_: float
    logical_pops: np.ndarray
    raw_dist: np.ndarray
    basis: str = "Z"
    undefined: bool = False

    def error_a(self, la: int) -> float:
        """P(La reads wrong | accepted), marginal over Lb."""
        p = self.logical_pops
        return float(p[2] + p[3]) if la == 0 else float(p[0] + p[1])

    def error_b(self, lb: int) -> float:
        """P(Lb reads wrong | accepted), marginal over La."""
        p = self.logical_pops
        return float(p[1] + p[3]) if lb == 0 else float(p[0] + p[2])

    def labels(self) -> tuple[str, ...]:
        return LOGICAL_LABELS if self.basis == "Z" else _X_LABELS


def _accept_masks(used_stabilizer: bool):
    idx = np.arange(DIM)
    data = idx >> 1
    anc = idx & 1
    parity = np.array([bin(d).count("1") % 2 for d in data])
    ok = parity == 0
    if used_stabilizer:
        ok &= anc == 0
    return ok, data


def postselect(dist, meas_basis: str = "Z", used_stabilizer: bool = False) -> SelectionReport:
    """Keep even-parity data strings (and ancilla 0 if a stabilizer ran)."""
    d = np.asarray(dist, dtype=float)
    if d.shape != (DIM,):
        raise ValueError(f"expected a {DIM}-outcome distribution")
    basis = meas_basis.upper()
    table = DECODE_TABLE[basis]
    ok, data = _accept_masks(used_stabilizer)
    pops = np.zeros(4)
    for i in np.flatnonzero(ok):
        bits = tuple((data[i] >> (3 - k)) & 1 for k in range(4))
        la, lb = table[bits]
        pops[2 * la + lb] += d[i]
    accepted = float(pops.sum())
    if accepted <= 0:
        return SelectionReport(0.0, np.full(4, np.nan), d, basis, undefined=True)
    return SelectionReport(accepted, pops / accepted, d, basis)


@dataclass
class ExperimentPlan:
    """Prepare, optionally inject a data error, optionally measure a stabilizer, read out."""

    prep: str = "00"
    stabilizer: str | None = None
    meas_basis: str = "Z"
    noise: NoiseModel = field(default_factory=NoiseModel.zero)
    injected_error: PauliString | None = None
    alpha: float | None = None

    def __post_init__(self):
        self.prep = normalize_label(self.prep)
        if self.stabilizer in ("", "none", "None"):
            self.stabilizer = None
        if self.stabilizer is not None:
            self.stabilizer = build_stabilizer(self.stabilizer).name
        self.meas_basis = self.meas_basis.upper()
        if self.meas_basis not in ("Z", "X"):
            raise ValueError(f"measurement basis must be Z or X, got {self.meas_basis!r}")
        if isinstance(self.injected_error, str):
            self.injected_error = PauliString.parse(self.injected_error)
        if self.injected_error is not None and len(self.injected_error) != 4:
            raise ValueError("injected error must act on the 4 data qubits")
        if self.alpha is not None and not -0.5 <= self.alpha <= 0.5:
            raise ValueError(f"|alpha| must not exceed 0.5, got {self.alpha}")

    @property
    def key(self) -> str:
        parts = [self.prep + "L"]
        if self.stabilizer:
            parts.append(self.stabilizer)
        parts.append(self.meas_basis)
        if self.injected_error is not None:
            parts.append(str(self.injected_error))
        if self.alpha is not None:
            parts.append(f"alpha={self.alpha:g}")
        return "_".join(parts)

    @property
    def bases(self) -> str:
        return self.meas_basis * 4 + "Z"

    def circuits(self) -> tuple[Circuit, Circuit | None]:
        stab = build_stabilizer(self.stabilizer) if self.stabilizer else None
        return build_prep(self.prep), stab

    def expected(self) -> tuple[int | None, int | None]:
        return expected_logical(self.prep, self.meas_basis)

    def final_state(self, noise: NoiseModel | None = None) -> DensityMatrix:
        noise = self.noise if noise is None else noise
        prep, stab = self.circuits()
        rho = run(prep, noise, alpha=self.alpha)
        if self.injected_error is not None:
            rho = apply_pauli(rho, self.injected_error)
        if stab is not None:
            # miscalibration is confined to the encoder's XX gates
            rho = run(stab, noise, input=rho, alpha=None if self.alpha is None else 0.0)
        return rho

    def true_distribution(self, noise: NoiseModel | None = None) -> np.ndarray:
        return measure_distribution(self.final_state(noise), self.bases)

    def observed_distribution(self, noise: NoiseModel | None = None) -> np.ndarray:
        noise = self.noise if noise is None else noise
        return apply_spam(self.true_distribution(noise), noise.spam)

    def report(self) -> SelectionReport:
        return postselect(self.observed_distribution(), self.meas_basis, self.stabilizer is not None)


def load_plan(text: str, noise: NoiseModel | None = None) -> ExperimentPlan:
    """Read ``key=value`` lines: prep, stabilizer, basis, error, alpha."""
    vals: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected key=value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        vals[k.lower()] = v
    unknown = set(vals) - {"prep", "stabilizer", "basis", "meas_basis", "error", "alpha"}
    if unknown:
        raise ValueError(f"unknown plan keys: {sorted(unknown)}")
    err = vals.get("error")
    return ExperimentPlan(
        prep=vals.get("prep", "00"),
        stabilizer=vals.get("stabilizer"),
        meas_basis=vals.get("basis", vals.get("meas_basis", "Z")),
        noise=noise or NoiseModel.zero(),
        injected_error=PauliString.parse(err) if err and err.upper() != "NONE" else None,
        alpha=float(vals["alpha"]) if "alpha" in vals else None,
    )


FAULT_CLASSES = ("detected", "benign", "lb_error", "la_error")


@dataclass(frozen=True)
class FaultOutcome:
    slot: int
    qubit: int
    letter: str
    accepted: float
    la_error: float
    lb_error: float
    logical_pops: tuple[float, ...]
    kind: str

    @property
    def pauli(self) -> PauliString:
        return PauliString.single(5, self.qubit, self.letter)


@dataclass
class FaultReport:
    circuit: Circuit
    basis: str
    active_qubits: tuple[int, ...]
    outcomes: list[FaultOutcome]
    tol: float = 1e-12

    @property
    def counts(self) -> dict[str, int]:
        out = dict.fromkeys(FAULT_CLASSES, 0)
        for o in self.outcomes:
            out[o.kind] += 1
        return out

    @property
    def la_error_mass(self) -> float:
        return float(sum(o.la_error for o in self.outcomes))

    @property
    def lb_error_mass(self) -> float:
        return float(sum(o.lb_error for o in self.outcomes))

    def of_kind(self, kind: str) -> list[FaultOutcome]:
        return [o for o in self.outcomes if o.kind == kind]

    def summary(self) -> str:
        c = self.counts
        return (f"{self.circuit.name or 'circuit'} [{self.basis}] locations={len(self.outcomes)} "
                + " ".join(f"{k}: {c[k]}" for k in FAULT_CLASSES))


def _classify(accepted: float, la_err: float, lb_err: float, tol: float) -> str:
    if la_err > tol:
        return "la_error"
    if lb_err > tol:
        return "lb_error"
    if accepted < 1 - tol:
        return "detected"
    return "benign"


def enumerate_single_faults(circuit: Circuit, followed_by: Circuit | None = None,
                            basis: str = "Z", tol: float = 1e-12) -> FaultReport:
    """Insert every single X/Y/Z fault at every slot and classify the outcome.

    Faults sit before the first gate and after every gate of ``circuit``
    followed by ``followed_by``; idle qubits are included.  The reference
    logical values are taken from the fault-free run, and only logical
    qubits with a deterministic reference value can register an error.
    """
    full = circuit + followed_by if followed_by is not None else circuit
    used_stab = ANCILLA in full.qubits_used()
    active = tuple(range(1, 5)) + ((ANCILLA,) if used_stab else ())
    bases = basis.upper() * 4 + "Z"

    ref = postselect(measure_distribution(run_pure(full), bases), basis, used_stab)
    la_ref = _deterministic(ref.logical_pops, "a", tol)
    lb_ref = _deterministic(ref.logical_pops, "b", tol)

    outcomes = []
    for slot in range(full.fault_slots):
        for q in active:
            for letter in "XYZ":
                fault = PauliString.single(full.n_qubits, q, letter)
                psi = run_pure(full, faults={slot: fault})
                rep = postselect(measure_distribution(psi, bases), basis, used_stab)
                acc = rep.yield_
                la_err = acc * rep.error_a(la_ref) if la_ref is not None and acc > 0 else 0.0
                lb_err = acc * rep.error_b(lb_ref) if lb_ref is not None and acc > 0 else 0.0
                pops = tuple(np.nan_to_num(rep.logical_pops).tolist())
                outcomes.append(FaultOutcome(slot, q, letter, acc, la_err, lb_err, pops,
                                             _classify(acc, la_err, lb_err, tol)))
    return FaultReport(full, basis.upper(), active, outcomes, tol)


def _deterministic(pops: np.ndarray, which: str, tol: float) -> int | None:
    if which == "a":
        p1 = pops[2] + pops[3]
    else:
        p1 = pops[1] + pops[3]
    if p1 < tol:
        return 0
    if p1 > 1 - tol:
        return 1
    return None


def certification_suite() -> list[tuple[str, Circuit, Circuit | None, str]]:
    """Every encoder alone and followed by each stabilizer, read in both bases."""
    runs = []
    for label, prep in PREP_CIRCUITS.items():
        for basis in ("Z", "X"):
            runs.append((f"prep{label}", prep, None, basis))
    for stab_name, stab in STABILIZER_CIRCUITS.items():
        for label, prep in PREP_CIRCUITS.items():
            for basis in ("Z", "X"):
                runs.append((f"prep{label}+{stab_name}", prep, stab, basis))
    return runs


@dataclass(frozen=True)
class InjectionRow:
    """Acceptance and failure probabilities for one injected data error."""

    pauli: PauliString
    p_a: float
    p_f_a: float
    p_f_b: float
    p_f_any: float


def inject(error: PauliString, noise: NoiseModel | None = None) -> InjectionRow:
    """|00>_L, apply ``error`` on the data, measure Sz, read in Z."""
    plan = ExperimentPlan("00", "Sz", "Z", noise or NoiseModel.zero(), injected_error=error)
    rep = plan.report()
    if rep.undefined:
        return InjectionRow(error, 0.0, 0.0, 0.0, 0.0)
    p = rep.logical_pops
    return InjectionRow(error, rep.yield_, rep.error_a(0), rep.error_b(0), float(1 - p[0]))


def run_injection_campaign(configs: Iterable, noise: NoiseModel | None = None) -> dict[str, InjectionRow]:
    """Inject each configuration (a PauliString or anything with ``.pauli``).

    Rows are keyed by Pauli text and returned in sorted key order.
    """
    noise = noise or NoiseModel.zero()
    rows = {}
    for cfg in configs:
        pauli = getattr(cfg, "pauli", cfg)
        if isinstance(pauli, str):
            pauli = PauliString.parse(pauli)
        pauli = pauli.unsigned()
        rows[pauli.letters] = inject(pauli, noise)
    return dict(sorted(rows.items()))


@dataclass(frozen=True)
class MiscalPoint:
    alpha: float
    yields: dict
    error_a: dict
    error_b: dict
    pops: dict


def run_miscal_sweep(alpha_grid: Sequence[float], noise: NoiseModel | None = None,
                     prep: str = "00") -> list[MiscalPoint]:
    """Prepare |00>_L with every encoder XX gate miscalibrated by alpha, then measure Sx and Sz."""
    noise = NoiseModel.fitted() if noise is None else noise
    la, lb = expected_logical(prep, "Z")
    out = []
    for alpha in alpha_grid:
        if abs(alpha) > 0.5:
            raise ValueError(f"|alpha| must not exceed 0.5, got {alpha}")
        ys, ea, eb, pops = {}, {}, {}, {}
        for stab in ("Sx", "Sz"):
            rep = ExperimentPlan(prep, stab, "Z", noise, alpha=float(alpha)).report()
            ys[stab] = rep.yield_
            ea[stab] = rep.error_a(la)
            eb[stab] = rep.error_b(lb)
            pops[stab] = rep.logical_pops
        out.append(MiscalPoint(float(alpha), ys, ea, eb, pops))
    return out


# measured reference rows: (prepared state, stabilizer, basis, yield %, populations %)
TABLE1 = [
    ("00", None, "Z", 91.1, (98.0, 1.7, 0.1, 0.2)),
    ("00", "Sz", "Z", 77.8, (97.8, 1.7, 0.2, 0.3)),
    ("00", "Sx", "Z", 65.2, (97.1, 2.4, 0.2, 0.3)),
    ("++", None, "X", 91.1, (94.8, 3.9, 0.2, 0.2)),
    ("++", "Sz", "X", 68.2, (93.0, 4.2, 1.3, 1.5)),
    ("++", "Sx", "X", 72.1, (94.3, 4.5, 0.5, 0.7)),
    ("-1", None, "Z", 90.1, (0.2, 50.5, 0.1, 49.2)),
    ("-1", None, "X", 87.0, (0.3, 0.3, 50.4, 48.9)),
    ("-1", "Sz", "Z", 79.9, (0.2, 50.0, 0.1, 49.7)),
    ("-1", "Sz", "X", 75.5, (0.4, 0.3, 50.0, 49.2)),
    ("-1", "Sx", "Z", 72.1, (0.6, 50.2, 0.5, 48.7)),
    ("-1", "Sx", "X", 76.2, (0.4, 0.4, 50.0, 49.2)),
    ("0+", None, "Z", 93.2, (47.4, 52.5, 0.06, 0.05)),
    ("0+", None, "X", 92.4, (50.0, 0.04, 49.8, 0.09)),
    ("0+", "Sz", "Z", 81.6, (48.3, 51.3, 0.2, 0.2)),
    ("0+", "Sz", "X", 68.5, (47.1, 2.4, 47.4, 3.1)),
    ("0+", "Sx", "Z", 72.0, (48.3, 51.5, 0.2, 0.1)),
    ("0+", "Sx", "X", 70.9, (49.4, 0.4, 49.7, 0.5)),
    ("11", "Sx", "Z", 73.3, (0.4, 0.3, 2.8, 96.5)),
]


def table1_plans(noise: NoiseModel | None = None) -> list[ExperimentPlan]:
    noise = noise or NoiseModel.zero()
    return [ExperimentPlan(label, stab, basis, noise) for label, stab, basis, _, _ in TABLE1]


def with_noise(plan: ExperimentPlan, noise: NoiseModel) -> ExperimentPlan:
    return replace(plan, noise=noise)


def all_data_paulis(max_weight: int = 4) -> list[PauliString]:
    return [PauliString("".join(t)) for t in product("IXYZ", repeat=4)
            if sum(c != "I" for c in t) <= max_weight]
