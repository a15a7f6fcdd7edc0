"""Exact state-vector and density-matrix simulation of small circuits.

Qubit ``q`` (1-based) is bit ``n - q`` of the basis-state index, i.e. qubit 1
is the most significant bit.  On the 5-qubit register the ancilla is the
least significant bit, so ``|11110>`` is state 30.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .code import PauliString

N_QUBITS = 5
DIM = 2 ** N_QUBITS

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_PAULI = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}

# rotation generator (unit vector over X, Y, Z) and angle of each named
# single-qubit gate; these gates equal exp(-i angle/2 n.sigma) up to phase
_AXES = {
    "X": (1.0, 0.0, 0.0),
    "Y": (0.0, 1.0, 0.0),
    "Z": (0.0, 0.0, 1.0),
    "H": (1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)),
    "S": (0.0, 0.0, 1.0),
    "RX": (1.0, 0.0, 0.0),
    "RY": (0.0, 1.0, 0.0),
    "RZ": (0.0, 0.0, 1.0),
}

SINGLE_QUBIT_GATES = ("H", "X", "Y", "Z", "S", "RX", "RY", "RZ")
TWO_QUBIT_GATES = ("CNOT", "CZ", "XX")
PARAMETRIC = ("RX", "RY", "RZ", "XX")


def rotation(axis: Sequence[float], angle: float) -> np.ndarray:
    """``exp(-i angle/2 (n . sigma))`` for a unit vector ``axis``."""
    nx, ny, nz = axis
    gen = nx * _X + ny * _Y + nz * _Z
    return math.cos(angle / 2) * _I2 - 1j * math.sin(angle / 2) * gen


def xx_angle(alpha: float) -> float:
    """Ising angle ``theta`` of ``exp(-i theta XX)`` for miscalibration ``alpha``.

    Chosen so that the gate maps ``|00>`` to
    ``sqrt(0.5 - alpha)|00> + i sqrt(0.5 + alpha)|11>``.
    """
    if not -0.5 <= alpha <= 0.5:
        raise ValueError(f"XX miscalibration {alpha} outside [-0.5, 0.5]")
    return -math.asin(math.sqrt(0.5 + alpha))


def xx_matrix(theta: float) -> np.ndarray:
    xx = np.kron(_X, _X)
    return math.cos(theta) * np.eye(4, dtype=complex) - 1j * math.sin(theta) * xx


@dataclass(frozen=True)
class GateOp:
    """One gate on 1-based qubit ``targets``.

    ``param`` is the rotation angle for RX/RY/RZ and the miscalibration
    ``alpha`` for XX.  For CNOT and CZ the first target is the control.
    """

    kind: str
    targets: tuple[int, ...]
    param: float = 0.0

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if kind in SINGLE_QUBIT_GATES:
            arity = 1
        elif kind in TWO_QUBIT_GATES:
            arity = 2
        else:
            raise ValueError(f"unknown gate {self.kind!r}")
        if len(self.targets) != arity:
            raise ValueError(f"{kind} takes {arity} target(s), got {self.targets}")
        if len(set(self.targets)) != arity or min(self.targets) < 1:
            raise ValueError(f"invalid targets {self.targets} for {kind}")
        if kind == "XX" and not -0.5 <= self.param <= 0.5:
            raise ValueError(f"XX miscalibration {self.param} outside [-0.5, 0.5]")

    @property
    def matrix(self) -> np.ndarray:
        """Local unitary over ``targets`` (first target is the high bit)."""
        k = self.kind
        if k == "H":
            return _H
        if k == "S":
            return _S
        if k in _PAULI:
            return _PAULI[k]
        if k in ("RX", "RY", "RZ"):
            return rotation(_AXES[k], self.param)
        if k == "CNOT":
            return np.eye(4, dtype=complex)[[0, 1, 3, 2]]
        if k == "CZ":
            return np.diag([1, 1, 1, -1]).astype(complex)
        return xx_matrix(xx_angle(self.param))

    @property
    def rotation_angle(self) -> float:
        """Rotation angle of a single-qubit gate about its own axis."""
        if self.kind in ("RX", "RY", "RZ"):
            return self.param
        if self.kind == "S":
            return math.pi / 2
        return math.pi

    def to_text(self) -> str:
        qs = " ".join(str(t) for t in self.targets)
        if self.kind == "XX":
            return f"XX {qs} alpha={self.param:.12g}"
        if self.kind in ("RX", "RY", "RZ"):
            return f"{self.kind} {qs} theta={self.param:.12g}"
        return f"{self.kind} {qs}"


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list.  Faults may sit before the first gate and after each gate."""

    ops: tuple[GateOp, ...] = ()
    n_qubits: int = N_QUBITS
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if max(op.targets) > self.n_qubits:
                raise ValueError(f"{op.to_text()} references a qubit beyond {self.n_qubits}")

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot join circuits of different widths")
        name = "+".join(n for n in (self.name, other.name) if n)
        return Circuit(self.ops + other.ops, self.n_qubits, name)

    def __len__(self):
        return len(self.ops)

    @property
    def fault_slots(self) -> int:
        return len(self.ops) + 1

    def qubits_used(self) -> set[int]:
        return {t for op in self.ops for t in op.targets}

    def to_text(self) -> str:
        lines = [f"# {self.name}"] if self.name else []
        lines += [op.to_text() for op in self.ops]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n_qubits: int = N_QUBITS, name: str = "") -> "Circuit":
        """Parse one op per line, e.g. ``CNOT 1 2`` or ``XX 1 2 alpha=0.02``."""
        ops = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            kind, *rest = line.split()
            targets, param = [], 0.0
            for tok in rest:
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    if key.lower() not in ("alpha", "theta"):
                        raise ValueError(f"line {lineno}: unknown parameter {key!r}")
                    param = float(val)
                else:
                    targets.append(int(tok))
            try:
                ops.append(GateOp(kind, tuple(targets), param))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(tuple(ops), n_qubits, name)


@lru_cache(maxsize=4096)
def _embed_cached(key: bytes, shape: tuple[int, int], targets: tuple[int, ...], n: int) -> np.ndarray:
    local = np.frombuffer(key, dtype=complex).reshape(shape)
    k = len(targets)
    eye = np.eye(2 ** n, dtype=complex).reshape([2] * n + [2 ** n])
    axes = [t - 1 for t in targets]
    out = np.tensordot(local.reshape([2] * (2 * k)), eye, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    out = out.reshape(2 ** n, 2 ** n)
    out.flags.writeable = False
    return out


def embed(local: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Full ``2**n`` unitary acting as ``local`` on 1-based ``targets``."""
    local = np.ascontiguousarray(local, dtype=complex)
    return _embed_cached(local.tobytes(), local.shape, tuple(targets), n)


class StateVector:
    """Pure state of ``n`` qubits."""

    def __init__(self, amplitudes):
        amps = np.array(amplitudes, dtype=complex).ravel()
        n = int(round(math.log2(amps.size)))
        if 2 ** n != amps.size:
            raise ValueError("amplitude count is not a power of two")
        self.amplitudes = amps
        self.n_qubits = n
        amps.flags.writeable = False

    @classmethod
    def basis(cls, index: int = 0, n: int = N_QUBITS) -> "StateVector":
        amps = np.zeros(2 ** n, dtype=complex)
        amps[index] = 1
        return cls(amps)

    @classmethod
    def zero(cls, n: int = N_QUBITS) -> "StateVector":
        return cls.basis(0, n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def evolve(self, unitary: np.ndarray) -> "StateVector":
        return StateVector(unitary @ self.amplitudes)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


class DensityMatrix:
    """Mixed state of ``n`` qubits as a ``2**n x 2**n`` matrix."""

    def __init__(self, matrix):
        rho = np.array(matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(math.log2(rho.shape[0])))
        if 2 ** n != rho.shape[0]:
            raise ValueError("dimension is not a power of two")
        self.matrix = rho
        self.n_qubits = n
        rho.flags.writeable = False

    @classmethod
    def zero(cls, n: int = N_QUBITS) -> "DensityMatrix":
        return StateVector.zero(n).to_density()

    def evolve(self, unitary: np.ndarray) -> "DensityMatrix":
        return DensityMatrix(unitary @ self.matrix @ unitary.conj().T)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.matrix).real, 0.0, None)

    def fidelity(self, psi: StateVector) -> float:
        """Overlap ``<psi|rho|psi>`` with a pure reference state."""
        v = psi.amplitudes
        return float(np.vdot(v, self.matrix @ v).real)

    def is_valid(self, tol: float = 1e-10) -> bool:
        rho = self.matrix
        if not np.allclose(rho, rho.conj().T, atol=tol):
            return False
        if abs(self.trace() - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh(rho).min() >= -1e-9)


State = StateVector | DensityMatrix


def _check_targets(state: State, targets: Iterable[int]):
    if max(targets) > state.n_qubits:
        raise ValueError(f"target {max(targets)} beyond {state.n_qubits}-qubit state")


def apply_gate(state: State, op: GateOp) -> State:
    """Apply one ideal gate."""
    _check_targets(state, op.targets)
    return state.evolve(embed(op.matrix, op.targets, state.n_qubits))


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of ``p`` including its phase."""
    m = np.array([[1]], dtype=complex)
    for c in p.letters:
        m = np.kron(m, _PAULI[c])
    return p.sign * m


def apply_pauli(state: State, p: PauliString) -> State:
    """Apply a Pauli operator; 4-letter strings act on the data qubits only."""
    n = state.n_qubits
    if len(p) == n - 1 == 4:
        p = p.extend(n)
    if len(p) != n:
        raise ValueError(f"Pauli of length {len(p)} does not fit a {n}-qubit state")
    return state.evolve(pauli_matrix(p))


class TransferMatrix:
    """Readout kernel ``M[true, observed] = P(observed | true)``."""

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("transfer matrix must be square")
        if m.min() < 0 or m.max() > 1:
            raise ValueError("transfer matrix entries must lie in [0, 1]")
        if not np.allclose(m.sum(axis=1), 1.0, atol=1e-12, rtol=0):
            raise ValueError("transfer matrix rows must sum to 1")
        self.matrix = m
        m.flags.writeable = False

    @classmethod
    def identity(cls, n: int = N_QUBITS) -> "TransferMatrix":
        return cls(np.eye(2 ** n))

    @classmethod
    def from_flip_rates(cls, p01: float = 0.003, p10: float = 0.009,
                        n: int = N_QUBITS, crosstalk: float = 0.0) -> "TransferMatrix":
        """Independent per-qubit readout flips plus nearest-neighbour crosstalk.

        ``p01`` is P(read 1 | prepared 0), ``p10`` is P(read 0 | prepared 1).
        With ``crosstalk = c`` a qubit in 0 is also read as 1 with probability
        ``c`` for each neighbour that is in 1 (light from a bright neighbour
        leaking into its detector channel).
        """
        dim = 2 ** n
        m = np.empty((dim, dim))
        bits = (np.arange(dim)[:, None] >> (n - 1 - np.arange(n))) & 1
        for t in range(dim):
            tb = bits[t]
            p_one = np.empty(n)
            for q in range(n):
                if tb[q]:
                    p_one[q] = 1 - p10
                else:
                    bright = sum(tb[j] for j in (q - 1, q + 1) if 0 <= j < n)
                    p_one[q] = 1 - (1 - p01) * (1 - crosstalk) ** bright
            m[t] = np.prod(np.where(bits == 1, p_one, 1 - p_one), axis=1)
        return cls(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def compose(self, other: "TransferMatrix") -> "TransferMatrix":
        """Kernel of reading through ``self`` and then ``other``."""
        return TransferMatrix(self.matrix @ other.matrix)

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    def average_fidelity(self) -> float:
        """Mean probability of reading the prepared basis state correctly."""
        return float(np.mean(np.diag(self.matrix)))

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(self.dim)))


# per-qubit detection fidelities 99.7 % (|0>) and 99.1 % (|1>); crosstalk
# tuned so the average 5-qubit readout fidelity is 95.7 %
DEFAULT_P01 = 0.003
DEFAULT_P10 = 0.009
DEFAULT_CROSSTALK = 0.00692


def default_spam() -> TransferMatrix:
    return _default_spam()


@lru_cache(maxsize=1)
def _default_spam() -> TransferMatrix:
    return TransferMatrix.from_flip_rates(DEFAULT_P01, DEFAULT_P10, N_QUBITS, DEFAULT_CROSSTALK)


@dataclass(frozen=True)
class NoiseModel:
    """Gate errors plus a readout transfer matrix.

    All three rates are error probabilities per gate:

    * ``eps1``: over-rotation of every computational single-qubit gate about
      its own axis;
    * ``eps2``: over-rotation of the XX interaction inside every two-qubit
      gate, i.e. an extra ``X x X`` on the pair;
    * ``eps_stark``: Stark-shift phase error of every two-qubit gate, a Z on
      each ion with probability ``1 - sqrt(1 - eps_stark)``.

    By default each error is the Pauli-twirled (stochastic) form of the
    rotation; ``coherent=True`` applies the rotation itself, with the angle
    whose error probability equals the rate.
    """

    eps1: float = 0.0
    eps2: float = 0.0
    eps_stark: float = 0.0
    spam: TransferMatrix = field(default_factory=lambda: TransferMatrix.identity())
    coherent: bool = False

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps_stark"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.2:
                raise ValueError(f"{name}={v} outside [0, 0.2]")

    @classmethod
    def zero(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def fitted(cls) -> "NoiseModel":
        """Rates 0.50 %, 1.0 %, 1.4 % with the default readout matrix."""
        return cls(0.005, 0.010, 0.014, default_spam())

    @property
    def params(self) -> tuple[float, float, float]:
        return (self.eps1, self.eps2, self.eps_stark)

    def with_params(self, eps1: float, eps2: float, eps_stark: float) -> "NoiseModel":
        return NoiseModel(eps1, eps2, eps_stark, self.spam, self.coherent)

    @property
    def gates_ideal(self) -> bool:
        return self.params == (0.0, 0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.gates_ideal and self.spam.is_identity()

    @property
    def stark_per_ion(self) -> float:
        return 1 - math.sqrt(1 - self.eps_stark)

    @classmethod
    def from_text(cls, text: str) -> "NoiseModel":
        """Parse ``key=value`` lines.

        Keys: eps1, eps2, eps_stark, coherent, spam (``default`` or
        ``identity``), p01, p10, crosstalk.
        """
        vals: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"expected key=value, got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            vals[key.lower()] = val
        known = {"eps1", "eps2", "eps_stark", "p01", "p10", "crosstalk", "spam", "coherent"}
        unknown = set(vals) - known
        if unknown:
            raise ValueError(f"unknown noise keys: {sorted(unknown)}")
        spam_kind = vals.get("spam", "default").lower()
        if spam_kind == "identity":
            spam = TransferMatrix.identity()
        elif spam_kind == "default":
            spam = TransferMatrix.from_flip_rates(
                float(vals.get("p01", DEFAULT_P01)),
                float(vals.get("p10", DEFAULT_P10)),
                N_QUBITS,
                float(vals.get("crosstalk", DEFAULT_CROSSTALK)),
            )
        else:
            raise ValueError(f"spam must be 'default' or 'identity', got {spam_kind!r}")
        coherent = vals.get("coherent", "false").lower() in ("1", "true", "yes")
        return cls(float(vals.get("eps1", 0)), float(vals.get("eps2", 0)),
                   float(vals.get("eps_stark", 0)), spam, coherent)

    def to_text(self) -> str:
        return (f"eps1={self.eps1:.12g}\neps2={self.eps2:.12g}\neps_stark={self.eps_stark:.12g}\n"
                f"coherent={str(self.coherent).lower()}\n")


def cnot_via_xx(control: int, target: int, alpha: float = 0.0) -> list[GateOp]:
    """CNOT built from one XX gate and single-qubit rotations.

    Exact (up to global phase) for ``alpha = 0``.
    """
    half = math.pi / 2
    return [
        GateOp("RY", (control,), half),
        GateOp("XX", (control, target), alpha),
        GateOp("RX", (control,), half),
        GateOp("RX", (target,), half),
        GateOp("RY", (control,), -half),
    ]


def physical_ops(op: GateOp, alpha: float = 0.0) -> list[GateOp]:
    """Hardware-level realisation of one computational gate."""
    if op.kind == "CNOT":
        return cnot_via_xx(*op.targets, alpha)
    if op.kind == "CZ":
        c, t = op.targets
        return [GateOp("H", (t,))] + cnot_via_xx(c, t, alpha) + [GateOp("H", (t,))]
    return [op]


def compile_physical(circuit: Circuit, alpha: float = 0.0) -> Circuit:
    """Rewrite CNOT and CZ through XX gates carrying miscalibration ``alpha``."""
    ops = [g for op in circuit.ops for g in physical_ops(op, alpha)]
    return Circuit(tuple(ops), circuit.n_qubits, circuit.name)


# (probability, unitary) branches; an empty list means no error
Channel = list[tuple[float, np.ndarray]]


def _single_qubit_error(op: GateOp, noise: NoiseModel, n: int) -> Channel:
    angle = op.rotation_angle
    if not noise.eps1 or not angle:
        return []
    axis = _AXES[op.kind]
    if noise.coherent:
        delta = math.copysign(2 * math.asin(math.sqrt(noise.eps1)), angle)
        return [(1.0, embed(rotation(axis, delta), op.targets, n))]
    return [(noise.eps1 * a * a, embed(_PAULI[k], op.targets, n))
            for a, k in zip(axis, "XYZ") if a]


def _xx_errors(op: GateOp, noise: NoiseModel, n: int) -> list[Channel]:
    out = []
    if noise.eps2:
        if noise.coherent:
            out.append([(1.0, embed(xx_matrix(-math.asin(math.sqrt(noise.eps2))), op.targets, n))])
        else:
            out.append([(noise.eps2, embed(np.kron(_X, _X), op.targets, n))])
    if noise.eps_stark:
        s = noise.stark_per_ion
        for q in op.targets:
            if noise.coherent:
                rz = rotation(_AXES["RZ"], 2 * math.asin(math.sqrt(s)))
                out.append([(1.0, embed(rz, (q,), n))])
            else:
                out.append([(s, embed(_Z, (q,), n))])
    return out


def _apply_channel(rho: DensityMatrix, channel: Channel) -> DensityMatrix:
    if len(channel) == 1 and channel[0][0] == 1.0:
        return rho.evolve(channel[0][1])
    m = rho.matrix
    out = (1 - sum(p for p, _ in channel)) * m
    for p, u in channel:
        out = out + p * (u @ m @ u.conj().T)
    return DensityMatrix(out)


def run(circuit: Circuit, noise: NoiseModel | None = None,
        input: State | None = None, alpha: float | None = None) -> DensityMatrix:
    """Simulate ``circuit`` and return the final density matrix.

    Ideal runs use native gates.  With gate noise or an explicit ``alpha``
    each CNOT/CZ is realised through an XX gate: miscalibration ``alpha`` and
    the two-qubit errors act on that XX gate, while the surrounding basis
    rotations stay ideal.  Each computational single-qubit gate carries the
    single-qubit error.
    """
    noise = noise or NoiseModel.zero()
    if input is None:
        input = StateVector.zero(circuit.n_qubits)
    if input.n_qubits != circuit.n_qubits:
        raise ValueError("input state width does not match the circuit")
    rho = input.to_density() if isinstance(input, StateVector) else input
    if noise.gates_ideal and alpha is None:
        for op in circuit.ops:
            rho = apply_gate(rho, op)
        return rho
    n = circuit.n_qubits
    a = 0.0 if alpha is None else alpha
    for op in circuit.ops:
        if op.kind in SINGLE_QUBIT_GATES:
            rho = apply_gate(rho, op)
            rho = _apply_channel(rho, _single_qubit_error(op, noise, n))
            continue
        for g in physical_ops(op, a):
            rho = apply_gate(rho, g)
            if g.kind == "XX":
                for ch in _xx_errors(g, noise, n):
                    rho = _apply_channel(rho, ch)
    return rho


def run_pure(circuit: Circuit, input: StateVector | None = None,
             faults: dict[int, PauliString] | None = None) -> StateVector:
    """Ideal state-vector run; ``faults[k]`` is applied just before op ``k``.

    Slot ``len(circuit)`` is after the last gate.
    """
    faults = faults or {}
    psi = input if input is not None else StateVector.zero(circuit.n_qubits)
    for k, op in enumerate(circuit.ops):
        if k in faults:
            psi = apply_pauli(psi, faults[k])
        psi = apply_gate(psi, op)
    if len(circuit.ops) in faults:
        psi = apply_pauli(psi, faults[len(circuit.ops)])
    return psi


def _basis_string(bases, n: int) -> str:
    s = "".join(bases).upper()
    if len(s) != n or set(s) - {"X", "Z"}:
        raise ValueError(f"need one of Z/X per qubit ({n}), got {bases!r}")
    return s


def measure_distribution(state: State, bases="ZZZZZ") -> np.ndarray:
    """Born-rule outcome distribution with each qubit read in Z or X.

    X-basis qubits are rotated by H before a Z readout, so outcome bit 0
    means ``|+>``.
    """
    b = _basis_string(bases, state.n_qubits)
    for q, basis in enumerate(b, 1):
        if basis == "X":
            state = apply_gate(state, GateOp("H", (q,)))
    p = state.probabilities()
    return p / p.sum()


def apply_spam(dist, spam: TransferMatrix) -> np.ndarray:
    """Push a true-outcome distribution through the readout kernel."""
    d = np.asarray(dist, dtype=float)
    if d.shape != (spam.dim,):
        raise ValueError(f"distribution of shape {d.shape} vs transfer matrix {spam.dim}")
    return d @ spam.matrix


def correct_spam(dist, spam: TransferMatrix) -> np.ndarray:
    """Invert the readout kernel, clip negative entries and renormalise."""
    d = np.asarray(dist, dtype=float)
    if d.shape != (spam.dim,):
        raise ValueError(f"distribution of shape {d.shape} vs transfer matrix {spam.dim}")
    try:
        x = np.linalg.solve(spam.matrix.T, d)
    except np.linalg.LinAlgError as exc:
        raise ValueError("transfer matrix is singular") from exc
    x = np.clip(x, 0.0, None)
    total = x.sum()
    if total <= 0:
        raise ValueError("corrected distribution has no positive mass")
    return x / total


def distribution_csv(dist) -> str:
    buf = io.StringIO()
    buf.write("state_index,probability\n")
    for i, p in enumerate(np.asarray(dist, dtype=float)):
        buf.write(f"{i},{p:.12g}\n")
    return buf.getvalue()


def read_distribution_csv(text: str) -> np.ndarray:
    rows = [ln for ln in text.strip().splitlines()[1:] if ln.strip()]
    out = np.zeros(len(rows))
    for ln in rows:
        i, p = ln.split(",")
        out[int(i)] = float(p)
    return out
