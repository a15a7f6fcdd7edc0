"""Pauli algebra and the [[4,2,2]] code.

Qubits are numbered 1..n from the left of a Pauli string, so ``"XIXI"`` acts
with X on data qubits 1 and 3.  Phases are kept as a power of ``i`` so that
products stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping

PAULI_LETTERS = "IXYZ"

# single-letter products: (a, b) -> (power of i, letter)
_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}


class RejectedShot(ValueError):
    """Raised when a measured data string fails the parity check."""


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator ``i**phase * letters``.

    Parameters
    ----------
    letters : str
        One of ``I, X, Y, Z`` per qubit.
    phase : int
        Power of ``i`` (taken mod 4).
    """

    letters: str
    phase: int = 0

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or any(c not in PAULI_LETTERS for c in letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``"XXII"``, ``"-ZZII"``, ``"+iYIII"`` or ``"-iXYZI"``."""
        s = text.strip()
        phase = 0
        for prefix, p in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
            if s.startswith(prefix):
                phase, s = p, s[len(prefix):]
                break
        return cls(s, phase)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        """Pauli ``letter`` on 1-based ``qubit`` of an n-qubit register."""
        if not 1 <= qubit <= n:
            raise ValueError(f"qubit {qubit} outside 1..{n}")
        chars = ["I"] * n
        chars[qubit - 1] = letter
        return cls("".join(chars))

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return _PHASE_TEXT[self.phase] + self.letters if self.phase else self.letters

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    @property
    def sign(self) -> complex:
        return 1j ** self.phase

    def x_bits(self) -> tuple[int, ...]:
        """Bit-flip support: 1 where the letter is X or Y."""
        return tuple(int(c in "XY") for c in self.letters)

    def z_bits(self) -> tuple[int, ...]:
        """Phase-flip support: 1 where the letter is Z or Y."""
        return tuple(int(c in "ZY") for c in self.letters)

    def unsigned(self) -> "PauliString":
        return PauliString(self.letters)

    def extend(self, n: int) -> "PauliString":
        """Pad with identities on the right up to ``n`` qubits."""
        if n < len(self):
            raise ValueError("cannot shrink a Pauli string")
        return PauliString(self.letters + "I" * (n - len(self)), self.phase)


def _check_lengths(a: PauliString, b: PauliString):
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Return the product ``a * b`` with its exact phase."""
    _check_lengths(a, b)
    phase = a.phase + b.phase
    letters = []
    for x, y in zip(a.letters, b.letters):
        p, c = _PRODUCT[x, y]
        phase += p
        letters.append(c)
    return PauliString("".join(letters), phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True if ``a`` and ``b`` commute."""
    _check_lengths(a, b)
    clashes = sum(x != "I" and y != "I" and x != y for x, y in zip(a.letters, b.letters))
    return clashes % 2 == 0


def all_paulis(n: int):
    """Every unsigned n-qubit Pauli string, identity first."""
    for letters in product(PAULI_LETTERS, repeat=n):
        yield PauliString("".join(letters))


@dataclass(frozen=True)
class CodeSpec:
    """Stabilizers and logical operators of the [[4,2,2]] code."""

    n_data: int
    stabilizers: Mapping[str, PauliString]
    logical_ops: Mapping[str, PauliString]


CODE = CodeSpec(
    n_data=4,
    stabilizers={"Sx": PauliString("XXXX"), "Sz": PauliString("ZZZZ")},
    logical_ops={
        "Za": PauliString("ZZII"),
        "Zb": PauliString("ZIZI"),
        "Xa": PauliString("XIXI"),
        "Xb": PauliString("XXII"),
    },
)


@dataclass(frozen=True)
class LogicalOutcome:
    la: int
    lb: int
    basis: str

    @property
    def index(self) -> int:
        """Position in the population vector ordered 00, 01, 10, 11."""
        return 2 * self.la + self.lb


def _bits_of(bits) -> tuple[int, ...]:
    if isinstance(bits, str):
        out = tuple(int(c) for c in bits)
    else:
        out = tuple(int(b) for b in bits)
    if len(out) != 4 or any(b not in (0, 1) for b in out):
        raise ValueError(f"expected 4 data bits, got {bits!r}")
    return out


def _build_decode_table() -> dict[str, dict[tuple[int, ...], tuple[int, int]]]:
    # Z basis: la, lb are the eigenvalues of Za = Z1 Z2 and Zb = Z1 Z3.
    # X basis (bit 0 <-> |+>): la, lb are the eigenvalues of Xa = X1 X3 and Xb = X1 X2.
    table: dict[str, dict[tuple[int, ...], tuple[int, int]]] = {"Z": {}, "X": {}}
    for bits in product((0, 1), repeat=4):
        if sum(bits) % 2:
            continue
        b1, b2, b3, _ = bits
        table["Z"][bits] = (b1 ^ b2, b1 ^ b3)
        table["X"][bits] = (b1 ^ b3, b1 ^ b2)
    return table


DECODE_TABLE = _build_decode_table()


def decode_logical(bits, basis: str = "Z") -> LogicalOutcome:
    """Decode four measured data bits into the logical pair ``(la, lb)``.

    Odd-parity strings raise :class:`RejectedShot`.
    """
    basis = basis.upper()
    if basis not in DECODE_TABLE:
        raise ValueError(f"unknown basis {basis!r}")
    key = _bits_of(bits)
    try:
        la, lb = DECODE_TABLE[basis][key]
    except KeyError:
        raise RejectedShot(f"odd parity data string {''.join(map(str, key))}") from None
    return LogicalOutcome(la, lb, basis)
