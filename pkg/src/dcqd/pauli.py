"""Pauli operators in symplectic (binary) form.

An n-qubit Pauli operator is stored as two length-n bit vectors ``x`` and
``z`` plus a phase exponent ``e``, with the operator equal to

    i**e * L_1 (x) L_2 (x) ... (x) L_n

where the letter on each site is fixed by the bit pair (x_q, z_q):
(0,0) -> I, (1,0) -> X, (1,1) -> Y, (0,1) -> Z.  The letter Y means the
Hermitian Pauli matrix, not the product XZ.

Sites are numbered 1..n in every public API.  Site 1 is the leftmost
letter in string form and the most significant tensor factor in matrix
form.  Internal tuples are 0-indexed; the offset never leaks out.

Two Paulis commute iff the symplectic inner product

    sum_q a.x[q] * b.z[q] + a.z[q] * b.x[q]   (mod 2)

vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable

import numpy as np

__all__ = [
    "PauliOperator",
    "PauliParseError",
    "DimensionMismatchError",
    "MatrixSizeError",
    "MAX_DENSE_QUBITS",
    "identity",
    "single_site",
    "parse_pauli",
    "format_pauli",
    "multiply",
    "commutes",
    "tensor",
    "adjoint",
    "weight",
    "support",
    "to_matrix",
]

MAX_DENSE_QUBITS = 8

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}

# Single-site products a*b = i**t * c, keyed by (a, b) -> (c, t).
_SITE_PRODUCT = {
    ("I", "I"): ("I", 0), ("I", "X"): ("X", 0), ("I", "Y"): ("Y", 0), ("I", "Z"): ("Z", 0),
    ("X", "I"): ("X", 0), ("X", "X"): ("I", 0), ("X", "Y"): ("Z", 1), ("X", "Z"): ("Y", 3),
    ("Y", "I"): ("Y", 0), ("Y", "X"): ("Z", 3), ("Y", "Y"): ("I", 0), ("Y", "Z"): ("X", 1),
    ("Z", "I"): ("Z", 0), ("Z", "X"): ("Y", 1), ("Z", "Y"): ("X", 3), ("Z", "Z"): ("I", 0),
}

_MAT = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


class PauliParseError(ValueError):
    """Raised for malformed operator strings; carries the 1-based position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class DimensionMismatchError(ValueError):
    pass


class MatrixSizeError(ValueError):
    pass


@dataclass(frozen=True)
class PauliOperator:
    """Immutable n-qubit Pauli with an explicit i**phase prefactor."""

    n: int
    x: tuple
    z: tuple
    phase: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one site, got n={self.n}")
        if len(self.x) != self.n or len(self.z) != self.n:
            raise DimensionMismatchError(
                f"bit vectors must have length {self.n}, got {len(self.x)} and {len(self.z)}"
            )
        if any(b not in (0, 1) for b in self.x) or any(b not in (0, 1) for b in self.z):
            raise ValueError("bit vectors must contain only 0 and 1")
        object.__setattr__(self, "x", tuple(int(b) for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) for b in self.z))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    def letter(self, site: int) -> str:
        """Letter at a 1-based site."""
        if not 1 <= site <= self.n:
            raise ValueError(f"site {site} out of range 1..{self.n}")
        return _BITS_LETTER[(self.x[site - 1], self.z[site - 1])]

    @property
    def letters(self) -> str:
        return "".join(_BITS_LETTER[(xb, zb)] for xb, zb in zip(self.x, self.z))

    def symplectic(self) -> np.ndarray:
        """Concatenated [x | z] row over GF(2)."""
        return np.array(self.x + self.z, dtype=np.uint8)

    def adjoint(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z, (-self.phase) % 4)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        return f"PauliOperator({format_pauli(self)!r})"


def identity(n: int) -> PauliOperator:
    return PauliOperator(n, (0,) * n, (0,) * n, 0)


def single_site(n: int, site: int, letter: str, phase: int = 0) -> PauliOperator:
    """One non-identity letter at a 1-based site, identities elsewhere."""
    if letter not in _LETTER_BITS:
        raise ValueError(f"unknown letter {letter!r}")
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range 1..{n}")
    x = [0] * n
    z = [0] * n
    x[site - 1], z[site - 1] = _LETTER_BITS[letter]
    return PauliOperator(n, tuple(x), tuple(z), phase)


def parse_pauli(text: str) -> PauliOperator:
    """Parse a string like ``-iXYZI`` into an operator.

    Accepted phase prefixes: '', '+', '-', 'i', '+i', '-i'.  The rest of
    the string must be letters from IXYZ.  Errors report the 1-based
    character position in the original string.
    """
    s = text.strip()
    if not s:
        raise PauliParseError("empty operator string", 1)
    phase = 0
    offset = 0
    for prefix, exp in (("-i", 3), ("+i", 1), ("-", 2), ("+", 0), ("i", 1)):
        if s.startswith(prefix) and len(s) > len(prefix):
            phase = exp
            offset = len(prefix)
            break
    body = s[offset:]
    if not body:
        raise PauliParseError("no letters after phase prefix", offset + 1)
    x, z = [], []
    for k, ch in enumerate(body):
        if ch not in _LETTER_BITS:
            raise PauliParseError(f"invalid letter {ch!r}", offset + k + 1)
        xb, zb = _LETTER_BITS[ch]
        x.append(xb)
        z.append(zb)
    return PauliOperator(len(body), tuple(x), tuple(z), phase)


def format_pauli(op: PauliOperator) -> str:
    """Canonical string: phase prefix from {'', 'i', '-', '-i'} plus letters."""
    return _PHASE_PREFIX[op.phase] + op.letters


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Group product a*b with exact phase tracking."""
    if a.n != b.n:
        raise DimensionMismatchError(f"cannot multiply operators on {a.n} and {b.n} sites")
    phase = a.phase + b.phase
    x, z = [], []
    for q in range(a.n):
        la = _BITS_LETTER[(a.x[q], a.z[q])]
        lb = _BITS_LETTER[(b.x[q], b.z[q])]
        lc, t = _SITE_PRODUCT[(la, lb)]
        phase += t
        xb, zb = _LETTER_BITS[lc]
        x.append(xb)
        z.append(zb)
    return PauliOperator(a.n, tuple(x), tuple(z), phase % 4)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    if a.n != b.n:
        raise DimensionMismatchError(f"cannot compare operators on {a.n} and {b.n} sites")
    acc = 0
    for q in range(a.n):
        acc ^= (a.x[q] & b.z[q]) ^ (a.z[q] & b.x[q])
    return acc == 0


def tensor(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Tensor product with a on the left (lower site numbers)."""
    return PauliOperator(a.n + b.n, a.x + b.x, a.z + b.z, (a.phase + b.phase) % 4)


def adjoint(a: PauliOperator) -> PauliOperator:
    return a.adjoint()


def weight(a: PauliOperator) -> int:
    return sum(1 for xb, zb in zip(a.x, a.z) if xb or zb)


def support(a: PauliOperator) -> frozenset:
    """1-based sites carrying a non-identity letter."""
    return frozenset(q + 1 for q in range(a.n) if a.x[q] or a.z[q])


def to_matrix(op: PauliOperator, max_qubits: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """Dense 2^n x 2^n matrix with site 1 as the most significant factor."""
    if op.n > max_qubits:
        raise MatrixSizeError(
            f"refusing dense matrix for n={op.n} (limit {max_qubits})"
        )
    mat = reduce(np.kron, (_MAT[ch] for ch in op.letters))
    return (1j ** op.phase) * mat
