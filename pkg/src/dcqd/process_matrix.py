"""Process matrices over the fixed two-qubit operator basis.

Any channel on the two principal qubits expands as

    E(rho) = sum_{m,n} chi_mn F_m rho F_n^dag

over the 16 Hermitian Pauli products F_m.  The basis order is fixed
everywhere in this package: identity first, then single-site letters on
qubit 1, then on qubit 2, then the nine two-site products row-major:

    II XI YI ZI IX IY IZ XX XY XZ YX YY YZ ZX ZY ZZ

This is also the row order of the located-error reference table, so a
process-matrix index doubles as a located-error index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PauliOperator, parse_pauli, to_matrix

__all__ = [
    "BASIS_LABELS",
    "BASIS_INDEX",
    "basis_paulis",
    "basis_matrices",
    "ProcessMatrix",
    "apply_process",
]

BASIS_LABELS = (
    "II", "XI", "YI", "ZI", "IX", "IY", "IZ",
    "XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ",
)
BASIS_INDEX = {label: k for k, label in enumerate(BASIS_LABELS)}

HERMITICITY_TOL = 1e-10


@lru_cache(maxsize=1)
def basis_paulis() -> tuple:
    """The 16 two-qubit basis operators, phase +1, in canonical order."""
    return tuple(parse_pauli(label) for label in BASIS_LABELS)


@lru_cache(maxsize=1)
def basis_matrices() -> np.ndarray:
    """Stacked dense forms, shape (16, 4, 4)."""
    mats = np.stack([to_matrix(op) for op in basis_paulis()])
    mats.setflags(write=False)
    return mats


@dataclass(frozen=True)
class ProcessMatrix:
    """Hermitian 16x16 chi matrix over the canonical basis."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128)
        if arr.shape != (16, 16):
            raise ValueError(f"expected shape (16, 16), got {arr.shape}")
        if np.max(np.abs(arr - arr.conj().T)) > HERMITICITY_TOL:
            raise ValueError("chi matrix must be Hermitian within 1e-10")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def labels(self) -> tuple:
        return BASIS_LABELS

    def entry(self, m, n) -> complex:
        """Element by integer index or basis label."""
        mi = BASIS_INDEX[m] if isinstance(m, str) else int(m)
        ni = BASIS_INDEX[n] if isinstance(n, str) else int(n)
        return complex(self.data[mi, ni])

    @property
    def diagonal(self) -> np.ndarray:
        return self.data.diagonal().real.copy()

    def max_abs_diff(self, other: "ProcessMatrix") -> float:
        return float(np.max(np.abs(self.data - other.data)))


def apply_process(chi: ProcessMatrix, rho) -> np.ndarray:
    """Evaluate sum_mn chi_mn F_m rho F_n^dag on a 4x4 input.

    Returns a plain array: for estimated chi the output can be slightly
    unphysical (trace and positivity off at sampling-noise scale), and it
    is the caller's job to sanitize before treating it as a state.
    """
    mat = rho.data if hasattr(rho, "data") else np.asarray(rho, dtype=np.complex128)
    if mat.shape != (4, 4):
        raise ValueError(f"expected a 4x4 input, got {mat.shape}")
    f = basis_matrices()
    return np.einsum("mn,mij,jk,nlk->il", chi.data, f, mat, f.conj())
