"""Kraus-form noise channels embedded on the full register.

Channels are built already embedded: a single-qubit channel on site q of
an n-qubit register carries 2^n x 2^n Kraus operators.  Registers here
are at most 6 qubits, so dense embedding is cheap and keeps application
code uniform.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import sqrt

import numpy as np

from .pauli import PauliOperator, support as pauli_support, to_matrix
from .process_matrix import BASIS_INDEX, ProcessMatrix
from .states import COMPLETENESS_TOL, ContractViolationError, DensityMatrix, apply_channel

__all__ = [
    "QuantumChannel",
    "amplitude_damping",
    "depolarizing",
    "identity_channel",
    "pauli_unitary_channel",
    "compose",
    "channel_from_spec",
    "apply",
    "theoretical_chi_ad",
]


@dataclass(frozen=True)
class QuantumChannel:
    n: int
    kraus: tuple
    label: str
    support: frozenset

    def __post_init__(self):
        dim = 2 ** self.n
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus)
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for k in ops:
            if k.shape != (dim, dim):
                raise ContractViolationError(
                    f"Kraus operator shape {k.shape} does not match register dim {dim}"
                )
            acc += k.conj().T @ k
        if np.max(np.abs(acc - np.eye(dim))) > COMPLETENESS_TOL:
            raise ContractViolationError(f"channel {self.label!r} is not trace preserving")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "support", frozenset(self.support))


def _embed(k: np.ndarray, site: int, n: int) -> np.ndarray:
    """kron-embed a single-qubit operator at a 1-based site."""
    factors = [np.eye(2, dtype=np.complex128)] * n
    factors[site - 1] = k
    return reduce(np.kron, factors)


def amplitude_damping(gamma: float, site: int, n: int) -> QuantumChannel:
    """Energy relaxation with decay probability gamma on one site.

    Kraus pair: K0 = (1 + sqrt(1-gamma))/2 * I + (1 - sqrt(1-gamma))/2 * Z
    and K1 = sqrt(gamma) (X + iY)/2.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range 1..{n}")
    root = sqrt(1.0 - gamma)
    k0 = np.array([[1.0, 0.0], [0.0, root]], dtype=np.complex128)
    k1 = np.array([[0.0, sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return QuantumChannel(
        n=n,
        kraus=(_embed(k0, site, n), _embed(k1, site, n)),
        label=f"AD(gamma={gamma:g}, site={site})",
        support=frozenset({site}),
    )


def depolarizing(p: float, site: int, n: int) -> QuantumChannel:
    """Uniform Pauli noise: keep with 1-p, else X, Y or Z with p/3 each."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range 1..{n}")
    x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    kraus = (
        _embed(sqrt(1.0 - p) * np.eye(2, dtype=np.complex128), site, n),
        _embed(sqrt(p / 3.0) * x, site, n),
        _embed(sqrt(p / 3.0) * y, site, n),
        _embed(sqrt(p / 3.0) * z, site, n),
    )
    return QuantumChannel(
        n=n, kraus=kraus, label=f"DP(p={p:g}, site={site})", support=frozenset({site})
    )


def identity_channel(n: int) -> QuantumChannel:
    return QuantumChannel(
        n=n, kraus=(np.eye(2 ** n, dtype=np.complex128),), label="id", support=frozenset()
    )


def pauli_unitary_channel(op: PauliOperator) -> QuantumChannel:
    """Deterministic application of one Pauli, for fault injection."""
    return QuantumChannel(
        n=op.n, kraus=(to_matrix(op),), label=f"unitary({op})", support=pauli_support(op)
    )


def compose(outer: QuantumChannel, inner: QuantumChannel) -> QuantumChannel:
    """Channel applying ``inner`` first, then ``outer``."""
    if outer.n != inner.n:
        raise ValueError(f"cannot compose channels on {outer.n} and {inner.n} qubits")
    kraus = tuple(a @ b for a in outer.kraus for b in inner.kraus)
    return QuantumChannel(
        n=outer.n,
        kraus=kraus,
        label=f"{outer.label}*{inner.label}",
        support=outer.support | inner.support,
    )


def channel_from_spec(entries, n: int) -> QuantumChannel:
    """Build a composite channel from a list of dicts.

    Each entry has keys ``type`` (amplitude_damping | depolarizing),
    ``site`` and ``parameter``.  Entries apply in listed order: the first
    one acts on the state first.
    """
    builders = {"amplitude_damping": amplitude_damping, "depolarizing": depolarizing}
    channel = identity_channel(n)
    for entry in entries:
        kind = entry["type"]
        if kind not in builders:
            raise ValueError(f"unknown channel type {kind!r}")
        step = builders[kind](float(entry["parameter"]), int(entry["site"]), n)
        channel = compose(step, channel)
    return channel


def apply(channel: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    if channel.n != rho.n:
        raise ValueError(f"channel on {channel.n} qubits, state on {rho.n}")
    return apply_channel(rho, channel.kraus)


def theoretical_chi_ad(gamma: float) -> ProcessMatrix:
    """Closed-form process matrix of amplitude damping on qubit 1.

    With a = (1 + sqrt(1-gamma))/2 and b = (1 - sqrt(1-gamma))/2 the only
    nonzero elements sit in the {II, XI, YI, ZI} block:

        chi_II,II = a^2        chi_ZI,ZI = b^2      chi_II,ZI = chi_ZI,II = gamma/4
        chi_XI,XI = chi_YI,YI = gamma/4
        chi_YI,XI = +i gamma/4 = conj(chi_XI,YI)

    since a*b = gamma/4.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    a = (1.0 + sqrt(1.0 - gamma)) / 2.0
    b = (1.0 - sqrt(1.0 - gamma)) / 2.0
    chi = np.zeros((16, 16), dtype=np.complex128)
    ii, xi, yi, zi = (BASIS_INDEX[s] for s in ("II", "XI", "YI", "ZI"))
    chi[ii, ii] = a * a
    chi[zi, zi] = b * b
    chi[ii, zi] = chi[zi, ii] = a * b
    chi[xi, xi] = chi[yi, yi] = gamma / 4.0
    chi[xi, yi] = -1j * gamma / 4.0
    chi[yi, xi] = 1j * gamma / 4.0
    return ProcessMatrix(chi)
