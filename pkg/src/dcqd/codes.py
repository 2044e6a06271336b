"""Stabilizer codes for ancilla-filtered process characterization.

Three codes are built here:

* ``build_s0``: the four-qubit probe code whose two principal qubits are
  each Bell-paired with an ancilla qubit.  All sixteen of its syndromes
  are consumed by principal-side (located) errors, so it has no room to
  flag ancilla faults.
* ``build_s422``: the [[4,2,2]] error-detecting code used as the inner
  layer protecting the ancilla pair.
* ``concatenate_ancilla``: replaces the ancilla pair of an outer code by
  logical qubits of an inner code, producing the six-qubit filter code
  whose first two syndrome bits witness ancilla faults.

Sites are 1-based.  A syndrome lists one bit per generator, 0 for
commuting, written like "010100" with the first generator leftmost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import pauli
from .pauli import PauliOperator, identity, multiply, commutes, tensor, parse_pauli
from .states import DensityMatrix

__all__ = [
    "Syndrome",
    "StabilizerCode",
    "CodeConstructionError",
    "UnsupportedCodeError",
    "ErrorPartition",
    "HammingBoundResult",
    "build_s0",
    "build_s422",
    "build_s1",
    "concatenate_ancilla",
    "codeword_state",
    "codeword",
    "syndrome_of_error",
    "located_error_table",
    "located_syndrome_index",
    "destabilizers",
    "partition_error_set",
    "qec_condition_matrix",
    "located_hamming_bound",
    "code_to_json",
    "code_from_json",
]


class CodeConstructionError(ValueError):
    pass


class UnsupportedCodeError(ValueError):
    pass


@dataclass(frozen=True)
class Syndrome:
    bits: tuple

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("syndrome bits must be 0 or 1")

    @classmethod
    def from_string(cls, text: str) -> "Syndrome":
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_int(cls, value: int, length: int) -> "Syndrome":
        return cls(tuple((value >> (length - 1 - k)) & 1 for k in range(length)))

    def to_int(self) -> int:
        acc = 0
        for b in self.bits:
            acc = (acc << 1) | b
        return acc

    @property
    def is_trivial(self) -> bool:
        return not any(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class StabilizerCode:
    """Stabilizer code with an explicit principal/ancilla site split.

    ``detection_prefix`` counts leading generators whose syndrome bits
    must vanish for a measurement round to be accepted; it is nonzero
    only for concatenated codes where those generators watch the ancilla.
    """

    label: str
    n: int
    generators: tuple
    principal_sites: frozenset
    ancilla_sites: frozenset
    logical_x: tuple = ()
    logical_z: tuple = ()
    detection_prefix: int = 0

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "logical_x", tuple(self.logical_x))
        object.__setattr__(self, "logical_z", tuple(self.logical_z))
        object.__setattr__(self, "principal_sites", frozenset(self.principal_sites))
        object.__setattr__(self, "ancilla_sites", frozenset(self.ancilla_sites))
        for g in gens:
            if g.n != self.n:
                raise CodeConstructionError(
                    f"generator {g} acts on {g.n} sites, code has {self.n}"
                )
            if g.phase != 0:
                raise CodeConstructionError(f"generator {g} must carry phase +1")
        for a in range(len(gens)):
            for b in range(a + 1, len(gens)):
                if not commutes(gens[a], gens[b]):
                    raise CodeConstructionError(
                        f"generators {gens[a]} and {gens[b]} anticommute"
                    )
        rows = np.array([g.symplectic() for g in gens], dtype=np.uint8)
        if len(gens) and _gf2_rank(rows) != len(gens):
            raise CodeConstructionError("generators are not independent over GF(2)")
        if self.principal_sites | self.ancilla_sites != frozenset(range(1, self.n + 1)):
            raise CodeConstructionError("principal and ancilla sites must cover 1..n")
        if self.principal_sites & self.ancilla_sites:
            raise CodeConstructionError("principal and ancilla sites overlap")
        if not 0 <= self.detection_prefix <= len(gens):
            raise CodeConstructionError("detection prefix out of range")

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def k(self) -> int:
        return self.n - self.r


def _gf2_rank(rows: np.ndarray) -> int:
    m = rows.copy().astype(np.uint8)
    rank = 0
    cols = m.shape[1] if m.ndim == 2 else 0
    for col in range(cols):
        pivot = None
        for r in range(rank, m.shape[0]):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def _gf2_solve(mat: np.ndarray, rhs: np.ndarray):
    """One solution of mat @ v = rhs over GF(2), or None."""
    m = np.concatenate([mat.astype(np.uint8), rhs.reshape(-1, 1).astype(np.uint8)], axis=1)
    rows, cols = mat.shape
    pivots = []
    rank = 0
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        pivots.append(col)
        rank += 1
    for r in range(rank, rows):
        if m[r, -1]:
            return None
    v = np.zeros(cols, dtype=np.uint8)
    for r, col in enumerate(pivots):
        v[col] = m[r, -1]
    return v


def build_s0() -> StabilizerCode:
    """Four-qubit probe code: principal qubits 1,2 Bell-paired with 3,4."""
    gens = tuple(parse_pauli(s) for s in ("XIXI", "IXIX", "ZIZI", "IZIZ"))
    return StabilizerCode(
        label="s0",
        n=4,
        generators=gens,
        principal_sites=frozenset({1, 2}),
        ancilla_sites=frozenset({3, 4}),
    )


def build_s422() -> StabilizerCode:
    """[[4,2,2]] detection code with standard logical operators."""
    gens = (parse_pauli("XXXX"), parse_pauli("ZZZZ"))
    return StabilizerCode(
        label="s422",
        n=4,
        generators=gens,
        principal_sites=frozenset(),
        ancilla_sites=frozenset({1, 2, 3, 4}),
        logical_x=(parse_pauli("XXII"), parse_pauli("IXIX")),
        logical_z=(parse_pauli("ZIZI"), parse_pauli("IIZZ")),
    )


def _map_outer_generator(g: PauliOperator, n_principal: int, inner: StabilizerCode) -> PauliOperator:
    """Rewrite an outer generator with its ancilla letters replaced by
    inner-code logical operators."""
    principal = parse_pauli(g.letters[:n_principal]) if n_principal else None
    inner_part = identity(inner.n)
    for ordinal, site in enumerate(range(n_principal + 1, g.n + 1)):
        letter = g.letter(site)
        if letter == "I":
            continue
        if letter == "X":
            inner_part = multiply(inner_part, inner.logical_x[ordinal])
        elif letter == "Z":
            inner_part = multiply(inner_part, inner.logical_z[ordinal])
        else:  # Y = i XZ on the logical qubit
            prod = multiply(inner.logical_x[ordinal], inner.logical_z[ordinal])
            inner_part = multiply(inner_part, PauliOperator(prod.n, prod.x, prod.z, (prod.phase + 1) % 4))
    mapped = tensor(principal, inner_part) if principal is not None else inner_part
    if mapped.phase != 0:
        raise CodeConstructionError(f"mapped generator {mapped} acquired a phase")
    return mapped


def concatenate_ancilla(outer: StabilizerCode, inner: StabilizerCode) -> StabilizerCode:
    """Concatenate an inner code into the ancilla block of an outer code.

    The new register keeps the outer principal qubits in place and
    replaces each outer ancilla qubit by one logical qubit of the inner
    code.  Generators come out as: the inner stabilizers first (these are
    the ancilla-fault detectors), then the mapped outer generators
    grouped per principal qubit with the X-type one before the Z-type
    one.
    """
    n_principal = len(outer.principal_sites)
    if outer.principal_sites != frozenset(range(1, n_principal + 1)):
        raise CodeConstructionError("outer principal sites must be a prefix 1..n_p")
    n_outer_anc = len(outer.ancilla_sites)
    if outer.ancilla_sites != frozenset(range(n_principal + 1, outer.n + 1)):
        raise CodeConstructionError("outer ancilla sites must follow the principal block")
    if inner.k != n_outer_anc:
        raise CodeConstructionError(
            f"inner code encodes {inner.k} qubits but outer ancilla has {n_outer_anc}"
        )
    if len(inner.logical_x) != inner.k or len(inner.logical_z) != inner.k:
        raise CodeConstructionError("inner code must provide all logical operators")

    n_total = n_principal + inner.n
    detectors = tuple(
        tensor(identity(n_principal), g) if n_principal else g for g in inner.generators
    )

    def sort_key(g: PauliOperator):
        principal_support = sorted(s for s in pauli.support(g) if s <= n_principal)
        first = principal_support[0] if principal_support else n_principal + 1
        has_x = any(g.x[s - 1] for s in principal_support)
        return (first, 0 if has_x else 1)

    mapped = [
        _map_outer_generator(g, n_principal, inner)
        for g in sorted(outer.generators, key=sort_key)
    ]
    return StabilizerCode(
        label="s1",
        n=n_total,
        generators=detectors + tuple(mapped),
        principal_sites=frozenset(range(1, n_principal + 1)),
        ancilla_sites=frozenset(range(n_principal + 1, n_total + 1)),
        detection_prefix=len(detectors),
    )


@lru_cache(maxsize=4)
def build_s1() -> StabilizerCode:
    """Six-qubit filter code: the probe code with its ancilla pair
    protected by the [[4,2,2]] layer."""
    return concatenate_ancilla(build_s0(), build_s422())


def codeword_state(code: StabilizerCode) -> np.ndarray:
    """State vector of the unique codeword of a k=0 code.

    Built from the stabilizer projector prod_i (1 + g_i)/2, normalized so
    the first nonvanishing amplitude is real positive.
    """
    if code.k != 0:
        raise UnsupportedCodeError(f"code {code.label} has k={code.k}, no unique codeword")
    dim = 2 ** code.n
    proj = np.eye(dim, dtype=np.complex128)
    for g in code.generators:
        proj = proj @ (np.eye(dim) + pauli.to_matrix(g)) / 2.0
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    v = proj[:, col]
    v = v / np.linalg.norm(v)
    for amp in v:
        if abs(amp) > 1e-8:
            v = v * (abs(amp) / amp)
            break
    return v


def codeword(code: StabilizerCode) -> DensityMatrix:
    v = codeword_state(code)
    return DensityMatrix(code.n, np.outer(v, v.conj()))


def syndrome_of_error(code: StabilizerCode, error: PauliOperator) -> Syndrome:
    """One bit per generator: 0 if the error commutes with it."""
    if error.n != code.n:
        raise ValueError(f"error acts on {error.n} sites, code has {code.n}")
    return Syndrome(tuple(0 if commutes(error, g) else 1 for g in code.generators))


# Order of the located-error reference table: see process_matrix.BASIS_LABELS.
from .process_matrix import BASIS_LABELS as _LOCATED_LABELS  # noqa: E402


def located_error_table(code: StabilizerCode):
    """The sixteen principal-qubit errors and their syndromes, in the
    canonical basis order.

    Returns a tuple of (index, operator, syndrome).  Syndromes are
    pairwise distinct for both supported codes, which is what makes the
    principal error identifiable from the measurement record.
    """
    if code.principal_sites != frozenset({1, 2}):
        raise UnsupportedCodeError("located errors are defined for principal sites {1, 2}")
    if code.k != 0:
        raise UnsupportedCodeError("located error table needs a k=0 code")
    rows = []
    for idx, label in enumerate(_LOCATED_LABELS):
        op = tensor(parse_pauli(label), identity(code.n - 2))
        rows.append((idx, op, syndrome_of_error(code, op)))
    syndromes = [str(s) for _, _, s in rows]
    if len(set(syndromes)) != len(syndromes):
        raise CodeConstructionError("located syndromes are not pairwise distinct")
    return tuple(rows)


def located_syndrome_index(code: StabilizerCode) -> dict:
    """Decoding map: syndrome -> located index."""
    return {syn: idx for idx, _, syn in located_error_table(code)}


def destabilizers(code: StabilizerCode):
    """Paulis D_j that flip exactly syndrome bit j, found by solving the
    symplectic linear system over GF(2)."""
    rows = np.array(
        [np.concatenate([np.array(g.z, np.uint8), np.array(g.x, np.uint8)]) for g in code.generators],
        dtype=np.uint8,
    )
    out = []
    for j in range(code.r):
        rhs = np.zeros(code.r, dtype=np.uint8)
        rhs[j] = 1
        v = _gf2_solve(rows, rhs)
        if v is None:
            raise CodeConstructionError(f"no operator flips only syndrome bit {j}")
        op = PauliOperator(code.n, tuple(v[: code.n]), tuple(v[code.n :]), 0)
        out.append(op)
    return tuple(out)


@dataclass(frozen=True)
class ErrorPartition:
    located: tuple
    ancilla: tuple
    composite: tuple


def partition_error_set(code: StabilizerCode) -> ErrorPartition:
    """Split the modeled error set into located principal errors,
    weight-one ancilla errors, and their products.

    Ordering is fixed: located errors in table order; ancilla errors by
    (site, then X < Y < Z); composites lexicographic over (located index,
    ancilla index).
    """
    located = tuple(op for _, op, _ in located_error_table(code))
    anc = []
    for site in sorted(code.ancilla_sites):
        for letter in "XYZ":
            anc.append(pauli.single_site(code.n, site, letter))
    # full product set, so located[0] = identity keeps the bare ancilla
    # errors inside the composite list as well
    composite = tuple(multiply(l, a) for l in located for a in anc)
    return ErrorPartition(located=located, ancilla=tuple(anc), composite=composite)


def qec_condition_matrix(code: StabilizerCode, errors=None) -> np.ndarray:
    """Gram matrix C_ab = <0| E_a^dag E_b |0> on the codeword.

    Identity on the located set certifies that all sixteen principal
    errors are perfectly distinguishable; off-diagonal unit entries
    reveal degenerate pairs.
    """
    if errors is None:
        errors = [op for _, op, _ in located_error_table(code)]
    psi = codeword_state(code)
    images = np.stack([pauli.to_matrix(e) @ psi for e in errors])
    return images.conj() @ images.T


@dataclass(frozen=True)
class HammingBoundResult:
    satisfied: bool
    saturated: bool
    lhs: int
    rhs: int
    margin: int


def located_hamming_bound(n_principal: int, k: int, n: int) -> HammingBoundResult:
    """Counting bound for distinguishing every located error.

    sum_{j=0}^{n_p} C(n_p, j) 3^j 2^k <= 2^n: each of the 3^j C(n_p, j)
    principal error patterns needs its own syndrome subspace of dimension
    2^k.  Equality means every syndrome is spoken for.
    """
    lhs = sum(comb(n_principal, j) * 3 ** j for j in range(n_principal + 1)) * 2 ** k
    rhs = 2 ** n
    return HammingBoundResult(
        satisfied=lhs <= rhs,
        saturated=lhs == rhs,
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
    )


def code_to_json(code: StabilizerCode) -> str:
    doc = {
        "label": code.label,
        "n": code.n,
        "generators": [str(g) for g in code.generators],
        "principal_sites": sorted(code.principal_sites),
        "ancilla_sites": sorted(code.ancilla_sites),
        "logical_x": [str(g) for g in code.logical_x],
        "logical_z": [str(g) for g in code.logical_z],
        "detection_prefix": code.detection_prefix,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def code_from_json(text: str) -> StabilizerCode:
    doc = json.loads(text)
    return StabilizerCode(
        label=doc["label"],
        n=int(doc["n"]),
        generators=tuple(parse_pauli(s) for s in doc["generators"]),
        principal_sites=frozenset(doc["principal_sites"]),
        ancilla_sites=frozenset(doc["ancilla_sites"]),
        logical_x=tuple(parse_pauli(s) for s in doc.get("logical_x", [])),
        logical_z=tuple(parse_pauli(s) for s in doc.get("logical_z", [])),
        detection_prefix=int(doc.get("detection_prefix", 0)),
    )
