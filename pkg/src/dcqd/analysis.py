"""Fidelity scoring and ancilla-failure statistics.

Two jobs live here:

* scoring a reconstructed process matrix against the closed-form
  amplitude-damping answer, via state fidelity of the channel outputs on
  a fixed input;
* quantifying how often ancilla depolarizing noise corrupts the syndrome
  record, both by exhaustive enumeration of all ancilla Pauli errors
  (exact rational coefficients) and by Monte-Carlo simulation.

The Monte-Carlo part never touches density matrices: a Pauli error has a
deterministic syndrome, so each shot reduces to sampling one letter per
ancilla site and XOR-ing precomputed syndrome words.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .channels import theoretical_chi_ad
from .codes import StabilizerCode, build_s1, syndrome_of_error
from .pauli import PauliOperator
from .process_matrix import ProcessMatrix
from .rng import scoped_generator
from .states import DensityMatrix, InvalidStateError

__all__ = [
    "FidelityResult",
    "WeightClassCounts",
    "FailureOracle",
    "FailureRateReport",
    "ChiDistance",
    "fidelity",
    "clamped_state",
    "single_qubit_block",
    "apply_single_qubit_block",
    "channel_fidelity_vs_theory",
    "binomial_weight_probability",
    "failure_oracle",
    "failure_rate_experiment",
    "loglog_slope",
    "chi_distance_report",
]

FIDELITY_EIG_TOL = 1e-9
SEVERE_NEGATIVE_EIG = 1e-3
_SWEEP_STREAM_TAG = 0x4641494C
_SWEEP_CHUNK = 1 << 20

_LETTER_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class FidelityResult:
    value: float
    input_state: str
    compared: tuple


def _clamped_psd(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Eigenvalue-clamped PSD version of a Hermitian matrix.

    Eigenvalues in [-tol, 0) are set to zero; anything lower raises.
    """
    herm = (matrix + matrix.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(herm)
    if vals[0] < -tol:
        raise InvalidStateError(f"eigenvalue {vals[0]} below -{tol}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ vecs.conj().T


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def _fidelity_core(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm of sqrt(a) sqrt(b) for PSD matrices.

    Equals the trace of the square root of sqrt(a) b sqrt(a), symmetric
    in its arguments, and well defined even when one argument carries
    less than unit trace.
    """
    overlap = _psd_sqrt(a) @ _psd_sqrt(b)
    return float(np.linalg.norm(overlap, ord="nuc"))


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """State fidelity: the trace norm of sqrt(rho) sqrt(sigma).

    Inputs may carry eigenvalues as low as -1e-9 (clamped, trace
    renormalized); anything more negative raises InvalidStateError.
    """
    if rho.n != sigma.n:
        raise ValueError(f"dimension mismatch: {rho.n} vs {sigma.n} qubits")
    mats = []
    for state in (rho, sigma):
        clean = _clamped_psd(state.data, FIDELITY_EIG_TOL)
        mats.append(clean / clean.trace().real)
    return _fidelity_core(mats[0], mats[1])


def clamped_state(matrix: np.ndarray) -> DensityMatrix:
    """Make an almost-a-state matrix into a valid DensityMatrix.

    Sampled process estimates produce outputs whose eigenvalues dip
    below zero at the statistical-noise scale.  Those are clamped to
    zero and the trace renormalized; a dip beyond 1e-3 (possible at very
    low shot counts) triggers a warning because the estimate is then too
    noisy to score meaningfully.
    """
    arr = np.asarray(matrix, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got {arr.shape}")
    n = int(math.log2(arr.shape[0]))
    if 2**n != arr.shape[0]:
        raise ValueError(f"side {arr.shape[0]} is not a power of two")
    herm = (arr + arr.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(herm)
    if vals[0] < -SEVERE_NEGATIVE_EIG:
        warnings.warn(
            f"clamping severely negative eigenvalue {vals[0]:.3e}; "
            "the estimate is dominated by sampling noise",
            stacklevel=2,
        )
    vals = np.clip(vals, 0.0, None)
    rebuilt = (vecs * vals) @ vecs.conj().T
    tr = rebuilt.trace().real
    if tr <= 0.0:
        raise InvalidStateError("matrix has no positive mass after clamping")
    rebuilt = (rebuilt + rebuilt.conj().T) / 2.0 / tr
    return DensityMatrix(n, rebuilt)


_PAULI_1Q = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def single_qubit_block(chi: ProcessMatrix) -> np.ndarray:
    """The 4x4 corner of chi whose labels act only on the first qubit.

    The first four basis labels carry I, X, Y, Z on qubit one and the
    identity on qubit two, so this block is the process matrix of the
    channel restricted to single-qubit operator directions.  For a
    channel that genuinely touches only qubit one it holds all the mass;
    estimation corruption scatters mass outside it.
    """
    return chi.data[:4, :4].copy()


def apply_single_qubit_block(chi: ProcessMatrix, rho: np.ndarray) -> np.ndarray:
    """Evaluate the single-qubit-block map sum_mn chi_mn s_m rho s_n^dag.

    The result is Hermitian by construction but not trace normalized:
    mass that the estimate assigns to two-qubit operator directions is
    simply absent, and that trace deficit is the point of the score.
    """
    block = single_qubit_block(chi)
    mat = np.asarray(rho, dtype=np.complex128)
    if mat.shape != (2, 2):
        raise ValueError(f"expected a 2x2 input, got {mat.shape}")
    paulis = np.stack(_PAULI_1Q)
    out = np.einsum("mn,mij,jk,nlk->il", block, paulis, mat, paulis.conj())
    return (out + out.conj().T) / 2.0


def channel_fidelity_vs_theory(chi_hat: ProcessMatrix, gamma: float) -> FidelityResult:
    """Fidelity of the estimated channel against the damping closed form.

    Both single-qubit-block maps act on |0><0| and the outputs are
    compared by the trace-norm fidelity.  The estimated output keeps its
    raw trace (eigenvalues clamped at zero, severe dips warned about via
    clamped-state policy), so both syndrome-record corruption inside the
    block and mass scattered outside it lower the score.
    """
    rho_in = np.diag([1.0, 0.0]).astype(np.complex128)
    raw = apply_single_qubit_block(chi_hat, rho_in)
    vals, vecs = np.linalg.eigh(raw)
    if vals[0] < -SEVERE_NEGATIVE_EIG:
        warnings.warn(
            f"clamping severely negative output eigenvalue {vals[0]:.3e}; "
            "the estimate is dominated by sampling noise",
            stacklevel=2,
        )
    cleaned = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
    reference = apply_single_qubit_block(theoretical_chi_ad(gamma), rho_in)
    value = _fidelity_core(cleaned, _clamped_psd(reference, FIDELITY_EIG_TOL))
    return FidelityResult(
        value=value,
        input_state="|0><0|",
        compared=("estimated", f"amplitude_damping(gamma={gamma})"),
    )


def binomial_weight_probability(p: float, j: int, sites: int = 4) -> float:
    """Probability that exactly j of the sites draw a non-identity letter."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not 0 <= j <= sites:
        raise ValueError(f"weight {j} out of range 0..{sites}")
    return math.comb(sites, j) * p**j * (1.0 - p) ** (sites - j)


@dataclass(frozen=True)
class WeightClassCounts:
    """Classification tallies of all ancilla Pauli errors of one weight."""

    weight: int
    total: int
    detected: int
    stabilizer: int
    impostor: int

    def __post_init__(self):
        if self.detected + self.stabilizer + self.impostor != self.total:
            raise ValueError("classes must partition the weight class")


@dataclass(frozen=True)
class FailureOracle:
    """Exhaustive classification of every ancilla-supported Pauli error.

    Each non-identity error is exactly one of:

    * detected: some detector-prefix syndrome bit fires, so filtering
      removes the shot;
    * stabilizer: the all-zero syndrome, indistinguishable from no error
      (these act trivially on the probe state);
    * impostor: a clean prefix with a nonzero syndrome, which counterfeits
      a located error and corrupts the estimate.

    ``failure_coefficients[w]`` is the exact fraction of weight-w errors
    that slip past the filter (impostor plus stabilizer, the accounting
    that treats any undetected non-identity error as a failure);
    ``corrupting_coefficients[w]`` drops the stabilizer class, counting
    only errors that change the accepted record.
    """

    code_label: str
    ancilla_size: int
    weight_counts: tuple
    failure_coefficients: tuple
    corrupting_coefficients: tuple

    def analytic_failure_rate(self, p: float) -> float:
        return sum(
            float(c) * binomial_weight_probability(p, w + 1, self.ancilla_size)
            for w, c in enumerate(self.failure_coefficients)
        )

    def analytic_corrupting_rate(self, p: float) -> float:
        return sum(
            float(c) * binomial_weight_probability(p, w + 1, self.ancilla_size)
            for w, c in enumerate(self.corrupting_coefficients)
        )


def _ancilla_operator(code: StabilizerCode, sites: tuple, letters: tuple) -> PauliOperator:
    x = [0] * code.n
    z = [0] * code.n
    for site, letter in zip(sites, letters):
        if letter == "I":
            continue
        xb, zb = _LETTER_BITS[letter]
        x[site - 1] = xb
        z[site - 1] = zb
    return PauliOperator(code.n, tuple(x), tuple(z), 0)


def failure_oracle(code: StabilizerCode | None = None) -> FailureOracle:
    """Classify all 4^a - 1 non-identity ancilla Paulis of ``code``."""
    if code is None:
        code = build_s1()
    sites = tuple(sorted(code.ancilla_sites))
    a = len(sites)
    tallies = {w: [0, 0, 0] for w in range(1, a + 1)}
    for letters in product("IXYZ", repeat=a):
        weight = sum(1 for c in letters if c != "I")
        if weight == 0:
            continue
        syn = syndrome_of_error(code, _ancilla_operator(code, sites, letters))
        if any(syn.bits[: code.detection_prefix]):
            tallies[weight][0] += 1
        elif syn.is_trivial:
            tallies[weight][1] += 1
        else:
            tallies[weight][2] += 1
    counts = tuple(
        WeightClassCounts(
            weight=w,
            total=3**w * math.comb(a, w),
            detected=tallies[w][0],
            stabilizer=tallies[w][1],
            impostor=tallies[w][2],
        )
        for w in range(1, a + 1)
    )
    fail = tuple(
        Fraction(c.stabilizer + c.impostor, c.total) for c in counts
    )
    corrupt = tuple(Fraction(c.impostor, c.total) for c in counts)
    return FailureOracle(
        code_label=code.label,
        ancilla_size=a,
        weight_counts=counts,
        failure_coefficients=fail,
        corrupting_coefficients=corrupt,
    )


@dataclass(frozen=True)
class FailureRateReport:
    """Monte-Carlo failure statistics at one depolarizing strength.

    ``delta_p1`` is tallied directly as the fraction of shots whose drawn
    error was not the identity yet produced the all-zero syndrome.  Its
    expectation equals p_identity_syndrome - p_identity_operator, and the
    direct count is used because the subtraction form inherits the
    sampling noise of the dominant identity mass.  ``p_F`` is
    ``p_00 + delta_p1`` by construction.
    """

    p: float
    p_identity_syndrome: float
    p_identity_operator: float
    delta_p1: float
    p_00: float
    p_F: float
    analytic_p_F: float
    shots: int

    def __post_init__(self):
        for name in ("p", "p_identity_syndrome", "p_identity_operator", "delta_p1", "p_00", "p_F"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1]")


def _ancilla_syndrome_words(code: StabilizerCode, sites: tuple) -> np.ndarray:
    """Syndrome integers of single-letter errors, shape (len(sites), 3)."""
    words = np.zeros((len(sites), 3), dtype=np.int64)
    for si, site in enumerate(sites):
        for li, letter in enumerate("XYZ"):
            op = _ancilla_operator(code, (site,), (letter,))
            words[si, li] = syndrome_of_error(code, op).to_int()
    return words


def failure_rate_experiment(
    p_values,
    shots: int,
    seed: int,
    code: StabilizerCode | None = None,
) -> tuple:
    """Sample ancilla-only depolarizing noise and tally syndrome outcomes.

    The principal sites stay noiseless, so the only randomness is the
    letter drawn on each ancilla site: identity with probability 1 - p,
    otherwise X, Y, Z with probability p/3 each.  Syndromes follow by
    XOR of per-site words.  Each grid point gets its own deterministic
    stream derived from (seed, point index).
    """
    if code is None:
        code = build_s1()
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    oracle = failure_oracle(code)
    sites = tuple(sorted(code.ancilla_sites))
    words = _ancilla_syndrome_words(code, sites)
    shift = code.r - code.detection_prefix
    reports = []
    for index, p in enumerate(p_values):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"depolarizing strength {p} outside [0, 1]")
        rng = scoped_generator(seed, _SWEEP_STREAM_TAG, index)
        zero_syndrome = 0
        zero_with_error = 0
        impostor = 0
        done = 0
        while done < shots:
            count = min(_SWEEP_CHUNK, shots - done)
            u = rng.random((count, len(sites)))
            erred = u >= 1.0 - p
            if p > 0.0:
                # letters indexed 0..2 inside the error mass, split in thirds
                letter = np.clip(((u - (1.0 - p)) * (3.0 / p)).astype(np.int64), 0, 2)
            else:
                letter = np.zeros_like(u, dtype=np.int64)
            syn = np.zeros(count, dtype=np.int64)
            for si in range(len(sites)):
                syn ^= np.where(erred[:, si], words[si, letter[:, si]], 0)
            zero = syn == 0
            any_error = erred.any(axis=1)
            zero_syndrome += int(zero.sum())
            zero_with_error += int((zero & any_error).sum())
            impostor += int(((syn >> shift) == 0).sum() - zero.sum())
            done += count
        delta = zero_with_error / shots
        p_00 = impostor / shots
        reports.append(
            FailureRateReport(
                p=float(p),
                p_identity_syndrome=zero_syndrome / shots,
                p_identity_operator=(1.0 - p) ** len(sites),
                delta_p1=delta,
                p_00=p_00,
                p_F=p_00 + delta,
                analytic_p_F=oracle.analytic_failure_rate(p),
                shots=shots,
            )
        )
    return tuple(reports)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length 1-d arrays with at least 2 points")
    if (x <= 0).any() or (y <= 0).any():
        raise ValueError("log-log fit requires strictly positive values")
    lx = np.log(x)
    ly = np.log(y)
    lx -= lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


@dataclass(frozen=True)
class ChiDistance:
    difference: np.ndarray
    max_abs: float

    def __post_init__(self):
        arr = np.array(self.difference, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "difference", arr)


def chi_distance_report(chi_a: ProcessMatrix, chi_b: ProcessMatrix) -> ChiDistance:
    """Elementwise complex difference and its largest magnitude."""
    diff = chi_a.data - chi_b.data
    return ChiDistance(difference=diff, max_abs=float(np.max(np.abs(diff))))
