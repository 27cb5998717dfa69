"""Dense statevector register and gate-application kernels.

Index convention: bit ``i`` of an amplitude index is the value of qubit ``i``
(qubit 0 is the least significant bit).  Bitstrings passed to or returned by
this module list qubits in the order they are named, *not* in index order:
``basis_state(3, "100")`` puts qubit 0 in ``|1>`` (index 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import CapacityError, PostselectionError, QubitIndexError, ValidationError

MAX_QUBITS = 24
UNITARY_TOL = 1e-10

# Scenario wire names in register order.  Primes mark the fusion ancillas.
WIRES: tuple[str, ...] = ("a", "b", "c", "alpha", "alpha'", "beta", "beta'", "gamma", "gamma'")
WIRE_MAP: Mapping[str, int] = MappingProxyType({name: i for i, name in enumerate(WIRES)})
SIGNAL_WIRES = ("a", "b", "c")
RECORD_WIRES = ("alpha", "beta", "gamma")
FUSION_WIRES = ("alpha'", "beta'", "gamma'")
# Order used when printing six-particle bitstrings: a alpha b beta c gamma.
ANALYSIS_WIRES = ("a", "alpha", "b", "beta", "c", "gamma")


@dataclass(frozen=True, eq=False)
class StateVector:
    """``2**n_qubits`` complex amplitudes.  Treated as immutable: kernels return new states."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        _check_size(self.n_qubits)
        if self.amps.shape != (1 << self.n_qubits,):
            raise ValidationError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {self.amps.shape}"
            )
        self.amps.setflags(write=False)

    @classmethod
    def from_amplitudes(cls, amps) -> StateVector:
        arr = np.array(amps, dtype=np.complex128).reshape(-1)
        n = int(arr.size).bit_length() - 1
        if arr.size == 0 or (1 << n) != arr.size:
            raise ValidationError(f"amplitude count {arr.size} is not a power of two")
        return cls(n, arr)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def __len__(self):
        return self.dim


def _check_size(n_qubits: int) -> None:
    if n_qubits < 1:
        raise ValidationError(f"register needs at least one qubit, got {n_qubits}")
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"{n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}")


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n_qubits:
        raise QubitIndexError(f"qubit {qubit} out of range for {state.n_qubits}-qubit register")


def bits_to_index(bits: str, qubits: Sequence[int] | None = None) -> int:
    """Index with ``bits[k]`` placed on qubit ``qubits[k]`` (default: qubit ``k``)."""
    if qubits is None:
        qubits = range(len(bits))
    index = 0
    for ch, q in zip(bits, qubits):
        if ch == "1":
            index |= 1 << q
        elif ch != "0":
            raise ValidationError(f"bitstring may contain only 0/1, got {bits!r}")
    return index


def index_to_bits(index: int, qubits: Sequence[int]) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in qubits)


def basis_state(n_qubits: int, bits: str) -> StateVector:
    """Computational basis state; ``bits[i]`` is the value of qubit ``i``."""
    _check_size(n_qubits)
    if len(bits) != n_qubits:
        raise ValidationError(f"need {n_qubits} bits, got {len(bits)}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[bits_to_index(bits)] = 1.0
    return StateVector(n_qubits, amps)


def _as_matrix(g) -> np.ndarray:
    m = np.asarray(getattr(g, "matrix", g), dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValidationError(f"single-qubit gate must be 2x2, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("gate has non-finite entries")
    if np.max(np.abs(m.conj().T @ m - np.eye(2))) >= UNITARY_TOL:
        raise ValidationError("gate is not unitary")
    return m


def _pair_view(amps: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    # axis 1 selects the value of `qubit`; each (hi, lo) cell is one amplitude pair
    return amps.reshape(1 << (n_qubits - qubit - 1), 2, 1 << qubit)


def apply_1q(state: StateVector, qubit: int, g) -> StateVector:
    """Apply a 2x2 unitary to one qubit.

    The kernel updates the ``2**(n-1)`` disjoint amplitude pairs that differ
    only in ``qubit``; pairs are independent, so any split of the outer axis
    gives bit-identical results.
    """
    _check_qubit(state, qubit)
    m = _as_matrix(g)
    pairs = _pair_view(state.amps, qubit, state.n_qubits)
    lo, hi = pairs[:, 0, :], pairs[:, 1, :]
    out = np.empty_like(pairs)
    out[:, 0, :] = m[0, 0] * lo + m[0, 1] * hi
    out[:, 1, :] = m[1, 0] * lo + m[1, 1] * hi
    return StateVector(state.n_qubits, out.reshape(-1))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValidationError("control and target must differ")
    idx = np.arange(state.dim)
    src = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
    return StateVector(state.n_qubits, state.amps[src])


def _check_qubit_list(state: StateVector, qubits: Sequence[int]) -> None:
    if len(set(qubits)) != len(qubits):
        raise ValidationError(f"duplicate qubits in {list(qubits)}")
    for q in qubits:
        _check_qubit(state, q)


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Distribution over the ``2**len(qubits)`` values of ``qubits``.

    Entry ``k`` holds the probability of the outcome whose ``j``-th bit
    (little endian) is the value of ``qubits[j]``.
    """
    _check_qubit_list(state, qubits)
    idx = np.arange(state.dim)
    key = np.zeros(state.dim, dtype=np.int64)
    for j, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << j
    return np.bincount(key, weights=state.probabilities(), minlength=1 << len(qubits))


def probability_of(state: StateVector, qubits: Sequence[int], bits: str) -> float:
    if len(bits) != len(qubits):
        raise ValidationError("one bit per queried qubit required")
    _check_qubit_list(state, qubits)
    idx = np.arange(state.dim)
    want = bits_to_index(bits, qubits)
    mask = sum(1 << q for q in qubits)
    return float(np.sum(state.probabilities()[(idx & mask) == want]))


def project(state: StateVector, qubits: Sequence[int], bits: str) -> tuple[StateVector, float]:
    """Project onto ``qubits == bits`` and renormalize.

    Returns the conditional state and the probability of the condition.
    Raises PostselectionError when that probability is zero.
    """
    if len(bits) != len(qubits):
        raise ValidationError("one bit per postselected qubit required")
    _check_qubit_list(state, qubits)
    idx = np.arange(state.dim)
    want = bits_to_index(bits, qubits)
    mask = sum(1 << q for q in qubits)
    kept = np.where((idx & mask) == want, state.amps, 0)
    p = float(np.vdot(kept, kept).real)
    if p < 1e-24:  # below roundoff residue of exactly-zero branches
        raise PostselectionError(f"postselection {bits} on qubits {list(qubits)} has zero probability")
    return StateVector(state.n_qubits, kept / np.sqrt(p)), p


def inner(s1: StateVector, s2: StateVector) -> complex:
    if s1.n_qubits != s2.n_qubits:
        raise ValidationError(f"dimension mismatch: {s1.n_qubits} vs {s2.n_qubits} qubits")
    return complex(np.vdot(s1.amps, s2.amps))


def fidelity_up_to_phase(s1: StateVector, s2: StateVector) -> float:
    return float(min(1.0, abs(inner(s1, s2)) ** 2))


def permuted_amplitudes(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Amplitudes re-indexed so that bit ``j`` of the new index is qubit ``qubits[j]``.

    ``qubits`` must be a permutation of the whole register.
    """
    if sorted(qubits) != list(range(state.n_qubits)):
        raise ValidationError("qubits must be a permutation of the register")
    idx = np.arange(state.dim)
    src = np.zeros(state.dim, dtype=np.int64)
    for j, q in enumerate(qubits):
        src |= ((idx >> j) & 1) << q
    return state.amps[src]
