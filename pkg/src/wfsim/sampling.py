"""Circuit execution: exact evolution with postselection, and seeded shot sampling.

Random numbers come from numpy's counter-based Philox generator.  Each stream
is keyed by ``(seed, purpose, sub-stream, chunk)`` through ``SeedSequence``
spawn keys, and shots are drawn in fixed-size chunks.  Because the chunking
does not depend on the number of workers, merged counts are identical for any
``workers`` value.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuits import (
    CNOT,
    SETTINGS,
    W_METHODS,
    Circuit,
    Gate1Q,
    Measure,
    MeasurementSetting,
    PostSelect,
    fusion_demo_circuit,
    instruction_qubits,
    scenario_circuit,
    input_state_circuit,
    fusion_stage,
    w_state_circuit,
)
from .errors import ValidationError
from .statevector import (
    ANALYSIS_WIRES,
    FUSION_WIRES,
    SIGNAL_WIRES,
    WIRE_MAP,
    StateVector,
    apply_1q,
    apply_cnot,
    basis_state,
    index_to_bits,
    marginal_probabilities,
    project,
)

MODES = ("exact_postselect", "physical_rejection")
CHUNK_SHOTS = 8192
SEED_LIMIT = 1 << 64

Outcome = tuple[int, int, int]
# +1 before -1, lexicographic over (v1, v2, v3): the column order of the counts table.
OUTCOMES: tuple[Outcome, ...] = tuple(
    (1 - 2 * ((i >> 2) & 1), 1 - 2 * ((i >> 1) & 1), 1 - 2 * (i & 1)) for i in range(8)
)

# Stream purposes, first element of every spawn key.
_SCENARIO, _W_STATE, _FUSION_DEMO = 0, 1, 2


def outcome_label(outcome: Outcome) -> str:
    return "".join("+" if v > 0 else "-" for v in outcome)


# -- exact execution ---------------------------------------------------------

def execute(
    circuit: Circuit, state: StateVector | None = None, *, postselect: bool = True
) -> tuple[StateVector, float]:
    """Evolve ``state`` (default: the circuit's initial basis state) through ``circuit``.

    Measurements are terminal and leave the state untouched.  With
    ``postselect`` each PostSelect projects and renormalizes; the returned
    float is the product of the postselection probabilities (1.0 if none).
    Without it, PostSelect acts like Measure.
    """
    if state is None:
        state = basis_state(circuit.n_qubits, circuit.initial_bits)
    elif state.n_qubits != circuit.n_qubits:
        raise ValidationError(f"state has {state.n_qubits} qubits, circuit {circuit.n_qubits}")
    measured: set[int] = set()
    success = 1.0
    for ins in circuit.instructions:
        if isinstance(ins, (Gate1Q, CNOT)):
            touched = measured.intersection(instruction_qubits(ins))
            if touched:
                raise ValidationError(f"{ins} acts on already-measured qubit(s) {sorted(touched)}")
        if isinstance(ins, Gate1Q):
            state = apply_1q(state, ins.qubit, ins.gate)
        elif isinstance(ins, CNOT):
            state = apply_cnot(state, ins.control, ins.target)
        elif isinstance(ins, Measure):
            measured.add(ins.qubit)
        elif isinstance(ins, PostSelect):
            measured.add(ins.qubit)
            if postselect:
                state, p = project(state, [ins.qubit], str(ins.bit))
                success *= p
        else:
            raise ValidationError(f"unknown instruction {ins!r}")
    return state, success


def input_state(theta: float, w_method: str = "rotation") -> StateVector:
    """Nine-qubit state before fusion: (U_theta W) x three singlets."""
    state, _ = execute(input_state_circuit(theta, w_method))
    return state


def postselected_state(
    theta: float, w_method: str = "rotation", phase_correction: bool = True
) -> tuple[StateVector, float]:
    """Renormalized state after the fusion stage, and the fusion success probability."""
    return execute(fusion_stage(phase_correction), input_state(theta, w_method))


def six_wire_amplitudes(state: StateVector) -> np.ndarray:
    """64 amplitudes of the analysis wires, read as bitstring ``a alpha b beta c gamma``.

    Entry ``int("010110", 2)`` is the amplitude of |010110>.  The fusion
    ancillas must already be fixed to |000>.
    """
    amps = np.empty(64, dtype=np.complex128)
    qubits = [WIRE_MAP[w] for w in ANALYSIS_WIRES]
    for k in range(64):
        index = 0
        for pos, q in enumerate(qubits):
            if (k >> (5 - pos)) & 1:
                index |= 1 << q
        amps[k] = state.amps[index]
    return amps


_SIGNAL_QUBITS = [WIRE_MAP[w] for w in reversed(SIGNAL_WIRES)]  # c, b, a -> outcome index bits 0, 1, 2
_FUSION_QUBITS = [WIRE_MAP[w] for w in FUSION_WIRES]


def _check_method(w_method: str) -> None:
    if w_method not in W_METHODS:
        raise ValidationError(f"unknown W-preparation method {w_method!r}; use one of {W_METHODS}")


@lru_cache(maxsize=4096)
def _exact_outcome_probs(theta: float, setting: MeasurementSetting, w_method: str,
                         phase_correction: bool) -> tuple[float, ...]:
    circuit = scenario_circuit(theta, setting, w_method, phase_correction)
    state, _ = execute(circuit)
    # outcome index 4a + 2b + c equals the position in OUTCOMES since v = (-1)**bit
    probs = marginal_probabilities(state, _SIGNAL_QUBITS)
    return tuple(float(p) for p in probs)


@lru_cache(maxsize=4096)
def _full_register_probs(theta: float, setting: MeasurementSetting, w_method: str,
                         phase_correction: bool) -> np.ndarray:
    circuit = scenario_circuit(theta, setting, w_method, phase_correction)
    state, _ = execute(circuit, postselect=False)
    probs = state.probabilities()
    probs.setflags(write=False)
    return probs


def run_exact(
    theta: float,
    setting: MeasurementSetting,
    w_method: str = "rotation",
    *,
    phase_correction: bool = True,
) -> dict[Outcome, float]:
    """Exact outcome-triple distribution of the postselected scenario.

    Each party's value is ``(-1)**bit`` of its signal wire after the
    setting stage, for both the record (k=0) and Bell (k=1) measurements.
    """
    _check_method(w_method)
    probs = _exact_outcome_probs(float(theta), setting, w_method, phase_correction)
    return dict(zip(OUTCOMES, probs))


# -- shot sampling -----------------------------------------------------------

def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ValidationError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map uniforms in [0, 1) to outcome indices; zero-probability bins are never returned."""
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(probs) - 1)


def _chunks(shots: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK_SHOTS, shots - i * CHUNK_SHOTS))
            for i in range(math.ceil(shots / CHUNK_SHOTS))]


def sample_counts(
    probs: Sequence[float],
    shots: int,
    seed: int,
    key: tuple[int, ...],
    *,
    accept: np.ndarray | None = None,
    project_to: np.ndarray | None = None,
    n_bins: int | None = None,
    workers: int = 1,
) -> tuple[np.ndarray, int]:
    """Draw ``shots`` indices from ``probs`` and histogram them.

    ``accept`` (boolean per index) rejects shots; ``project_to`` maps each
    accepted index to its output bin.  Returns (bin counts, accepted shots).
    """
    if shots < 1:
        raise ValidationError(f"shots must be positive, got {shots}")
    if workers < 1:
        raise ValidationError(f"workers must be positive, got {workers}")
    probs = np.asarray(probs, dtype=np.float64)
    # exactly-zero branches come back from the kernels as ~1e-32 roundoff
    probs = np.where(probs < 1e-20, 0.0, probs)
    n_bins = n_bins or len(probs)

    def work(chunk: tuple[int, int]) -> np.ndarray:
        index, size = chunk
        u = stream(seed, *key, index).random(size)
        drawn = inverse_cdf(probs, u)
        if accept is not None:
            drawn = drawn[accept[drawn]]
        if project_to is not None:
            drawn = project_to[drawn]
        return np.bincount(drawn, minlength=n_bins)

    chunks = _chunks(shots)
    if workers == 1 or len(chunks) == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    counts = np.sum(parts, axis=0, dtype=np.int64)
    return counts, int(counts.sum())


@dataclass(frozen=True)
class RunConfig:
    theta: float
    setting: MeasurementSetting
    shots: int = 10_000
    seed: int = 0
    mode: str = "exact_postselect"
    w_method: str = "rotation"
    phase_correction: bool = True

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise ValidationError(f"shots must be a positive integer, got {self.shots}")
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}; use one of {MODES}")
        _check_method(self.w_method)
        check_seed(self.seed)
        if not math.isfinite(self.theta):
            raise ValidationError("theta must be finite")


@dataclass(frozen=True)
class CountsTable:
    counts: dict[Outcome, int]
    valid_shots: int
    attempted_shots: int
    setting: MeasurementSetting | None = None

    def __post_init__(self):
        if sum(self.counts.values()) != self.valid_shots:
            raise ValidationError("counts do not sum to valid_shots")
        if self.valid_shots > self.attempted_shots:
            raise ValidationError("more valid shots than attempted shots")

    @classmethod
    def from_row(cls, row: Sequence[int], setting: MeasurementSetting | None = None,
                 attempted: int | None = None) -> CountsTable:
        """Counts given in OUTCOMES order (+++, ++-, +-+, ..., ---)."""
        if len(row) != 8:
            raise ValidationError("a counts row has 8 entries")
        counts = {o: int(n) for o, n in zip(OUTCOMES, row)}
        total = sum(counts.values())
        return cls(counts, total, total if attempted is None else attempted, setting)

    def row(self) -> list[int]:
        return [self.counts.get(o, 0) for o in OUTCOMES]

    def frequencies(self) -> dict[Outcome, float]:
        return {o: self.counts.get(o, 0) / self.valid_shots for o in OUTCOMES}


def run_sampled(cfg: RunConfig, workers: int = 1) -> CountsTable:
    """Sample one setting.

    exact_postselect: ``cfg.shots`` valid shots drawn from :func:`run_exact`.
    physical_rejection: ``cfg.shots`` attempts over all nine wires; shots whose
    fusion ancillas are not all 0 are discarded.
    """
    key = (_SCENARIO, cfg.setting.index)
    if cfg.mode == "exact_postselect":
        probs = _exact_outcome_probs(float(cfg.theta), cfg.setting, cfg.w_method, cfg.phase_correction)
        counts, valid = sample_counts(probs, cfg.shots, cfg.seed, key, workers=workers)
    else:
        probs = _full_register_probs(float(cfg.theta), cfg.setting, cfg.w_method, cfg.phase_correction)
        accept, project_to = _rejection_maps()
        counts, valid = sample_counts(probs, cfg.shots, cfg.seed, key, accept=accept,
                                      project_to=project_to, n_bins=8, workers=workers)
    table = {o: int(n) for o, n in zip(OUTCOMES, counts)}
    return CountsTable(table, valid, cfg.shots, cfg.setting)


@lru_cache(maxsize=1)
def _rejection_maps() -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << len(WIRE_MAP))
    accept = np.ones(idx.size, dtype=bool)
    for q in _FUSION_QUBITS:
        accept &= ((idx >> q) & 1) == 0
    project_to = np.zeros(idx.size, dtype=np.int64)
    for j, q in enumerate(_SIGNAL_QUBITS):
        project_to |= ((idx >> q) & 1) << j
    return accept, project_to


def run_all_settings(
    theta: float,
    shots: int,
    seed: int,
    mode: str = "exact_postselect",
    w_method: str = "rotation",
    *,
    phase_correction: bool = True,
    workers: int = 1,
) -> list[CountsTable]:
    """One CountsTable per setting, in SETTINGS order."""
    return [
        run_sampled(RunConfig(theta, s, shots, seed, mode, w_method, phase_correction), workers)
        for s in SETTINGS
    ]


# -- W-state and single-lab fusion demos -------------------------------------

@dataclass(frozen=True)
class Histogram:
    """Distribution over bitstrings of ``wires`` (first wire first)."""

    wires: tuple[str, ...]
    exact: dict[str, float]
    counts: dict[str, int]
    valid_shots: int
    attempted_shots: int
    success_probability: float = 1.0
    seed: int | None = None
    method: str = ""

    @property
    def success_ratio(self) -> float:
        return self.valid_shots / self.attempted_shots if self.attempted_shots else 0.0


def _ordered_marginal(state: StateVector, wires: Sequence[str], circuit: Circuit) -> dict[str, float]:
    qubits = [circuit.qubit(w) for w in wires]
    probs = marginal_probabilities(state, qubits)
    # marginal index has wires[j] on bit j; label strings list wires[0] first
    return {index_to_bits(k, range(len(wires))): float(probs[k]) for k in _label_order(len(wires))}


def _label_order(n: int) -> list[int]:
    """Marginal indices sorted so that their labels (wire 0 first) read 00..0, 00..1, ..."""
    return sorted(range(1 << n), key=lambda k: index_to_bits(k, range(n)))


def run_w_state(method: str = "rotation", shots: int = 8192, seed: int = 0,
                workers: int = 1) -> Histogram:
    """Exact and sampled distribution over ``abc`` for a W-preparation circuit."""
    _check_method(method)
    circuit = w_state_circuit(method)
    state, _ = execute(circuit)
    wires = SIGNAL_WIRES
    exact = _ordered_marginal(state, wires, circuit)
    labels = list(exact)
    probs = np.array([exact[l] for l in labels])
    counts, valid = sample_counts(probs, shots, seed, (_W_STATE, W_METHODS.index(method)), workers=workers)
    return Histogram(wires, exact, dict(zip(labels, (int(c) for c in counts))), valid, shots,
                     seed=seed, method=method)


def run_fusion_demo(shots: int = 8192, seed: int = 0, w_method: str = "rotation",
                    workers: int = 1) -> Histogram:
    """Single-lab fusion demo: postselect alpha' = 0, report the (a, b, c, alpha) distribution.

    Sampling is physical: every attempt measures all five wires and only
    alpha' = 0 shots are kept, so ``valid_shots / attempted_shots`` estimates
    the success probability.
    """
    _check_method(w_method)
    circuit = fusion_demo_circuit(w_method)
    kept_wires = circuit.wires[:4]
    post, success = execute(circuit)
    exact = _ordered_marginal(post, kept_wires, circuit)

    full, _ = execute(circuit, postselect=False)
    labels = list(exact)
    label_pos = {l: i for i, l in enumerate(labels)}
    anc = circuit.qubit("alpha'")
    idx = np.arange(full.dim)
    accept = ((idx >> anc) & 1) == 0
    kept_q = [circuit.qubit(w) for w in kept_wires]
    project_to = np.array([label_pos[index_to_bits(i, kept_q)] for i in idx], dtype=np.int64)
    counts, valid = sample_counts(full.probabilities(), shots, seed, (_FUSION_DEMO, W_METHODS.index(w_method)),
                                  accept=accept, project_to=project_to, n_bins=len(labels), workers=workers)
    return Histogram(kept_wires, exact, dict(zip(labels, (int(c) for c in counts))), valid, shots,
                     success_probability=success, seed=seed, method=w_method)
