"""Correlators, the tripartite correlation inequality, and its uncertainty.

The inequality value is

    I = 1/8 * sum_j | sum_k (-1)**(k.j) * E_k |

over j, k in {0,1}^3.  Deterministic local strategies give exactly I = 1;
the W-based scenario reaches 1.5 at multiples of pi/4.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .circuits import SETTINGS, MeasurementSetting
from .errors import EmptyDataError, IncompleteDataError, ValidationError
from .sampling import (
    OUTCOMES,
    CountsTable,
    RunConfig,
    outcome_label,
    run_all_settings,
    run_exact,
)

CLASSICAL_BOUND = 1.0
QUANTUM_MAXIMUM = 1.5
SCHEMA_VERSION = "v1"


@dataclass(frozen=True)
class Correlator:
    E: float
    sigma: float = 0.0
    n: int | None = None  # None for analytic entries


@dataclass(frozen=True)
class CorrelatorSet:
    entries: dict[MeasurementSetting, Correlator]

    def __getitem__(self, setting: MeasurementSetting) -> Correlator:
        return self.entries[setting]

    def require_complete(self) -> None:
        missing = [s.label for s in SETTINGS if s not in self.entries]
        if missing:
            raise IncompleteDataError(f"missing correlators for {', '.join(missing)}")

    def values(self) -> list[float]:
        """E in SETTINGS order."""
        self.require_complete()
        return [self.entries[s].E for s in SETTINGS]

    def sigmas(self) -> list[float]:
        self.require_complete()
        return [self.entries[s].sigma for s in SETTINGS]

    @classmethod
    def from_values(cls, values: Sequence[float], sigmas: Sequence[float] | None = None) -> CorrelatorSet:
        if len(values) != len(SETTINGS):
            raise IncompleteDataError(f"need {len(SETTINGS)} correlators, got {len(values)}")
        sigmas = sigmas or [0.0] * len(values)
        return cls({s: Correlator(float(e), float(d)) for s, e, d in zip(SETTINGS, values, sigmas)})

    @classmethod
    def from_tables(cls, tables: Iterable[CountsTable]) -> CorrelatorSet:
        entries = {}
        for t in tables:
            if t.setting is None:
                raise ValidationError("counts table has no setting attached")
            e, sigma = correlator_from_counts(t)
            entries[t.setting] = Correlator(e, sigma, t.valid_shots)
        return cls(entries)


def correlator_from_counts(table: CountsTable) -> tuple[float, float]:
    """Sample mean of v1*v2*v3 over valid shots, and its standard error sqrt((1 - E^2) / N)."""
    n = table.valid_shots
    if n < 1:
        raise EmptyDataError("no valid shots to estimate a correlator from")
    total = sum(v1 * v2 * v3 * table.counts.get((v1, v2, v3), 0) for v1, v2, v3 in OUTCOMES)
    e = total / n
    return e, math.sqrt(max(0.0, 1.0 - e * e) / n)


def analytic_correlators(theta: float) -> CorrelatorSet:
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    values = {
        (0, 0, 0): -c,
        (1, 0, 0): -s,
        (0, 1, 0): 2 * s / 3,
        (0, 0, 1): 2 * s / 3,
        (1, 1, 1): 2 * s / 3,
        (0, 1, 1): 2 * c / 3,
        (1, 1, 0): -2 * c / 3,
        (1, 0, 1): -2 * c / 3,
    }
    return CorrelatorSet({st: Correlator(values[st.ks]) for st in SETTINGS})


def _sign_table() -> tuple[tuple[int, ...], ...]:
    # rows j, columns k, both in SETTINGS order
    return tuple(
        tuple(-1 if sum(a * b for a, b in zip(k.ks, j.ks)) % 2 else 1 for k in SETTINGS)
        for j in SETTINGS
    )


SIGNS = _sign_table()


def inequality_terms(values: Sequence[float]) -> list[float]:
    """The eight signed sums inside the absolute values, j in SETTINGS order."""
    if len(values) != len(SETTINGS):
        raise IncompleteDataError(f"need {len(SETTINGS)} correlators, got {len(values)}")
    return [sum(sg * e for sg, e in zip(row, values)) for row in SIGNS]


def inequality_value(correlators: CorrelatorSet | Sequence[float]) -> float:
    values = correlators.values() if isinstance(correlators, CorrelatorSet) else list(correlators)
    return sum(abs(t) for t in inequality_terms(values)) / 8


def inequality_closed_form(theta: float) -> float:
    """I(theta) written directly in sin 2theta and cos 2theta."""
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    return (
        abs(s - 5 * c / 3) + abs(s + 5 * c / 3)
        + abs(c + 5 * s / 3) + abs(c - 5 * s / 3)
        + 10 / 3 * abs(c + s) + 10 / 3 * abs(c - s)
    ) / 8


def _sgn(x: float) -> int:
    return (x > 0) - (x < 0)


def inequality_gradient(values: Sequence[float]) -> list[float]:
    """dI/dE_k; a term sitting exactly at zero contributes the subgradient 0."""
    signs = [_sgn(t) for t in inequality_terms(values)]
    return [sum(SIGNS[j][k] * signs[j] for j in range(8)) / 8 for k in range(8)]


def propagate_uncertainty(correlators: CorrelatorSet) -> float:
    """First-order error propagation of independent correlator errors into I."""
    grad = inequality_gradient(correlators.values())
    return math.sqrt(sum((g * s) ** 2 for g, s in zip(grad, correlators.sigmas())))


def deterministic_strategy_values() -> dict[tuple[int, ...], float]:
    """I for each of the 64 assignments (A0, A1, B0, B1, C0, C1) in {+1, -1}^6."""
    out = {}
    for a0, a1, b0, b1, c0, c1 in itertools.product((1, -1), repeat=6):
        a, b, c = (a0, a1), (b0, b1), (c0, c1)
        values = [a[s.k1] * b[s.k2] * c[s.k3] for s in SETTINGS]
        out[(a0, a1, b0, b1, c0, c1)] = inequality_value(values)
    return out


def classical_bound_oracle() -> float:
    return max(deterministic_strategy_values().values())


@dataclass(frozen=True)
class InequalityReport:
    theta: float
    I: float
    sigma_I: float
    correlators: CorrelatorSet
    mode: str
    shots: int | None = None
    seed: int | None = None
    w_method: str | None = None
    phase_correction: bool | None = None
    tables: tuple[CountsTable, ...] = field(default=(), compare=False)

    @property
    def violated(self) -> bool:
        return self.I - self.sigma_I > CLASSICAL_BOUND

    def to_dict(self) -> dict:
        corr = []
        for s in SETTINGS:
            entry = self.correlators[s]
            corr.append({"setting": s.label, "E": entry.E, "sigma_E": entry.sigma, "n": entry.n})
        counts = None
        if self.tables:
            counts = [
                {
                    "setting": t.setting.label,
                    "counts": {outcome_label(o): n for o, n in zip(OUTCOMES, t.row())},
                    "valid_shots": t.valid_shots,
                    "attempted_shots": t.attempted_shots,
                }
                for t in self.tables
            ]
        return {
            "schema": SCHEMA_VERSION,
            "theta": self.theta,
            "I": self.I,
            "sigma_I": self.sigma_I,
            "violated": self.violated,
            "classical_bound": CLASSICAL_BOUND,
            "mode": self.mode,
            "shots": self.shots,
            "seed": self.seed,
            "w_method": self.w_method,
            "phase_correction": self.phase_correction,
            "correlators": corr,
            "counts": counts,
        }


def analytic_report(theta: float) -> InequalityReport:
    cs = analytic_correlators(theta)
    return InequalityReport(theta, inequality_value(cs), 0.0, cs, "analytic")


def simulated_report(theta: float, w_method: str = "rotation", *, phase_correction: bool = True) -> InequalityReport:
    """Correlators from the exact circuit distribution rather than the closed forms."""
    entries = {}
    for s in SETTINGS:
        dist = run_exact(theta, s, w_method, phase_correction=phase_correction)
        entries[s] = Correlator(sum(o[0] * o[1] * o[2] * p for o, p in dist.items()))
    cs = CorrelatorSet(entries)
    return InequalityReport(theta, inequality_value(cs), 0.0, cs, "exact", None, None,
                            w_method, phase_correction)


def sampled_report(
    theta: float,
    shots: int = 10_000,
    seed: int = 0,
    mode: str = "exact_postselect",
    w_method: str = "rotation",
    *,
    phase_correction: bool = True,
    workers: int = 1,
) -> InequalityReport:
    tables = run_all_settings(theta, shots, seed, mode, w_method,
                              phase_correction=phase_correction, workers=workers)
    cs = CorrelatorSet.from_tables(tables)
    return InequalityReport(
        theta, inequality_value(cs), propagate_uncertainty(cs), cs, mode,
        shots, seed, w_method, phase_correction, tuple(tables),
    )


def theta_sweep(
    grid: Sequence[float],
    template: RunConfig | None = None,
    *,
    workers: int = 1,
) -> list[InequalityReport]:
    """One report per angle, in grid order.

    Without a template the closed-form correlators are used; otherwise each
    angle is sampled with the template's shots, seed, mode and W method.
    """
    grid = list(grid)
    if not grid:
        raise ValidationError("theta grid is empty")
    if template is None:
        return [analytic_report(t) for t in grid]
    return [
        sampled_report(t, template.shots, template.seed, template.mode, template.w_method,
                       phase_correction=template.phase_correction, workers=workers)
        for t in grid
    ]
