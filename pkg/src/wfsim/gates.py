"""The 2x2 gates used by the scenario circuits, and the exact W-preparation angles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class Gate:
    """A named single-qubit unitary.

    ``name`` and ``params`` identify the gate for export; ``matrix`` is the
    row-major 2x2 complex matrix and is read-only.
    """

    name: str
    params: tuple[float, ...] = ()
    matrix: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValidationError(f"{self.name}: expected a 2x2 matrix, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError(f"{self.name}: non-finite matrix entries")
        if np.max(np.abs(m.conj().T @ m - np.eye(2))) >= UNITARY_TOL:
            raise ValidationError(f"{self.name}: matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: Gate) -> Gate:
        return Gate.from_matrix(self.matrix @ other.matrix)

    @classmethod
    def from_matrix(cls, matrix, name: str = "custom") -> Gate:
        # entries double as params so that distinct custom gates compare unequal
        m = np.asarray(matrix, dtype=np.complex128)
        return cls(name, tuple(complex(v) for v in m.reshape(-1)), m)


def _finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{what} must be finite, got {value}")
    return value


X = Gate("x", (), [[0, 1], [1, 0]])
Y = Gate("y", (), [[0, -1j], [1j, 0]])
Z = Gate("z", (), [[1, 0], [0, -1]])
H = Gate("h", (), np.array([[1, 1], [1, -1]]) / math.sqrt(2))
IDENTITY = Gate("id", (), np.eye(2))
SIGMA_X, SIGMA_Y, SIGMA_Z = X, Y, Z


def ry(zeta: float) -> Gate:
    """Rotation about y: ``exp(-i zeta sigma_y / 2)``."""
    zeta = _finite(zeta, "rotation angle")
    c, s = math.cos(zeta / 2), math.sin(zeta / 2)
    return Gate("ry", (zeta,), [[c, -s], [s, c]])


def u_xi(xi: float) -> Gate:
    """Real reflection ``[[cos(xi/2), sin(xi/2)], [sin(xi/2), -cos(xi/2)]]``; Hermitian."""
    xi = _finite(xi, "xi")
    c, s = math.cos(xi / 2), math.sin(xi / 2)
    return Gate("u_xi", (xi,), [[c, s], [s, -c]])


def u_theta(theta: float) -> Gate:
    """``cos(theta) sigma_z + sin(theta) sigma_x``; turns W into the scenario's input state."""
    theta = _finite(theta, "theta")
    c, s = math.cos(theta), math.sin(theta)
    return Gate("u_theta", (theta,), [[c, s], [s, -c]])


@dataclass(frozen=True)
class AngleConstants:
    zeta1: float
    zeta2: float
    zeta3: float
    xi1: float
    xi2: float


def _angles() -> AngleConstants:
    sqrt5 = math.sqrt(5.0)
    zeta1 = 2 * math.asin(math.sqrt((5 + sqrt5) / 10))
    zeta2 = -2 * math.asin(math.sqrt((3 - sqrt5) / 6))
    return AngleConstants(
        zeta1=zeta1,
        zeta2=zeta2,
        zeta3=zeta1,
        xi1=math.acos(1 / math.sqrt(3)),
        xi2=math.pi / 4,
    )


ANGLES = _angles()
