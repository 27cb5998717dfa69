import math

import numpy as np
import pytest

from wfsim import gates
from wfsim.errors import ValidationError
from wfsim.gates import ANGLES, Gate


def close(a, b, tol=1e-12):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) < tol


ALL_CONSTRUCTORS = [gates.ry, gates.u_xi, gates.u_theta]


@pytest.mark.parametrize("make", ALL_CONSTRUCTORS)
@pytest.mark.parametrize("angle", np.linspace(-7, 7, 29))
def test_constructors_are_unitary(make, angle):
    m = make(angle).matrix
    assert np.max(np.abs(m.conj().T @ m - np.eye(2))) < 1e-12


def test_fixed_gates_are_unitary():
    for g in (gates.X, gates.Y, gates.Z, gates.H):
        assert close(g.matrix.conj().T @ g.matrix, np.eye(2))


def test_ry_examples():
    assert close(gates.ry(0).matrix, np.eye(2))
    assert close(gates.ry(math.pi).matrix, [[0, -1], [1, 0]])
    assert close(gates.ry(math.pi).matrix @ [1, 0], [0, 1])


def test_ry_zeta1_entry_simplifies():
    assert abs(gates.ry(ANGLES.zeta1).matrix[0, 0] - math.sqrt((5 - math.sqrt(5)) / 10)) < 1e-15


def test_u_xi_examples():
    assert close(gates.u_xi(0).matrix, gates.Z.matrix)
    assert close(gates.u_xi(math.pi).matrix, gates.X.matrix)
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    assert close(gates.u_xi(ANGLES.xi2).matrix, [[c, s], [s, -c]], 1e-15)


def test_u_theta_examples():
    assert close(gates.u_theta(0).matrix, gates.Z.matrix)
    assert close(gates.u_theta(math.pi / 2).matrix, gates.X.matrix)


@pytest.mark.parametrize("xi", np.linspace(-2 * math.pi, 2 * math.pi, 100))
def test_u_xi_is_an_involution(xi):
    m = gates.u_xi(xi).matrix
    assert close(m @ m, np.eye(2))
    assert close(m, m.conj().T)


@pytest.mark.parametrize("za", np.linspace(-3, 3, 7))
@pytest.mark.parametrize("zb", np.linspace(-4, 4, 9))
def test_ry_composes_additively(za, zb):
    assert close(gates.ry(za).matrix @ gates.ry(zb).matrix, gates.ry(za + zb).matrix)


def test_ry_is_exponential_of_sigma_y():
    # exp(-i z sigma_y / 2) = cos(z/2) I - i sin(z/2) sigma_y
    z = 1.234
    want = math.cos(z / 2) * np.eye(2) - 1j * math.sin(z / 2) * gates.Y.matrix
    assert close(gates.ry(z).matrix, want)


def test_angle_constants_from_closed_forms():
    assert ANGLES.zeta1 == ANGLES.zeta3
    assert math.sin(ANGLES.zeta1 / 2) ** 2 == pytest.approx((5 + math.sqrt(5)) / 10, abs=1e-15)
    assert math.sin(-ANGLES.zeta2 / 2) ** 2 == pytest.approx((3 - math.sqrt(5)) / 6, abs=1e-15)
    assert ANGLES.zeta2 < 0
    assert math.cos(ANGLES.xi1) == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    assert ANGLES.xi2 == math.pi / 4


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
@pytest.mark.parametrize("make", ALL_CONSTRUCTORS)
def test_non_finite_angles_rejected(make, bad):
    with pytest.raises(ValidationError):
        make(bad)


def test_gate_validation_and_immutability():
    with pytest.raises(ValidationError):
        Gate.from_matrix([[1, 1], [0, 1]])
    with pytest.raises(ValidationError):
        Gate.from_matrix(np.eye(3))
    with pytest.raises(ValueError):
        gates.H.matrix[0, 0] = 0


def test_custom_gates_compare_by_matrix():
    assert Gate.from_matrix(np.eye(2)) == Gate.from_matrix(np.eye(2))
    assert Gate.from_matrix(np.eye(2)) != Gate.from_matrix(gates.X.matrix)
    assert close((gates.H @ gates.H).matrix, np.eye(2))
