import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsvessel import theta as th
from rsvessel.errors import NonPositiveImGamma, OrderTooHigh
from rsvessel.theta import PeriodMatrix, ThetaChar, lattice_equal, lattice_reduce, theta_batch

# Frozen oracle values: mpmath at 30 digits, θ(λ|Γ) = jtheta(3, πλ, e^{iπΓ})
# and θ[½,½](λ) = -jtheta(1, πλ, q); genus 2 by a direct 25x25 lattice sum.
ORACLE_G1 = [
    (1j, 0.0, 1.086434811213308),
    (1j, 0.3 + 0.1j, 0.9678339945005642 - 0.05510566205566427j),
    (0.5 + 1.1j, 0.3 + 0.1j, 1.0402511083818209 - 0.023484426272796812j),
    (0.9j, 0.25 - 0.2j, 0.9998477397671097 + 0.19104079142455624j),
]
ODD_09 = (0.2 + 0.1j, -(0.603774750906499 + 0.2560044862570298j))
ODD_SLOPE_09 = -3.066270768929864
G2 = np.array([[0.2 + 1.1j, 0.3 + 0.1j], [0.3 + 0.1j, -0.1 + 0.9j]])
ORACLE_G2 = ([0.1 + 0.05j, -0.2 + 0.1j], 1.1152309953645578 + 0.0835729909843393j)


@pytest.fixture(params=th.available_backends())
def backend(request):
    old = th.BACKEND
    th.set_backend(request.param)
    yield request.param
    th.set_backend(old)


@pytest.mark.parametrize("gamma,lam,expected", ORACLE_G1)
def test_genus1_oracle(backend, gamma, lam, expected):
    assert abs(th.theta(PeriodMatrix([[gamma]]), [lam]) - expected) < 1e-14


def test_odd_characteristic_oracle(backend):
    pm = PeriodMatrix([[0.9j]])
    odd = ThetaChar((0.5,), (0.5,))
    assert odd.is_odd_half()
    assert abs(th.theta_char(pm, odd, [ODD_09[0]]) - ODD_09[1]) < 1e-14
    assert abs(th.theta_deriv(pm, odd, [0.0], [1]) - ODD_SLOPE_09) < 1e-13


def test_genus2_oracle(backend):
    lam, expected = ORACLE_G2
    assert abs(th.theta(PeriodMatrix(G2), lam) - expected) < 1e-13


def test_backends_agree():
    if len(th.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(4)
    pm = PeriodMatrix(G2)
    lams = rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2))
    chi = ThetaChar((0.3, 0.5), (0.1, 0.5))
    for order in ([0, 0], [1, 0], [1, 2]):
        a = theta_batch(pm, chi, lams, order, backend="compiled")
        b = theta_batch(pm, chi, lams, order, backend="python")
        assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1)) < 1e-13


def test_derivative_matches_finite_difference():
    pm = PeriodMatrix([[0.3 + 0.8j]])
    chi = ThetaChar((0.2,), (0.7,))
    lam, h = 0.1 + 0.2j, 1e-5
    fd = (th.theta_char(pm, chi, [lam + h]) - th.theta_char(pm, chi, [lam - h])) / (2 * h)
    assert abs(th.theta_deriv(pm, chi, [lam], [1]) - fd) < 1e-8


@settings(max_examples=60, deadline=None)
@given(
    x=st.floats(-1, 1), y=st.floats(-0.6, 0.6),
    m=st.integers(-3, 3), n=st.integers(-3, 3),
    a=st.floats(0, 1), b=st.floats(0, 1),
)
def test_quasi_periodicity_property(x, y, m, n, a, b):
    pm = PeriodMatrix([[0.2 + 0.9j]])
    G = pm.Gamma[0, 0]
    lam = complex(x, y)
    chi = ThetaChar((a,), (b,))
    lhs = th.theta_char(pm, chi, [lam + m + G * n])
    rhs = np.exp(2j * np.pi * a * m - 1j * np.pi * n * n * G - 2j * np.pi * n * (lam + b)) * th.theta_char(pm, chi, [lam])
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs))


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-2, 2), y=st.floats(-1, 1))
def test_even_theta_is_even(x, y):
    pm = PeriodMatrix(G2)
    lam = np.array([complex(x, y), complex(y, x / 2)])
    v = theta_batch(pm, None, [lam, -lam])
    assert abs(v[0] - v[1]) <= 1e-11 * abs(v[0])


def test_period_matrix_validation():
    with pytest.raises(NonPositiveImGamma):
        PeriodMatrix([[0.5 - 0.1j]])
    with pytest.raises(ValueError):
        PeriodMatrix([[1j, 0.1], [0.2, 1j]])
    with pytest.raises(ValueError):
        PeriodMatrix([[0.3 + 1j]], H=[[1]])
    assert PeriodMatrix.genus1(0.5 + 1j).H.tolist() == [[1]]
    assert PeriodMatrix.genus1(0.3 + 1j).H is None


def test_order_and_tolerance_errors():
    pm = PeriodMatrix([[1j]])
    with pytest.raises(OrderTooHigh):
        theta_batch(pm, None, [0.1], [th.MAX_ORDER + 1])
    with pytest.raises(ValueError):
        theta_batch(pm, None, [0.1], tol=0.1)
    with pytest.raises(ValueError):
        th.set_backend("fortran")


def test_lattice_reduce_roundtrip():
    pm = PeriodMatrix(G2)
    z = np.array([3.7 + 2.1j, -1.2 - 0.4j])
    zr, m, n = lattice_reduce(pm, z)
    assert np.allclose(zr + m + pm.Gamma @ n, z)
    assert lattice_equal(pm, z, zr)
    assert not lattice_equal(pm, z, zr + 0.5)
    # reduced point has lattice coordinates in [0, 1)
    x, y = th.lattice_coords(pm, zr)
    assert np.all((x > -1e-12) & (x < 1)) and np.all((y > -1e-12) & (y < 1))


def test_listed_identities():
    pm = PeriodMatrix([[1j]])
    G = 1j
    lam = 0.3 + 0.2j
    assert abs(th.theta(pm, [lam + 1]) - th.theta(pm, [lam])) < 1e-12
    assert abs(th.theta(pm, [lam + G]) - np.exp(-1j * np.pi * G - 2j * np.pi * lam) * th.theta(pm, [lam])) < 1e-11
    # zero characteristic is the plain theta, same truncation
    assert th.theta_char(pm, ThetaChar.zero(1), [lam]) == th.theta(pm, [lam])
    assert th.theta_deriv(pm, ThetaChar.zero(1), [lam], [0]) == th.theta(pm, [lam])
    odd = ThetaChar((0.5,), (0.5,))
    assert abs(th.theta_char(pm, odd, [0.0])) < 1e-12
    assert abs(th.theta_deriv(pm, odd, [0.0], [1])) > 1e-6
    # characteristic shift: θ[a;b](λ) = exp(iπa²Γ + 2iπa(λ+b)) θ(λ + Γa + b)
    a, b, x = 0.5, 0.0, 0.3
    shifted = np.exp(1j * np.pi * a * a * G + 2j * np.pi * a * (x + b)) * th.theta(pm, [x + G * a + b])
    assert abs(th.theta_char(pm, ThetaChar((a,), (b,)), [x]) - shifted) < 1e-11


def test_lattice_reduce_hand_example():
    pm = PeriodMatrix([[1j]])
    zr, m, n = lattice_reduce(pm, [2.3 + 1.7j])
    assert abs(zr[0] - (0.3 + 0.7j)) < 1e-12 and m.tolist() == [2] and n.tolist() == [1]
    zr2, m2, n2 = lattice_reduce(pm, zr)
    assert np.allclose(zr2, zr) and m2.tolist() == [0] and n2.tolist() == [0]
