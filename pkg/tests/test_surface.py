import numpy as np
import pytest

from rsvessel.errors import ThetaVanishes, UnsupportedBackend
from rsvessel.surface import (
    INFINITY,
    RealCurve,
    SurfacePoint,
    abel_jacobi,
    in_real_torus,
    involution,
    prime_form,
    real_components,
    torii_point,
    zeta_characteristic,
)
from rsvessel.theta import PeriodMatrix, ThetaChar

# E(u, v) = jtheta(1, π(v-u), q) / (π jtheta1'(0, q)), q = e^{-0.9π}; mpmath, 30 digits
E_ORACLE = (0.05, 0.25 + 0.1j, 0.1969084912606129 + 0.08349050216017811j)


def test_prime_form_oracle(curve1):
    u, v, expected = E_ORACLE
    assert abs(prime_form(curve1, u, v) - expected) < 1e-14


def test_prime_form_genus0_is_difference(curve0):
    assert prime_form(curve0, 1 + 1j, 2 - 1j) == 1 - 2j
    with pytest.raises(ValueError):
        prime_form(curve0, INFINITY, 1j)


def test_prime_form_zero_locus_and_lattice(curve1):
    rng = np.random.default_rng(2)
    for _ in range(20):
        u = complex(rng.uniform(0, 1), rng.uniform(0, 0.9))
        assert abs(prime_form(curve1, u, u)) < 1e-15
        # vanishes at lattice translates of u as well
        assert abs(prime_form(curve1, u, u + 1)) < 1e-12
        assert abs(prime_form(curve1, u, u + 0.9j)) < 1e-12
        v = u + complex(*rng.normal(scale=0.2, size=2))
        assert abs(prime_form(curve1, u, v) + prime_form(curve1, v, u)) < 1e-13


def test_components_and_sides(curve1):
    comps = real_components(curve1)
    assert [c.height for c in comps] == [0.0, pytest.approx(0.45)]
    assert curve1.side(0.3 + 0.2j) == 1
    assert curve1.side(0.3 + 0.6j) == -1
    assert curve1.side(0.3 + 0.45j) == 0
    assert curve1.side(involution(curve1, 0.3 + 0.2j)) == -1


def test_non_dividing_torus():
    c = RealCurve.genus1(0.5 + 0.8j)
    assert c.component_count == 1 and not c.dividing
    with pytest.raises(UnsupportedBackend):
        c.side(0.2 + 0.1j)
    with pytest.raises(ValueError):
        RealCurve.genus1(0.3 + 1j)


def test_involution_is_an_involution(curve1):
    p = SurfacePoint(0.3 + 0.7j)
    assert involution(curve1, involution(curve1, p)) == p
    assert curve1.same_point(involution(curve1, p, reduce=True), involution(curve1, p))
    assert involution(curve1, INFINITY) is INFINITY


def test_torii_point_rectangular(curve1):
    z = torii_point(curve1, [0], [0.3])
    assert np.allclose(z.zeta, [0.27j])
    assert in_real_torus(curve1, z.zeta, [0])
    z1 = torii_point(curve1, [1], [0.3])
    assert np.allclose(z1.zeta, [0.5 + 0.27j])
    assert not in_real_torus(curve1, z1.zeta, [0])
    with pytest.raises(ValueError):
        torii_point(curve1, [], [0.3])


def test_torii_point_theta_divisor(curve1):
    # θ vanishes at (1 + τ)/2, which is ν = 1 and a = 1/2 on the rectangular torus
    with pytest.raises(ThetaVanishes):
        torii_point(curve1, [1], [0.5])


def test_zeta_characteristic_roundtrip(curve1):
    zeta = np.array([0.3 + 0.2j])
    chi = zeta_characteristic(curve1, zeta)
    assert np.allclose(np.array(chi.b) + curve1.pm.Gamma @ np.array(chi.a), zeta)


def test_abel_jacobi_flat_chart(curve0, curve1):
    assert abel_jacobi(curve0, 1j).size == 0
    assert np.allclose(abel_jacobi(curve1, 0.2 + 0.3j), [0.2 + 0.3j])


def test_generic_backend_requires_twist():
    pm = PeriodMatrix([[0.3 + 1j, 0.1j], [0.1j, 0.9j]])
    with pytest.raises(ValueError):
        RealCurve.generic(pm, 1, False, ThetaChar((0.5, 0.5), (0.5, 0.0)))
    c = RealCurve.generic(PeriodMatrix([[1j, 0.1j], [0.1j, 0.9j]], H=[[0, 0], [0, 0]]), 3, True,
                          ThetaChar((0.5, 0.0), (0.5, 0.0)))
    with pytest.raises(UnsupportedBackend):
        real_components(c)
    with pytest.raises(UnsupportedBackend):
        prime_form(c, 0.1, 0.2)


def test_sampling_lands_on_the_right_sets(curve0, curve1):
    rng = np.random.default_rng(0)
    for c in (curve0, curve1):
        assert all(c.side(p) == 1 for p in c.sample_plus(rng, 30))
        assert all(c.side(p) == 0 for p in c.sample_real(rng, 30))


def test_listed_involution_and_components(curve0, curve1):
    assert involution(curve0, 1j) == SurfacePoint(-1j)
    assert involution(curve1, 0.37) == SurfacePoint(0.37)
    rng = np.random.default_rng(9)
    for _ in range(100):
        p = SurfacePoint(complex(rng.uniform(-3, 3), rng.uniform(-3, 3)))
        assert curve1.same_point(involution(curve1, involution(curve1, p, True), True), p)
    assert len(real_components(curve0)) == 1
    sq = RealCurve.genus1(1j)
    assert [c.height for c in real_components(sq)] == [0.0, 0.5]
    assert len(real_components(RealCurve.genus1(0.5 + 1j))) == 1


def test_listed_torii_and_abel(curve1):
    assert np.allclose(torii_point(RealCurve.genus1(1j), [0], [0.0]).zeta, [0])
    z1 = torii_point(curve1, [0], [1.0]).zeta
    z3 = torii_point(curve1, [0], [3.0]).zeta
    from rsvessel.theta import lattice_equal
    assert lattice_equal(curve1.pm, z1, z3)
    assert np.allclose(abel_jacobi(curve1, curve1.basepoint), [0])
    assert np.allclose(abel_jacobi(curve1, 0.25), [0.25])
    rng = np.random.default_rng(1)
    for p in curve1.sample_plus(rng, 20):
        d = abel_jacobi(curve1, involution(curve1, p)) - np.conj(abel_jacobi(curve1, p))
        assert lattice_equal(curve1.pm, d, [0])
