import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsvessel import kernels as kn
from rsvessel.errors import PoleHit, UnsupportedBackend
from rsvessel.meromorphic import RationalFn
from rsvessel.surface import INFINITY, RealCurve, SurfacePoint, involution, torii_point
from rsvessel.theta import PeriodMatrix, ThetaChar

# S(u,v) on τ = 0.9i, ζ = 0.27i from mpmath (30 digits):
# exp(2πi a z) θ3(π(z+ζ)) / θ3(πζ) / E(z), z = v - u, a = 0.3
S_ORACLE = (0.1 + 0.2j, 0.35 - 0.1j, 1.2927697324681655 + 2.896326378000574j)


def test_szego_oracle(ctx1):
    u, v, expected = S_ORACLE
    assert abs(kn.szego(ctx1, u, v) - expected) < 1e-13
    # K(u, v) = S(u, τv)/i
    assert abs(kn.cauchy_kernel(ctx1, u, np.conj(v)) - expected / 1j) < 1e-13


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_genus0_closed_form(ctx0, u, v):
    if abs(u - np.conj(v)) < 1e-3:
        return
    k = kn.cauchy_kernel(ctx0, u, v)
    assert abs(k - 1 / (-1j * (u - np.conj(v)))) <= 1e-14 * max(1.0, abs(k))


def test_genus0_infinity_rows(ctx0):
    # the kernel at ∞ is read in the chart 1/z: S(∞, v) = -1 and S(u, ∞) = 1
    assert abs(kn.szego(ctx0, INFINITY, 2 + 1j) + 1) < 1e-15
    assert abs(kn.szego(ctx0, 1j, INFINITY) - 1) < 1e-15
    with pytest.raises(PoleHit):
        kn.szego(ctx0, INFINITY, INFINITY)


def test_hermitian_and_sign_law(ctx1, curve1):
    rng = np.random.default_rng(5)
    for _ in range(40):
        p, q = curve1.sample_plus(rng, 2, margin=0.05)
        q = involution(curve1, q) if rng.uniform() < 0.5 else q
        k1, k2 = kn.cauchy_kernel(ctx1, p, q), kn.cauchy_kernel(ctx1, q, p)
        assert abs(k1 - np.conj(k2)) < 1e-10 * max(1.0, abs(k1))
        assert kn.cauchy_kernel(ctx1, p, p).real > 0
        tp = involution(curve1, p)
        assert kn.cauchy_kernel(ctx1, tp, tp).real < 0


def test_off_torus_zeta_breaks_hermitian_symmetry(curve1):
    # ζ with a nonzero real part outside the ν-shifts is not on a real torus
    from rsvessel.surface import ToriiPoint
    ctx = kn.KernelContext(curve1, ToriiPoint(np.array([0.2 + 0.27j]), (0,), (0.3,)))
    p, q = 0.2 + 0.1j, 0.7 + 0.3j
    assert abs(kn.cauchy_kernel(ctx, p, q) - np.conj(kn.cauchy_kernel(ctx, q, p))) > 1e-3


def test_multiplier_along_lattice(ctx1):
    u, v = 0.1 + 0.1j, 0.4 + 0.2j
    for ell in (1.0, 0.9j, 2 - 0.9j):
        assert abs(kn.szego(ctx1, u, v + ell) - ctx1.multiplier(ell) * kn.szego(ctx1, u, v)) < 1e-10
    with pytest.raises(ValueError):
        ctx1.multiplier(0.5)


def test_derivatives_vs_finite_differences(ctx1):
    u, v, h = 0.2 + 0.1j, 0.5 + 0.3j, 1e-5
    d_fd = (kn.szego(ctx1, u + h, v) - kn.szego(ctx1, u - h, v)) / (2 * h)
    assert abs(kn.szego(ctx1, u, v, 1, 0) - d_fd) < 1e-6
    d_fd = (kn.szego(ctx1, u, v + h, 0, 1) - kn.szego(ctx1, u, v - h, 0, 1)) / (2 * h)
    assert abs(kn.szego(ctx1, u, v, 0, 2) - d_fd) < 1e-5


def test_genus0_derivatives_symbolic(ctx0):
    # ∂_u^a ∂_v^b 1/(v-u) = (-1)^b (a+b)! / (v-u)^{a+b+1}
    from math import factorial
    u, v = 0.3 + 0.2j, -1 + 0.5j
    for a in range(3):
        for b in range(3):
            exact = (-1) ** b * factorial(a + b) / (v - u) ** (a + b + 1)
            assert abs(kn.szego(ctx0, u, v, a, b) - exact) < 1e-13 * max(1, abs(exact))


def test_pole_guard(ctx1):
    with pytest.raises(PoleHit):
        kn.szego(ctx1, 0.2 + 0.1j, 0.2 + 0.1j)
    with pytest.raises(PoleHit):
        kn.szego(ctx1, 0.2 + 0.1j, 1.2 + 0.1j)


def test_gram_psd_and_permutation(ctx1, curve1):
    rng = np.random.default_rng(7)
    pts = curve1.sample_plus(rng, 6, margin=0.05)
    G = kn.gram_matrix(ctx1, pts)
    assert np.linalg.eigvalsh(G)[0] > -1e-10
    perm = rng.permutation(6)
    Gp = kn.gram_matrix(ctx1, [pts[i] for i in perm])
    assert np.allclose(Gp, G[np.ix_(perm, perm)], atol=1e-13)


def test_reproducing_kernel_of_span(ctx0, basis0):
    G = kn.gram_matrix(ctx0, basis0)
    # on the span itself K_X(p, w_j) = K(p, w_j)
    p = SurfacePoint(0.7 + 0.9j)
    for w in basis0:
        assert abs(kn.reproducing_kernel(ctx0, basis0, G, p, w) - kn.cauchy_kernel(ctx0, p, w)) < 1e-12


def test_collection_formula_genus0_closed_form(ctx0, curve0):
    # y = z - 1/(z - 1/2): fiber of λ solves z² - (λ + 1/2) z + λ/2 - 1 = 0
    y = RationalFn(curve0, [1, -0.5, -1], [1, -0.5])
    l1, l2 = 0.3 + 0.8j, -1.1 + 0.4j
    K = kn.collection_matrix(ctx0, y, l1, l2).entries
    via_inf = kn.collection_matrix(ctx0, y, l1, None).entries @ kn.collection_matrix(ctx0, y, None, l2).entries
    assert np.abs(via_inf - K).max() < 1e-10
    assert np.allclose(kn.collection_matrix(ctx0, y, l1, l1).entries, np.eye(2))
    fib = y.solve_fiber(l1)
    roots = np.roots([1, -(l1 + 0.5), l1 / 2 - 1])
    assert sorted(np.round([p.coord for p in fib.points], 9), key=lambda z: (z.real, z.imag)) == \
        sorted(np.round(roots, 9), key=lambda z: (z.real, z.imag))


def test_generalized_collection_diagonal_limit(ctx1, pair1):
    y1, _ = pair1
    v = SurfacePoint(0.2 + 0.2j)
    lhs, rhs = kn.generalized_collection_terms(ctx1, y1, v, v)
    assert lhs == pytest.approx(-complex(y1.deriv(v)))
    assert abs(lhs - rhs) < 1e-9 * max(1, abs(lhs))
    w = SurfacePoint(0.6 + 0.1j)
    assert kn.generalized_collection_check(ctx1, y1, v, w) < 1e-9


def test_generic_backend_has_no_kernels():
    c = RealCurve.generic(PeriodMatrix([[1j, 0.1j], [0.1j, 0.9j]], H=[[0, 0], [0, 0]]), 3, True,
                          ThetaChar((0.5, 0.0), (0.5, 0.0)))
    with pytest.raises(UnsupportedBackend):
        kn.KernelContext(c, torii_point(c, [0, 0], [0.1, 0.1]))


def test_listed_genus0_values(ctx0):
    assert abs(kn.cauchy_kernel(ctx0, 1j, 1j) - 0.5) < 1e-15
    # ∂_u 1/(-i(u - v̄)) = -1/(-i (u - v̄)²) at u = 2i, v = i
    assert abs(kn.cauchy_kernel_deriv(ctx0, 2j, 1j, 1, 0) - (-1 / (-1j * (3j) ** 2))) < 1e-14
    assert kn.cauchy_kernel_deriv(ctx0, 2j, 1j) == kn.cauchy_kernel(ctx0, 2j, 1j)
    G = kn.gram_matrix(ctx0, [SurfacePoint(0.4 + 0.7j)])
    assert G.shape == (1, 1) and G[0, 0].real > 0
