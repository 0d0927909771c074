import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsvessel import model_ops as mo
from rsvessel.errors import PoleCollision, SingularBlock, SpectrumHit
from rsvessel.meromorphic import ConstantFn, RationalFn
from rsvessel.surface import SurfacePoint


def test_multiplication_by_z_has_kernel_eigenvectors(ms0, z0):
    # classical: compressed multiplication by z sends K(., w) to conj(w) K(., w)
    M = mo.model_operator(ms0, z0).mat
    assert np.allclose(np.diag(M), [np.conj(w.coord) for w in ms0.basis])
    pts = [SurfacePoint(0.4 + 0.3j), SurfacePoint(-1 + 2j)]
    for j, w in enumerate(ms0.basis):
        got = mo.model_operator_pointwise(ms0, z0, ms0.kernel_vector(j), pts)
        exact = np.array([np.conj(w.coord) * 1j / (u.coord - np.conj(w.coord)) for u in pts])
        assert np.abs(got - exact).max() < 1e-13


def test_constant_function_is_scalar(ms1, curve1):
    M = mo.model_operator_matrix_pointwise(ms1, ConstantFn(curve1, 2.5)).mat
    assert np.abs(M - 2.5 * np.eye(ms1.dim)).max() < 1e-12


def test_pointwise_matrix_matches_diagonal(ms1, pair1):
    for y in pair1:
        A = mo.model_operator_matrix_pointwise(ms1, y).mat
        D = mo.model_operator(ms1, y).mat
        assert ms1.op_norm(A - D) < 1e-9


def test_resolvent_classical_eigenvalue(ms0, z0):
    alpha = 0.3 - 0.7j
    pts = [SurfacePoint(0.1 + 0.5j), SurfacePoint(2 + 1j)]
    for j, w in enumerate(ms0.basis):
        got = mo.resolvent_pointwise(ms0, z0, alpha, ms0.kernel_vector(j), pts)
        exact = np.array([1j / (u.coord - np.conj(w.coord)) for u in pts]) / (np.conj(w.coord) - alpha)
        assert np.abs(got - exact).max() < 1e-13


def test_resolvent_identity(ms1, pair1):
    y = pair1[0]
    a, b = 0.4 + 0.3j, -1.2 + 2j
    Ra, Rb = mo.resolvent(ms1, y, a).mat, mo.resolvent(ms1, y, b).mat
    assert ms1.op_norm(Ra - Rb - (a - b) * Ra @ Rb) < 1e-10
    M = mo.model_operator(ms1, y).mat
    assert ms1.op_norm((M - a * np.eye(ms1.dim)) @ Ra - np.eye(ms1.dim)) < 1e-12


def test_spectrum_hit(ms0, z0):
    with pytest.raises(SpectrumHit):
        mo.resolvent(ms0, z0, np.conj(ms0.basis[0].coord))


def test_pole_collision(ctx0, curve0):
    y = RationalFn(curve0, [1, 0], [1, -0.4, 0.29])  # poles 0.2 +- 0.5i
    ms = mo.ModelSpace(ctx0, [0.2 + 0.5j, 1 + 1j])
    with pytest.raises(PoleCollision):
        mo.model_operator(ms, y)


def test_model_space_validation(ctx0):
    with pytest.raises(ValueError):
        mo.ModelSpace(ctx0, [1j, 1j])
    with pytest.raises(ValueError):
        mo.ModelSpace(ctx0, [1j, 1j + 1e-9])  # Gram condition number


def test_adjoint_in_gram_inner_product(ms1):
    rng = np.random.default_rng(1)
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    f, g = rng.normal(size=5) + 0j, rng.normal(size=5) + 1j
    assert abs(ms1.inner(A @ f, g) - ms1.inner(f, ms1.adjoint(A) @ g)) < 1e-10


def test_structure_identity_genus0(ms0, curve0):
    y = RationalFn(curve0, [1, -0.5, -1], [1, -0.5])
    rng = np.random.default_rng(3)
    f, g = rng.normal(size=4) + 1j * rng.normal(size=4), rng.normal(size=4) + 0j
    assert mo.structure_identity_residual(ms0, y, 0.3 + 1j, -0.4 + 0.2j, f, g) < 1e-10
    # real diagonal limit
    assert mo.structure_identity_residual(ms0, y, 0.7, 0.7, f, g) < 1e-10


def test_structure_identity_genus1(ms1, pair1):
    rng = np.random.default_rng(8)
    f, g = rng.normal(size=5) + 1j * rng.normal(size=5), rng.normal(size=5) + 1j * rng.normal(size=5)
    lhs, rhs = mo.structure_identity_terms(ms1, pair1[0], 0.5 + 0.8j, -0.3 - 0.6j, f, g)
    assert abs(lhs - rhs) < 1e-9 * max(1, abs(lhs))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(min_magnitude=0.2, max_magnitude=3), min_size=1, max_size=6))
def test_hankel_inverse_against_numpy(coeffs):
    h = mo.HankelBlock(tuple(coeffs))
    H = h.matrix()
    assert np.abs(H @ mo.hankel_inverse(h) - np.eye(h.size)).max() < 1e-8 * max(1, np.linalg.cond(H))
    assert np.allclose(mo.hankel_inverse(h), np.linalg.inv(H), atol=1e-8 * np.linalg.cond(H))


def test_hankel_singular():
    with pytest.raises(SingularBlock):
        mo.hankel_inverse(mo.HankelBlock((1.0, 0.0)))


def test_taylor_delta_kronecker():
    rng = np.random.default_rng(0)
    for d in range(1, 6):
        c = rng.normal(size=d + 1)
        c[0] += 2
        for a in range(d):
            for b in range(d):
                assert abs(mo.taylor_delta_check(d, a, b, c) - (a == b)) < 1e-10
    with pytest.raises(ValueError):
        mo.taylor_delta_check(2, 2, 0, [1, 1, 1])
    with pytest.raises(ValueError):
        mo.taylor_delta_check(2, 0, 0, [0, 1, 1])


def test_algebra_genus0_exact(ms0, z0, h0):
    res = mo.algebra_check(ms0, z0, h0)
    assert max(res.values()) < 1e-10


def test_listed_examples(ctx0, curve0, z0, ms1, pair1):
    ms = mo.ModelSpace(ctx0, [1j])
    assert np.allclose(mo.model_operator(ms, z0).mat, [[-1j]])
    assert np.allclose(mo.model_operator_matrix_pointwise(ms, z0).mat, [[-1j]])
    res = mo.algebra_check(ms1, pair1[0], ConstantFn(ms1.ctx.curve, 1.5))
    assert max(res.values()) < 1e-10
    assert np.allclose(mo.hankel_inverse(mo.HankelBlock((4.0,))), [[0.25]])
    assert abs(mo.taylor_delta_check(1, 0, 0, [1, 1]) - 1) < 1e-14
