import dataclasses

import numpy as np
import pytest

from rsvessel import kernels as kn
from rsvessel import vessel as vs
from rsvessel.errors import OrderingMismatch, SpectrumHit
from rsvessel.meromorphic import ConstantFn, RationalFn, WeierstrassFn
from rsvessel.model_ops import ModelSpace
from rsvessel.surface import SurfacePoint

VESSEL_TOL = 1e-8


@pytest.fixture(scope="module")
def v0(ms0, z0, h0):
    return vs.build_model_vessel(ms0, z0, h0, rng=np.random.default_rng(0))


@pytest.fixture(scope="module")
def v1(ms1, pair1):
    return vs.build_model_vessel(ms1, *pair1, rng=np.random.default_rng(0))


@pytest.fixture(scope="module")
def v1_double(ctx1, curve1, pair1):
    ms = ModelSpace(ctx1, curve1.sample_plus(np.random.default_rng(12), 6, margin=0.1))
    return vs.build_model_vessel(ms, pair1[0], WeierstrassFn(curve1, 0.2), rng=np.random.default_rng(0))


@pytest.fixture(scope="module")
def v0_pairs(ms0, curve0):
    pair = RationalFn(curve0, [1, 0], [1, -0.4, 0.29])
    double = RationalFn(curve0, [1], [1, -1.0, 0.25])
    return vs.build_model_vessel(ms0, pair, double, rng=np.random.default_rng(0))


@pytest.mark.parametrize("name", ["v0", "v1", "v1_double", "v0_pairs"])
def test_model_vessel_conditions(request, name):
    v = request.getfixturevalue(name)
    res = vs.verify_vessel(v)
    res.pop("scale")
    assert max(res.values()) < VESSEL_TOL, res


def test_pole_rows_order_and_structure(v0_pairs, v1_double):
    # conjugate pair rows are adjacent (p, τp); the double real pole gives two rows
    rows = v0_pairs.poles
    assert [(r.real, r.order) for r in rows] == [(True, 2), (False, 1), (False, 1)]
    pair = rows[1:]
    assert len(pair) == 2 and np.isclose(pair[0].point.coord, np.conj(pair[1].point.coord))
    assert v1_double.n == sum(r.order for r in v1_double.poles) == 4


def test_sigma_has_hankel_block_for_double_pole(v1_double):
    rows = v1_double.poles
    idx = [r.order for r in rows]
    k = idx.index(2)
    start = sum(idx[:k])
    block = v1_double.sigma2[start:start + 2, start:start + 2]
    # a_{-2} sits on the anti-diagonal corner and the lower-right entry vanishes
    assert abs(block[1, 1]) < 1e-12 and abs(block[0, 1]) > 1e-3


def test_perturbed_gamma_is_flagged(v1):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(v1.n, v1.n)) + 1j * rng.normal(size=(v1.n, v1.n))
    H = (X + X.conj().T) / 2
    bad = dataclasses.replace(v1, gamma=v1.gamma + 1e-3 * H)
    res = vs.verify_vessel(bad)
    assert res["input"] > 1e-5 and res["linkage"] > 1e-5
    assert res["output"] < VESSEL_TOL  # γ̃ untouched


def test_zero_vessel():
    n, m = 2, 3
    Z = np.zeros
    v = vs.Vessel(Z((m, m)), Z((m, m)), Z((n, m)), np.diag([1.0, -1.0]) + 0j, np.eye(n) + 0j,
                  Z((n, n)), Z((n, n)), np.eye(m) + 0j)
    res = vs.verify_vessel(v)
    res.pop("scale")
    assert max(res.values()) == 0.0
    bad = dataclasses.replace(v, gamma_tilde=np.eye(n) + 0j)
    assert vs.verify_vessel(bad)["linkage"] == pytest.approx(1.0)


def test_json_roundtrip(v1):
    w = vs.Vessel.from_json(v1.to_json())
    for k in ("A1", "A2", "Phi", "sigma1", "sigma2", "gamma", "gamma_tilde", "gram"):
        assert np.array_equal(getattr(w, k), getattr(v1, k))
    assert [(r.order, r.real) for r in w.poles] == [(r.order, r.real) for r in v1.poles]


def test_one_dimensional_genus0_ccf(ctx0, curve0, z0):
    # y1 = z, y2 = 2, basis {a}: the colligation is the classical Blaschke factor
    a = 0.3 + 0.8j
    v = vs.build_model_vessel(ModelSpace(ctx0, [a]), z0, ConstantFn(curve0, 2.0))
    for z in (1 + 1j, -2 + 0.3j, 5.0):
        assert abs(vs.ccf(v, 1, 0, z)[0, 0] - (z - a) / (z - np.conj(a))) < 1e-13
    # on the line λ2 = 2 the pencil vanishes identically; S(λ) is the same factor
    r = vs.jcf(v, 1 + 1j, 2.0, directions=[(1.0, 0.0)])
    assert abs(r["S"] - (1 + 1j - a) / (1 + 1j - np.conj(a))) < 1e-13
    with pytest.raises(SpectrumHit):
        vs.ccf(v, 1, 0, np.conj(a))


def test_discriminant_genus0_closed_form(v0):
    # y1 = z, y2 = -1/(z - 1/2): the curve is λ2(λ1 - 1/2) + 1 = 0
    p = vs.discriminant(v0)
    C = p.coeffs / p.coeffs[1, 1]
    expected = np.zeros_like(C)
    expected[1, 1], expected[0, 1], expected[0, 0] = 1, -0.5, 1
    assert np.abs(C - expected).max() < 1e-9
    assert p.degree == 2
    assert vs.discriminant_equality(v0)["rel"] < 1e-10


def test_discriminant_n1_affine(ctx0, curve0, z0):
    v = vs.build_model_vessel(ModelSpace(ctx0, [0.3 + 0.8j, 1j]), z0, ConstantFn(curve0, 2.0))
    p = vs.discriminant(v)
    # 1x1: det(λ1σ2 - λ2σ1 + γ) = -λ2 σ1 + γ directly
    s1, g = v.sigma1[0, 0], v.gamma[0, 0]
    for l1, l2 in ((0.3, 1.0), (2 + 1j, -1j)):
        assert abs(p(l1, l2) - (-l2 * s1 + g)) < 1e-12
    assert p.degree == 1


def test_discriminant_vanishes_on_curve(v1, curve1, pair1):
    p = vs.discriminant(v1)
    rng = np.random.default_rng(2)
    for u in curve1.sample_plus(rng, 20, margin=0.05):
        l1, l2 = pair1[0].eval(u), pair1[1].eval(u)
        assert abs(p(l1, l2)) < 1e-7 * p.scale(l1, l2)


def test_chart_rescaling_changes_discriminant_by_constant(ms1, pair1):
    va = vs.build_model_vessel(ms1, *pair1, rng=np.random.default_rng(0))
    vb = vs.build_model_vessel(ms1, *pair1, chart_scale=2.0, rng=np.random.default_rng(0))
    res = vs.verify_vessel(vb)
    res.pop("scale")
    assert max(res.values()) < VESSEL_TOL
    Ca, Cb = vs.discriminant(va).coeffs, vs.discriminant(vb).coeffs
    k = np.unravel_index(np.argmax(np.abs(Ca)), Ca.shape)
    assert np.abs(Cb / Cb[k] - Ca / Ca[k]).max() < 1e-8


def test_ccf_metric(v1):
    s = v1.sigma1
    D = vs.ccf_metric_defect(v1, 1.0, 0.0, 0.37)
    assert np.linalg.norm(D, 2) < 1e-8 * max(1, np.linalg.norm(s, 2))
    D = vs.ccf_metric_defect(v1, 0.6, 0.8, 0.2 + 0.9j)
    assert np.linalg.eigvalsh((D + D.conj().T) / 2)[0] > -1e-8


def test_jcf_direction_independence(v1, curve1, pair1):
    u = SurfacePoint(0.4 + 0.2j)
    r = vs.jcf(v1, pair1[0].eval(u), pair1[1].eval(u))
    assert r["spread"] < 1e-7 and r["leak"] < 1e-7
    assert abs(np.linalg.norm(r["e"]) - 1) < 1e-12


def test_model_map_reproduces_sections(v1, ms1):
    rng = np.random.default_rng(4)
    z = SurfacePoint(0.55 + 0.3j)
    h = rng.normal(size=ms1.dim) + 1j * rng.normal(size=ms1.dim)
    for xi in ((1.0, 0.0), (0.0, 1.0)):
        assert vs.model_map_identity_check(v1, z, h, xi) < 1e-8 * max(1, abs(ms1.evaluate(h, [z])[0]))
    k = kn.cauchy_kernel(ms1.ctx, z, ms1.basis[2])
    assert abs(vs.model_map(v1, z, ms1.kernel_vector(2)) - k) < 1e-8 * max(1, abs(k))


def test_kernel_via_jcf_matches_gram(v0, ms0):
    p, q = SurfacePoint(0.2 + 0.6j), SurfacePoint(-1 + 1.5j)
    ref = kn.reproducing_kernel(ms0.ctx, ms0.basis, ms0.gram, p, q)
    assert abs(vs.kernel_via_jcf(v0, p, q) - ref) < 1e-9 * max(1, abs(ref))


def test_declared_signs_must_match(ms1, pair1):
    v = vs.build_model_vessel(ms1, *pair1)
    signs = [int(np.sign(s)) for s in v.meta["real_pole_signs"]]
    vs.build_model_vessel(ms1, *pair1, mu_signs=signs)
    with pytest.raises(OrderingMismatch):
        vs.build_model_vessel(ms1, *pair1, mu_signs=[-s for s in signs])


def test_gamma_tilde_fit_matches_closed_form(v0):
    gt = vs.gamma_tilde_closed_form(v0.ms.ctx, v0.poles, v0.y1, v0.y2)
    assert np.abs(gt - v0.gamma_tilde).max() < 1e-10
