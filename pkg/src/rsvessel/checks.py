"""Registry of named numerical verifications used by scenarios and the CLI.

A check receives the resolved scenario, its parameter table and a private
RNG, and returns named residuals plus a witness for the worst sample.  It
passes when every residual is at most its (scaled) tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels as kn
from . import model_ops as mo
from . import transfer as tr
from . import vessel as vs
from .meromorphic import is_dividing
from .surface import SurfacePoint, involution, prime_form
from .theta import PeriodMatrix, ThetaChar, theta_batch


@dataclass
class Outcome:
    residuals: dict
    witness: dict | None = None
    info: dict = field(default_factory=dict)
    csv_rows: list | None = None


@dataclass(frozen=True)
class CheckSpec:
    name: str
    modules: tuple
    anchor: str
    tolerance: dict
    description: str
    func: Callable = field(repr=False, compare=False)

    @property
    def default_tolerance(self) -> float:
        return min(self.tolerance.values())


CATALOG: dict[str, CheckSpec] = {}


def check(name: str, modules, anchor: str, tolerance, description: str):
    tol = tolerance if isinstance(tolerance, dict) else {"*": float(tolerance)}

    def deco(fn):
        CATALOG[name] = CheckSpec(name, tuple(modules), anchor, tol, description, fn)
        return fn
    return deco


def tolerance_for(spec: CheckSpec, key: str, override=None) -> float:
    if isinstance(override, dict):
        if key in override:
            return float(override[key])
        override = override.get("*")
    if override is not None:
        return float(override)
    return spec.tolerance.get(key, spec.tolerance.get("*", spec.default_tolerance))


class Worst:
    """Track the largest residual per key together with its inputs."""

    def __init__(self):
        self.values: dict[str, float] = {}
        self.witness: dict[str, dict] = {}

    def update(self, key: str, value: float, **witness):
        value = float(value)
        if key not in self.values or value > self.values[key] or not np.isfinite(value):
            self.values[key] = value
            self.witness[key] = {k: _jsonable(v) for k, v in witness.items()}

    def outcome(self, **info) -> Outcome:
        return Outcome(dict(self.values), dict(self.witness), info)


def _jsonable(v):
    if isinstance(v, SurfacePoint):
        return "inf" if v.at_infinity else [v.coord.real, v.coord.imag]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(np.real(v)), float(np.imag(v))]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _rand_c(rng, scale=1.0):
    return complex(rng.normal(scale=scale), rng.normal(scale=scale))


def _rand_vec(rng, m):
    return rng.normal(size=m) + 1j * rng.normal(size=m)


def _fn(sc, params, key, default):
    return sc.function(params.get(key, default))


def _pair(sc, params):
    names = params.get("functions", ["y1", "y2"])
    return sc.function(names[0]), sc.function(names[1])


def _random_pm(rng, g):
    X = rng.uniform(-0.5, 0.5, size=(g, g))
    B = rng.normal(size=(g, g))
    Y = B @ B.T + g * 0.5 * np.eye(g)
    return PeriodMatrix((X + X.T) / 2 + 1j * Y)


# ----------------------------------------------------------------------
# theta_core / surface


@check("theta_quasiperiodicity", ["theta_core"], "theta function with characteristic; quasi-periodicity",
       1e-10, "quasi-periodicity and parity of theta with characteristics, random lattice shifts")
def _theta_qp(sc, params, rng):
    w = Worst()
    count = int(params.get("samples", 100))
    genera = params.get("genera", [1, 2])
    for k in range(count):
        g = genera[k % len(genera)]
        pm = sc.curve.pm if (g == 1 and sc.curve.genus == 1) else _random_pm(rng, g)
        chi = ThetaChar(tuple(rng.uniform(0, 1, g)), tuple(rng.uniform(0, 1, g)))
        lam = rng.normal(scale=0.5, size=g) + 1j * rng.normal(scale=0.3, size=g)
        m = rng.integers(-2, 3, g)
        n = rng.integers(-2, 3, g)
        a, b = np.array(chi.a), np.array(chi.b)
        lhs = theta_batch(pm, chi, [lam + m + pm.Gamma @ n])[0]
        fac = np.exp(2j * np.pi * a @ m - 1j * np.pi * n @ pm.Gamma @ n - 2j * np.pi * n @ (lam + b))
        rhs = fac * theta_batch(pm, chi, [lam])[0]
        w.update("quasi_periodicity", abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300), genus=g, m=m, n=n, lam=lam)
        t0 = theta_batch(pm, None, [lam, -lam])
        w.update("parity_even", abs(t0[0] - t0[1]) / abs(t0[0]), genus=g, lam=lam)
        odd = ThetaChar((0.5,) * g, (0.5,) + (0.0,) * (g - 1))
        if odd.is_odd_half():
            t1 = theta_batch(pm, odd, [lam, -lam])
            w.update("parity_odd", abs(t1[0] + t1[1]) / max(abs(t1[0]), 1e-300), genus=g, lam=lam)
    return w.outcome()


@check("prime_form", ["surface"], "prime form vanishes if and only if u = v; local expansion",
       {"zero": 1e-10, "antisymmetry": 1e-10, "expansion": 1e-3}, "zero locus, antisymmetry and first-order expansion")
def _prime_form(sc, params, rng):
    c = sc.curve
    w = Worst()
    for _ in range(int(params.get("samples", 50))):
        u = complex(rng.uniform(0, 1), rng.uniform(0, 0.9 * (c.pm.Y_inv[0, 0] if c.genus else 1)))
        v = u + _rand_c(rng, 0.3)
        w.update("zero", abs(prime_form(c, u, u)), u=u)
        e1, e2 = prime_form(c, u, v), prime_form(c, v, u)
        w.update("antisymmetry", abs(e1 + e2) / max(abs(e1), 1e-300), u=u, v=v)
        h = 1e-4 * np.exp(1j * rng.uniform(0, 2 * np.pi))
        w.update("expansion", abs(prime_form(c, u, u + h) / h - 1), u=u, h=h)
    return w.outcome()


# ----------------------------------------------------------------------
# kernels


@check("kernel_hermitian", ["kernels"], "The Cauchy kernel is Hermitian; positive on X_+ and negative on X_-",
       {"hermitian": 1e-9, "sign_law": 0.0, "closed_form": 1e-14},
       "Hermitian symmetry, sign law on both sides, genus-0 closed form")
def _kernel_hermitian(sc, params, rng):
    ctx = sc.kernel_context()
    c = sc.curve
    w = Worst()
    n = int(params.get("samples", 200))
    for _ in range(n):
        p, q = c.sample_plus(rng, 2, margin=0.05)
        if rng.uniform() < 0.5:
            q = involution(c, q)
        k1 = kn.cauchy_kernel(ctx, p, q)
        k2 = kn.cauchy_kernel(ctx, q, p)
        w.update("hermitian", abs(k1 - np.conj(k2)) / max(abs(k1), 1e-300), p=p, q=q)
        kp = kn.cauchy_kernel(ctx, p, p)
        tp = involution(c, p)
        km = kn.cauchy_kernel(ctx, tp, tp)
        w.update("sign_law", max(0.0, -kp.real) + max(0.0, km.real), p=p)
        if c.genus == 0:
            u, v = p.coord, q.coord
            w.update("closed_form", abs(k1 - 1 / (-1j * (u - np.conj(v)))), u=u, v=v)
    return w.outcome()


@check("kernel_derivatives", ["kernels"], "derivative entries of the Cauchy kernel",
       1e-6, "mixed chart derivatives against central finite differences")
def _kernel_derivs(sc, params, rng):
    ctx = sc.kernel_context()
    c = sc.curve
    w = Worst()
    h = 1e-5
    for _ in range(int(params.get("samples", 10))):
        u, v = c.sample_plus(rng, 2, margin=0.1)
        for du, dv in ((1, 0), (0, 1), (1, 1), (2, 0)):
            num = kn.cauchy_kernel_deriv(ctx, u, v, du, dv)
            # a real step differentiates in u on the first slot and in v̄ on the second
            if du:
                f = lambda t: kn.cauchy_kernel_deriv(ctx, u.coord + t, v, du - 1, dv)
            else:
                f = lambda t: kn.cauchy_kernel_deriv(ctx, u, v.coord + t, du, dv - 1)
            fd = (f(h) - f(-h)) / (2 * h)
            w.update("finite_difference", abs(num - fd) / max(abs(num), 1.0), u=u, v=v, du=du, dv=dv)
    return w.outcome()


@check("kernel_psd", ["kernels"], "positive on X_+; Gram matrix of kernels",
       1e-8, "Gram matrices of kernels at X_+ points are positive semidefinite")
def _kernel_psd(sc, params, rng):
    ctx = sc.kernel_context()
    w = Worst()
    for b in range(int(params.get("batches", 10))):
        pts = sc.curve.sample_plus(rng, int(params.get("size", 5)), margin=0.05)
        G = kn.gram_matrix(ctx, pts)
        ev = np.linalg.eigvalsh(G)
        w.update("negative_eigenvalue", max(0.0, -ev[0] / np.abs(ev).max()), points=pts)
    return w.outcome()


def _regular_value(y, rng, scale=1.5, cache=None):
    """Random α with a well-separated fiber; the fiber is stored in ``cache`` (collection-matrix format)."""
    for _ in range(50):
        a = _rand_c(rng, scale)
        try:
            fib = y.solve_fiber(a)
        except Exception:
            continue
        dy = np.asarray(fib.dy_values)
        if np.min(np.abs(dy)) > 1e-3:
            if cache is not None:
                cache[complex(a)] = (list(fib.points), 1.0 / np.sqrt(dy))
            return a
    raise RuntimeError("no regular value found")


@check("collection_formula", ["kernels", "meromorphic"], "K(lambda, lambda) = I by continuity; collection formula",
       1e-8, "products of collection matrices through a finite value and through infinity")
def _collection(sc, params, rng):
    ctx = sc.kernel_context()
    y = _fn(sc, params, "function", "y1")
    w = Worst()
    cache = {}
    count = int(params.get("fibers", 10))
    lams = [_regular_value(y, rng, cache=cache) for _ in range(count)]
    for k in range(count):
        l1, l2, l3 = lams[k], lams[(k + 1) % count], lams[(k + 3) % count]
        K12 = kn.collection_matrix(ctx, y, l1, l2, cache).entries
        via_inf = kn.collection_matrix(ctx, y, l1, None, cache).entries @ kn.collection_matrix(ctx, y, None, l2, cache).entries
        via_l3 = kn.collection_matrix(ctx, y, l1, l3, cache).entries @ kn.collection_matrix(ctx, y, l3, l2, cache).entries
        sc_ = max(1.0, np.abs(K12).max())
        w.update("through_infinity", np.abs(via_inf - K12).max() / sc_, l1=l1, l2=l2)
        w.update("through_finite", np.abs(via_l3 - K12).max() / sc_, l1=l1, l2=l2, l3=l3)
        w.update("identity", np.abs(kn.collection_matrix(ctx, y, l1, l1, cache).entries - np.eye(y.degree)).max(), l1=l1)
    return w.outcome()


@check("generalized_collection", ["kernels", "meromorphic"], "version of the collection formula",
       1e-7, "collection formula with Hankel Laurent blocks, including higher-order poles")
def _gen_collection(sc, params, rng):
    ctx = sc.kernel_context()
    c = sc.curve
    w = Worst()
    for name in params.get("functions", ["y1"]):
        y = sc.function(name)
        for k in range(int(params.get("samples", 10))):
            v, u = c.sample_plus(rng, 2, margin=0.1)
            if k % 2:
                u = involution(c, u)
            if k == 0:
                u = v
            lhs, rhs = kn.generalized_collection_terms(ctx, y, v, u)
            w.update(name, abs(lhs - rhs) / max(1.0, abs(lhs)), v=v, w=u)
    return w.outcome()


# ----------------------------------------------------------------------
# meromorphic


@check("fiber_solve", ["meromorphic"], "the n distinct pre-images", 1e-9,
       "fibers have the right count and small residual")
def _fibers(sc, params, rng):
    w = Worst()
    for name in params.get("functions", ["y1"]):
        y = sc.function(name)
        for _ in range(int(params.get("samples", 5))):
            a = _regular_value(y, rng)
            fib = y.solve_fiber(a)
            res = max(abs(y.eval(p) - a) for p in fib.points)
            w.update(name, res + abs(len(fib.points) - y.degree), alpha=a)
    return w.outcome()


@check("dividing_type", ["meromorphic", "surface"], "of dividing type; only real simple poles", 0.0,
       "dividing classification by sampling, with the residue-sign cross-check")
def _dividing(sc, params, rng):
    w = Worst()
    for name, expect in params.get("expect", {"y1": True}).items():
        cert = is_dividing(sc.function(name), int(params.get("samples", 200)), rng)
        w.update(name, float(bool(cert.dividing) != bool(expect)),
                 violations=[list(map(_jsonable, v)) for v in cert.violations[:3]])
        if cert.dividing:
            w.update(name + ":residues", float(not cert.residue_condition))
    return w.outcome()


# ----------------------------------------------------------------------
# model_ops


@check("model_algebra", ["model_ops", "vessel"], "is an algebra homomorphism; vanishes on the principal subspace",
       1e-7, "sum, product, commutator and discriminant Cayley-Hamilton on the model space")
def _algebra(sc, params, rng):
    ms = sc.model_space()
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2)
    disc = vs.discriminant(v)
    res = mo.algebra_check(ms, y1, y2, disc)
    return Outcome(res, {"functions": params.get("functions", ["y1", "y2"])}, {"gram_cond": ms.cond})


@check("resolvent_laws", ["model_ops"], "R = (M - alpha I)^{-1}; the resolvent identity",
       1e-9, "resolvent inverse, resolvent identity and kernel eigenvector law")
def _resolvent(sc, params, rng):
    ms = sc.model_space()
    y = _fn(sc, params, "function", "y1")
    M = mo.model_operator(ms, y).mat
    w = Worst()
    for _ in range(int(params.get("samples", 30))):
        a, b = _rand_c(rng, 2), _rand_c(rng, 2)
        Ra, Rb = mo.resolvent(ms, y, a).mat, mo.resolvent(ms, y, b).mat
        w.update("inverse", ms.op_norm((M - a * np.eye(ms.dim)) @ Ra - np.eye(ms.dim)), alpha=a)
        scale = max(1.0, ms.op_norm(Ra - Rb))
        w.update("identity", ms.op_norm(Ra - Rb - (a - b) * Ra @ Rb) / scale, alpha=a, beta=b)
    a = _regular_value(y, rng)
    j = int(rng.integers(ms.dim))
    pts = sc.curve.sample_plus(rng, 5, margin=0.1)
    lhs = mo.resolvent_pointwise(ms, y, a, ms.kernel_vector(j), pts)
    rhs = ms.evaluate(ms.kernel_vector(j), pts) / (np.conj(y.eval(ms.basis[j])) - a)
    w.update("eigenvector_pointwise", np.abs(lhs - rhs).max() / max(1.0, np.abs(rhs).max()), alpha=a, basis_index=j)
    return w.outcome()


@check("structure_identity", ["model_ops", "kernels"], "For every choice of f, g; interpreted as the limit",
       1e-8, "quadratic resolvent identity on random vectors, including the real diagonal limit")
def _structure(sc, params, rng):
    ms = sc.model_space()
    y = _fn(sc, params, "function", "y1")
    w = Worst()
    for k in range(int(params.get("samples", 5))):
        f, g = _rand_vec(rng, ms.dim), _rand_vec(rng, ms.dim)
        a, b = _regular_value(y, rng), _regular_value(y, rng)
        lhs, rhs = mo.structure_identity_terms(ms, y, a, b, f, g)
        w.update("complex", abs(lhs - rhs) / max(1.0, abs(lhs)), alpha=a, beta=b)
    for _ in range(int(params.get("real_samples", 2))):
        f, g = _rand_vec(rng, ms.dim), _rand_vec(rng, ms.dim)
        for _ in range(50):
            a = float(rng.normal(scale=1.5))
            try:
                lhs, rhs = mo.structure_identity_terms(ms, y, a, a, f, g)
                break
            except Exception:
                continue
        w.update("real_limit", abs(lhs - rhs) / max(1.0, abs(lhs)), alpha=a)
    return w.outcome()


@check("colligation", ["model_ops", "vessel"], "equivalent to the colligation condition; local coordinates",
       1e-8, "(1/i)(M - M*) = Phi* sigma Phi per function, and chart-rescaling invariance")
def _colligation(sc, params, rng):
    ms = sc.model_space()
    w = Worst()
    Ginv = lambda X: np.linalg.solve(ms.gram, X)
    for name in params.get("functions", ["y1"]):
        y = sc.function(name)
        M = mo.model_operator(ms, y).mat
        defect = (M - ms.adjoint(M)) / 1j
        forms = []
        for kappa in [1.0] + list(params.get("chart_scales", [2.0, 0.5])):
            rows = vs.union_poles(y, y, kappa)
            Phi = vs.phi_matrix(ms, rows)
            sig = vs.sigma_matrix(ms.ctx, rows, y)
            forms.append(Ginv(Phi.conj().T) @ sig @ Phi)
        w.update(name, ms.op_norm(defect - forms[0]), sizes=[r.order for r in vs.union_poles(y, y)])
        for F in forms[1:]:
            w.update(name + ":chart_rescaling", ms.op_norm(F - forms[0]) / max(1.0, ms.op_norm(forms[0])))
    return w.outcome()


@check("hankel_inverse", ["model_ops"], "inverse of an upper-skew-triangular Hankel matrix",
       1e-10, "Hankel blocks times their constructed inverse")
def _hankel(sc, params, rng):
    w = Worst()
    for s in range(1, int(params.get("max_size", 6)) + 1):
        for _ in range(int(params.get("samples", 5))):
            a = rng.normal(size=s) + 1j * rng.normal(size=s)
            a[-1] = a[-1] + np.sign(a[-1].real or 1.0)
            h = mo.HankelBlock(tuple(a))
            w.update(f"s={s}", np.abs(h.matrix() @ mo.hankel_inverse(h) - np.eye(s)).max(), coeffs=a)
    return w.outcome()


@check("taylor_delta", ["model_ops"], "delta stands for the Kronecker delta", 1e-10,
       "limit expression of the Taylor delta lemma equals the Kronecker delta")
def _taylor(sc, params, rng):
    w = Worst()
    for _ in range(int(params.get("sets", 20))):
        dmax = int(params.get("max_d", 5))
        c = rng.normal(size=dmax + 1)
        c[0] = c[0] + np.sign(c[0] or 1.0)
        for d in range(1, dmax + 1):
            for a in range(d):
                for b in range(d):
                    val = mo.taylor_delta_check(d, a, b, c[:d + 1])
                    w.update("delta", abs(val - (1.0 if a == b else 0.0)), d=d, a=a, b=b, c=c[:d + 1])
    return w.outcome()


# ----------------------------------------------------------------------
# vessel


@check("vessel_conditions", ["vessel", "model_ops"], "input, output and linkage vessel conditions",
       1e-8, "input/output/linkage, colligation, commutativity and selfadjointness of the model vessel")
def _vessel(sc, params, rng):
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2)
    res = vs.verify_vessel(v)
    scale = res.pop("scale")
    return Outcome(res, {"functions": params.get("functions", ["y1", "y2"])},
                   {"n": v.n, "m": v.m, "phi_scale": scale, "gamma_tilde_fit": v.meta["gamma_tilde_fit_residual"]})


@check("discriminant", ["vessel"], "The following equality holds; discriminant polynomial",
       {"gamma_vs_gamma_tilde": 1e-8, "curve_points": 1e-7}, "determinant equality and vanishing on the embedded curve")
def _discriminant(sc, params, rng):
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2)
    d = vs.discriminant_equality(v)
    w = Worst()
    w.update("gamma_vs_gamma_tilde", d["rel"])
    p = d["p"]
    for _ in range(int(params.get("samples", 50))):
        u = sc.curve.sample_plus(rng, 1, margin=0.05)[0]
        if rng.uniform() < 0.5:
            u = involution(sc.curve, u)
        l1, l2 = y1.eval(u), y2.eval(u)
        w.update("curve_points", abs(p(l1, l2)) / p.scale(l1, l2), u=u)
    return w.outcome(degree=p.degree)


@check("ccf_metric", ["vessel"], "where Im(z) = 0; where Im(z) > 0",
       {"isometry_real": 1e-8, "expansive_upper": 1e-8, "decay": 1e-4}, "metric properties of the complete characteristic function")
def _ccf(sc, params, rng):
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2)
    w = Worst()
    for _ in range(int(params.get("samples", 10))):
        t = rng.uniform(0, 2 * np.pi)
        x1, x2 = math.cos(t), math.sin(t)
        s = x1 * v.sigma1 + x2 * v.sigma2
        scale = max(1.0, np.linalg.norm(s, 2))
        zr = float(rng.normal(scale=3))
        D = vs.ccf_metric_defect(v, x1, x2, zr)
        w.update("isometry_real", np.linalg.norm(D, 2) / scale, xi=[x1, x2], z=zr)
        zu = complex(rng.normal(scale=2), abs(rng.normal()) + 0.05)
        D = vs.ccf_metric_defect(v, x1, x2, zu)
        ev = np.linalg.eigvalsh((D + D.conj().T) / 2)
        w.update("expansive_upper", max(0.0, -ev[0] / scale), xi=[x1, x2], z=zu)
        zb = 1e6 * np.exp(1j * rng.uniform(0, 2 * np.pi))
        # ‖W - I‖ ≤ ‖Φ‖‖Φ*ξσ‖/(|z| - ‖ξA‖): normalize by the data scale
        data = max(1.0, np.linalg.norm(v.Phi, 2) * np.linalg.norm(v.Phi_star @ s, 2))
        w.update("decay", np.linalg.norm(vs.ccf(v, x1, x2, zb) - np.eye(v.n), 2) / data, xi=[x1, x2], z=zb)
    return w.outcome()


@check("jcf", ["vessel"], "independent of the choice of xi_1 and xi_2", 1e-7,
       "joint characteristic function: direction independence and kernel-line consistency")
def _jcf(sc, params, rng):
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2)
    w = Worst()
    vals = []
    for _ in range(int(params.get("samples", 5))):
        u = sc.curve.sample_plus(rng, 1, margin=0.1)[0]
        dirs = [(math.cos(t), math.sin(t)) for t in rng.uniform(0, 2 * np.pi, 5)]
        r = vs.jcf(v, y1.eval(u), y2.eval(u), dirs)
        w.update("spread", r["spread"], u=u)
        w.update("leak", r["leak"], u=u)
        vals.append(r["S"])
    return w.outcome(values=[_jsonable(x) for x in vals])


@check("model_map", ["vessel"], "the mapping is the identity; does not depend on the direction",
       1e-8, "model map reproduces model-space elements from vessel data")
def _model_map(sc, params, rng):
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2)
    ms = v.ms
    w = Worst()
    for _ in range(int(params.get("samples", 5))):
        z = sc.curve.sample_plus(rng, 1, margin=0.1)[0]
        h = _rand_vec(rng, ms.dim)
        ref = ms.evaluate(h, [z])[0]
        scale = max(1.0, abs(ref))
        for xi in ((1.0, 0.0), (0.0, 1.0), (0.6, 0.8)):
            w.update("identity", abs(vs.model_map(v, z, h, xi) - ref) / scale, z=z, xi=xi)
        j = int(rng.integers(ms.dim))
        k = kn.cauchy_kernel(ms.ctx, z, ms.basis[j])
        w.update("kernel_oracle", abs(vs.model_map(v, z, ms.kernel_vector(j)) - k) / max(1.0, abs(k)), z=z)
    return w.outcome()


@check("kernel_via_jcf", ["vessel", "kernels"], "in terms of the joint characteristic function", 1e-7,
       "reproducing kernel from the characteristic function equals the Gram kernel")
def _rk(sc, params, rng):
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2)
    ms = v.ms
    w = Worst()
    for _ in range(int(params.get("pairs", 20))):
        p, q = sc.curve.sample_plus(rng, 2, margin=0.1)
        a = vs.kernel_via_jcf(v, p, q)
        b = kn.reproducing_kernel(ms.ctx, ms.basis, ms.gram, p, q)
        w.update("kernel", abs(a - b) / max(1.0, abs(b)), p=p, q=q)
    return w.outcome()


# ----------------------------------------------------------------------
# transfer


@check("blaschke_inner", ["transfer", "surface"], "finite product of the Blaschke factors; T(p) conj(T(tau p)) = 1",
       {"boundary_modulus": 1e-8, "symmetry": 1e-9, "multiplier_shift": 1e-9}, "inner property and multiplier bookkeeping")
def _blaschke(sc, params, rng):
    T = sc.transfer()
    c = sc.curve
    pts = c.sample_real(rng, int(params.get("samples", 50)))
    mods = np.abs(np.abs(T(pts)) - 1)
    i = int(np.argmax(mods))
    w = Worst()
    w.update("boundary_modulus", mods[i], point=pts[i])
    plus = c.sample_plus(rng, int(params.get("samples", 50)), margin=0.02)
    w.update("symmetry", T.symmetry_residual(plus))
    w.update("multiplier_shift", T.shift_residual(), zeta_in=T.zeta_in.zeta, zeta_out=T.zeta_out.zeta)
    return w.outcome()


@check("contractivity", ["transfer", "kernels"], "if and only if T is contractive", 1e-8,
       "max |T| on X_+ and positivity of the K_T Gram matrix, with the equivalence cross-check")
def _contractivity(sc, params, rng):
    T = sc.transfer()
    r = tr.contractivity_report(T, int(params.get("grid", 30)), int(params.get("batches", 20)),
                                int(params.get("batch_size", 6)), rng)
    res = {"max_abs_T_excess": max(0.0, r["max_abs_T"] - 1), "gram_negativity": max(0.0, -r["min_gram_eig"]),
           "equivalence": 0.0 if r["consistent"] else 1.0}
    witness = {"argmax_T": r["argmax"], "max_abs_T": r["max_abs_T"], "witness_batch": r["witness_batch"],
               "min_gram_eig": r["min_gram_eig"]}
    out = Outcome(res, witness)
    out.csv_rows = _contractivity_rows(T, params, rng)
    return out


def _contractivity_rows(T, params, rng):
    pts = tr._plus_grid(T.curve, int(params.get("csv_grid", 12)), 0.02)
    return [["re", "im", "abs_T"]] + [[f"{p.real:.12g}", f"{p.imag:.12g}", f"{abs(t):.12g}"]
                                      for p, t in zip(pts, T(pts))]


@check("njcf_consistency", ["transfer", "vessel"], "S(p) u(p) = u~(p) T(p)", 1e-6,
       "reproducing kernel via Gram, characteristic function and transfer function agree")
def _njcf(sc, params, rng):
    T = sc.transfer()
    y1, y2 = _pair(sc, params)
    v = sc.vessel(y1, y2, basis=T.zeros, zeta=T.zeta_out)
    pts = sc.curve.sample_plus(rng, int(params.get("points", 4)), margin=0.05)
    res = tr.njcf_residuals(v, T, pts)
    return Outcome(res, {"points": _jsonable(pts)})


@check("beurling_orthogonality", ["transfer", "model_ops"], "Then H is of the form T H^2; invariant under the operator of multiplication",
       {"orthogonality": 1e-5, "refinement": 1e-12, "mm_duality": 1e-5, "reproducing": 1e-8},
       "boundary-quadrature orthogonality of H(T) and T H^2, convergence under refinement, multiplication duality")
def _beurling(sc, params, rng):
    T = sc.transfer()
    c = sc.curve
    nodes = list(params.get("nodes", [512, 2048, 8192]))
    height = float(params.get("height", 0.05))
    w = Worst()
    info = {}
    for k in range(int(params.get("samples", 2))):
        f = _rand_vec(rng, len(T.zeros))
        x = float(rng.uniform(0, 1))
        h = SurfacePoint(complex(x, height))
        conv = tr.beurling_convergence(T, f, h, nodes)
        r = dict(zip(nodes, conv["residuals"]))
        n_main = int(params.get("main_nodes", 2048))
        w.update("orthogonality", r[n_main], f=f, h=h, nodes=n_main)
        w.update("refinement", max(0.0, r[max(nodes)] - r[n_main]), f=f, h=h)
        conv["improvement"] = r[n_main] / max(r[max(nodes)], 1e-300)
        info[f"sample{k}"] = conv
    ms = sc.model_space(zeta=T.zeta_in)
    y = _fn(sc, params, "function", "y1")
    for _ in range(int(params.get("mm_samples", 2))):
        f = _rand_vec(rng, ms.dim)
        a = complex(rng.normal(), abs(rng.normal()) + 0.2)  # duality needs alpha in C_+
        hpt = c.sample_plus(rng, 1, margin=0.1)[0]
        w.update("mm_duality", tr.mm_duality_residual(ms, y, a, f, hpt, int(params.get("main_nodes", 2048))),
                 alpha=a, h=hpt)
    w.update("reproducing", tr.reproducing_residual(T.ctx_in, int(params.get("main_nodes", 2048)),
                                                    c.sample_plus(rng, 2, margin=0.1), c.sample_plus(rng, 1, margin=0.1)[0]))
    return w.outcome(convergence=info)


def catalog_entries() -> list[dict]:
    return [{"name": s.name, "modules": list(s.modules), "anchor": s.anchor,
             "default_tolerance": s.default_tolerance, "tolerances": dict(s.tolerance),
             "description": s.description} for s in sorted(CATALOG.values(), key=lambda s: s.name)]
