"""Cauchy kernels, their chart derivatives, Gram matrices and collection matrices.

Everything is built from the holomorphic kernel

    S(u, v) = θ[ζ](v - u) / (θ[ζ](0) E(u, v))        (genus 1, flat chart)
    S(u, v) = 1 / (v - u)                              (genus 0)

which has a simple pole S ≈ 1/(v - u) on the diagonal.  The Cauchy kernel
is K_ζ(u, v) = S(u, τv) / i.  On genus 0 the point at infinity is read in
the chart t = -1/z with half-order factor z, which gives S(u, ∞) = 1,
S(∞, v) = -1 and S = 1/(t_v - t_u) when both points sit at infinity.

Since S(u, v) only depends on v - u in the flat chart,
∂_u^p ∂_v^q S(u, v) = (-1)^p G^{(p+q)}(v - u) with G(z) = S(0, z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import series
from .errors import PoleHit, RamifiedFiber, UnsupportedBackend
from .surface import (RealCurve, SurfacePoint, ToriiPoint, as_point, delta_slope, involution,
                      torii_point, zeta_characteristic)
from .theta import ThetaChar, lattice_coords, theta_batch, theta_char

MAX_KERNEL_ORDER = 6
POLE_EPS = 1e-12


@dataclass(eq=False)
class KernelContext:
    curve: RealCurve
    zeta: ToriiPoint | None = None
    chart: str = field(init=False)

    def __post_init__(self):
        c = self.curve
        if c.genus == 0:
            self.chart = "standard"
            self.zeta = self.zeta or torii_point(c)
            return
        if c.backend != "genus1":
            raise UnsupportedBackend("kernel evaluation needs the genus-1 flat chart")
        self.chart = "flat"
        if self.zeta is None:
            self.zeta = torii_point(c, (0,) * (c.component_count - 1), (0.0,) * c.genus)
        self.chi = zeta_characteristic(c, self.zeta.zeta)
        self.theta0 = theta_char(c.pm, self.chi, np.zeros(c.genus))
        if abs(self.theta0) <= 1e-8:
            from .errors import ThetaVanishes
            raise ThetaVanishes("theta[zeta](0) vanishes")
        self.norm = delta_slope(c) / self.theta0

    @property
    def genus(self) -> int:
        return self.curve.genus

    # ------------------------------------------------------------------
    def G_derivs(self, z, kmax: int) -> np.ndarray:
        """(N, kmax+1) array of d^k/dz^k G(z) with G(z) = S(0, z)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if kmax > MAX_KERNEL_ORDER:
            raise ValueError(f"derivative order {kmax} above cap {MAX_KERNEL_ORDER}")
        if self.genus == 0:
            ks = np.arange(kmax + 1)
            fact = np.array([math.factorial(k) for k in ks], dtype=float)
            return ((-1.0) ** ks * fact)[None, :] * z[:, None] ** (-(ks[None, :] + 1))
        pm = self.curve.pm
        num = np.stack([theta_batch(pm, self.chi, z[:, None], [k]) for k in range(kmax + 1)], axis=1)
        den = np.stack([theta_batch(pm, self.curve.delta, z[:, None], [k]) for k in range(kmax + 1)], axis=1)
        out = np.empty_like(num)
        for i in range(len(z)):
            q = series.div(series.derivs_to_coeffs(num[i]), series.derivs_to_coeffs(den[i]), kmax + 1)
            out[i] = series.coeffs_to_derivs(q)
        return out * self.norm

    def prime_form_values(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.genus == 0:
            return z
        return theta_batch(self.curve.pm, self.curve.delta, z[:, None]) / delta_slope(self.curve)

    def multiplier(self, ell: complex) -> complex:
        """χ(ℓ) with S(u, v + ℓ) = χ(ℓ) S(u, v) for a lattice vector ℓ."""
        if self.genus == 0:
            if abs(ell) > 1e-12:
                raise ValueError("genus 0 has no lattice")
            return 1.0 + 0j
        x, y = lattice_coords(self.curve.pm, [ell])
        m, n = np.rint(x), np.rint(y)
        if np.max(np.abs(x - m)) > 1e-8 or np.max(np.abs(y - n)) > 1e-8:
            raise ValueError(f"{ell} is not a lattice vector")
        da = np.asarray(self.chi.a) - np.asarray(self.curve.delta.a)
        db = np.asarray(self.chi.b) - np.asarray(self.curve.delta.b)
        return complex(np.exp(2j * np.pi * (da @ m - db @ n)))


def with_zeta(ctx: KernelContext, zeta: ToriiPoint) -> KernelContext:
    return KernelContext(ctx.curve, zeta)


# ----------------------------------------------------------------------
# holomorphic kernel S


def szego(ctx: KernelContext, u, v, du: int = 0, dv: int = 0) -> complex:
    """∂_u^du ∂_v^dv S(u, v) in the fixed chart(s)."""
    u, v = as_point(u), as_point(v)
    if u.at_infinity or v.at_infinity:
        return _szego_infinity(u, v, du, dv)
    return complex(szego_batch(ctx, [u.coord], [v.coord], du, dv)[0])


def szego_batch(ctx: KernelContext, u, v, du: int = 0, dv: int = 0) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    u, v = np.broadcast_arrays(u, v)
    z = (v - u).ravel()
    if np.any(np.abs(ctx.prime_form_values(z)) < POLE_EPS):
        raise PoleHit("kernel evaluated on its pole (u = v)")
    k = du + dv
    d = ctx.G_derivs(z, k)[:, k]
    return ((-1) ** du * d).reshape(u.shape)


def _szego_infinity(u: SurfacePoint, v: SurfacePoint, du: int, dv: int) -> complex:
    f = math.factorial
    if u.at_infinity and v.at_infinity:
        raise PoleHit("kernel evaluated on its pole (both points at infinity)")
    if v.at_infinity:
        # S(u, ∞)_t = 1/(1 + u t): ∂_t^q = (-u)^q q!, then ∂_u^p
        q, p = dv, du
        if p > q:
            return 0j
        return complex((-1) ** q * f(q) * f(q) / f(q - p) * u.coord ** (q - p))
    # S(∞, v)_t = -1/(1 + v t): ∂_t^p = -(-v)^p p!, then ∂_v^q
    p, q = du, dv
    if q > p:
        return 0j
    return complex(-((-1) ** p) * f(p) * f(p) / f(p - q) * v.coord ** (p - q))


def szego_matrix(ctx: KernelContext, us, vs, du: int = 0, dv: int = 0) -> np.ndarray:
    """Matrix [∂_u^du ∂_v^dv S(u_i, v_j)] allowing points at infinity."""
    us = [as_point(p) for p in us]
    vs = [as_point(p) for p in vs]
    out = np.empty((len(us), len(vs)), dtype=complex)
    fin_u = [i for i, p in enumerate(us) if not p.at_infinity]
    fin_v = [j for j, p in enumerate(vs) if not p.at_infinity]
    if fin_u and fin_v:
        U = np.array([us[i].coord for i in fin_u])
        V = np.array([vs[j].coord for j in fin_v])
        block = szego_batch(ctx, U[:, None], V[None, :], du, dv)
        out[np.ix_(fin_u, fin_v)] = block
    for i, p in enumerate(us):
        for j, q in enumerate(vs):
            if p.at_infinity or q.at_infinity:
                out[i, j] = _szego_infinity(p, q, du, dv)
    return out


# ----------------------------------------------------------------------
# Cauchy kernel


def cauchy_kernel(ctx: KernelContext, u, v) -> complex:
    """K_ζ(u, v) = θ[ζ](τv - u) / (i θ[ζ](0) E(u, τv))."""
    return cauchy_kernel_deriv(ctx, u, v, 0, 0)


def cauchy_kernel_deriv(ctx: KernelContext, u, v, du: int = 0, dv: int = 0) -> complex:
    """∂_u^du ∂_{v̄}^dv K_ζ(u, v); K is anti-holomorphic in v."""
    if du + dv > MAX_KERNEL_ORDER:
        raise ValueError("derivative order above cap")
    u, v = as_point(u), as_point(v)
    tv = involution(ctx.curve, v)
    _guard_pole(ctx, u, tv)
    return szego(ctx, u, tv, du, dv) / 1j


def cauchy_matrix(ctx: KernelContext, us, vs, du: int = 0, dv: int = 0) -> np.ndarray:
    """[∂_u^du ∂_{v̄}^dv K(u_i, v_j)]."""
    tvs = [involution(ctx.curve, p) for p in vs]
    return szego_matrix(ctx, us, tvs, du, dv) / 1j


def _guard_pole(ctx: KernelContext, u: SurfacePoint, w: SurfacePoint) -> None:
    if u.at_infinity or w.at_infinity:
        if u.at_infinity and w.at_infinity:
            raise PoleHit("u = tau(v) = infinity")
        return
    if abs(ctx.prime_form_values([w.coord - u.coord])[0]) < POLE_EPS:
        raise PoleHit("u coincides with tau(v)")


def gram_matrix(ctx: KernelContext, points) -> np.ndarray:
    """G[i][j] = K_ζ(p_i, p_j) = <k_{p_j}, k_{p_i}>; Hermitian-checked then symmetrized."""
    G = cauchy_matrix(ctx, points, points)
    dev = np.max(np.abs(G - G.conj().T), initial=0.0)
    scale = max(1.0, np.max(np.abs(G), initial=0.0))
    if dev > 1e-10 * scale:
        raise ValueError(f"Gram matrix not Hermitian (deviation {dev:.2e})")
    return (G + G.conj().T) / 2


def reproducing_kernel(ctx: KernelContext, basis, gram: np.ndarray, p, q) -> complex:
    """Kernel of the finite span of {K(., w_j)}: Σ K(p,w_i) (G^-1)_{ij} K(w_j,q)."""
    kp = cauchy_matrix(ctx, [p], basis)[0]
    kq = cauchy_matrix(ctx, basis, [q])[:, 0]
    return complex(kp @ np.linalg.solve(gram, kq))


# ----------------------------------------------------------------------
# collection matrices


@dataclass
class CollectionMatrix:
    entries: np.ndarray
    lambda1: complex | None
    lambda2: complex | None
    branch: str = "principal sqrt of dy (resp. c_j) per fiber point, reused in both factors"


def _fiber_data(ctx: KernelContext, y, lam, cache: dict | None):
    key = ("inf",) if lam is None else complex(lam)
    if cache is not None and key in cache:
        return cache[key]
    if lam is None:
        pts, wts = [], []
        for pole in y.poles:
            if pole.order != 1:
                raise ValueError("collection matrices need simple poles")
            pts.append(pole.point)
            wts.append(np.sqrt(complex(-pole.laurent[0])))  # √c_j with c_j = -a_{-1}
        data = (pts, np.array(wts))
    else:
        fib = y.solve_fiber(lam)
        dy = np.asarray(fib.dy_values)
        if np.min(np.abs(dy)) < 1e-8:
            raise RamifiedFiber(f"|dy| < 1e-8 on the fiber of {lam}")
        data = (list(fib.points), 1.0 / np.sqrt(dy))
    if cache is not None:
        cache[key] = data
    return data


def collection_matrix(ctx: KernelContext, y, lambda1, lambda2, cache: dict | None = None) -> CollectionMatrix:
    """𝕂(λ1, λ2) built with the holomorphic kernel 𝒦(u, v) = -S(u, v).

    λ = None stands for ∞.  Finite-finite entries are
    (λ1 - λ2) 𝒦(u_i, v_j) / (√dy(u_i) √dy(v_j)); the ∞ rows/columns use
    -𝒦(u_i, p_j) √c_j / √dy(u_i) and √c_i 𝒦(p_i, v_j) / √dy(v_j).
    """
    n = y.degree
    same = (lambda1 is None and lambda2 is None) or (
        lambda1 is not None and lambda2 is not None and complex(lambda1) == complex(lambda2))
    if same:
        return CollectionMatrix(np.eye(n, dtype=complex), lambda1, lambda2)
    p1, w1 = _fiber_data(ctx, y, lambda1, cache)
    p2, w2 = _fiber_data(ctx, y, lambda2, cache)
    Kh = -szego_matrix(ctx, p1, p2)
    if lambda1 is not None and lambda2 is not None:
        M = (complex(lambda1) - complex(lambda2)) * w1[:, None] * Kh * w2[None, :]
    elif lambda2 is None:
        M = -Kh * w1[:, None] * w2[None, :]
    else:
        M = Kh * w1[:, None] * w2[None, :]
    return CollectionMatrix(M, lambda1, lambda2)


def generalized_collection_terms(ctx: KernelContext, y, v, w) -> tuple[complex, complex]:
    """Both sides of (y(v) - y(w)) S(v, w) = -Σ_p Σ ∂₂^γS(v,p)/γ! a_{-(γ+δ+1)} ∂₁^δS(p,w)/δ!.

    For v = w the left side is read as its limit -dy(v).
    """
    v, w = as_point(v), as_point(w)
    if ctx.curve.same_point(v, w) and v.coord == w.coord:
        lhs = -complex(y.deriv(v))
    else:
        lhs = (complex(y.eval(v)) - complex(y.eval(w))) * szego(ctx, v, w)
    rhs = 0j
    for pole in y.poles:
        s = pole.order
        for gam in range(s):
            left = szego(ctx, v, pole.point, 0, gam) / math.factorial(gam)
            for dl in range(s - gam):
                a = pole.coeff(-(gam + dl + 1))
                right = szego(ctx, pole.point, w, dl, 0) / math.factorial(dl)
                rhs -= left * a * right
    return lhs, rhs


def generalized_collection_check(ctx: KernelContext, y, v, w) -> float:
    lhs, rhs = generalized_collection_terms(ctx, y, v, w)
    return abs(lhs - rhs)
