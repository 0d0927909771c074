"""Finite model spaces spanned by Cauchy kernels and the model operators on them.

A model space is span{k_j = K_ζ̃(., w_j)} with Gram matrix
G[i][j] = K(w_i, w_j) = <k_j, k_i>, so <f, g> = gᴴ G f on coefficient
vectors and the Hilbert adjoint of a matrix A is G⁻¹ Aᴴ G.

The model operator acts pointwise by

    (M^y f)(v) = y(v) f(v) + Σ_p Σ_{γ+δ+1<=s} ∂₂^γS(v,p)/γ! · a_{-(γ+δ+1)} · f^{(δ)}(p)/δ!

(a_k the Laurent data of y at p, S the holomorphic kernel), which for
simple poles is y f - Σ c_j f(p_j) S(v, p_j) with residues -c_j.  The
kernels k_w are eigenvectors with eigenvalue conj(y(w)), so in the kernel
basis M^y is diagonal; both forms are kept and cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import PoleCollision, SingularBlock, SpectrumHit
from .kernels import KernelContext, cauchy_matrix, gram_matrix, szego, szego_matrix
from .meromorphic import MeromorphicFn, ProductFn, SumFn, _distance
from .surface import SurfacePoint, as_point, involution

GRAM_COND_MAX = 1e10


@dataclass
class OperatorMatrix:
    mat: np.ndarray
    label: str = ""

    def __matmul__(self, other):
        other = other.mat if isinstance(other, OperatorMatrix) else other
        return OperatorMatrix(self.mat @ other, self.label)


class ModelSpace:
    def __init__(self, ctx: KernelContext, basis_points):
        self.ctx = ctx
        self.basis = [as_point(p) for p in basis_points]
        for i, p in enumerate(self.basis):
            for q in self.basis[:i]:
                if ctx.curve.same_point(p, q):
                    raise ValueError("basis points must be distinct")
        self.gram = gram_matrix(ctx, self.basis)
        ev = np.linalg.eigvalsh(self.gram)
        self.min_eig = float(ev[0])
        self.cond = float(np.abs(ev).max() / max(np.abs(ev).min(), 1e-300))
        if self.cond > GRAM_COND_MAX:
            raise ValueError(f"Gram matrix condition number {self.cond:.2e} exceeds {GRAM_COND_MAX:.0e}")
        self._lu = sla.lu_factor(self.gram)
        self.positive = self.min_eig > 0
        if self.positive:
            self._chol = np.linalg.cholesky(self.gram)

    @property
    def dim(self) -> int:
        return len(self.basis)

    # --- Hilbert structure ---------------------------------------------
    def solve(self, b):
        return sla.lu_solve(self._lu, b)

    def inner(self, f, g) -> complex:
        return complex(np.conj(g) @ self.gram @ f)

    def adjoint(self, A) -> np.ndarray:
        A = A.mat if isinstance(A, OperatorMatrix) else A
        return self.solve(A.conj().T @ self.gram)

    def op_norm(self, A) -> float:
        """Operator norm with respect to <f, g> = gᴴ G f (G must be positive)."""
        A = A.mat if isinstance(A, OperatorMatrix) else A
        if not self.positive:
            return float(np.linalg.norm(A, 2))
        L = self._chol
        return float(np.linalg.norm(L.conj().T @ A @ np.linalg.inv(L.conj().T), 2))

    # --- point evaluation -----------------------------------------------
    def evaluate(self, f, points, d: int = 0) -> np.ndarray:
        """d-th chart derivative of the section Σ f_j K(., w_j) at ``points``."""
        return cauchy_matrix(self.ctx, [as_point(p) for p in points], self.basis, d, 0) @ np.asarray(f)

    def kernel_vector(self, j: int) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[j] = 1
        return e

    def from_values(self, values) -> np.ndarray:
        """Coefficients of the span element with the given values at the basis points."""
        return self.solve(np.asarray(values, dtype=complex))


def _check_off_poles(ms: ModelSpace, y: MeromorphicFn) -> None:
    c = ms.ctx.curve
    for w in ms.basis:
        for p, _ in y._pole_points():
            if _distance(c, w, p) < 1e-8 or _distance(c, involution(c, w), p) < 1e-8:
                raise PoleCollision(f"basis point {w} meets a pole of y (or its conjugate)")


def model_operator(ms: ModelSpace, y: MeromorphicFn) -> OperatorMatrix:
    """M^y in the kernel basis: diag(conj(y(w_i)))."""
    _check_off_poles(ms, y)
    vals = np.array([np.conj(y.eval(w)) for w in ms.basis])
    return OperatorMatrix(np.diag(vals), "M^y")


def model_operator_pointwise(ms: ModelSpace, y: MeromorphicFn, f, points) -> np.ndarray:
    """(M^y f)(u) at each u from the pointwise formula (any pole orders)."""
    pts = [as_point(p) for p in points]
    f = np.asarray(f, dtype=complex)
    out = np.array([y.eval(p) for p in pts]) * ms.evaluate(f, pts)
    for pole in y.poles:
        s = pole.order
        fd = [ms.evaluate(f, [pole.point], d)[0] / math.factorial(d) for d in range(s)]
        for gam in range(s):
            left = szego_matrix(ms.ctx, pts, [pole.point], 0, gam)[:, 0] / math.factorial(gam)
            acc = sum(pole.coeff(-(gam + dl + 1)) * fd[dl] for dl in range(s - gam))
            out = out + left * acc
    return out


def pointwise_matrix(ms: ModelSpace, apply) -> np.ndarray:
    """Matrix of a pointwise-defined operator: column j = coefficients of apply(e_j)
    recovered from its values at the basis points."""
    cols = [ms.from_values(apply(ms.kernel_vector(j), ms.basis)) for j in range(ms.dim)]
    return np.stack(cols, axis=1)


def model_operator_matrix_pointwise(ms: ModelSpace, y: MeromorphicFn) -> OperatorMatrix:
    _check_off_poles(ms, y)
    return OperatorMatrix(pointwise_matrix(ms, lambda f, pts: model_operator_pointwise(ms, y, f, pts)), "M^y (pointwise)")


def resolvent(ms: ModelSpace, y: MeromorphicFn, alpha: complex) -> OperatorMatrix:
    """R^y_α = (M^y - α)^{-1}: diag(1/(conj(y(w_i)) - α)) in the kernel basis."""
    _check_off_poles(ms, y)
    d = np.array([np.conj(y.eval(w)) for w in ms.basis]) - alpha
    if np.min(np.abs(d)) < 1e-10:
        raise SpectrumHit(f"alpha={alpha} is (numerically) an eigenvalue of M^y")
    return OperatorMatrix(np.diag(1 / d), f"R^y_{alpha}")


def resolvent_pointwise(ms: ModelSpace, y: MeromorphicFn, alpha: complex, f, points, fiber=None) -> np.ndarray:
    """(R^y_α f)(u) = f(u)/(y(u) - α) - Σ_j f(u_j)/dy(u_j) · θ[ζ](u_j - u)/(θ[ζ](0) E(u_j, u))."""
    pts = [as_point(p) for p in points]
    fib = fiber or y.solve_fiber(alpha)
    f = np.asarray(f, dtype=complex)
    out = ms.evaluate(f, pts) / (np.array([y.eval(p) for p in pts]) - alpha)
    for uj, dy in zip(fib.points, fib.dy_values):
        fu = ms.evaluate(f, [uj])[0]
        # θ(u_j - u)/(θ(0) E(u_j, u)) = -S(u, u_j)
        out = out + fu / dy * szego_matrix(ms.ctx, pts, [uj])[:, 0]
    return out


def algebra_check(ms: ModelSpace, y1: MeromorphicFn, y2: MeromorphicFn, disc=None) -> dict:
    """Residuals of the homomorphism laws using pointwise-built matrices."""
    M1 = model_operator_matrix_pointwise(ms, y1).mat
    M2 = model_operator_matrix_pointwise(ms, y2).mat
    Ms = model_operator_matrix_pointwise(ms, SumFn(y1, y2)).mat
    Mp = model_operator_matrix_pointwise(ms, ProductFn(y1, y2)).mat
    out = {
        "sum": ms.op_norm(Ms - (M1 + M2)),
        "product": ms.op_norm(Mp - M1 @ M2),
        "commutator": ms.op_norm(M1 @ M2 - M2 @ M1),
        "diagonal_vs_pointwise": max(ms.op_norm(M1 - model_operator(ms, y1).mat),
                                     ms.op_norm(M2 - model_operator(ms, y2).mat)),
    }
    if disc is not None:
        out["cayley_hamilton"] = disc.operator_residual(M1, M2, ms.op_norm)
    return out


def structure_identity_terms(ms: ModelSpace, y: MeromorphicFn, alpha: complex, beta: complex, f, g,
                             fib_alpha=None, fib_beta=None) -> tuple[complex, complex]:
    """Both sides of <R_α f, g> - <f, R_β g> - (α - β̄)<R_α f, R_β g> = RHS.

    RHS = -i(α-β̄) Σ f(ν_l) conj(g(ω_t)) / (dy(ν_l) conj(dy(ω_t))) ·
    θ[ζ̃](ν_l - τω_t)/(θ[ζ̃](0) E(ν_l, τω_t)), with ν (resp. ω) the fiber of α (resp. β);
    for real α = β the limiting form i Σ f(ν) conj(g(τν)) / dy(ν) is used.
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    Ra = resolvent(ms, y, alpha).mat
    Rb = resolvent(ms, y, beta).mat
    lhs = ms.inner(Ra @ f, g) - ms.inner(f, Rb @ g) - (alpha - np.conj(beta)) * ms.inner(Ra @ f, Rb @ g)
    c = ms.ctx.curve
    fa = fib_alpha or y.solve_fiber(alpha)
    limit = abs(alpha - np.conj(beta)) < 1e-14
    if limit:
        nus = fa.points
        fv = ms.evaluate(f, nus)
        gv = ms.evaluate(g, [involution(c, p) for p in nus])
        rhs = 1j * np.sum(fv * np.conj(gv) / np.asarray(fa.dy_values))
        return lhs, complex(rhs)
    fb = fib_beta or y.solve_fiber(beta)
    fv = ms.evaluate(f, fa.points)
    gv = ms.evaluate(g, fb.points)
    tw = [involution(c, p) for p in fb.points]
    # θ(ν - τω)/(θ(0) E(ν, τω)) = -S(τω, ν)
    T = -szego_matrix(ms.ctx, tw, fa.points).T
    w = (fv / np.asarray(fa.dy_values))[:, None] * np.conj(gv / np.asarray(fb.dy_values))[None, :]
    rhs = -1j * (alpha - np.conj(beta)) * np.sum(w * T)
    return lhs, complex(rhs)


def structure_identity_residual(ms, y, alpha, beta, f, g, **kw) -> float:
    lhs, rhs = structure_identity_terms(ms, y, alpha, beta, f, g, **kw)
    return abs(lhs - rhs)


# ----------------------------------------------------------------------
# Hankel blocks and the Taylor delta lemma


@dataclass
class HankelBlock:
    coeffs: tuple  # a_{-1}, ..., a_{-s}

    @property
    def size(self) -> int:
        return len(self.coeffs)

    def matrix(self) -> np.ndarray:
        s = self.size
        H = np.zeros((s, s), dtype=complex)
        for i in range(s):
            for j in range(s - i):
                H[i, j] = self.coeffs[i + j]
        return H


def hankel_inverse(h: HankelBlock) -> np.ndarray:
    """Inverse of the upper-skew-triangular Hankel block from the series of 1/q,
    q(x) = Σ_k a_{-(s-k)} x^k: entry (i, l) = [x^{i+l-(s-1)}] 1/q(x)."""
    from . import series
    s = h.size
    lead = complex(h.coeffs[-1])
    if abs(lead) < 1e-300:
        raise SingularBlock("leading Laurent coefficient vanishes")
    q = np.array([h.coeffs[s - 1 - k] for k in range(s)], dtype=complex)
    r = series.inv(q, s)
    out = np.zeros((s, s), dtype=complex)
    for i in range(s):
        for l in range(s):
            k = i + l - (s - 1)
            if k >= 0:
                out[i, l] = r[k]
    return out


def taylor_delta_check(d: int, a: int, b: int, c) -> complex:
    """Left side of the Kronecker-delta Taylor lemma via exact series arithmetic."""
    from . import series
    c = np.asarray(c, dtype=complex)
    if len(c) != d + 1 or abs(c[0]) == 0 or not (0 <= a < d and 0 <= b < d):
        raise ValueError("need c_0..c_d with c_0 != 0 and 0 <= a, b < d")
    n = 2 * d + 2
    finv = series.inv(c, n)
    # numerator N(x, y) = Σ_q c_q Σ_{t=1}^{d-q} x^{q+t-1} y^{d-t}
    N = np.zeros((n, n), dtype=complex)
    for q in range(d):
        for t in range(1, d - q + 1):
            N[q + t - 1, d - t] += c[q]
    total = 0j
    for j in range(d - a):
        # [x^j y^b] of N(x,y) / (f(x) f(y))
        coef = 0j
        for al in range(j + 1):
            for be in range(b + 1):
                coef += N[al, be] * finv[j - al] * finv[b - be]
        total += c[d - (j + a + 1)] * coef
    return total
