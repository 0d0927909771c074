"""Riemann theta functions with characteristics and their derivatives.

The lattice sum is truncated around the dominant term: for a point λ the
summand ``exp(iπ vᵀΓv + 2πi vᵀ(λ+b))`` (v = n + a) has modulus
``exp(π cᵀ Im(Γ) c) · exp(-π (v-c)ᵀ Im(Γ) (v-c))`` with ``c = -Im(Γ)⁻¹ Im λ``,
so summing over ``|v - c| <= R`` leaves a Gaussian tail bounded by a
shell count times ``exp(-π λ_min R²)``.  R is the smallest integer for
which that bound (times the derivative polynomial and the peak modulus)
drops below ``tol``.

The hot loop lives in a compiled extension when it is available and falls
back to a numpy implementation otherwise; see ``BACKEND``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NonPositiveImGamma, OrderTooHigh, TruncationOverflow
from . import _theta_py

try:  # pragma: no cover - depends on the build
    if os.environ.get("RSVESSEL_PURE_PYTHON"):
        raise ImportError
    from . import _theta_ext

    _KERNELS = {"compiled": _theta_ext.theta_sum, "python": _theta_py.theta_sum}
    BACKEND = "compiled"
except ImportError:
    _KERNELS = {"python": _theta_py.theta_sum}
    BACKEND = "python"

DEFAULT_TOL = 1e-12
RADIUS_CAP = 200
MAX_ORDER = 6


def available_backends() -> list[str]:
    return sorted(_KERNELS)


def set_backend(name: str) -> None:
    """Select the lattice-sum kernel ("compiled" or "python")."""
    global BACKEND
    if name not in _KERNELS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    BACKEND = name


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """Symmetric g×g matrix with positive definite imaginary part.

    ``Y_inv`` is Im Γ; when ``H`` is given, Γ = H/2 + i·Y_inv is checked.
    """

    Gamma: np.ndarray
    H: np.ndarray | None = None
    g: int = field(init=False)
    Y_inv: np.ndarray = field(init=False)
    Y: np.ndarray = field(init=False)
    lam_min: float = field(init=False)

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.Gamma, dtype=complex))
        if G.shape[0] != G.shape[1]:
            raise ValueError("period matrix must be square")
        if np.max(np.abs(G - G.T)) > 1e-12:
            raise ValueError("period matrix must be symmetric")
        Yi = G.imag.copy()
        eig = np.linalg.eigvalsh(Yi)
        if eig[0] <= 0:
            raise NonPositiveImGamma(f"Im Gamma has eigenvalue {eig[0]:.3e}")
        H = self.H
        if H is not None:
            H = np.atleast_2d(np.asarray(H, dtype=int))
            if np.max(np.abs(G - (H / 2 + 1j * Yi))) > 1e-12:
                raise ValueError("Gamma != H/2 + i Y^-1")
        object.__setattr__(self, "Gamma", G)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "g", G.shape[0])
        object.__setattr__(self, "Y_inv", Yi)
        object.__setattr__(self, "Y", np.linalg.inv(Yi))
        object.__setattr__(self, "lam_min", float(eig[0]))

    @classmethod
    def genus1(cls, tau: complex) -> "PeriodMatrix":
        H = None
        r = 2 * complex(tau).real
        if abs(r - round(r)) < 1e-12:
            H = [[int(round(r))]]
        return cls(np.array([[tau]]), H)


@dataclass(frozen=True)
class ThetaChar:
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.a))
        b = tuple(float(x) for x in np.atleast_1d(self.b))
        if len(a) != len(b) or not all(map(math.isfinite, a + b)):
            raise ValueError("bad characteristic")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def zero(cls, g: int) -> "ThetaChar":
        return cls((0.0,) * g, (0.0,) * g)

    def is_odd_half(self) -> bool:
        a2 = [2 * x for x in self.a]
        b2 = [2 * x for x in self.b]
        if not all(abs(x - round(x)) < 1e-12 for x in a2 + b2):
            return False
        return int(round(sum(x * y for x, y in zip(a2, b2)))) % 2 == 1


@lru_cache(maxsize=64)
def _offsets(g: int, R: int) -> np.ndarray:
    r = R + math.sqrt(g) / 2
    k = int(math.ceil(r))
    axes = [np.arange(-k, k + 1)] * g
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g)
    keep = np.einsum("ij,ij->i", grid, grid) <= r * r
    return np.ascontiguousarray(grid[keep], dtype=np.int64)


def _tail_radius(g: int, lam_min: float, log_scale: float, cnorm: float, order: int,
                 tol: float) -> int:
    log_tol = math.log(tol)
    for R in range(1, RADIUS_CAP + 1):
        # bound the tail by summing shell contributions k >= R until they vanish
        total = 0.0
        k = R
        while True:
            term = (g * math.log(2 * k + 3) - math.pi * lam_min * k * k + log_scale
                    + order * math.log(2 * math.pi * (k + cnorm + 1)))
            total += math.exp(min(term, 700.0))
            if term < log_tol - 40 or k > R + 400:
                break
            k += 1
        if total < tol:
            return R
    raise TruncationOverflow(f"truncation radius exceeds cap {RADIUS_CAP}")


def _prepare(pm: PeriodMatrix, lams: np.ndarray, a: np.ndarray):
    c = -np.linalg.solve(pm.Y_inv, lams.imag.T).T
    log_scale = math.pi * float(np.max(np.einsum("ni,ij,nj->n", c, pm.Y_inv, c), initial=0.0))
    base = np.rint(c - a).astype(np.int64)
    cnorm = float(np.max(np.linalg.norm(c, axis=1), initial=0.0))
    return base, log_scale, cnorm


def theta_batch(pm: PeriodMatrix, chi: ThetaChar | None, lams, order=None,
                tol: float = DEFAULT_TOL, backend: str | None = None) -> np.ndarray:
    """Vectorized θ[a;b] (or a partial derivative) at each row of ``lams``."""
    if not (0 < tol <= 1e-3):
        raise ValueError("tol must lie in (0, 1e-3]")
    g = pm.g
    lams = np.asarray(lams, dtype=complex).reshape(-1, g)
    chi = chi or ThetaChar.zero(g)
    a = np.asarray(chi.a, dtype=float)
    b = np.asarray(chi.b, dtype=float)
    order = np.zeros(g, dtype=np.int64) if order is None else np.asarray(order, dtype=np.int64).reshape(g)
    if np.any(order < 0):
        raise ValueError("derivative orders must be nonnegative")
    if order.sum() > MAX_ORDER:
        raise OrderTooHigh(f"|order| = {order.sum()} exceeds {MAX_ORDER}")
    base, log_scale, cnorm = _prepare(pm, lams, a)
    R = _tail_radius(g, pm.lam_min, log_scale, cnorm + float(np.linalg.norm(a)), int(order.sum()), tol)
    kern = _KERNELS[backend or BACKEND]
    return kern(lams, pm.Gamma, a, b, order, _offsets(g, R), base)


def theta(pm: PeriodMatrix, lam, tol: float = DEFAULT_TOL) -> complex:
    return complex(theta_batch(pm, None, lam, None, tol)[0])


def theta_char(pm: PeriodMatrix, chi: ThetaChar, lam, tol: float = DEFAULT_TOL) -> complex:
    return complex(theta_batch(pm, chi, lam, None, tol)[0])


def theta_deriv(pm: PeriodMatrix, chi: ThetaChar | None, lam, order, tol: float = DEFAULT_TOL) -> complex:
    return complex(theta_batch(pm, chi, lam, order, tol)[0])


def lattice_coords(pm: PeriodMatrix, z) -> tuple[np.ndarray, np.ndarray]:
    """Real (x, y) with z = x + Γ y."""
    z = np.asarray(z, dtype=complex).reshape(pm.g)
    y = np.linalg.solve(pm.Y_inv, z.imag)
    x = z.real - pm.Gamma.real @ y
    return x, y


def lattice_reduce(pm: PeriodMatrix, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (z', m, n) with z' = z - m - Γn and Λ-coordinates of z' in [0, 1)."""
    z = np.asarray(z, dtype=complex).reshape(pm.g)
    x, y = lattice_coords(pm, z)
    n = np.floor(y + 1e-13).astype(int)
    m = np.floor(x + 1e-13).astype(int)
    zr = z - m - pm.Gamma @ n
    return zr, m, n


def lattice_equal(pm: PeriodMatrix, z1, z2, tol: float = 1e-9) -> bool:
    """True when z1 - z2 lies in Λ = Z^g + ΓZ^g."""
    x, y = lattice_coords(pm, np.asarray(z1, dtype=complex) - np.asarray(z2, dtype=complex))
    return bool(np.all(np.abs(x - np.rint(x)) < tol) and np.all(np.abs(y - np.rint(y)) < tol))
