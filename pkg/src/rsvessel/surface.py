"""Real Riemann surfaces of genus 0 and 1 (plus a data-only generic backend).

Points are lifts: a complex number in the flat chart (genus 1) or in the
standard affine chart (genus 0, where ``INFINITY`` is the extra point, read
in the chart ``t = -1/z``).  The involution acts on lifts by plain complex
conjugation; section values such as Cauchy kernels depend on the lift, and
keeping τ at the lift level is what makes the Hermitian symmetry exact.
``reduce_point`` gives the fundamental-domain representative when needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ThetaVanishes, UnsupportedBackend
from .theta import PeriodMatrix, ThetaChar, lattice_equal, lattice_reduce, theta, theta_batch, theta_deriv


@dataclass(frozen=True)
class SurfacePoint:
    coord: complex = 0j
    at_infinity: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coord", complex(self.coord))

    def __repr__(self):
        return "SurfacePoint(inf)" if self.at_infinity else f"SurfacePoint({self.coord!r})"


INFINITY = SurfacePoint(0j, True)
PointLike = "SurfacePoint | complex"


def as_point(p) -> SurfacePoint:
    if isinstance(p, SurfacePoint):
        return p
    if p is None or (isinstance(p, str) and p.lower() in ("inf", "infinity")):
        return INFINITY
    return SurfacePoint(complex(p))


def is_inf(p) -> bool:
    return isinstance(p, SurfacePoint) and p.at_infinity


def coord(p) -> complex:
    p = as_point(p)
    if p.at_infinity:
        raise ValueError("point at infinity has no affine coordinate")
    return p.coord


@dataclass(frozen=True)
class RealComponent:
    """A connected component of X_R, parametrized by x -> x + i*height."""

    index: int
    height: float
    period: float | None  # None for the genus-0 line (closed up by infinity)

    def lift(self, x):
        return np.asarray(x, dtype=float) + 1j * self.height


@dataclass(frozen=True)
class ToriiPoint:
    zeta: np.ndarray
    nu: tuple
    a: tuple

    @property
    def g(self) -> int:
        return len(self.zeta)


@dataclass(frozen=True, eq=False)
class RealCurve:
    backend: str
    pm: PeriodMatrix | None = None
    delta: ThetaChar | None = None
    basepoint: SurfacePoint = field(default_factory=lambda: SurfacePoint(0j))
    component_count: int = 1
    dividing: bool = True
    tau_modulus: complex | None = None

    @property
    def genus(self) -> int:
        return 0 if self.pm is None else self.pm.g

    @classmethod
    def genus0(cls) -> "RealCurve":
        return cls("genus0")

    @classmethod
    def genus1(cls, tau_modulus: complex) -> "RealCurve":
        tau = complex(tau_modulus)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        if abs(tau.real) < 1e-12:
            k, dividing = 2, True
        elif abs(tau.real - 0.5) < 1e-12:
            k, dividing = 1, False
        else:
            raise ValueError("real genus-1 curves need Re(tau) in {0, 1/2}")
        pm = PeriodMatrix.genus1(tau)
        return cls("genus1", pm, ThetaChar([0.5], [0.5]), SurfacePoint(0j), k, dividing, tau)

    @classmethod
    def generic(cls, pm: PeriodMatrix, component_count: int, dividing: bool,
                delta: ThetaChar) -> "RealCurve":
        if pm.H is None:
            raise ValueError("generic backend needs the integer twist H")
        return cls("generic", pm, delta, SurfacePoint(0j), component_count, dividing)

    def __post_init__(self):
        if self.delta is not None:
            if not self.delta.is_odd_half():
                raise ValueError("prime-form characteristic must be odd half-integer")
            if abs(theta_deriv(self.pm, self.delta, np.zeros(self.pm.g), _unit(self.pm.g, 0))) < 1e-8 \
                    and self.pm.g == 1:
                raise ValueError("singular odd characteristic")
        if self.backend != "generic":
            p0 = self.basepoint
            if not p0.at_infinity and abs(p0.coord.imag) > 1e-10:
                raise ValueError("basepoint must be real")

    # geometry -----------------------------------------------------------
    def reduce_point(self, p):
        p = as_point(p)
        if self.genus == 0 or p.at_infinity:
            return p
        zr, _, _ = lattice_reduce(self.pm, [p.coord])
        return SurfacePoint(zr[0])

    def same_point(self, p, q, tol: float = 1e-9) -> bool:
        p, q = as_point(p), as_point(q)
        if p.at_infinity or q.at_infinity:
            return p.at_infinity and q.at_infinity
        if self.genus == 0:
            return abs(p.coord - q.coord) < tol
        return lattice_equal(self.pm, [p.coord], [q.coord], tol)

    def side(self, p) -> int:
        """+1 on X_+, -1 on X_-, 0 on (or within 1e-12 of) X_R."""
        p = as_point(p)
        if p.at_infinity:
            return 0
        y = p.coord.imag
        if self.genus == 0:
            return 0 if abs(y) < 1e-12 else int(np.sign(y))
        t0 = self.pm.Y_inv[0, 0]
        if not self.dividing:
            raise UnsupportedBackend("X_+ is only defined for dividing curves")
        r = y % t0
        half = t0 / 2
        if min(abs(r), abs(r - half), abs(r - t0)) < 1e-12:
            return 0
        return 1 if r < half else -1

    def components(self) -> list[RealComponent]:
        return real_components(self)

    def sample_real(self, rng: np.random.Generator, n: int) -> list[SurfacePoint]:
        comps = self.components()
        out = []
        for _ in range(n):
            c = comps[rng.integers(len(comps))]
            x = rng.normal(scale=2.0) if c.period is None else rng.uniform(0, c.period)
            out.append(SurfacePoint(complex(c.lift(x))))
        return out

    def sample_plus(self, rng: np.random.Generator, n: int, margin: float = 0.08) -> list[SurfacePoint]:
        """Random points of X_+ kept ``margin`` (relative) away from X_R."""
        out = []
        for _ in range(n):
            if self.genus == 0:
                out.append(SurfacePoint(complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.5))))
            else:
                half = self.pm.Y_inv[0, 0] / 2
                y = rng.uniform(margin * half, (1 - margin) * half)
                out.append(SurfacePoint(complex(rng.uniform(0, 1), y)))
        return out


def _unit(g: int, j: int) -> np.ndarray:
    e = np.zeros(g, dtype=int)
    e[j] = 1
    return e


def involution(c: RealCurve, p, reduce: bool = False) -> SurfacePoint:
    """τ(p): conjugate of the lift (optionally reduced to the fundamental domain)."""
    p = as_point(p)
    if p.at_infinity:
        return p
    q = SurfacePoint(p.coord.conjugate())
    return c.reduce_point(q) if reduce else q


def real_components(c: RealCurve) -> list[RealComponent]:
    if c.backend == "genus0":
        return [RealComponent(0, 0.0, None)]
    if c.backend == "genus1":
        t0 = c.pm.Y_inv[0, 0]
        if c.component_count == 2:
            return [RealComponent(0, 0.0, 1.0), RealComponent(1, t0 / 2, 1.0)]
        return [RealComponent(0, 0.0, 1.0)]
    raise UnsupportedBackend("generic backend carries no component parametrization")


def prime_form(c: RealCurve, u, v) -> complex:
    """E(u, v) in the fixed chart (genus 0: v - u)."""
    u, v = as_point(u), as_point(v)
    if c.genus == 0:
        if u.at_infinity or v.at_infinity:
            raise ValueError("prime form at infinity is chart dependent; use the kernels module")
        return v.coord - u.coord
    if c.backend != "genus1":
        raise UnsupportedBackend("prime form needs a flat chart (genus 1)")
    return complex(prime_form_batch(c, np.array([v.coord - u.coord]))[0])


def prime_form_batch(c: RealCurve, z: np.ndarray, order: int = 0) -> np.ndarray:
    """d^order/dz^order of E as a function of z = v - u (genus 1)."""
    pm = c.pm
    scale = delta_slope(c)
    return theta_batch(pm, c.delta, np.asarray(z).reshape(-1, 1), [order]) / scale


_SLOPE_CACHE: dict[int, complex] = {}


def delta_slope(c: RealCurve) -> complex:
    key = id(c)
    if key not in _SLOPE_CACHE:
        _SLOPE_CACHE[key] = theta_deriv(c.pm, c.delta, np.zeros(c.pm.g), _unit(c.pm.g, 0))
    return _SLOPE_CACHE[key]


def abel_jacobi(c: RealCurve, p) -> np.ndarray:
    if c.backend == "genus0":
        return np.zeros(0, dtype=complex)
    if c.backend != "genus1":
        raise UnsupportedBackend("Abel-Jacobi map needs a flat chart")
    return np.array([coord(p) - c.basepoint.coord])


def torii_point(c: RealCurve, nu: Sequence[int] = (), a: Sequence[float] = ()) -> ToriiPoint:
    """ζ = diag(H)/4 + Σ ν_j/2 e_{g-k+1+j} + i Im(Γ) a."""
    nu = tuple(int(x) for x in nu)
    a = tuple(float(x) for x in a)
    if c.genus == 0:
        return ToriiPoint(np.zeros(0, dtype=complex), nu, a)
    g, k = c.genus, c.component_count
    if len(nu) != k - 1 or len(a) != g:
        raise ValueError(f"need {k - 1} nu bits and {g} torus parameters")
    H = c.pm.H if c.pm.H is not None else np.zeros((g, g), dtype=int)
    zeta = np.diag(H) / 4 + 0j
    for j, bit in enumerate(nu, start=1):
        zeta[g - k + j] += bit / 2
    zeta = zeta + 1j * (c.pm.Y_inv @ np.asarray(a))
    if abs(theta(c.pm, zeta)) <= 1e-8:
        raise ThetaVanishes(f"theta vanishes at zeta={zeta}")
    return ToriiPoint(zeta, nu, a)


def zeta_characteristic(c: RealCurve, zeta) -> ThetaChar:
    """Characteristic (a, b) with ζ = b + Γa."""
    zeta = np.asarray(zeta, dtype=complex).reshape(c.genus)
    a = np.linalg.solve(c.pm.Y_inv, zeta.imag)
    b = zeta.real - c.pm.Gamma.real @ a
    return ThetaChar(a, b)


def in_real_torus(c: RealCurve, zeta, nu: Sequence[int]) -> bool:
    """True when ζ ≡ diag(H)/4 + ν-shift + i Im(Γ) a (mod Λ) for some real a."""
    if c.genus == 0:
        return True
    g, k = c.genus, c.component_count
    zeta = np.asarray(zeta, dtype=complex).reshape(g)
    H = c.pm.H if c.pm.H is not None else np.zeros((g, g), dtype=int)
    target = np.diag(H) / 4
    for j, bit in enumerate(nu, start=1):
        target[g - k + j] += bit / 2
    # the imaginary part is free; the real part must match up to Z^g + H n / 2
    for n in np.ndindex(*([2] * g)):
        d = zeta.real - target - H @ np.asarray(n) / 2
        if np.all(np.abs(d - np.rint(d)) < 1e-10):
            return True
    return False
