"""Real meromorphic functions on the curve: poles with Laurent data, fibers,
dividing-type classification.

Charts: the flat chart t = u - p on genus 1, the standard chart t = z - p on
genus 0, and t = -1/z at the genus-0 point at infinity.  Laurent data are
stored as a_{-s}..a_0 in these charts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import series
from .errors import CoincidentPoles, FiberIncomplete, RamifiedFiber
from .surface import INFINITY, RealCurve, SurfacePoint, as_point, delta_slope, real_components
from .theta import lattice_coords, lattice_reduce, theta_batch, theta_deriv

NEWTON_ITERS = 50
NEWTON_TOL = 1e-12
DEDUP_TOL = 1e-6


@dataclass
class Pole:
    point: SurfacePoint
    order: int
    laurent: np.ndarray  # a_{-s} .. a_0
    chart: str

    def coeff(self, k: int) -> complex:
        """a_k for -s <= k <= 0 (zero below -s)."""
        if k < -self.order:
            return 0j
        return complex(self.laurent[k + self.order])

    @property
    def residue(self) -> complex:
        return self.coeff(-1)


@dataclass
class Fiber:
    alpha: complex
    points: list
    dy_values: list


def _chart_of(curve: RealCurve, p: SurfacePoint) -> str:
    if p.at_infinity:
        return "infinity"
    return "standard" if curve.genus == 0 else "flat"


class MeromorphicFn:
    """Base class; subclasses provide ``_eval``/``_deriv`` on finite complex
    arrays and ``_pole_points`` (list of (point, order))."""

    name = "y"

    def __init__(self, curve: RealCurve):
        self.curve = curve

    # --- evaluation ----------------------------------------------------
    def eval(self, p):
        if isinstance(p, SurfacePoint):
            if p.at_infinity:
                return self._eval_infinity()
            return complex(self._eval(np.array([p.coord]))[0])
        arr = np.asarray(p, dtype=complex)
        out = self._eval(np.atleast_1d(arr))
        return complex(out[0]) if arr.ndim == 0 else out

    def deriv(self, p):
        """dy in the chart of p (t = -1/z at infinity)."""
        if isinstance(p, SurfacePoint):
            if p.at_infinity:
                return self.expansion(p, 1, 1)[0]
            return complex(self._deriv(np.array([p.coord]))[0])
        arr = np.asarray(p, dtype=complex)
        out = self._deriv(np.atleast_1d(arr))
        return complex(out[0]) if arr.ndim == 0 else out

    def _eval_infinity(self) -> complex:
        for pt, _ in self._pole_points():
            if pt.at_infinity:
                return complex("inf")
        return complex(self.expansion(INFINITY, 0, 0)[0])

    def _eval_chart(self, p: SurfacePoint):
        """Callable t -> y(point with chart coordinate t)."""
        if p.at_infinity:
            return lambda t: self._eval(-1.0 / t)
        return lambda t: self._eval(p.coord + t)

    # --- poles and expansions -----------------------------------------
    def _pole_points(self) -> list[tuple[SurfacePoint, int]]:
        raise NotImplementedError

    @cached_property
    def poles(self) -> list[Pole]:
        out = []
        for pt, s in self._pole_points():
            lau = self.expansion(pt, -s, 0)
            out.append(Pole(pt, s, lau, _chart_of(self.curve, pt)))
        return out

    @property
    def degree(self) -> int:
        return sum(p.order for p in self.poles)

    def pole_order_at(self, p) -> int:
        p = as_point(p)
        for q, s in self._pole_points():
            if self.curve.same_point(p, q):
                return s
        return 0

    def _lift_shift(self, p: SurfacePoint) -> SurfacePoint:
        return p

    def expansion(self, p, lo: int, hi: int) -> np.ndarray:
        """Coefficients a_lo..a_hi of the expansion at p (numerical contour)."""
        p = as_point(p)
        r = self._contour_radius(p)
        return series.contour_coefficients(self._eval_chart(p), 0j, r, lo, hi, nodes=256)

    def _contour_radius(self, p: SurfacePoint) -> float:
        d = 0.5
        for q, _ in self._pole_points():
            if self.curve.same_point(p, q):
                continue
            d = min(d, _distance(self.curve, p, q))
        if self.curve.genus == 1:
            d = min(d, float(self.curve.pm.Y_inv[0, 0]))
        return 0.2 * d

    # --- algebra --------------------------------------------------------
    def __add__(self, other):
        return SumFn(self, _lift(self.curve, other))

    __radd__ = __add__

    def __mul__(self, other):
        return ProductFn(self, _lift(self.curve, other))

    __rmul__ = __mul__

    def __neg__(self):
        return ProductFn(self, ConstantFn(self.curve, -1.0))

    def __sub__(self, other):
        return self + (-_lift(self.curve, other))

    # --- fibers ---------------------------------------------------------
    def solve_fiber(self, alpha: complex, grid: int = 40) -> Fiber:
        if self.curve.genus == 0:
            pts = self._fiber_genus0(complex(alpha))
        else:
            pts = _newton_fiber(self, complex(alpha), grid)
        if len(pts) != self.degree:
            raise FiberIncomplete(f"found {len(pts)} of {self.degree} preimages of {alpha}")
        dys = [complex(self.deriv(p)) for p in pts]
        if dys and min(abs(d) for d in dys) <= 1e-8:
            raise RamifiedFiber(f"critical point in the fiber of {alpha}")
        return Fiber(complex(alpha), pts, dys)

    def _fiber_genus0(self, alpha: complex) -> list[SurfacePoint]:
        num, den = self.as_rational()
        poly = np.polysub(num, alpha * den)
        poly = np.trim_zeros(np.where(np.abs(poly) < 1e-14 * np.max(np.abs(poly)), 0, poly), "f")
        roots = np.roots(poly) if len(poly) > 1 else np.array([])
        out = []
        for r in roots:
            # one Newton polish step on the rational form
            for _ in range(3):
                f = self._eval(np.array([r]))[0] - alpha
                d = self._deriv(np.array([r]))[0]
                if d != 0 and np.isfinite(f):
                    r = r - f / d
            out.append(SurfacePoint(complex(r)))
        return out

    def as_rational(self):
        raise NotImplementedError("genus-0 rational form unavailable")

    def is_real(self, rng: np.random.Generator | None = None, samples: int = 20, tol: float = 1e-9) -> bool:
        rng = rng or np.random.default_rng(0)
        from .surface import involution
        for p in _sample_off_poles(self, rng, samples):
            v1 = self.eval(p)
            v2 = self.eval(involution(self.curve, p))
            if abs(v1 - np.conj(v2)) > tol * max(1.0, abs(v1)):
                return False
        return True


def _distance(curve: RealCurve, p: SurfacePoint, q: SurfacePoint) -> float:
    if p.at_infinity or q.at_infinity:
        return float("inf") if not (p.at_infinity and q.at_infinity) else 0.0
    if curve.genus == 0:
        return abs(p.coord - q.coord)
    zr, _, _ = lattice_reduce(curve.pm, [p.coord - q.coord])
    z = zr[0]
    G = curve.pm.Gamma[0, 0]
    return float(min(abs(z - m - n * G) for m in (0, 1) for n in (0, 1)))


def _sample_off_poles(y: MeromorphicFn, rng, n: int) -> list[SurfacePoint]:
    out = []
    while len(out) < n:
        if y.curve.genus == 0:
            p = SurfacePoint(complex(rng.normal(), rng.normal()))
        else:
            G = y.curve.pm.Gamma[0, 0]
            p = SurfacePoint(complex(rng.uniform(0, 1) + rng.uniform(0, 1) * G))
        if all(_distance(y.curve, p, q) > 0.05 for q, _ in y._pole_points()):
            out.append(p)
    return out


def _lift(curve, other):
    if isinstance(other, MeromorphicFn):
        return other
    return ConstantFn(curve, complex(other))


def _newton_fiber(y: MeromorphicFn, alpha: complex, grid: int) -> list[SurfacePoint]:
    pm = y.curve.pm
    G = pm.Gamma[0, 0]
    found: list[complex] = []
    for n_seed in sorted({10, grid}):
        s = (np.arange(n_seed) + 0.5) / n_seed
        X, Y = np.meshgrid(s, s)
        u = (X + G * Y).ravel().astype(complex)
        with np.errstate(all="ignore"):
            for _ in range(NEWTON_ITERS):
                f = y._eval(u) - alpha
                d = y._deriv(u)
                step = f / d
                step = np.where(np.isfinite(step), step, 0)
                # damp wild steps so seeds stay near the fundamental domain
                big = np.abs(step) > 0.25
                step = np.where(big, 0.25 * step / np.abs(np.where(big, step, 1)), step)
                u = u - step
                if np.all(np.abs(step) < 1e-15):
                    break
            res = np.abs(y._eval(u) - alpha)
        ok = np.isfinite(res) & (res < NEWTON_TOL * max(1.0, abs(alpha)) * 100)
        found = []
        for z in u[ok]:
            zr = lattice_reduce(pm, [z])[0][0]
            if not any(_distance(y.curve, SurfacePoint(zr), SurfacePoint(w)) < DEDUP_TOL for w in found):
                found.append(zr)
        if len(found) == y.degree:
            break
    return [SurfacePoint(z) for z in found]


# ----------------------------------------------------------------------
# concrete functions


class ConstantFn(MeromorphicFn):
    def __init__(self, curve: RealCurve, value: complex):
        super().__init__(curve)
        self.value = complex(value)

    def _eval(self, z):
        return np.full(np.shape(z), self.value, dtype=complex)

    def _deriv(self, z):
        return np.zeros(np.shape(z), dtype=complex)

    def _eval_infinity(self):
        return self.value

    def _pole_points(self):
        return []

    def expansion(self, p, lo, hi):
        out = np.zeros(hi - lo + 1, dtype=complex)
        if lo <= 0 <= hi:
            out[-lo] = self.value
        return out

    def as_rational(self):
        return np.array([self.value]), np.array([1.0 + 0j])


class RationalFn(MeromorphicFn):
    """Genus-0 rational function num/den (coefficients highest degree first)."""

    def __init__(self, curve: RealCurve, num, den=(1.0,)):
        super().__init__(curve)
        if curve.genus != 0:
            raise ValueError("rational functions live on genus 0")
        self.num = np.trim_zeros(np.asarray(num, dtype=complex), "f")
        self.den = np.trim_zeros(np.asarray(den, dtype=complex), "f")
        if len(self.den) == 0:
            raise ValueError("zero denominator")

    def _eval(self, z):
        return np.polyval(self.num, z) / np.polyval(self.den, z)

    def _deriv(self, z):
        n, d = self.num, self.den
        dn, dd = np.polyder(n), np.polyder(d)
        return (np.polyval(dn, z) * np.polyval(d, z) - np.polyval(n, z) * np.polyval(dd, z)) / np.polyval(d, z) ** 2

    def as_rational(self):
        return self.num, self.den

    def _pole_points(self):
        out = []
        roots = np.roots(self.den) if len(self.den) > 1 else np.array([])
        clusters: list[list[complex]] = []
        for r in roots:
            for cl in clusters:
                if abs(cl[0] - r) < 1e-5:
                    cl.append(r)
                    break
            else:
                clusters.append([r])
        for cl in clusters:
            z = complex(np.mean(cl))
            if abs(z.imag) < 1e-9:
                z = complex(z.real)
            out.append((SurfacePoint(z), len(cl)))
        dinf = (len(self.num) - 1) - (len(self.den) - 1)
        if dinf > 0:
            out.append((INFINITY, dinf))
        # real poles first, then conjugate pairs (p, τp) with Im p > 0 first
        real = [x for x in out if x[0].at_infinity or abs(x[0].coord.imag) < 1e-9]
        cplx = sorted([x for x in out if x not in real and x[0].coord.imag > 0], key=lambda x: x[0].coord.real)
        paired = []
        for pt, s in cplx:
            paired.append((pt, s))
            paired.append((SurfacePoint(pt.coord.conjugate()), s))
        return sorted(real, key=lambda x: (x[0].at_infinity, x[0].coord.real)) + paired

    def _contour_radius(self, p):
        d = 1.0
        for q, _ in self._pole_points():
            if not (p.at_infinity and q.at_infinity) and not (p == q):
                if p.at_infinity:
                    d = min(d, 1.0 / abs(q.coord)) if abs(q.coord) > 0 else d
                elif not q.at_infinity:
                    d = min(d, abs(p.coord - q.coord))
        return 0.25 * d


class _ThetaLog:
    """L(z) = θ[δ]'(z)/θ[δ](z) and its derivatives on genus 1."""

    def __init__(self, curve: RealCurve):
        self.curve = curve

    def derivs(self, z, k: int) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        th = np.stack([theta_batch(self.curve.pm, self.curve.delta, z[:, None], [j]) for j in range(k + 2)], axis=1)
        fact = np.array([math.factorial(j) for j in range(k + 2)], dtype=float)
        c = th / fact  # Taylor coefficients, one row per point
        # L = (log θ)': divide the series of θ' by that of θ, all rows at once
        dc = c[:, 1:] * np.arange(1, k + 2)
        q = np.empty((len(z), k + 1), dtype=complex)
        for j in range(k + 1):
            q[:, j] = (dc[:, j] - np.sum(q[:, :j] * c[:, j:0:-1], axis=1)) / c[:, 0]
        return q * fact[:k + 1]

    def c1(self) -> complex:
        """Coefficient of z in L(z) = 1/z + c1 z + ...: θ'''(0)/(3θ'(0))."""
        pm = self.curve.pm
        return theta_deriv(pm, self.curve.delta, [0.0], [3]) / (3 * delta_slope(self.curve))


def _real_anchor(curve: RealCurve, avoid: list[complex]) -> complex:
    for x in np.linspace(0.137, 0.937, 9):
        if all(_distance(curve, SurfacePoint(x), SurfacePoint(a)) > 0.05 for a in avoid):
            return complex(x)
    raise ValueError("no regular real anchor point")


class ZetaPairFn(MeromorphicFn):
    """y(u) = s·(L(u-a) - L(u-b)) + c0 + const: simple poles at a (residue s)
    and b (residue -s); c0 is the imaginary constant making y real on X_R."""

    def __init__(self, curve: RealCurve, a, b, scale: complex = 1.0, const: float = 0.0):
        super().__init__(curve)
        if curve.backend != "genus1":
            raise ValueError("zeta-pair functions need genus 1")
        self.a, self.b = as_point(a), as_point(b)
        if _distance(curve, self.a, self.b) < 1e-8:
            raise CoincidentPoles("a and b coincide modulo the lattice")
        self.scale = complex(scale)
        self.L = _ThetaLog(curve)
        x0 = _real_anchor(curve, [self.a.coord, self.b.coord])
        raw = self._raw(np.array([x0]), 0)[0]
        self.c0 = -1j * raw.imag + float(const)

    def _raw(self, z, k):
        la = self.L.derivs(z - self.a.coord, k)[:, k]
        lb = self.L.derivs(z - self.b.coord, k)[:, k]
        return self.scale * (la - lb)

    def _eval(self, z):
        return self._raw(z, 0) + self.c0

    def _deriv(self, z):
        return self._raw(z, 1)

    def _pole_points(self):
        return [(self.a, 1), (self.b, 1)]

    def expansion(self, p, lo, hi):
        p = as_point(p)
        for q, r in ((self.a, 1), (self.b, -1)):
            # L(t) - 1/t = c1 t + O(t^3), so the closed form stops at t^2
            if self.curve.same_point(p, q) and hi <= 2:
                if abs(p.coord - q.coord) > 1e-12:
                    break  # different lift: fall back to the contour
                other = self.b if r == 1 else self.a
                # s·r/t + s·r·(L(t) - 1/t) - s·r·L(t + q - other) + c0
                n = hi + 1
                reg = self._regular_series(p.coord, other.coord, n)
                out = np.zeros(hi - lo + 1, dtype=complex)
                for k in range(lo, hi + 1):
                    v = 0j
                    if k == -1:
                        v += self.scale * r
                    if k >= 0:
                        v += self.scale * r * self._Lreg(k) - self.scale * r * reg[k]
                        if k == 0:
                            v += self.c0
                    out[k - lo] = v
                return out
        return super().expansion(p, lo, hi)

    def _Lreg(self, k: int) -> complex:
        return self.L.c1() if k == 1 else 0j

    def _regular_series(self, p: complex, other: complex, n: int) -> np.ndarray:
        d = self.L.derivs(np.array([p - other]), max(n - 1, 0))[0]
        return series.derivs_to_coeffs(d)


class WeierstrassFn(MeromorphicFn):
    """y(u) = -s·L'(u-a) + const: a ℘-type double pole at a with a_{-2} = s."""

    def __init__(self, curve: RealCurve, a, scale: float = 1.0, const: float = 0.0):
        super().__init__(curve)
        if curve.backend != "genus1":
            raise ValueError("Weierstrass-type functions need genus 1")
        self.a = as_point(a)
        self.scale = complex(scale)
        self.L = _ThetaLog(curve)
        x0 = _real_anchor(curve, [self.a.coord])
        raw = self._raw(np.array([x0]), 0)[0]
        self.c0 = -1j * raw.imag + float(const)

    def _raw(self, z, k):
        return -self.scale * self.L.derivs(z - self.a.coord, k + 1)[:, k + 1]

    def _eval(self, z):
        return self._raw(z, 0) + self.c0

    def _deriv(self, z):
        return self._raw(z, 1)

    def _pole_points(self):
        return [(self.a, 2)]

    def expansion(self, p, lo, hi):
        p = as_point(p)
        if self.curve.same_point(p, self.a) and abs(p.coord - self.a.coord) < 1e-12 and hi <= 1:
            out = np.zeros(hi - lo + 1, dtype=complex)
            for k in range(lo, hi + 1):
                if k == -2:
                    out[k - lo] = self.scale
                elif k == 0:
                    out[k - lo] = -self.scale * self.L.c1() + self.c0
            return out
        return super().expansion(p, lo, hi)


class SumFn(MeromorphicFn):
    def __init__(self, f: MeromorphicFn, g: MeromorphicFn):
        super().__init__(f.curve)
        self.f, self.g = f, g

    def _eval(self, z):
        return self.f._eval(z) + self.g._eval(z)

    def _deriv(self, z):
        return self.f._deriv(z) + self.g._deriv(z)

    def _pole_points(self):
        return _merge_poles(self, self.f, self.g, lambda s1, s2: max(s1, s2))

    def expansion(self, p, lo, hi):
        return self.f.expansion(p, lo, hi) + self.g.expansion(p, lo, hi)

    def as_rational(self):
        n1, d1 = self.f.as_rational()
        n2, d2 = self.g.as_rational()
        return np.polyadd(np.polymul(n1, d2), np.polymul(n2, d1)), np.polymul(d1, d2)


class ProductFn(MeromorphicFn):
    def __init__(self, f: MeromorphicFn, g: MeromorphicFn):
        super().__init__(f.curve)
        self.f, self.g = f, g

    def _eval(self, z):
        return self.f._eval(z) * self.g._eval(z)

    def _deriv(self, z):
        return self.f._deriv(z) * self.g._eval(z) + self.f._eval(z) * self.g._deriv(z)

    def _eval_infinity(self):
        return self.f.eval(INFINITY) * self.g.eval(INFINITY)

    def _pole_points(self):
        return _merge_poles(self, self.f, self.g, lambda s1, s2: s1 + s2)

    def expansion(self, p, lo, hi):
        p = as_point(p)
        s1, s2 = self.f.pole_order_at(p), self.g.pole_order_at(p)
        a = self.f.expansion(p, -s1, hi + s2)
        b = self.g.expansion(p, -s2, hi + s1)
        prod = series.mul(a, b)  # starts at order -(s1+s2)
        start = -(s1 + s2)
        out = np.zeros(hi - lo + 1, dtype=complex)
        for k in range(lo, hi + 1):
            i = k - start
            if 0 <= i < len(prod):
                out[k - lo] = prod[i]
        return out

    def as_rational(self):
        n1, d1 = self.f.as_rational()
        n2, d2 = self.g.as_rational()
        return np.polymul(n1, n2), np.polymul(d1, d2)


class MoebiusFn(MeromorphicFn):
    """(α y + β) / (γ y + δ) with real α, β, γ, δ and αδ - βγ != 0."""

    def __init__(self, y: MeromorphicFn, coeffs):
        super().__init__(y.curve)
        self.y = y
        self.al, self.be, self.ga, self.de = (float(c) for c in coeffs)
        if abs(self.al * self.de - self.be * self.ga) < 1e-14:
            raise ValueError("degenerate Moebius map")

    def _eval(self, z):
        w = self.y._eval(z)
        return (self.al * w + self.be) / (self.ga * w + self.de)

    def _deriv(self, z):
        w = self.y._eval(z)
        return (self.al * self.de - self.be * self.ga) * self.y._deriv(z) / (self.ga * w + self.de) ** 2

    def _eval_infinity(self):
        w = self.y.eval(INFINITY)
        if np.isinf(w):
            return complex(self.al / self.ga) if self.ga else complex("inf")
        return (self.al * w + self.be) / (self.ga * w + self.de)

    @cached_property
    def _pp(self):
        if self.ga == 0:
            return list(self.y._pole_points())
        fib = self.y.solve_fiber(-self.de / self.ga)
        pts = list(fib.points)
        if self.curve.genus == 0:
            num, den = self.y.as_rational()
            if len(num) < len(den) and abs(self.de) < 1e-300:
                pts.append(INFINITY)
        return _order_points(self.curve, [(p, 1) for p in pts])

    def _pole_points(self):
        return self._pp

    def as_rational(self):
        n, d = self.y.as_rational()
        return np.polyadd(self.al * n, self.be * d), np.polyadd(self.ga * n, self.de * d)


def _order_points(curve, pts):
    real = [x for x in pts if x[0].at_infinity or (curve.genus == 0 and abs(x[0].coord.imag) < 1e-9)
            or (curve.genus == 1 and curve.side(x[0]) == 0)]
    rest = [x for x in pts if x not in real]
    from .surface import involution
    paired, used = [], set()
    for i, (p, s) in enumerate(rest):
        if i in used:
            continue
        used.add(i)
        tp = involution(curve, p)
        for j, (q, s2) in enumerate(rest):
            if j not in used and curve.same_point(q, tp):
                used.add(j)
                paired += [(p, s), (tp, s2)] if curve.side(p) >= 0 else [(q, s2), (involution(curve, q), s)]
                break
        else:
            paired.append((p, s))
    return real + paired


def _merge_poles(owner: MeromorphicFn, f: MeromorphicFn, g: MeromorphicFn, combine):
    pts: list[tuple[SurfacePoint, int]] = []
    for q, s in f._pole_points():
        s2 = g.pole_order_at(q)
        pts.append((q, combine(s, s2) if s2 else s))
    for q, s in g._pole_points():
        if not any(owner.curve.same_point(q, p) for p, _ in pts):
            pts.append((q, s))
    # drop cancelled leading terms (e.g. y + (-y))
    out = []
    for q, s in pts:
        while s > 0:
            lead = owner.expansion(q, -s, -s)[0]
            if abs(lead) > 1e-9:
                break
            s -= 1
        if s > 0:
            out.append((q, s))
    return _order_points(owner.curve, out)


def zeta_pair_function(curve: RealCurve, a, b, scale: complex = 1.0, const: float = 0.0) -> ZetaPairFn:
    return ZetaPairFn(curve, a, b, scale, const)


def solve_fiber(y: MeromorphicFn, alpha: complex, grid: int = 40) -> Fiber:
    return y.solve_fiber(alpha, grid)


# ----------------------------------------------------------------------
# dividing type


@dataclass
class DividingCertificate:
    dividing: bool
    violations: list = field(default_factory=list)
    residue_condition: bool | None = None
    pole_report: list = field(default_factory=list)

    def __bool__(self):
        return self.dividing


def chart_orientation(curve: RealCurve, p: SurfacePoint) -> float:
    """+1 if the pole chart is positively oriented along X_R at p, -1 otherwise."""
    if curve.genus == 0 or p.at_infinity:
        return 1.0
    comps = real_components(curve)
    y = p.coord.imag % curve.pm.Y_inv[0, 0]
    for c in comps:
        if abs(y - c.height) < 1e-9:
            return 1.0 if c.index == 0 else -1.0
    return 0.0


def is_dividing(y: MeromorphicFn, samples: int = 200, rng: np.random.Generator | None = None,
                margin: float = 1e-9) -> DividingCertificate:
    rng = rng or np.random.default_rng(0)
    c = y.curve
    if not c.dividing:
        raise ValueError("curve is not of dividing type")
    bad = []
    for p in c.sample_real(rng, samples):
        if any(_distance(c, p, q) < 1e-3 for q, _ in y._pole_points()):
            continue
        v = y.eval(p)
        if abs(v.imag) > margin * max(1.0, abs(v)):
            bad.append(("real_point", p.coord, v))
    for p in c.sample_plus(rng, samples, margin=0.02):
        if any(_distance(c, p, q) < 1e-3 for q, _ in y._pole_points()):
            continue
        v = y.eval(p)
        if not v.imag > margin:
            bad.append(("upper_point", p.coord, v))
    report, ok = [], True
    for pole in y.poles:
        real = pole.point.at_infinity or chart_orientation(c, pole.point) != 0
        if c.genus == 0 and not pole.point.at_infinity:
            real = abs(pole.point.coord.imag) < 1e-9
        res = chart_orientation(c, pole.point) * pole.residue if real else complex("nan")
        cond = real and pole.order == 1 and abs(res.imag) < 1e-8 and res.real < 0
        ok &= bool(cond)
        report.append({"point": pole.point, "order": pole.order, "positive_chart_residue": res, "ok": bool(cond)})
    dividing = not bad
    return DividingCertificate(dividing, bad, ok, report)
