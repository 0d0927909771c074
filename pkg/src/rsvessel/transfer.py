"""Theta-Blaschke transfer functions, the de Branges kernel K_T and
boundary-quadrature checks.

    b_a(u) = E(u, a)/E(u, τa) · exp(-2π(a - τa) Y u)      (genus 1, Y = 1/t0)
    b_a(z) = (z - a)/(z - ā)                               (genus 0)

A product T = Π b_{a_i} maps sections of L_ζ to sections of L_ζ̃ with
ζ̃ = ζ + Σ(a_i - τa_i), and K_T(p, q) = K_ζ̃(p, q) - T(p) K_ζ(p, q) conj(T(q))
is the reproducing kernel of the span of K_ζ̃(·, a_i).  The shift sign is
the one forced by θ[ζ](z) ∝ θ(z + ζ): b_a picks up exp(-4πi Im a / t0) under
u -> u + 1, which must equal the ratio of the L_ζ̃ and L_ζ multipliers.

Boundary inner products use ⟨f, g⟩ = (1/2π) Σ_j ∫_{X_j} f conj(g) |dx| by the
trapezoidal rule; with this normalization K_ζ is reproducing.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleHit, QuadratureDivergence
from .kernels import KernelContext, cauchy_matrix, szego_batch
from .meromorphic import MeromorphicFn
from .model_ops import ModelSpace, resolvent
from .surface import RealCurve, SurfacePoint, ToriiPoint, as_point, involution, prime_form_batch, torii_point
from .theta import lattice_equal


def _coords(u) -> np.ndarray:
    if isinstance(u, SurfacePoint):
        return np.array([u.coord])
    if isinstance(u, (list, tuple)):
        return np.array([as_point(p).coord for p in u])
    return np.atleast_1d(np.asarray(u, dtype=complex))


def blaschke_factor(curve: RealCurve, a, u) -> np.ndarray | complex:
    a = as_point(a)
    scalar = isinstance(u, (SurfacePoint, complex, float, int))
    z = _coords(u)
    ta = involution(curve, a).coord
    if curve.genus == 0:
        den = z - ta
        if np.any(np.abs(den) < 1e-12):
            raise PoleHit("Blaschke factor evaluated at its pole")
        out = (z - a.coord) / den
    else:
        num = prime_form_batch(curve, a.coord - z)
        den = prime_form_batch(curve, ta - z)
        if np.any(np.abs(den) < 1e-12):
            raise PoleHit("Blaschke factor evaluated at its pole")
        Y = 1.0 / curve.pm.Y_inv[0, 0]
        out = num / den * np.exp(-2 * np.pi * (a.coord - ta) * Y * z)
    return complex(out[0]) if scalar else out


@dataclass
class BlaschkeProduct:
    curve: RealCurve
    zeros: list
    zeta_in: ToriiPoint | None = None
    scale: float = 1.0
    zeta_out: ToriiPoint | None = field(init=False, default=None)

    def __post_init__(self):
        c = self.curve
        self.zeros = [as_point(a) for a in self.zeros]
        for a in self.zeros:
            if c.side(a) != 1:
                raise ValueError(f"zero {a} is not in X_+")
        if c.genus == 0:
            self.zeta_in = self.zeta_out = torii_point(c)
            return
        if self.zeta_in is None:
            self.zeta_in = torii_point(c, (0,) * (c.component_count - 1), (0.0,))
        shift = self.multiplier_shift()
        # ζ = i t0 a_param on T_ν, so the shift moves a_param by Im(shift)/t0
        t0 = c.pm.Y_inv[0, 0]
        a_out = self.zeta_in.a[0] + shift.imag / t0
        self.zeta_out = torii_point(c, self.zeta_in.nu, (a_out,))
        if not lattice_equal(c.pm, self.zeta_out.zeta, self.zeta_in.zeta + shift, 1e-9):
            raise ValueError("multiplier shift left the real torus")

    def multiplier_shift(self) -> complex:
        return sum((a.coord - involution(self.curve, a).coord for a in self.zeros), 0j)

    def __call__(self, u):
        scalar = isinstance(u, (SurfacePoint, complex, float, int))
        z = _coords(u)
        out = np.full(z.shape, self.scale, dtype=complex)
        for a in self.zeros:
            out = out * blaschke_factor(self.curve, a, z)
        return complex(out[0]) if scalar else out

    def scaled(self, s: float) -> "BlaschkeProduct":
        return BlaschkeProduct(self.curve, list(self.zeros), self.zeta_in, self.scale * s)

    @property
    def ctx_in(self) -> KernelContext:
        return KernelContext(self.curve, self.zeta_in)

    @property
    def ctx_out(self) -> KernelContext:
        return KernelContext(self.curve, self.zeta_out)

    def shift_residual(self) -> float:
        if self.curve.genus == 0:
            return 0.0
        shift = self.multiplier_shift()
        d = self.zeta_out.zeta - self.zeta_in.zeta - shift
        return 0.0 if lattice_equal(self.curve.pm, d, np.zeros(1), 1e-9) else float(np.abs(d).max())

    def symmetry_residual(self, points) -> float:
        """max |T(p) conj(T(τp)) - 1| (only meaningful for scale 1)."""
        z = _coords(points)
        return float(np.abs(self(z) * np.conj(self(np.conj(z))) - 1).max())

    def boundary_modulus_residual(self, points) -> float:
        return float(np.abs(np.abs(self(_coords(points))) - 1).max())


def kernel_KT(T: BlaschkeProduct, p, q, ctx_in=None, ctx_out=None) -> np.ndarray:
    """K_T on point lists (matrix [K_T(p_i, q_j)])."""
    ctx_in = ctx_in or T.ctx_in
    ctx_out = ctx_out or T.ctx_out
    ps, qs = list(map(as_point, np.atleast_1d(p))), list(map(as_point, np.atleast_1d(q)))
    Kt = cauchy_matrix(ctx_out, ps, qs)
    K = cauchy_matrix(ctx_in, ps, qs)
    Tp, Tq = T(ps), T(qs)
    return Kt - Tp[:, None] * K * np.conj(Tq)[None, :]


def classical_KT(T: BlaschkeProduct, p, q) -> np.ndarray:
    """(1 - T(z) conj(T(w)))/(-i(z - w̄)) on genus 0."""
    z = _coords(p)[:, None]
    w = _coords(q)[None, :]
    return (1 - T(z.ravel())[:, None] * np.conj(T(w.ravel()))[None, :]) / (-1j * (z - np.conj(w)))


def _plus_grid(curve: RealCurve, n: int, margin: float) -> np.ndarray:
    if curve.genus == 0:
        # Cayley image of a polar grid in the unit disc
        r = np.linspace(0, 1 - margin, n)
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        w = (r[:, None] * np.exp(1j * th[None, :])).ravel()
        return 1j * (1 + w) / (1 - w)
    half = curve.pm.Y_inv[0, 0] / 2
    x = (np.arange(n) + 0.5) / n
    y = np.linspace(margin * half, (1 - margin) * half, n)
    return (x[:, None] + 1j * y[None, :]).ravel()


def contractivity_report(T: BlaschkeProduct, grid: int = 40, batches: int = 20, batch_size: int = 6,
                         rng=None, margin: float = 0.02, tol: float = 1e-8, csv_path: str | None = None) -> dict:
    """max|T| on an X_+ grid and the smallest normalized K_T Gram eigenvalue over random batches."""
    rng = rng or np.random.default_rng(0)
    c = T.curve
    pts = _plus_grid(c, grid, margin)
    absT = np.abs(T(pts))
    imax = int(np.argmax(absT))
    worst = (np.inf, None)
    rows = []
    for b in range(batches):
        batch = [p.coord for p in c.sample_plus(rng, batch_size, margin=margin)]
        G = kernel_KT(T, batch, batch)
        G = (G + G.conj().T) / 2
        ev = np.linalg.eigvalsh(G)
        rel = ev[0] / max(np.abs(ev).max(), 1e-300)
        rows.append((b, batch, float(rel)))
        if rel < worst[0]:
            worst = (float(rel), batch)
    contractive = bool(absT[imax] <= 1 + tol)
    psd = bool(worst[0] >= -tol)
    if csv_path:
        os.makedirs(os.path.dirname(csv_path) or ".", exist_ok=True)
        with open(csv_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["kind", "batch", "re", "im", "abs_T", "min_eig"])
            for p, v in zip(pts, absT):
                wr.writerow(["grid", "", f"{p.real:.12g}", f"{p.imag:.12g}", f"{v:.12g}", ""])
            for b, batch, rel in rows:
                for p in batch:
                    wr.writerow(["batch", b, f"{p.real:.12g}", f"{p.imag:.12g}", "", f"{rel:.12g}"])
    return {
        "max_abs_T": float(absT[imax]),
        "argmax": [float(pts[imax].real), float(pts[imax].imag)],
        "min_gram_eig": worst[0],
        "witness_batch": [[float(p.real), float(p.imag)] for p in worst[1]],
        "contractive": contractive,
        "psd": psd,
        "consistent": contractive == psd,
    }


def njcf_residuals(v, T: BlaschkeProduct, points) -> dict:
    """Compare three routes to K_X on sampled pairs: the Gram span, the JCF
    formula and K_T; plus the section relation ũ(p) S(p) = T(p) u(p)."""
    from .vessel import kernel_via_jcf, normalized_section

    ms = v.ms
    pts = [as_point(p) for p in points]
    KT = kernel_KT(T, pts, pts, ctx_out=ms.ctx)
    kp = cauchy_matrix(ms.ctx, pts, ms.basis)
    KG = kp @ np.linalg.solve(ms.gram, kp.conj().T)
    KJ = np.array([[kernel_via_jcf(v, p, q) for q in pts] for p in pts])
    scale = max(1.0, float(np.abs(KT).max()))
    out = {"gram_vs_KT": float(np.abs(KG - KT).max() / scale),
           "jcf_vs_KT": float(np.abs(KJ - KT).max() / scale)}
    if T.curve.genus == 0:
        out["classical_vs_KT"] = float(np.abs(classical_KT(T, pts, pts) - KT).max() / scale)
    # section relation ũ(p)S(p) = T(p)u(p)D, D = diag(1/T(τp_j)) fixing the E-frames
    if all(r.order == 1 for r in v.poles):
        ctx_in = T.ctx_in
        D = np.array([1 / T(involution(T.curve, r.point)) if not r.point.at_infinity else 1.0 + 0j
                      for r in v.poles])
        worst = 0.0
        Ps = v.Phi_star
        for p in pts:
            Sp = np.eye(v.n) - 1j * v.sigma1 @ v.Phi @ np.linalg.solve(v.A1 - v.y1.eval(p) * np.eye(v.m), Ps)
            ut = normalized_section(v, p)
            u = _section_with(v, ctx_in, p)
            worst = max(worst, float(np.abs(ut @ Sp - T(p) * u * D).max() / max(1.0, np.abs(u).max())))
        out["section_relation"] = worst
    return out


def _section_with(v, ctx: KernelContext, z) -> np.ndarray:
    import math

    from .kernels import szego
    out = []
    for r in v.poles:
        tp = involution(ctx.curve, r.point)
        for gam in range(r.order):
            out.append(szego(ctx, z, tp, 0, gam) / math.factorial(gam) * r.chart_scale ** (-gam - 0.5))
    return np.array(out)


# ----------------------------------------------------------------------
# boundary quadrature


@dataclass
class BoundaryRule:
    nodes: np.ndarray  # lifts on X_R
    weights: np.ndarray  # include the 1/2π


def boundary_rule(curve: RealCurve, n: int) -> BoundaryRule:
    if curve.genus == 0:
        th = -np.pi + (np.arange(n) + 0.5) * 2 * np.pi / n
        x = np.tan(th / 2)
        w = (1 + x ** 2) / 2 * (2 * np.pi / n) / (2 * np.pi)
        return BoundaryRule(x + 0j, w)
    nodes, weights = [], []
    x = np.arange(n) / n
    for comp in curve.components():
        nodes.append(comp.lift(x))
        weights.append(np.full(n, 1.0 / n / (2 * np.pi)))
    return BoundaryRule(np.concatenate(nodes).astype(complex), np.concatenate(weights))


def boundary_inner(rule: BoundaryRule, fvals, gvals) -> complex:
    return complex(np.sum(rule.weights * fvals * np.conj(gvals)))


def _kernel_column(ctx: KernelContext, nodes, w) -> np.ndarray:
    try:
        vals = szego_batch(ctx, nodes, np.conj(as_point(w).coord)) / 1j
    except PoleHit as exc:
        raise QuadratureDivergence("kernel pole on a quadrature node") from exc
    if not np.all(np.isfinite(vals)):
        raise QuadratureDivergence("kernel sample hit a pole on the boundary")
    return vals


def reproducing_residual(ctx: KernelContext, nodes_n: int, f_points, g_point) -> float:
    """|⟨K(·,v), K(·,w)⟩_quad - K(w, v)| for the cross-module oracle."""
    rule = boundary_rule(ctx.curve, nodes_n)
    w = as_point(g_point)
    out = 0.0
    for p in f_points:
        lhs = boundary_inner(rule, _kernel_column(ctx, rule.nodes, p), _kernel_column(ctx, rule.nodes, w))
        rhs = cauchy_matrix(ctx, [w], [as_point(p)])[0, 0]
        out = max(out, abs(lhs - rhs))
    return out


def beurling_orthogonality(T: BlaschkeProduct, f_coeffs, h_point, nodes: int = 2048) -> float:
    """|⟨f, T·K_ζ(·, v)⟩| for f in span{K_ζ̃(·, a_i)} given by coefficients on the zeros."""
    f_coeffs = np.asarray(f_coeffs, dtype=complex)
    if not np.any(f_coeffs):
        return 0.0
    rule = boundary_rule(T.curve, nodes)
    ctx_out, ctx_in = T.ctx_out, T.ctx_in
    fv = sum(cf * _kernel_column(ctx_out, rule.nodes, a) for cf, a in zip(f_coeffs, T.zeros))
    gv = T(rule.nodes) * _kernel_column(ctx_in, rule.nodes, h_point)
    return abs(boundary_inner(rule, fv, gv))


def beurling_convergence(T: BlaschkeProduct, f_coeffs, h_point, node_counts=(32, 64, 128, 256, 512, 2048, 8192)) -> dict:
    res = [beurling_orthogonality(T, f_coeffs, h_point, n) for n in node_counts]
    return {"nodes": list(node_counts), "residuals": res}


def mm_duality_residual(ms: ModelSpace, y: MeromorphicFn, alpha: complex, f, h_point, nodes: int = 2048) -> float:
    """|⟨R_α f, g⟩ - ⟨f, g/(y - ᾱ)⟩| on the boundary, g = K(·, h_point)."""
    rule = boundary_rule(ms.ctx.curve, nodes)
    basis = np.stack([_kernel_column(ms.ctx, rule.nodes, w) for w in ms.basis], axis=1)
    R = resolvent(ms, y, alpha).mat
    f = np.asarray(f, dtype=complex)
    fv = basis @ f
    Rfv = basis @ (R @ f)
    gv = _kernel_column(ms.ctx, rule.nodes, h_point)
    yv = y.eval(rule.nodes)
    lhs = boundary_inner(rule, Rfv, gv)
    rhs = boundary_inner(rule, fv, gv / (yv - np.conj(alpha)))
    return abs(lhs - rhs)
