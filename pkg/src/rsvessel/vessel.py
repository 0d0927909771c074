"""Commutative two-operator vessels built from model spaces.

External space E has one coordinate per (pole p, derivative order δ) of the
pair (y1, y2), δ < s_p with s_p the larger pole order at p.  Rows are
ordered real poles first, then conjugate pairs (p, τp).

    Φ[(p,δ), j] = ∂_u^δ K(u, w_j)/δ! at u = p
    σ_k[(p',γ), (p,δ)] = χ(p - τp') · a^k_{p,-(γ+δ+1)}   when p ≡ τp'

where χ is the lattice multiplier of the kernel's second slot (it supplies
the sign for real poles on the second real component).  The colligation
(1/i)(A - A*) = Φ*σΦ then holds exactly.  γ̃ is obtained from the curve-level
output relation (y2(x)σ1 - y1(x)σ2 - γ̃) V(x) = 0, V(x) = [∂₁^δS(p, x)/δ!],
by a least-squares fit over sampled x (the fit residual is reported); for
simple poles a closed form is also available.  γ follows from the linkage
condition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDet, OffCurve, OrderingMismatch, SingularCurvePoint, SpectrumHit
from .kernels import KernelContext, cauchy_matrix, szego, szego_matrix
from .meromorphic import MeromorphicFn, _distance
from .model_ops import ModelSpace, model_operator
from .surface import SurfacePoint, as_point, involution


@dataclass
class PoleRow:
    point: SurfacePoint
    order: int  # s_p
    real: bool
    partner: int  # index (into the pole list) of τp
    chart_scale: float = 1.0


@dataclass
class Vessel:
    A1: np.ndarray
    A2: np.ndarray
    Phi: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    gamma: np.ndarray
    gamma_tilde: np.ndarray
    gram: np.ndarray
    poles: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    ms: ModelSpace | None = None
    y1: MeromorphicFn | None = None
    y2: MeromorphicFn | None = None

    @property
    def n(self) -> int:
        return self.sigma1.shape[0]

    @property
    def m(self) -> int:
        return self.A1.shape[0]

    def adjoint(self, A) -> np.ndarray:
        return np.linalg.solve(self.gram, A.conj().T @ self.gram)

    @property
    def Phi_star(self) -> np.ndarray:
        return np.linalg.solve(self.gram, self.Phi.conj().T)

    def h_norm(self, X) -> float:
        """2-norm of a map out of H (columns weighted by the Gram inner product)."""
        if X.size == 0:
            return 0.0
        ev = np.linalg.eigvalsh(self.gram)
        if ev[0] > 0:
            L = np.linalg.cholesky(self.gram)
            return float(np.linalg.norm(X @ np.linalg.inv(L.conj().T), 2))
        return float(np.linalg.norm(X, 2))

    def op_norm(self, A) -> float:
        if A.size == 0:
            return 0.0
        ev = np.linalg.eigvalsh(self.gram)
        if ev[0] > 0:
            L = np.linalg.cholesky(self.gram)
            return float(np.linalg.norm(L.conj().T @ A @ np.linalg.inv(L.conj().T), 2))
        return float(np.linalg.norm(A, 2))

    def to_json(self) -> str:
        def enc(M):
            M = np.asarray(M)
            return {"re": M.real.tolist(), "im": M.imag.tolist()}
        d = {k: enc(getattr(self, k)) for k in ("A1", "A2", "Phi", "sigma1", "sigma2", "gamma", "gamma_tilde", "gram")}
        d["poles"] = [{"point": None if r.point.at_infinity else [r.point.coord.real, r.point.coord.imag],
                       "order": r.order, "real": r.real, "partner": r.partner, "chart_scale": r.chart_scale}
                      for r in self.poles]
        d["meta"] = self.meta
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Vessel":
        d = json.loads(text)
        dec = {k: np.array(v["re"]) + 1j * np.array(v["im"]) for k, v in d.items() if isinstance(v, dict) and "re" in v}
        poles = [PoleRow(SurfacePoint(0j, True) if r["point"] is None else SurfacePoint(complex(*r["point"])),
                         r["order"], r["real"], r["partner"], r["chart_scale"]) for r in d["poles"]]
        return cls(dec["A1"], dec["A2"], dec["Phi"], dec["sigma1"], dec["sigma2"], dec["gamma"],
                   dec["gamma_tilde"], dec["gram"], poles, d.get("meta", {}))


# ----------------------------------------------------------------------
# assembly


def _is_real_point(curve, p: SurfacePoint) -> bool:
    if p.at_infinity:
        return True
    if curve.genus == 0:
        return abs(p.coord.imag) < 1e-9
    return curve.side(p) == 0


def union_poles(y1: MeromorphicFn, y2: MeromorphicFn, chart_scale=None) -> list[PoleRow]:
    curve = y1.curve
    pts: list[tuple[SurfacePoint, int]] = []
    for y in (y1, y2):
        for pole in y.poles:
            for i, (q, s) in enumerate(pts):
                if curve.same_point(q, pole.point):
                    if not (q.at_infinity or abs(q.coord - pole.point.coord) < 1e-12):
                        raise OrderingMismatch("the two functions use different lifts of a common pole")
                    pts[i] = (q, max(s, pole.order))
                    break
            else:
                pts.append((pole.point, pole.order))
    real = [(p, s) for p, s in pts if _is_real_point(curve, p)]
    rest = [(p, s) for p, s in pts if not _is_real_point(curve, p)]
    rows = [PoleRow(p, s, True, i) for i, (p, s) in enumerate(real)]
    used = set()
    for i, (p, s) in enumerate(rest):
        if i in used:
            continue
        tp = involution(curve, p)
        j = next((j for j, (q, _) in enumerate(rest) if j not in used and j != i and curve.same_point(q, tp)), None)
        if j is None:
            raise OrderingMismatch(f"pole {p} has no conjugate partner (function not real)")
        if abs(rest[j][0].coord - tp.coord) > 1e-12:
            raise OrderingMismatch("conjugate poles must be given as conjugate lifts")
        used |= {i, j}
        k = len(rows)
        rows.append(PoleRow(p, max(s, rest[j][1]), False, k + 1))
        rows.append(PoleRow(rest[j][0], max(s, rest[j][1]), False, k))
    if chart_scale is not None:
        scales = chart_scale if np.iterable(chart_scale) else [chart_scale] * len(rows)
        for r, kappa in zip(rows, scales):
            r.chart_scale = float(kappa)
    return rows


def _row_index(rows: list[PoleRow]) -> list[tuple[int, int]]:
    return [(i, d) for i, r in enumerate(rows) for d in range(r.order)]


def phi_matrix(ms: ModelSpace, rows: list[PoleRow]) -> np.ndarray:
    idx = _row_index(rows)
    Phi = np.empty((len(idx), ms.dim), dtype=complex)
    for k, (i, d) in enumerate(idx):
        r = rows[i]
        Phi[k] = cauchy_matrix(ms.ctx, [r.point], ms.basis, d, 0)[0] / math.factorial(d) * r.chart_scale ** (-d - 0.5)
    return Phi


def _lift_multiplier(ctx: KernelContext, p: SurfacePoint, p_row: SurfacePoint) -> complex:
    """χ(p - τp_row): S(w, p) = χ · S(w, τp_row)."""
    if p.at_infinity:
        return 1.0 + 0j
    ell = p.coord - involution(ctx.curve, p_row).coord
    if abs(ell) < 1e-14:
        return 1.0 + 0j
    return ctx.multiplier(ell)


def sigma_matrix(ctx: KernelContext, rows: list[PoleRow], y: MeromorphicFn) -> np.ndarray:
    idx = _row_index(rows)
    n = len(idx)
    S = np.zeros((n, n), dtype=complex)
    pos = {key: k for k, key in enumerate(idx)}
    for i, r in enumerate(rows):
        j = r.partner  # column pole p = τ(row pole)
        col = rows[j]
        s_y = y.pole_order_at(col.point)
        if s_y == 0:
            continue
        lau = y.expansion(col.point, -s_y, -1)  # a_{-s}..a_{-1}
        chi = _lift_multiplier(ctx, col.point, r.point)
        for gam in range(r.order):
            for dl in range(col.order):
                k = gam + dl + 1
                if k <= s_y:
                    S[pos[(i, gam)], pos[(j, dl)]] = chi * lau[s_y - k] * col.chart_scale ** k
    return S


def output_vectors(ctx: KernelContext, rows: list[PoleRow], xs) -> np.ndarray:
    """Columns V(x) = [∂₁^δ S(p, x)/δ!] (chart-scaled) for each sample x."""
    cols = []
    for i, r in enumerate(rows):
        for d in range(r.order):
            cols.append(szego_matrix(ctx, [r.point], xs, d, 0)[0] / math.factorial(d) * r.chart_scale ** (-d - 0.5))
    return np.array(cols)


def fit_gamma_tilde(ctx: KernelContext, rows, y1, y2, sigma1, sigma2, rng=None, samples=None):
    """Least-squares γ̃ from (y2(x)σ1 - y1(x)σ2 - γ̃)V(x) = 0 on sampled x."""
    rng = rng or np.random.default_rng(12345)
    n = sigma1.shape[0]
    count = samples or 4 * n + 12
    curve = ctx.curve
    poles = [r.point for r in rows]
    xs = []
    while len(xs) < count:
        if curve.genus == 0:
            x = SurfacePoint(complex(rng.normal(scale=1.5), rng.normal(scale=1.5)))
        else:
            G = curve.pm.Gamma[0, 0]
            x = SurfacePoint(complex(rng.uniform(0, 1) + rng.uniform(0, 1) * G))
        if all(_distance(curve, x, p) > 0.05 for p in poles):
            xs.append(x)
    V = output_vectors(ctx, rows, xs)
    Y1 = np.array([y1.eval(x) for x in xs])
    Y2 = np.array([y2.eval(x) for x in xs])
    R = sigma1 @ V * Y2[None, :] - sigma2 @ V * Y1[None, :]
    gt = np.linalg.lstsq(V.T, R.T, rcond=None)[0].T
    resid = np.linalg.norm(gt @ V - R) / max(1.0, np.linalg.norm(R))
    return gt, float(resid)


def gamma_tilde_closed_form(ctx: KernelContext, rows, y1, y2) -> np.ndarray:
    """Simple-pole formula: with y_k = -c_k/t + h_k + O(t) at each pole
    (c_k = 0, h_k = y_k(p) where y_k is regular),
    γ̃_jj' = c2h1 - c1h2 on (p_j, p_j') = (p, τp) diagonal blocks and
    γ̃_jl = (conj(c2_j) c1_l - conj(c1_j) c2_l) θ(p_l - τp_j)/(θ(0) E(p_l, τp_j)) otherwise."""
    if any(r.order != 1 for r in rows):
        raise ValueError("closed form needs simple poles")
    n = len(rows)
    ch = []
    for r in rows:
        vals = []
        for y in (y1, y2):
            s = y.pole_order_at(r.point)
            if s:
                e = y.expansion(r.point, -1, 0)
                vals.append((-e[0] * r.chart_scale, e[1]))
            else:
                vals.append((0j, complex(y.eval(r.point))))
        ch.append(vals)
    G = np.zeros((n, n), dtype=complex)
    for j, rj in enumerate(rows):
        tpj = involution(ctx.curve, rj.point)
        for l, rl in enumerate(rows):
            (c1j, h1j), (c2j, h2j) = ch[j]
            (c1l, h1l), (c2l, h2l) = ch[l]
            if l == rj.partner:
                chi = _lift_multiplier(ctx, rl.point, rj.point)
                G[j, l] = chi * (c2l * h1l - c1l * h2l)
            else:
                K = -szego(ctx, tpj, rl.point)  # θ(p_l - τp_j)/(θ(0)E(p_l, τp_j))
                G[j, l] = (np.conj(c2j) * c1l - np.conj(c1j) * c2l) * K / (rj.chart_scale * rl.chart_scale) ** 0.5
    return G


def build_model_vessel(ms: ModelSpace, y1: MeromorphicFn, y2: MeromorphicFn, mu_signs=None,
                       chart_scale=None, rng=None) -> Vessel:
    ctx = ms.ctx
    rows = union_poles(y1, y2, chart_scale)
    A1 = model_operator(ms, y1).mat
    A2 = model_operator(ms, y2).mat
    Phi = phi_matrix(ms, rows)
    s1 = sigma_matrix(ctx, rows, y1)
    s2 = sigma_matrix(ctx, rows, y2)
    signs = [(_lift_multiplier(ctx, r.point, r.point).real) for r in rows if r.real]
    if mu_signs is not None and [int(np.sign(x)) for x in signs] != [int(x) for x in mu_signs]:
        raise OrderingMismatch(f"declared signs {list(mu_signs)} differ from multiplier signs {signs}")
    gt, fit = fit_gamma_tilde(ctx, rows, y1, y2, s1, s2, rng)
    gt = (gt + gt.conj().T) / 2
    PhiPhiS = Phi @ np.linalg.solve(ms.gram, Phi.conj().T)
    gamma = gt - 1j * (s1 @ PhiPhiS @ s2 - s2 @ PhiPhiS @ s1)
    meta = {"gamma_tilde_fit_residual": fit, "real_pole_signs": signs, "n": len(Phi), "m": ms.dim,
            "gram_cond": ms.cond}
    return Vessel(A1, A2, Phi, s1, s2, gamma, gt, ms.gram, rows, meta, ms, y1, y2)


# ----------------------------------------------------------------------
# verification


def verify_vessel(v: Vessel) -> dict:
    Ps = v.Phi_star
    A1s, A2s = v.adjoint(v.A1), v.adjoint(v.A2)
    s1, s2 = v.sigma1, v.sigma2
    sc = max(1.0, v.h_norm(v.Phi)) if v.Phi.size else 1.0
    out = {
        "input": v.h_norm(s1 @ v.Phi @ A2s - s2 @ v.Phi @ A1s - v.gamma @ v.Phi),
        "output": v.h_norm(s1 @ v.Phi @ v.A2 - s2 @ v.Phi @ v.A1 - v.gamma_tilde @ v.Phi),
        "linkage": float(np.linalg.norm(1j * (s1 @ v.Phi @ Ps @ s2 - s2 @ v.Phi @ Ps @ s1) - (v.gamma_tilde - v.gamma), 2)),
        "colligation1": v.op_norm((v.A1 - A1s) / 1j - Ps @ s1 @ v.Phi),
        "colligation2": v.op_norm((v.A2 - A2s) / 1j - Ps @ s2 @ v.Phi),
        "commutativity": v.op_norm(v.A1 @ v.A2 - v.A2 @ v.A1),
        "selfadjoint": float(max(np.abs(M - M.conj().T).max(initial=0.0)
                                 for M in (s1, s2, v.gamma, v.gamma_tilde))),
    }
    out["scale"] = sc
    return out


@dataclass
class DiscriminantPoly:
    coeffs: np.ndarray  # coeffs[i, j] multiplies λ1^i λ2^j

    @property
    def degree(self) -> int:
        nz = np.argwhere(np.abs(self.coeffs) > 1e-13 * max(1.0, np.abs(self.coeffs).max()))
        return int(nz.sum(axis=1).max()) if len(nz) else 0

    def __call__(self, l1, l2) -> complex:
        n = self.coeffs.shape[0]
        p1 = np.array([l1 ** i for i in range(n)])
        p2 = np.array([l2 ** j for j in range(n)])
        return complex(p1 @ self.coeffs @ p2)

    def scale(self, l1, l2) -> float:
        n = self.coeffs.shape[0]
        p1 = np.array([abs(l1) ** i for i in range(n)])
        p2 = np.array([abs(l2) ** j for j in range(n)])
        return float(p1 @ np.abs(self.coeffs) @ p2)

    def operator_residual(self, M1, M2, norm=None) -> float:
        """‖p(M1, M2)‖ relative to Σ|c_ij| ‖M1‖^i ‖M2‖^j."""
        norm = norm or (lambda A: float(np.linalg.norm(A, 2)))
        n = self.coeffs.shape[0]
        m = M1.shape[0]
        P1 = [np.eye(m, dtype=complex)]
        P2 = [np.eye(m, dtype=complex)]
        for _ in range(n - 1):
            P1.append(P1[-1] @ M1)
            P2.append(P2[-1] @ M2)
        total = np.zeros((m, m), dtype=complex)
        bound = 0.0
        n1, n2 = norm(M1), norm(M2)
        for i in range(n):
            for j in range(n):
                c = self.coeffs[i, j]
                if c != 0:
                    total += c * P1[i] @ P2[j]
                    bound += abs(c) * n1 ** i * n2 ** j
        return norm(total) / max(bound, 1e-300)


def _interp_det(f, n: int, scale: float) -> np.ndarray:
    k = np.arange(n + 1)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * (n + 1)))
    V = np.vander(nodes, n + 1, increasing=True)
    P = np.array([[f(scale * a, scale * b) for b in nodes] for a in nodes])
    Vi = np.linalg.inv(V)
    D = Vi @ P @ Vi.T
    powers = scale ** (k[:, None] + k[None, :])
    return D / powers


def discriminant(v: Vessel, use_tilde: bool = False) -> DiscriminantPoly:
    g = v.gamma_tilde if use_tilde else v.gamma
    s1, s2 = v.sigma1, v.sigma2
    n = v.n
    scale = max(1.0, np.linalg.norm(g, 2) / max(np.linalg.norm(s1, 2), np.linalg.norm(s2, 2), 1e-300))
    C = _interp_det(lambda a, b: np.linalg.det(a * s2 - b * s1 + g), n, scale)
    if np.abs(C).max() == 0:
        raise DegenerateDet("discriminant polynomial vanishes identically")
    return DiscriminantPoly(C)


def discriminant_equality(v: Vessel) -> dict:
    p = discriminant(v)
    pt = discriminant(v, use_tilde=True)
    diff = np.abs(p.coeffs - pt.coeffs).max()
    return {"abs": float(diff), "rel": float(diff / np.abs(p.coeffs).max()), "p": p, "p_tilde": pt}


def ccf(v: Vessel, xi1: float, xi2: float, z: complex) -> np.ndarray:
    """W(ξ, z) = I - iΦ(ξ1A1 + ξ2A2 - z)^{-1}Φ*(ξ1σ1 + ξ2σ2)."""
    B = xi1 * v.A1 + xi2 * v.A2 - z * np.eye(v.m)
    if v.m and np.linalg.svd(B, compute_uv=False).min() < 1e-8:
        raise SpectrumHit(f"z={z} lies on the spectrum of xi A")
    s = xi1 * v.sigma1 + xi2 * v.sigma2
    if v.m == 0:
        return np.eye(v.n, dtype=complex)
    return np.eye(v.n) - 1j * v.Phi @ np.linalg.solve(B, v.Phi_star @ s)


def ccf_metric_defect(v: Vessel, xi1: float, xi2: float, z: complex) -> np.ndarray:
    """W*(ξσ)W - ξσ: zero for real z, positive semidefinite for Im z > 0."""
    W = ccf(v, xi1, xi2, z)
    s = xi1 * v.sigma1 + xi2 * v.sigma2
    return W.conj().T @ s @ W - s


def _kernel_line(M: np.ndarray, rank_tol: float = 1e-6, ref: float = 0.0) -> np.ndarray:
    """Unit kernel vector of M; ``ref`` is the size of the pencil's ingredients, so a
    pencil that vanishes identically still counts as singular."""
    U, sv, Vh = np.linalg.svd(M)
    scale = max(sv[0], ref, 1e-300)
    if sv[-1] > 1e-7 * scale:
        raise OffCurve(f"pencil is not singular (smallest singular value {sv[-1] / scale:.2e})")
    if len(sv) > 1 and sv[-2] < rank_tol * scale:
        raise SingularCurvePoint("kernel has dimension > 1")
    e = Vh[-1].conj()
    k = np.argmax(np.abs(e))
    return e * (abs(e[k]) / e[k])


def jcf(v: Vessel, lambda1: complex, lambda2: complex, directions=None) -> dict:
    """S(λ): the CCF restricted to E(λ) = ker(λ1σ2 - λ2σ1 + γ), as the scalar taking the
    phase-fixed unit kernel vector to its coordinate along the unit vector of Ẽ(λ)."""
    s1, s2 = v.sigma1, v.sigma2
    size = abs(lambda1) * np.linalg.norm(s2, 2) + abs(lambda2) * np.linalg.norm(s1, 2)
    e = _kernel_line(lambda1 * s2 - lambda2 * s1 + v.gamma, ref=size + np.linalg.norm(v.gamma, 2))
    et = _kernel_line(lambda1 * s2 - lambda2 * s1 + v.gamma_tilde, ref=size + np.linalg.norm(v.gamma_tilde, 2))
    directions = directions or [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8), (-0.28, 0.96), (0.8, -0.6)]
    vals, leak = [], 0.0
    for x1, x2 in directions:
        We = ccf(v, x1, x2, x1 * lambda1 + x2 * lambda2) @ e
        val = complex(np.vdot(et, We))
        leak = max(leak, float(np.linalg.norm(We - val * et)))
        vals.append(val)
    vals = np.array(vals)
    return {"S": complex(vals[0]), "values": vals, "spread": float(np.abs(vals - vals[0]).max()),
            "leak": leak, "e": e, "e_tilde": et}


def normalized_section(v: Vessel, z) -> np.ndarray:
    """Row u(z)[(p,γ)] = ∂₂^γ S_ζ̃(z, τp)/γ! (chart-scaled)."""
    ctx = v.ms.ctx
    out = []
    for r in v.poles:
        tp = involution(ctx.curve, r.point)
        for gam in range(r.order):
            out.append(szego(ctx, z, tp, 0, gam) / math.factorial(gam) * r.chart_scale ** (-gam - 0.5))
    return np.array(out)


def model_map(v: Vessel, z, h, xi=(1.0, 0.0)) -> complex:
    """u(z)(ξσ)Φ(ξA - ξy(z))^{-1} h."""
    x1, x2 = xi
    z = as_point(z)
    lam = x1 * v.y1.eval(z) + x2 * v.y2.eval(z)
    B = x1 * v.A1 + x2 * v.A2 - lam * np.eye(v.m)
    if np.linalg.svd(B, compute_uv=False).min() < 1e-8:
        raise SpectrumHit("point lies over the joint spectrum")
    s = x1 * v.sigma1 + x2 * v.sigma2
    return complex(normalized_section(v, z) @ s @ v.Phi @ np.linalg.solve(B, np.asarray(h, dtype=complex)))


def model_map_identity_check(v: Vessel, z, h, xi=(1.0, 0.0)) -> float:
    return abs(model_map(v, z, h, xi) - v.ms.evaluate(h, [z])[0])


def kernel_via_jcf(v: Vessel, p, q, xi=(1.0, 0.0)) -> complex:
    """K_X(p, q) = (u(p)S(p)(ξσ)S(q)*u(q)* - u(p)(ξσ)u(q)*) / (-i(ξy(p) - conj(ξy(q)))),
    S(z) = I - i(ξσ)Φ(ξA - ξy(z))^{-1}Φ*."""
    x1, x2 = xi
    p, q = as_point(p), as_point(q)
    s = x1 * v.sigma1 + x2 * v.sigma2
    B = x1 * v.A1 + x2 * v.A2
    Ps = v.Phi_star

    def S_of(z):
        lam = x1 * v.y1.eval(z) + x2 * v.y2.eval(z)
        return np.eye(v.n) - 1j * s @ v.Phi @ np.linalg.solve(B - lam * np.eye(v.m), Ps), lam

    Sp, lp = S_of(p)
    Sq, lq = S_of(q)
    up, uq = normalized_section(v, p), normalized_section(v, q)
    num = up @ Sp @ s @ Sq.conj().T @ uq.conj() - up @ s @ uq.conj()
    return complex(num / (-1j * (lp - np.conj(lq))))
