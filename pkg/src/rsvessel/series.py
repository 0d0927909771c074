"""Small truncated power-series helpers (coefficient arrays, lowest order first)."""

from __future__ import annotations

import math

import numpy as np


def mul(p, q, n: int | None = None) -> np.ndarray:
    r = np.convolve(np.asarray(p, dtype=complex), np.asarray(q, dtype=complex))
    return r if n is None else _fit(r, n)


def div(p, q, n: int) -> np.ndarray:
    """First n coefficients of p/q (q[0] != 0)."""
    p = _fit(np.asarray(p, dtype=complex), n)
    q = _fit(np.asarray(q, dtype=complex), n)
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        acc = p[k]
        for j in range(1, k + 1):
            acc -= q[j] * out[k - j]
        out[k] = acc / q[0]
    return out


def inv(q, n: int) -> np.ndarray:
    one = np.zeros(n, dtype=complex)
    one[0] = 1
    return div(one, q, n)


def derivs_to_coeffs(d) -> np.ndarray:
    return np.array([x / math.factorial(k) for k, x in enumerate(d)], dtype=complex)


def coeffs_to_derivs(c) -> np.ndarray:
    return np.array([x * math.factorial(k) for k, x in enumerate(c)], dtype=complex)


def _fit(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    m = min(n, len(a))
    out[:m] = a[:m]
    return out


def contour_coefficients(f, center: complex, radius: float, lo: int, hi: int,
                         nodes: int = 128) -> np.ndarray:
    """Laurent coefficients c_lo..c_hi of f around ``center`` by the
    trapezoidal rule on |t| = radius (f vectorized over complex arrays)."""
    th = 2 * np.pi * np.arange(nodes) / nodes
    t = radius * np.exp(1j * th)
    vals = np.asarray(f(center + t), dtype=complex)
    ks = np.arange(lo, hi + 1)
    return np.array([np.mean(vals * t ** (-k)) for k in ks])
