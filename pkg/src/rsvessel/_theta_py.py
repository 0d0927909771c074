"""Pure numpy lattice-sum kernel (fallback for the compiled core)."""

from __future__ import annotations

import numpy as np


def theta_sum(lams, gamma, a, b, order, offsets, base):
    """Sum the differentiated theta series for a batch of points.

    Parameters
    ----------
    lams : (N, g) complex array of evaluation points.
    gamma : (g, g) complex period matrix.
    a, b : (g,) real characteristic halves.
    order : (g,) int derivative multi-index.
    offsets : (M, g) int lattice offsets shared by every point.
    base : (N, g) int per-point lattice centre.
    """
    n = base[:, None, :] + offsets[None, :, :]
    v = n + a
    quad = np.einsum("nmi,ij,nmj->nm", v, gamma, v)
    lin = np.einsum("nmi,ni->nm", v, lams + b)
    terms = np.exp(1j * np.pi * quad + 2j * np.pi * lin)
    if np.any(order):
        terms = terms * np.prod((2j * np.pi * v) ** order, axis=-1)
    return terms.sum(axis=1)
