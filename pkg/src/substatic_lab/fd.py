"""Finite-difference stencils on non-uniform 1-D node sets.

Weights come from Fornberg's recurrence, so centered, one-sided and
Richardson-style wide stencils are all the same code path.  Everything in
this module is metric-free; covariant corrections live in ``kernel``.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "fd_weights",
    "stencil_offsets",
    "lagrange_extrapolate",
    "fsum",
]


def fd_weights(nodes: np.ndarray, order: int, x0: float = 0.0) -> np.ndarray:
    """Fornberg weights for d^order/dx^order at ``x0`` on arbitrary ``nodes``.

    Parameters
    ----------
    nodes : 1-D array of distinct node abscissae.
    order : derivative order (0 gives interpolation weights).
    x0 : evaluation abscissa.

    Returns
    -------
    Array ``w`` with ``sum(w * f(nodes)) ~= f^(order)(x0)``.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    if order >= n:
        raise ValueError("need at least order+1 nodes")
    # B. Fornberg, Math. Comp. 51 (1988); c[j, k] = weight of node j for order k.
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def stencil_offsets(
    x: float,
    lo: float,
    hi: float,
    h: float,
    npts: int,
    periodic: bool = False,
) -> np.ndarray:
    """Offsets (multiples of ``h``) for an ``npts``-point stencil at ``x``.

    Centered when there is room; shifted to one-sided near the interval
    edges so that every node stays inside ``[lo, hi]``.  Periodic axes never
    shift.
    """
    half = (npts - 1) // 2
    base = np.arange(npts, dtype=float) - half
    if periodic:
        return base * h
    shift_up = max(0.0, (lo - (x - half * h)) / h)
    shift_dn = max(0.0, ((x + half * h) - hi) / h)
    if shift_up > 0.0 and shift_dn > 0.0:
        raise ValueError("interval too small for the requested stencil")
    shift = math.ceil(shift_up) if shift_up > 0.0 else -math.ceil(shift_dn)
    return (base + shift) * h


def lagrange_extrapolate(xs: np.ndarray, values: list, x0: float = 0.0):
    """Polynomial extrapolation of samples ``values`` at ``xs`` to ``x0``.

    ``values`` may hold scalars or ndarrays of a common shape.
    """
    w = fd_weights(np.asarray(xs, dtype=float), order=0, x0=x0)
    out = None
    for wi, vi in zip(w, values):
        term = wi * np.asarray(vi, dtype=float)
        out = term if out is None else out + term
    return out


def fsum(values) -> float:
    """Deterministic compensated sum (exact rounding via math.fsum)."""
    return math.fsum(values)
