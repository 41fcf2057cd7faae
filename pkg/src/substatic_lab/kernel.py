"""Coordinate-chart tensor calculus.

Evaluates connection and curvature from the chart's metric evaluator by
finite differences (optionally seeded with analytic first partials), plus
scalar-field calculus (gradient, Hessian, Laplacian), covariant
divergences, and 1-D transversal extrapolation for quantities that
degenerate on a boundary face.

Index conventions: lower indices throughout for metric-like tensors;
``dg[k, i, j] = d_k g_ij``; ``d2g[k, l, i, j] = d_k d_l g_ij``;
``gamma[k, i, j] = Gamma^k_ij``.  The Ricci sign is fixed so that the unit
round m-sphere has ``Ric = (m - 1) g``.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .chart import Chart, ScalarField
from .errors import OutOfDomain
from .fd import fd_weights, lagrange_extrapolate, stencil_offsets

__all__ = [
    "metric_jet",
    "christoffel",
    "christoffel_partials",
    "ricci",
    "scalar_curvature",
    "scalar_jet",
    "gradient",
    "gradient_covector",
    "hessian",
    "laplacian",
    "grad_norm2",
    "divergence_vector",
    "divergence_tensor2",
    "field_partials",
    "extrapolate_along_ray",
]


class MetricJet:
    __slots__ = ("g", "inv", "dg", "d2g", "sqrt_det")

    def __init__(self, g, inv, dg, d2g, sqrt_det):
        self.g = g
        self.inv = inv
        self.dg = dg
        self.d2g = d2g
        self.sqrt_det = sqrt_det


def _axis_nodes(chart: Chart, p: np.ndarray, axis: int, h: float, npts: int) -> np.ndarray:
    lo = chart.box.inner_lo[axis]
    hi = chart.box.inner_hi[axis]
    per = bool(chart.box.periodic[axis])
    try:
        off = stencil_offsets(p[axis], lo, hi, h, npts, periodic=per)
        if abs(off[0] + off[-1]) > 1e-9 * h and npts < 7:
            # one-sided: widen by one node to recover accuracy order
            off = stencil_offsets(p[axis], lo, hi, h, npts + 1, periodic=per)
    except ValueError as exc:
        raise OutOfDomain(f"axis {axis} interval too small for stencil at {p}") from exc
    return off


def _diff_along_axis(chart, p, axis, h, npts, order, evaluate):
    """d^order/dx_axis^order of an array-valued map at p."""
    off = _axis_nodes(chart, p, axis, h, npts)
    w = fd_weights(off, order=order)
    out = None
    for wi, oi in zip(w, off):
        if wi == 0.0:
            continue
        q = p.copy()
        q[axis] += oi
        term = wi * np.asarray(evaluate(q), dtype=float)
        out = term if out is None else out + term
    return out


def _diff_mixed(chart, p, ax1, h1, ax2, h2, npts, evaluate):
    """d^2/dx_ax1 dx_ax2 (ax1 != ax2) via a tensor product of 1-D stencils."""
    off1 = _axis_nodes(chart, p, ax1, h1, npts)
    off2 = _axis_nodes(chart, p, ax2, h2, npts)
    w1 = fd_weights(off1, order=1)
    w2 = fd_weights(off2, order=1)
    out = None
    for a, oa in zip(w1, off1):
        if a == 0.0:
            continue
        for b, ob in zip(w2, off2):
            if b == 0.0:
                continue
            q = p.copy()
            q[ax1] += oa
            q[ax2] += ob
            term = (a * b) * np.asarray(evaluate(q), dtype=float)
            out = term if out is None else out + term
    return out


def metric_jet(chart: Chart, p: np.ndarray) -> MetricJet:
    """Metric, inverse, and first/second coordinate partials at ``p``."""
    p = chart.require_admissible(p)
    key = ("jet", p.tobytes())
    hit = chart._cache_get(key)
    if hit is not None:
        return hit
    m = chart.dim
    npts = chart.deriv_config.npts
    g = chart.metric_at(p)
    inv = np.linalg.inv(g)
    h1 = chart.steps(p, "first")
    h2 = chart.steps(p, "second")

    dg = np.empty((m, m, m))
    d2g = np.empty((m, m, m, m))
    if chart.analytic_partials is not None:
        ap = lambda q: np.asarray(chart.analytic_partials(q), dtype=float)
        dg[:] = ap(p)
        for k in range(m):
            d2g[k] = _diff_along_axis(chart, p, k, h2[k], npts, 1, ap)
        # enforce symmetry of mixed partials
        d2g = 0.5 * (d2g + d2g.transpose(1, 0, 2, 3))
    else:
        gfun = chart.metric_at
        for k in range(m):
            dg[k] = _diff_along_axis(chart, p, k, h1[k], npts, 1, gfun)
            d2g[k, k] = _diff_along_axis(chart, p, k, h2[k], npts, 2, gfun)
        for k in range(m):
            for l in range(k + 1, m):
                mix = _diff_mixed(chart, p, k, h2[k], l, h2[l], npts, gfun)
                d2g[k, l] = mix
                d2g[l, k] = mix
    # symmetrize the (i, j) slots against FD noise
    dg = 0.5 * (dg + dg.transpose(0, 2, 1))
    d2g = 0.5 * (d2g + d2g.transpose(0, 1, 3, 2))
    det = np.linalg.det(g)
    jet = MetricJet(g, inv, dg, d2g, float(np.sqrt(abs(det))))
    return chart._cache_put(key, jet)


def christoffel(chart: Chart, p: np.ndarray) -> np.ndarray:
    """Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    p = chart.require_admissible(p)
    key = ("gamma", p.tobytes())
    hit = chart._cache_get(key)
    if hit is not None:
        return hit
    jet = metric_jet(chart, p)
    # bracket[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    bracket = jet.dg + jet.dg.transpose(1, 0, 2) - jet.dg.transpose(1, 2, 0)
    gamma = 0.5 * np.einsum("kl,ijl->kij", jet.inv, bracket)
    gamma = 0.5 * (gamma + gamma.transpose(0, 2, 1))
    return chart._cache_put(key, gamma)


def christoffel_partials(chart: Chart, p: np.ndarray) -> np.ndarray:
    """dGamma[m, k, i, j] = d_m Gamma^k_ij, assembled from the metric jet."""
    jet = metric_jet(chart, p)
    m = chart.dim
    bracket = jet.dg + jet.dg.transpose(1, 0, 2) - jet.dg.transpose(1, 2, 0)
    # dbracket[mu, i, j, l] = d_mu (d_i g_jl + d_j g_il - d_l g_ij)
    dbracket = np.empty((m, m, m, m))
    for mu in range(m):
        a = jet.d2g[mu]
        dbracket[mu] = a + a.transpose(1, 0, 2) - a.transpose(1, 2, 0)
    dinv = -np.einsum("ka,mab,bl->mkl", jet.inv, jet.dg, jet.inv)
    dgamma = 0.5 * np.einsum("mkl,ijl->mkij", dinv, bracket)
    dgamma += 0.5 * np.einsum("kl,mijl->mkij", jet.inv, dbracket)
    return dgamma


def ricci(chart: Chart, p: np.ndarray) -> np.ndarray:
    """Ricci tensor; unit round S^m has Ric = (m - 1) g."""
    p = chart.require_admissible(p)
    key = ("ricci", p.tobytes())
    hit = chart._cache_get(key)
    if hit is not None:
        return hit
    gamma = christoffel(chart, p)
    dgamma = christoffel_partials(chart, p)
    r = (
        np.einsum("kkij->ij", dgamma)
        - np.einsum("ikkj->ij", dgamma)
        + np.einsum("kkl,lij->ij", gamma, gamma)
        - np.einsum("kil,lkj->ij", gamma, gamma)
    )
    r = 0.5 * (r + r.T)
    return chart._cache_put(key, r)


def scalar_curvature(chart: Chart, p: np.ndarray) -> float:
    jet = metric_jet(chart, p)
    return float(np.einsum("ij,ij->", jet.inv, ricci(chart, p)))


def scalar_jet(chart: Chart, f: ScalarField, p: np.ndarray):
    """(value, coordinate gradient, coordinate second partials) of ``f``."""
    p = chart.require_admissible(p)
    key = (id(chart), p.tobytes())
    hit = f._cache_get(key)
    if hit is not None:
        return hit
    m = chart.dim
    npts = chart.deriv_config.npts
    h1 = chart.steps(p, "first")
    h2 = chart.steps(p, "second")
    val = f(p)
    df = np.empty(m)
    d2f = np.empty((m, m))
    if f.analytic_grad is not None:
        grad = lambda q: np.asarray(f.analytic_grad(q), dtype=float)
        df[:] = grad(p)
        for k in range(m):
            d2f[k] = _diff_along_axis(chart, p, k, h2[k], npts, 1, grad)
        d2f = 0.5 * (d2f + d2f.T)
    else:
        for k in range(m):
            df[k] = _diff_along_axis(chart, p, k, h1[k], npts, 1, f)
            d2f[k, k] = _diff_along_axis(chart, p, k, h2[k], npts, 2, f)
        for k in range(m):
            for l in range(k + 1, m):
                mix = _diff_mixed(chart, p, k, h2[k], l, h2[l], npts, f)
                d2f[k, l] = mix
                d2f[l, k] = mix
    out = (val, df, d2f)
    return f._cache_put(key, out)


def gradient_covector(chart: Chart, f: ScalarField, p: np.ndarray) -> np.ndarray:
    return scalar_jet(chart, f, p)[1]


def gradient(chart: Chart, f: ScalarField, p: np.ndarray) -> np.ndarray:
    """Contravariant gradient g^{ij} d_j f."""
    jet = metric_jet(chart, p)
    return jet.inv @ scalar_jet(chart, f, p)[1]


def hessian(chart: Chart, f: ScalarField, p: np.ndarray) -> np.ndarray:
    """Hess_ij f = d_i d_j f - Gamma^k_ij d_k f."""
    _, df, d2f = scalar_jet(chart, f, p)
    gamma = christoffel(chart, p)
    hess = d2f - np.einsum("kij,k->ij", gamma, df)
    return 0.5 * (hess + hess.T)


def laplacian(chart: Chart, f: ScalarField, p: np.ndarray) -> float:
    jet = metric_jet(chart, p)
    return float(np.einsum("ij,ij->", jet.inv, hessian(chart, f, p)))


def grad_norm2(chart: Chart, f: ScalarField, p: np.ndarray) -> float:
    """|grad f|^2 = g^{ij} d_i f d_j f (first derivatives only)."""
    jet = metric_jet(chart, p)
    df = scalar_jet(chart, f, p)[1]
    return float(df @ jet.inv @ df)


def field_partials(
    chart: Chart,
    fn: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    kind: str = "field",
    npts: Optional[int] = None,
) -> np.ndarray:
    """Coordinate partials d_k of an array-valued computed field.

    Uses the chart's ``field`` step by default; this is the entry point for
    third-derivative quantities (dS, div Q, grad(Delta u / u)).
    """
    p = chart.require_admissible(np.asarray(p, dtype=float))
    h = chart.steps(p, kind)
    n = npts or chart.deriv_config.npts
    rows = []
    for k in range(chart.dim):
        rows.append(_diff_along_axis(chart, p, k, h[k], n, 1, fn))
    return np.stack(rows, axis=0)


def divergence_vector(
    chart: Chart,
    X: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    kind: str = "field",
) -> float:
    """div X = (1 / sqrt g) d_i (sqrt g X^i) for contravariant X."""
    p = chart.require_admissible(np.asarray(p, dtype=float))
    h = chart.steps(p, kind)
    npts = chart.deriv_config.npts
    total = 0.0
    for k in range(chart.dim):
        def weighted(q, _k=k):
            g = chart.metric_at(q)
            return np.sqrt(abs(np.linalg.det(g))) * np.asarray(X(q), dtype=float)[_k]
        total += float(_diff_along_axis(chart, p, k, h[k], npts, 1, weighted))
    return total / metric_jet(chart, p).sqrt_det


def divergence_tensor2(
    chart: Chart,
    T: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    kind: str = "field",
) -> np.ndarray:
    """(div T)_j = g^{ik} (d_i T_kj - Gamma^l_ik T_lj - Gamma^l_ij T_kl)."""
    p = chart.require_admissible(np.asarray(p, dtype=float))
    dT = field_partials(chart, T, p, kind=kind)  # [i, k, j]
    jet = metric_jet(chart, p)
    gamma = christoffel(chart, p)
    Tp = np.asarray(T(p), dtype=float)
    term = dT - np.einsum("lik,lj->ikj", gamma, Tp) - np.einsum("lij,kl->ikj", gamma, Tp)
    return np.einsum("ik,ikj->j", jet.inv, term)


def extrapolate_along_ray(
    fn: Callable[[np.ndarray], np.ndarray],
    p0: np.ndarray,
    direction: np.ndarray,
    offsets,
):
    """Degree-(n-1) polynomial extrapolation of ``fn`` to ``p0``.

    Samples at ``p0 + t * direction`` for each t in ``offsets`` (all
    nonzero, typically 4 of them) and extrapolates to t = 0.  This is how
    boundary values of 0/0 quotients such as Q or Hess u / u are produced.
    """
    p0 = np.asarray(p0, dtype=float)
    direction = np.asarray(direction, dtype=float)
    ts = np.asarray(list(offsets), dtype=float)
    vals = [fn(p0 + t * direction) for t in ts]
    return lagrange_extrapolate(ts, vals, x0=0.0)
