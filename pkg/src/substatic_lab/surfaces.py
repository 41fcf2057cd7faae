"""Parametrized hypersurfaces with quadrature, normals, and shape operators.

A `LevelSurface` is an (m-1)-parameter embedding into a chart together
with a tensor-product quadrature grid.  The induced metric doubles as a
chart of its own, so intrinsic curvature goes through the same kernel as
ambient curvature.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .chart import Box, Chart, DerivConfig
from .errors import DegenerateInducedMetric
from .fd import fd_weights, fsum, stencil_offsets
from .kernel import christoffel
from .quadrature import grid_rule

__all__ = ["LevelSurface", "surface_integral"]


class LevelSurface:
    """Embedded hypersurface Sigma -> chart with a quadrature grid.

    Parameters
    ----------
    chart : ambient Chart.
    embed : callable q (m-1,) -> chart point (m,).
    param_box : Box of parameters.
    orientation : callable (q, p) -> ambient reference vector; the unit
        normal is chosen with positive g-inner product against it.  Use
        an outward axis direction or -grad u depending on the surface.
    jacobian : optional analytic d embed / d q, shape (m, m-1).
    resolution : nodes per parameter axis for quadrature.
    param_step : finite-difference step per parameter axis for the
        embedding derivatives when no analytic jacobian is given.
    """

    def __init__(
        self,
        chart: Chart,
        embed: Callable[[np.ndarray], np.ndarray],
        param_box: Box,
        orientation: Callable[[np.ndarray, np.ndarray], np.ndarray],
        jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        resolution: Optional[Sequence[int]] = None,
        param_step: Optional[np.ndarray] = None,
        name: str = "surface",
    ):
        self.chart = chart
        self.embed = embed
        self.param_box = param_box
        self.orientation = orientation
        self._jacobian = jacobian
        self.resolution = list(resolution or [48] * param_box.dim)
        self.param_step = (
            np.asarray(param_step, dtype=float)
            if param_step is not None
            else 1e-5 * param_box.lengths
        )
        self.name = name

    # -- geometry ------------------------------------------------------------

    def point(self, q: np.ndarray) -> np.ndarray:
        return np.asarray(self.embed(np.asarray(q, dtype=float)), dtype=float)

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(q), dtype=float)
        cols = []
        for a in range(self.param_box.dim):
            off = stencil_offsets(
                q[a],
                self.param_box.inner_lo[a],
                self.param_box.inner_hi[a],
                self.param_step[a],
                5,
                periodic=bool(self.param_box.periodic[a]),
            )
            w = fd_weights(off, order=1)
            col = None
            for wi, oi in zip(w, off):
                if wi == 0.0:
                    continue
                qq = q.copy()
                qq[a] += oi
                term = wi * self.point(qq)
                col = term if col is None else col + term
            cols.append(col)
        return np.stack(cols, axis=1)

    def induced_metric(self, q: np.ndarray) -> np.ndarray:
        p = self.point(q)
        J = self.jacobian(q)
        g = self.chart.metric_at(p)
        h = J.T @ g @ J
        h = 0.5 * (h + h.T)
        if np.linalg.eigvalsh(h)[0] <= 0.0:
            raise DegenerateInducedMetric(f"induced metric degenerate at q={q}")
        return h

    def unit_normal(self, q: np.ndarray) -> np.ndarray:
        """g-unit normal, signed along the orientation reference."""
        p = self.point(q)
        J = self.jacobian(q)
        g = self.chart.metric_at(p)
        # null space of the (m-1) x m matrix J^T g
        _, _, vt = np.linalg.svd(J.T @ g)
        n = vt[-1]
        n = n / np.sqrt(max(n @ g @ n, 1e-300))
        ref = np.asarray(self.orientation(q, p), dtype=float)
        if n @ g @ ref < 0.0:
            n = -n
        return n

    def shape_operator(self, q: np.ndarray, chart: Optional[Chart] = None) -> np.ndarray:
        """Second fundamental form A_ab in parameter indices.

        Mean-convex convention: the round sphere with outward normal in
        flat space has A = h / r and H = (m-1)/r.  Pass ``chart`` to
        evaluate against a conformal ambient metric instead.
        """
        chart = chart or self.chart
        q = np.asarray(q, dtype=float)
        p = self.point(q)
        J = self.jacobian(q)
        g = chart.metric_at(p)
        _, _, vt = np.linalg.svd(J.T @ g)
        n = vt[-1]
        n = n / np.sqrt(max(n @ g @ n, 1e-300))
        ref = np.asarray(self.orientation(q, p), dtype=float)
        if n @ g @ ref < 0.0:
            n = -n
        d2 = self._embed_second_partials(q)  # [a, b, k]
        gamma = christoffel(chart, p)
        ii = d2 + np.einsum("kij,ia,jb->abk", gamma, J, J)
        A = -np.einsum("abk,kl,l->ab", ii, g, n)
        return 0.5 * (A + A.T)

    def mean_curvature(self, q: np.ndarray, chart: Optional[Chart] = None) -> float:
        chart = chart or self.chart
        p = self.point(q)
        J = self.jacobian(q)
        g = chart.metric_at(p)
        h = J.T @ g @ J
        A = self.shape_operator(q, chart=chart)
        return float(np.einsum("ab,ab->", np.linalg.inv(0.5 * (h + h.T)), A))

    def _embed_second_partials(self, q: np.ndarray) -> np.ndarray:
        md = self.param_box.dim
        amb = self.chart.dim
        d2 = np.zeros((md, md, amb))
        for a in range(md):
            for b in range(a, md):
                d2[a, b] = self._second_partial(q, a, b)
                d2[b, a] = d2[a, b]
        return d2

    def _second_partial(self, q: np.ndarray, a: int, b: int) -> np.ndarray:
        def nodes(axis):
            return stencil_offsets(
                q[axis],
                self.param_box.inner_lo[axis],
                self.param_box.inner_hi[axis],
                self.param_step[axis] * 10.0,
                5,
                periodic=bool(self.param_box.periodic[axis]),
            )

        if a == b:
            off = nodes(a)
            w = fd_weights(off, order=2)
            out = None
            for wi, oi in zip(w, off):
                qq = q.copy()
                qq[a] += oi
                term = wi * self.point(qq)
                out = term if out is None else out + term
            return out
        offa, offb = nodes(a), nodes(b)
        wa = fd_weights(offa, order=1)
        wb = fd_weights(offb, order=1)
        out = None
        for wi, oi in zip(wa, offa):
            if wi == 0.0:
                continue
            for wj, oj in zip(wb, offb):
                if wj == 0.0:
                    continue
                qq = q.copy()
                qq[a] += oi
                qq[b] += oj
                term = (wi * wj) * self.point(qq)
                out = term if out is None else out + term
        return out

    # -- quadrature ------------------------------------------------------------

    def grid(self):
        """Quadrature nodes (lexicographic) and weights on the parameter box."""
        rules = grid_rule(self.param_box, self.resolution, inner=False)
        qs, ws = [], []
        for idx in np.ndindex(*[len(r[0]) for r in rules]):
            qs.append(np.array([rules[k][0][i] for k, i in enumerate(idx)]))
            w = 1.0
            for k, i in enumerate(idx):
                w *= rules[k][1][i]
            ws.append(w)
        return qs, ws

    def area_element(self, q: np.ndarray) -> float:
        return float(np.sqrt(np.linalg.det(self.induced_metric(q))))

    def tangential_gradient_norm2(self, q: np.ndarray, psi: Callable[[np.ndarray], float]) -> float:
        """|d psi|^2 in the induced metric, psi given on parameters."""
        h = self.induced_metric(q)
        md = self.param_box.dim
        dpsi = np.zeros(md)
        for a in range(md):
            off = stencil_offsets(
                q[a],
                self.param_box.inner_lo[a],
                self.param_box.inner_hi[a],
                self.param_step[a] * 10.0,
                5,
                periodic=bool(self.param_box.periodic[a]),
            )
            w = fd_weights(off, order=1)
            acc = 0.0
            for wi, oi in zip(w, off):
                if wi == 0.0:
                    continue
                qq = q.copy()
                qq[a] += oi
                acc += wi * float(psi(qq))
            dpsi[a] = acc
        return float(dpsi @ np.linalg.inv(h) @ dpsi)

    def induced_chart(self, margins=None, name: Optional[str] = None) -> Chart:
        """The surface as its own chart (for intrinsic curvature)."""
        pb = self.param_box
        if margins is not None:
            box = Box(pb.lo, pb.hi, np.asarray(margins[0], float), np.asarray(margins[1], float), pb.periodic)
        else:
            box = pb
        return Chart(
            box,
            metric=lambda q: self.induced_metric(q),
            deriv_config=DerivConfig(),
            name=name or f"{self.name}-induced",
        )

    def with_resolution(self, resolution: Sequence[int]) -> "LevelSurface":
        return LevelSurface(
            self.chart,
            self.embed,
            self.param_box,
            self.orientation,
            jacobian=self._jacobian,
            resolution=resolution,
            param_step=self.param_step,
            name=self.name,
        )


def surface_integral(
    surface: LevelSurface,
    integrand: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
    area_element: Optional[Callable[[np.ndarray], float]] = None,
) -> float:
    """Quadrature of ``integrand(q, p)`` against the induced area measure.

    ``integrand`` defaults to 1 (area).  ``area_element`` may override the
    induced density (used for the conformal/weighted measure identity).
    Summation order is fixed and compensated.
    """
    qs, ws = surface.grid()
    terms = []
    for q, w in zip(qs, ws):
        da = area_element(q) if area_element is not None else surface.area_element(q)
        val = 1.0 if integrand is None else float(integrand(q, surface.point(q)))
        terms.append(w * val * da)
    return fsum(terms)
