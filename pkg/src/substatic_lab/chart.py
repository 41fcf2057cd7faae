"""Coordinate charts and sampled field types.

A `Chart` is an axis-aligned coordinate box together with a metric
evaluator.  All curvature operators in :mod:`substatic_lab.kernel` consume
charts; they never see a manifold, only this local description.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import OutOfDomain, SingularMetric

__all__ = [
    "Box",
    "DerivConfig",
    "Chart",
    "ScalarField",
    "VectorField",
    "TensorField2",
    "halton_points",
]

_JET_CACHE_MAX = 200_000


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with optional per-axis exclusion margins.

    Margins carve away strips next to singular loci (poles, horizons).  The
    admissible region is ``[lo + margin_lo, hi - margin_hi]``; every chart
    evaluation, including stencil nodes, must land inside it.
    """

    lo: np.ndarray
    hi: np.ndarray
    margin_lo: np.ndarray
    margin_hi: np.ndarray
    periodic: np.ndarray  # bool per axis

    @staticmethod
    def build(
        intervals: Sequence[tuple[float, float]],
        margins: Optional[Sequence[tuple[float, float]]] = None,
        periodic: Optional[Sequence[bool]] = None,
    ) -> "Box":
        lo = np.array([a for a, _ in intervals], dtype=float)
        hi = np.array([b for _, b in intervals], dtype=float)
        if margins is None:
            mlo = np.zeros_like(lo)
            mhi = np.zeros_like(hi)
        else:
            mlo = np.array([a for a, _ in margins], dtype=float)
            mhi = np.array([b for _, b in margins], dtype=float)
        per = (
            np.zeros(lo.size, dtype=bool)
            if periodic is None
            else np.array(periodic, dtype=bool)
        )
        return Box(lo, hi, mlo, mhi, per)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def inner_lo(self) -> np.ndarray:
        return self.lo + self.margin_lo

    @property
    def inner_hi(self) -> np.ndarray:
        return self.hi - self.margin_hi

    @property
    def lengths(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, p: np.ndarray, slack: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        ok = (p >= self.inner_lo - slack) & (p <= self.inner_hi + slack)
        return bool(np.all(ok | self.periodic))

    def shrunk(self, amount: np.ndarray) -> "Box":
        """Box with margins widened by ``amount`` per axis (for sampling)."""
        amount = np.broadcast_to(np.asarray(amount, dtype=float), self.lo.shape)
        extra = np.where(self.periodic, 0.0, amount)
        return Box(self.lo, self.hi, self.margin_lo + extra, self.margin_hi + extra, self.periodic)


@dataclass(frozen=True)
class DerivConfig:
    """Finite-difference policy for a chart.

    ``scheme`` is either ``"central2"`` (3-point, second order) or
    ``"richardson"`` (5-point, fourth order).  ``rel_step`` scales first
    derivatives, ``rel_step_second`` pure and mixed second derivatives, and
    ``rel_step_field`` derivatives of quantities that are themselves
    finite-difference outputs (third derivatives of the metric or lapse).
    All are relative to the axis length, further modulated by the chart's
    local ``step_scale``.  One-sided stencils kick in automatically when a
    centered stencil would leave the admissible region.
    """

    scheme: str = "richardson"
    rel_step: float = 1e-4
    rel_step_second: float = 1e-3
    rel_step_field: float = 1e-3

    @property
    def npts(self) -> int:
        return 3 if self.scheme == "central2" else 5


class Chart:
    """A coordinate patch: box, metric evaluator, differentiation policy.

    Parameters
    ----------
    box : Box
    metric : callable p -> (m, m) array of metric components.
    analytic_partials : optional callable p -> (m, m, m) with entry
        ``[k, i, j] = d_k g_ij``.  When present it replaces one level of
        finite differencing in every curvature formula.
    deriv_config : DerivConfig
    step_scale : optional callable p -> (m,) per-axis multipliers for the
        local step.  Charts whose metric varies on a position-dependent
        scale (areal radius near a horizon, polar angle near a pole) use
        this to keep truncation error level across the domain.
    name : identifier used in reports.

    Charts are immutable after construction and cache metric jets keyed by
    evaluation point, so they are cheap to share.
    """

    def __init__(
        self,
        box: Box,
        metric: Callable[[np.ndarray], np.ndarray],
        analytic_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        deriv_config: Optional[DerivConfig] = None,
        step_scale: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "chart",
    ):
        self.box = box
        self.dim = box.dim
        self.metric = metric
        self.analytic_partials = analytic_partials
        self.deriv_config = deriv_config or DerivConfig()
        self.step_scale = step_scale
        self.name = name
        self._jets: dict = {}

    # -- domain ------------------------------------------------------------

    def require_admissible(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise OutOfDomain(f"point shape {p.shape} does not match dim {self.dim}")
        if not self.box.contains(p):
            raise OutOfDomain(f"{p} outside admissible region of chart {self.name!r}")
        return p

    def steps(self, p: np.ndarray, kind: str = "first") -> np.ndarray:
        rel = {
            "first": self.deriv_config.rel_step,
            "second": self.deriv_config.rel_step_second,
            "field": self.deriv_config.rel_step_field,
        }[kind]
        h = rel * self.box.lengths
        if self.step_scale is not None:
            h = h * np.clip(self.step_scale(np.asarray(p, dtype=float)), 1e-6, 1.0)
        return h

    # -- metric evaluation ---------------------------------------------------

    def metric_at(self, p: np.ndarray) -> np.ndarray:
        g = np.asarray(self.metric(np.asarray(p, dtype=float)), dtype=float)
        return 0.5 * (g + g.T)

    def metric_inv(self, p: np.ndarray) -> np.ndarray:
        g = self.metric_at(p)
        try:
            inv = np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise SingularMetric(f"metric not invertible at {p}") from exc
        return inv

    def with_config(self, deriv_config: DerivConfig, drop_analytic: bool = False) -> "Chart":
        """Copy of this chart under a different differentiation policy."""
        return Chart(
            self.box,
            self.metric,
            None if drop_analytic else self.analytic_partials,
            deriv_config,
            self.step_scale,
            self.name,
        )

    # -- jet cache (used by kernel) -----------------------------------------

    def _cache_get(self, key):
        return self._jets.get(key)

    def _cache_put(self, key, value):
        if len(self._jets) >= _JET_CACHE_MAX:
            self._jets.pop(next(iter(self._jets)))
        self._jets[key] = value
        return value


class ScalarField:
    """Point -> real, with an optional analytic coordinate gradient."""

    def __init__(
        self,
        evaluator: Callable[[np.ndarray], float],
        analytic_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "scalar",
    ):
        self.evaluator = evaluator
        self.analytic_grad = analytic_grad
        self.name = name
        self._jets: dict = {}

    def __call__(self, p: np.ndarray) -> float:
        return float(self.evaluator(np.asarray(p, dtype=float)))

    def _cache_get(self, key):
        return self._jets.get(key)

    def _cache_put(self, key, value):
        if len(self._jets) >= _JET_CACHE_MAX:
            self._jets.pop(next(iter(self._jets)))
        self._jets[key] = value
        return value

    @staticmethod
    def constant(c: float) -> "ScalarField":
        return ScalarField(lambda p: c, analytic_grad=lambda p: np.zeros_like(p), name=f"const({c})")


class VectorField:
    """Point -> contravariant components (m,)."""

    def __init__(self, evaluator: Callable[[np.ndarray], np.ndarray], name: str = "vector"):
        self.evaluator = evaluator
        self.name = name

    def __call__(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(p, dtype=float)), dtype=float)


class TensorField2:
    """Point -> (m, m) covariant components; symmetrized when tagged."""

    def __init__(
        self,
        evaluator: Callable[[np.ndarray], np.ndarray],
        symmetric: bool = True,
        name: str = "tensor2",
    ):
        self.evaluator = evaluator
        self.symmetric = symmetric
        self.name = name

    def __call__(self, p: np.ndarray) -> np.ndarray:
        t = np.asarray(self.evaluator(np.asarray(p, dtype=float)), dtype=float)
        if self.symmetric:
            t = 0.5 * (t + t.T)
        return t


def halton_points(n: int, lo: np.ndarray, hi: np.ndarray, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy points in the box [lo, hi]."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    sampler = qmc.Halton(d=lo.size, scramble=True, seed=seed)
    unit = sampler.random(n)
    return lo + unit * (hi - lo)
