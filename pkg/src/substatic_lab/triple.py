"""Sub-static triples (M, g, u) and the structures they own.

The central object is the tensor

    Q = Ric - Hess u / u + (Delta u / u) g,

nonnegativity of which (as a quadratic form against g) is the sub-static
condition, equivalently the null energy condition of the static spacetime
-u^2 dt^2 + g.  This module also builds the conformal "optical" view
gbar = u^-2 g with weight f = -(m-1) ln u, surface gravities of u = 0
boundary components, second fundamental forms in both metrics, and the
stability quadratic form of minimal hypersurfaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from . import kernel
from .chart import Box, Chart, DerivConfig, ScalarField, halton_points
from .errors import LapseNonPositive, NoBoundary
from .fd import fsum
from .surfaces import LevelSurface, surface_integral
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "MatterSource",
    "BoundarySurface",
    "SubstaticTriple",
    "OpticalView",
]


@dataclass
class MatterSource:
    """Declared matter content; fixes the model formula for Q.

    kinds: ``vacuum`` (Q = 0), ``electrostatic`` (Q from the potential eta),
    ``perfect_fluid`` (Q = (rho + P) g), ``map_source`` (Q = pullback of the
    target metric; handled by the wave-map module).
    """

    kind: str
    eta: Optional[ScalarField] = None
    rho: Optional[ScalarField] = None
    pressure: Optional[ScalarField] = None
    pullback_metric: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def declared_q(self, triple: "SubstaticTriple", p: np.ndarray) -> np.ndarray:
        chart = triple.chart
        m = chart.dim
        g = chart.metric_at(p)
        if self.kind == "vacuum":
            return np.zeros((m, m))
        if self.kind == "electrostatic":
            u = triple.u(p)
            deta = kernel.gradient_covector(chart, self.eta, p)
            n2 = float(deta @ chart.metric_inv(p) @ deta)
            return (n2 * g - np.outer(deta, deta)) / u**2
        if self.kind == "perfect_fluid":
            return (self.rho(p) + self.pressure(p)) * g
        if self.kind == "map_source":
            return np.asarray(self.pullback_metric(p), dtype=float)
        raise ValueError(f"unknown matter kind {self.kind!r}")


class BoundarySurface:
    """A u = 0 boundary component with its transversal extrapolation ray.

    Quantities that degenerate on the boundary (Q, Hess u / u, |grad u|)
    are produced at each node by degree-3 polynomial extrapolation along
    the inward ray ``p + t * direction`` from four interior samples.
    """

    def __init__(
        self,
        surface: LevelSurface,
        inward: np.ndarray,
        label: str = "boundary",
        ray_offsets: Optional[Sequence[float]] = None,
        gravity_offsets: Optional[Sequence[float]] = None,
    ):
        self.surface = surface
        self.inward = np.asarray(inward, dtype=float)
        self.label = label
        if ray_offsets is None:
            axis = int(np.argmax(np.abs(self.inward)))
            step = 0.015 * surface.chart.box.lengths[axis]
            ray_offsets = [step, 2 * step, 3 * step, 4 * step]
        self.ray_offsets = np.asarray(ray_offsets, dtype=float)
        # |grad u| needs no curvature, so it may use a much tighter ray
        # where u itself varies on a short scale
        self.gravity_offsets = (
            np.asarray(gravity_offsets, dtype=float)
            if gravity_offsets is not None
            else self.ray_offsets
        )

    def extrapolate(self, fn: Callable[[np.ndarray], np.ndarray], q: np.ndarray, offsets=None):
        p0 = self.surface.point(q)
        off = self.ray_offsets if offsets is None else np.asarray(offsets, dtype=float)
        return kernel.extrapolate_along_ray(fn, p0, self.inward, off)

    def gravity_samples(self, triple: "SubstaticTriple", nq: int = 12):
        """Extrapolated |grad u| over a coarse node set."""
        qs = _coarse_nodes(self.surface, nq)
        fn = lambda p: np.sqrt(kernel.grad_norm2(triple.chart, triple.u, p))
        return np.array(
            [float(self.extrapolate(fn, q, offsets=self.gravity_offsets)) for q in qs]
        )

    def surface_gravity(self, triple: "SubstaticTriple", nq: int = 12):
        vals = self.gravity_samples(triple, nq)
        return float(np.mean(vals)), float(np.max(vals) - np.min(vals))


def _coarse_nodes(surface: LevelSurface, n_per_axis: int):
    box = surface.param_box
    out = []
    axes = []
    for k in range(box.dim):
        lo, hi = box.inner_lo[k], box.inner_hi[k]
        pad = 0.06 * (hi - lo)
        axes.append(np.linspace(lo + pad, hi - pad, n_per_axis))
    for idx in np.ndindex(*[n_per_axis] * box.dim):
        out.append(np.array([axes[k][i] for k, i in enumerate(idx)]))
    return out


class SubstaticTriple:
    """Chart + lapse + optional declared source + boundary components."""

    def __init__(
        self,
        chart: Chart,
        u: ScalarField,
        boundary: Optional[Sequence[BoundarySurface]] = None,
        source: Optional[MatterSource] = None,
        tol: Tolerances = DEFAULT,
        sampling_shrink: Optional[np.ndarray] = None,
        name: str = "triple",
    ):
        self.chart = chart
        self.u = u
        self.boundary = list(boundary or [])
        self.source = source
        self.tol = tol
        self.name = name
        if sampling_shrink is None:
            sampling_shrink = 0.05 * chart.box.lengths
        self.sampling_shrink = np.asarray(sampling_shrink, dtype=float)

    @property
    def dim(self) -> int:
        return self.chart.dim

    # -- core tensors -----------------------------------------------------

    def require_positive_lapse(self, p: np.ndarray) -> float:
        val = self.u(p)
        if val <= 0.0:
            raise LapseNonPositive(f"u({p}) = {val}")
        return val

    def q_tensor(self, p: np.ndarray) -> np.ndarray:
        """Q = Ric - Hess u / u + (Delta u / u) g."""
        u = self.require_positive_lapse(p)
        chart = self.chart
        ric = kernel.ricci(chart, p)
        hess = kernel.hessian(chart, self.u, p)
        lap = float(np.einsum("ij,ij->", chart.metric_inv(p), hess))
        return ric - hess / u + (lap / u) * chart.metric_at(p)

    def q_times_u2(self, p: np.ndarray) -> np.ndarray:
        """u^2 Q, smooth up to the boundary (no division by u)."""
        u = self.u(p)
        chart = self.chart
        ric = kernel.ricci(chart, p)
        hess = kernel.hessian(chart, self.u, p)
        lap = float(np.einsum("ij,ij->", chart.metric_inv(p), hess))
        return u * u * ric - u * hess + (u * lap) * chart.metric_at(p)

    def trace_q(self, p: np.ndarray) -> float:
        return float(np.einsum("ij,ij->", self.chart.metric_inv(p), self.q_tensor(p)))

    def trace_identity_residual(self, p: np.ndarray) -> float:
        """|Delta u - u (tr Q - S) / (m-1)|; algebraic self-test of Q."""
        m = self.dim
        lap = kernel.laplacian(self.chart, self.u, p)
        s = kernel.scalar_curvature(self.chart, p)
        return abs(lap - self.u(p) * (self.trace_q(p) - s) / (m - 1))

    def lambda_field(self, p: np.ndarray) -> float:
        s = kernel.scalar_curvature(self.chart, p)
        return (s - self.trace_q(p)) / (self.dim - 1)

    # -- verdict-style operations ------------------------------------------

    def q_spectrum(self, p: np.ndarray, declared: bool = False) -> np.ndarray:
        """Eigenvalues of Q relative to g (generalized symmetric problem)."""
        q = (
            self.source.declared_q(self, p)
            if (declared and self.source is not None)
            else self.q_tensor(p)
        )
        return scipy.linalg.eigh(q, self.chart.metric_at(p), eigvals_only=True)

    def nec_check(self, p: np.ndarray, samples: int = 16, seed: int = 0) -> dict:
        """Smallest eigenvalue of Q against g, plus the null-vector test.

        Null vectors Y = e0_hat + X with |X|_g = 1 are sampled from a
        seeded low-discrepancy set; T(Y, Y) assembled from the static
        stress-energy components must agree with Q(X, X).
        """
        u = self.require_positive_lapse(p)
        chart = self.chart
        g = chart.metric_at(p)
        q = self.q_tensor(p)
        eigs = scipy.linalg.eigh(q, g, eigvals_only=True)
        min_eig = float(eigs[0])
        ric = kernel.ricci(chart, p)
        s = float(np.einsum("ij,ij->", chart.metric_inv(p), ric))
        hess = kernel.hessian(chart, self.u, p)
        lap = float(np.einsum("ij,ij->", chart.metric_inv(p), hess))
        lam = self.lambda_field(p)
        t00 = -lam + 0.5 * s
        tij = ric - hess / u + (lam - 0.5 * s + lap / u) * g
        dirs = halton_points(samples, -np.ones(self.dim), np.ones(self.dim), seed=seed)
        worst = 0.0
        for d in dirs:
            if np.linalg.norm(d) < 1e-9:
                continue
            x = d / np.sqrt(d @ g @ d)
            tyy = t00 + float(x @ tij @ x)
            qxx = float(x @ q @ x)
            worst = max(worst, abs(tyy - qxx))
        return {
            "min_eigenvalue": min_eig,
            "verdict": "PASS" if min_eig >= -self.tol.psd_slack else "FAIL",
            "null_vector_residual": worst,
            "eigenvalues": np.asarray(eigs, dtype=float),
        }

    def lambda_constant(self, n: int = 200, seed: int = 0) -> dict:
        """Lambda = (S - tr Q)/(m-1) over an interior sample set."""
        pts = self.sample_interior(n, seed=seed)
        vals = np.array([self.lambda_field(p) for p in pts])
        spread = float(np.max(vals) - np.min(vals))
        return {
            "Lambda": float(np.mean(vals)),
            "is_constant": spread < self.tol.constancy,
            "spread": spread,
        }

    # -- sampling -----------------------------------------------------------

    def sample_interior(
        self,
        n: int,
        seed: int = 0,
        min_grad: float = 0.0,
    ):
        """Low-discrepancy interior points, away from margins and boundary.

        With ``min_grad`` > 0, points with |grad u| below it are dropped
        and the excluded count is attached to the returned array as
        ``.excluded`` (critical sets have measure zero but ruin the
        conditioning of level-set quantities).
        """
        box = self.chart.box.shrunk(self.sampling_shrink)
        raw = halton_points(max(2 * n, n + 8), box.inner_lo, box.inner_hi, seed=seed)
        pts = []
        excluded = 0
        for p in raw:
            if len(pts) == n:
                break
            if self.u(p) <= 0.0:
                excluded += 1
                continue
            if min_grad > 0.0:
                gn = np.sqrt(kernel.grad_norm2(self.chart, self.u, p))
                if gn < min_grad:
                    excluded += 1
                    continue
            pts.append(p)
        arr = np.array(pts)
        return _SampleSet(arr, excluded)

    # -- optical / conformal view -------------------------------------------

    def optical_view(self, margin_frac: float = 0.05) -> "OpticalView":
        return OpticalView(self, margin_frac=margin_frac)

    # -- hypersurface quantities ----------------------------------------------

    def second_fundamental_forms(self, surface: LevelSurface, q: np.ndarray) -> dict:
        """A, H, Abar, Hbar, Hbar_f at a surface node, plus the conformal
        consistency residuals.

        Sign convention: shape operator of the oriented unit normal, so the
        outward round sphere in flat space has H = (m-1)/r > 0.  With this
        convention f-minimality is Hbar_f = Hbar - df(nubar) = 0 and the
        conformal relation reads Hbar_f = u H.
        """
        p = surface.point(q)
        u = self.require_positive_lapse(p)
        m = self.dim
        chart = self.chart
        g = chart.metric_at(p)
        J = surface.jacobian(q)
        h = J.T @ g @ J
        A = surface.shape_operator(q)
        H = float(np.einsum("ab,ab->", np.linalg.inv(h), A))
        view = self.optical_view()
        Abar = surface.shape_operator(q, chart=view.chart)
        hbar = (J.T @ view.chart.metric_at(p) @ J)
        Hbar = float(np.einsum("ab,ab->", np.linalg.inv(hbar), Abar))
        nu = surface.unit_normal(q)
        du = kernel.gradient_covector(chart, self.u, p)
        dlnu_nu = float(du @ nu) / u
        df_nubar = -(m - 1) * u * dlnu_nu  # df(nubar), nubar = u nu
        Hbar_f = Hbar - df_nubar
        # conformal relation for the shape operator (parameter indices):
        # Abar = (1/u) [A - dlnu(nu) h]
        rel = np.max(np.abs(Abar - (A - dlnu_nu * h) / u))
        return {
            "A": A,
            "H": H,
            "Abar": Abar,
            "Hbar": Hbar,
            "Hbar_f": Hbar_f,
            "residual_conformal_A": float(rel),
            "residual_Hf": abs(Hbar_f - u * H),
            "normal": nu,
        }

    def stability_form(self, surface: LevelSurface, psi: Callable[[np.ndarray], float]) -> dict:
        """Quadratic form of the weighted stability operator on a closed
        surface: integral of |d psi|^2_gbar - u^2 [|A|^2 + Q(nu, nu)] psi^2
        against the (f-weighted optical) area measure, which equals the
        plain g-area measure.

        Returns the split pieces as well: ``dirichlet_opt`` is the
        gbar-Dirichlet energy (u^2 |d psi|^2_g), ``dirichlet_g`` the plain
        one, ``potential`` the zeroth-order part.
        """
        qs, ws = surface.grid()
        dir_opt, dir_g, pot = [], [], []
        for qq, w in zip(qs, ws):
            p = surface.point(qq)
            u = self.u(p)
            da = surface.area_element(qq)
            gn2 = surface.tangential_gradient_norm2(qq, psi)
            nu = surface.unit_normal(qq)
            A = surface.shape_operator(qq)
            h = surface.induced_metric(qq)
            hinv = np.linalg.inv(h)
            A2 = float(np.einsum("ab,cd,ac,bd->", hinv, hinv, A, A))
            qu2 = self.q_times_u2(p)
            val = float(psi(qq))
            dir_opt.append(w * da * u * u * gn2)
            dir_g.append(w * da * gn2)
            pot.append(w * da * (u * u * A2 + float(nu @ qu2 @ nu)) * val * val)
        return {
            "dirichlet_opt": fsum(dir_opt),
            "dirichlet_g": fsum(dir_g),
            "potential": fsum(pot),
            "value": fsum(dir_opt) - fsum(pot),
        }


class _SampleSet(np.ndarray):
    def __new__(cls, arr, excluded):
        obj = np.asarray(arr).view(cls)
        obj.excluded = excluded
        return obj

    def __array_finalize__(self, obj):
        if obj is not None:
            self.excluded = getattr(obj, "excluded", 0)


class OpticalView:
    """The conformal chart gbar = u^-2 g with weight f = -(m-1) ln u.

    ``weighted_ricci`` evaluates Ricbar + Hessbar f + df x df / (m-1)
    through the curvature kernel on the conformal chart itself, not by
    algebraic substitution, so agreement with Q is a genuine cross-check.
    """

    def __init__(self, triple: SubstaticTriple, margin_frac: float = 0.05):
        self.triple = triple
        base = triple.chart
        m = base.dim

        def gbar(p):
            return base.metric_at(p) / triple.u(p) ** 2

        analytic = None
        if base.analytic_partials is not None and triple.u.analytic_grad is not None:
            def analytic(p):
                u = triple.u(p)
                g = base.metric_at(p)
                dg = np.asarray(base.analytic_partials(p), dtype=float)
                du = np.asarray(triple.u.analytic_grad(p), dtype=float)
                return dg / u**2 - 2.0 * np.einsum("k,ij->kij", du, g) / u**3

        box = base.box.shrunk(_boundary_clearance(triple, margin_frac))
        self.chart = Chart(
            box,
            gbar,
            analytic_partials=analytic,
            deriv_config=base.deriv_config,
            step_scale=base.step_scale,
            name=base.name + "-optical",
        )
        self.f = ScalarField(
            lambda p: -(m - 1) * np.log(triple.u(p)),
            analytic_grad=(
                (lambda p: -(m - 1) * np.asarray(triple.u.analytic_grad(p), dtype=float) / triple.u(p))
                if triple.u.analytic_grad is not None
                else None
            ),
            name="optical-weight",
        )

    def weighted_ricci(self, p: np.ndarray) -> np.ndarray:
        """CD(0,1)-weighted Ricci of the optical metric; equals Q."""
        m = self.chart.dim
        ric = kernel.ricci(self.chart, p)
        hess = kernel.hessian(self.chart, self.f, p)
        df = kernel.gradient_covector(self.chart, self.f, p)
        return ric + hess + np.outer(df, df) / (m - 1)

    def weight_density(self, p: np.ndarray) -> float:
        """e^{-f} = u^{m-1}."""
        return float(np.exp(-self.f(p)))


def _boundary_clearance(triple: SubstaticTriple, margin_frac: float) -> np.ndarray:
    """Per-axis strip to exclude around u = 0 faces for the optical chart.

    Twice the boundary extrapolation ray keeps u bounded away from zero
    without eating into long axes.
    """
    clearance = np.zeros(triple.chart.dim)
    for b in triple.boundary:
        axis = int(np.argmax(np.abs(b.inward)))
        amount = 2.0 * float(np.max(b.ray_offsets))
        amount = min(amount, margin_frac * triple.chart.box.lengths[axis] * 4.0)
        clearance[axis] = max(clearance[axis], amount)
    return clearance
