"""Pointwise divergence identities and algebraic decompositions.

Each check computes its two sides through deliberately different kernel
call graphs: the divergence side assembles a vector field and samples it
on a stencil, the other side contracts curvature and Hessian data at the
point.  A shared bug therefore cannot cancel itself.

Residuals are normalized by max(|lhs|, |rhs|, 1).  Identities whose
divergence side contains third derivatives of the metric or lapse (the
ones below except the purely algebraic level-set decomposition) are
certified against the looser third-derivative tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernel
from .errors import CriticalPoint, LambdaNotConstant, NoBoundary
from .tolerances import Tolerances
from .triple import BoundarySurface, SubstaticTriple

__all__ = [
    "IdentityResidual",
    "check_qdu",
    "check_sh1",
    "check_sh2",
    "check_hu0",
    "check_hu0_boundary",
    "check_lem_df",
    "run_identity_suite",
    "THIRD_DERIVATIVE_IDENTITIES",
]

THIRD_DERIVATIVE_IDENTITIES = {"qdu", "sh1", "sh2", "lem_df"}

MIN_GRAD = 1e-6


@dataclass
class IdentityResidual:
    identity: str
    point: np.ndarray
    lhs: float
    rhs: float
    residual: float
    verdict: str
    extra: dict = field(default_factory=dict)

    @staticmethod
    def from_sides(identity, point, lhs, rhs, tol, extra=None):
        scale = max(abs(lhs), abs(rhs), 1.0)
        res = abs(lhs - rhs) / scale
        return IdentityResidual(
            identity, np.asarray(point, dtype=float), float(lhs), float(rhs),
            float(res), "PASS" if res < tol else "FAIL", extra or {},
        )


def _grad_up(triple, p):
    jet = kernel.metric_jet(triple.chart, p)
    du = kernel.gradient_covector(triple.chart, triple.u, p)
    return jet.inv @ du, du, jet


def check_qdu(triple: SubstaticTriple, p: np.ndarray, tol: Optional[float] = None) -> IdentityResidual:
    """2 Q(grad u, .) = u (dS - 2 div Q), compared componentwise."""
    chart = triple.chart
    tol = tol if tol is not None else triple.tol.cert_third
    u = triple.require_positive_lapse(p)
    gradu, _, _ = _grad_up(triple, p)
    q = triple.q_tensor(p)
    lhs_vec = 2.0 * (q @ gradu)
    dS = kernel.field_partials(chart, lambda x: kernel.scalar_curvature(chart, x), p)
    divq = kernel.divergence_tensor2(chart, lambda x: triple.q_tensor(x), p)
    rhs_vec = u * (dS.reshape(-1) - 2.0 * divq)
    scale = max(np.max(np.abs(lhs_vec)), np.max(np.abs(rhs_vec)), 1.0)
    worst = int(np.argmax(np.abs(lhs_vec - rhs_vec)))
    res = float(np.max(np.abs(lhs_vec - rhs_vec)) / scale)
    return IdentityResidual(
        "qdu", p, float(lhs_vec[worst]), float(rhs_vec[worst]), res,
        "PASS" if res < tol else "FAIL",
        {"lhs_vec": lhs_vec, "rhs_vec": rhs_vec},
    )


def check_sh1(triple: SubstaticTriple, p: np.ndarray, tol: Optional[float] = None) -> IdentityResidual:
    """(1/2) div(grad|grad u|^2 / u) against its Hessian/Q contraction form."""
    chart = triple.chart
    tol = tol if tol is not None else triple.tol.cert_third
    u = triple.require_positive_lapse(p)

    def gradnorm2(x):
        return kernel.grad_norm2(chart, triple.u, x)

    def W(x):
        jet = kernel.metric_jet(chart, x)
        ds = kernel.field_partials(chart, gradnorm2, x).reshape(-1)
        return (jet.inv @ ds) / triple.u(x)

    lhs = 0.5 * kernel.divergence_vector(chart, W, p)

    jet = kernel.metric_jet(chart, p)
    hess = kernel.hessian(chart, triple.u, p)
    hess2 = float(np.einsum("ik,jl,ij,kl->", jet.inv, jet.inv, hess, hess))
    gradu = jet.inv @ kernel.gradient_covector(chart, triple.u, p)
    q = triple.q_tensor(p)
    quu = float(gradu @ q @ gradu)

    def lap_over_u(x):
        return kernel.laplacian(chart, triple.u, x) / triple.u(x)

    dlu = kernel.field_partials(chart, lap_over_u, p).reshape(-1)
    rhs = hess2 / u + quu / u + float(gradu @ dlu)
    return IdentityResidual.from_sides("sh1", p, lhs, rhs, tol)


def check_sh2(triple: SubstaticTriple, p: np.ndarray, tol: Optional[float] = None) -> IdentityResidual:
    """div(traceless-Hess-u(grad u)/u) against its contraction form."""
    chart = triple.chart
    m = triple.dim
    tol = tol if tol is not None else triple.tol.cert_third
    u = triple.require_positive_lapse(p)

    def V(x):
        jet = kernel.metric_jet(chart, x)
        hx = kernel.hessian(chart, triple.u, x)
        lap = float(np.einsum("ij,ij->", jet.inv, hx))
        ring = hx - (lap / m) * jet.g
        du = kernel.gradient_covector(chart, triple.u, x)
        gu = jet.inv @ du
        return (jet.inv @ (ring @ gu)) / triple.u(x)

    lhs = kernel.divergence_vector(chart, V, p)

    jet = kernel.metric_jet(chart, p)
    hess = kernel.hessian(chart, triple.u, p)
    lap = float(np.einsum("ij,ij->", jet.inv, hess))
    ring = hess - (lap / m) * jet.g
    ring2 = float(np.einsum("ik,jl,ij,kl->", jet.inv, jet.inv, ring, ring))
    gradu = jet.inv @ kernel.gradient_covector(chart, triple.u, p)
    q = triple.q_tensor(p)
    quu = float(gradu @ q @ gradu)

    def lap_over_u(x):
        return kernel.laplacian(chart, triple.u, x) / triple.u(x)

    dlu = kernel.field_partials(chart, lap_over_u, p).reshape(-1)
    rhs = ring2 / u + quu / u + (m - 1) / m * float(gradu @ dlu)
    return IdentityResidual.from_sides("sh2", p, lhs, rhs, tol)


def _frame_hessian(triple, p):
    """Hessian of u in a g-orthonormal frame whose first leg is grad u."""
    jet = kernel.metric_jet(triple.chart, p)
    du = kernel.gradient_covector(triple.chart, triple.u, p)
    gradu = jet.inv @ du
    norm = np.sqrt(max(gradu @ jet.g @ gradu, 0.0))
    if norm < MIN_GRAD:
        raise CriticalPoint(f"|grad u| = {norm:.2e} at {p}")
    m = triple.dim
    frame = np.zeros((m, m))
    frame[:, 0] = gradu / norm
    k = 1
    for e in np.eye(m):
        if k == m:
            break
        v = e.copy()
        for j in range(k):
            v -= (v @ jet.g @ frame[:, j]) * frame[:, j]
        n = np.sqrt(v @ jet.g @ v)
        if n > 1e-8:
            frame[:, k] = v / n
            k += 1
    hess = kernel.hessian(triple.chart, triple.u, p)
    return frame.T @ hess @ frame, norm, jet


def check_hu0(triple: SubstaticTriple, p: np.ndarray, tol: Optional[float] = None) -> IdentityResidual:
    """Frame decomposition of |traceless Hess u|^2 on the level set of u."""
    tol = tol if tol is not None else triple.tol.cert
    m = triple.dim
    h, norm, _ = _frame_hessian(triple, p)
    lap = float(np.trace(h))
    lhs = float(np.sum(h * h)) - lap**2 / m

    u11 = h[0, 0]
    tang = h[1:, 1:]
    H = (lap - u11) / norm
    ring_a = tang / norm - (H / (m - 1)) * np.eye(m - 1)
    a2 = float(np.sum(ring_a * ring_a))
    gradtan2 = float(np.sum(h[0, 1:] ** 2))
    ring_nu2 = (u11 - lap / m) ** 2 + gradtan2
    rhs = norm**2 * a2 + (m - 2) / (m - 1) * gradtan2 + m / (m - 1) * ring_nu2
    return IdentityResidual.from_sides("hu0", p, lhs, rhs, tol)


def check_hu0_boundary(
    triple: SubstaticTriple,
    boundary: BoundarySurface,
    q: np.ndarray,
    lambda_value: Optional[float] = None,
    tol: Optional[float] = None,
) -> IdentityResidual:
    """Boundary limit of traceless Hess u(nu, nu)/u vs (tr Q - S)/m.

    Also evaluated against the equivalent form written with Lambda and the
    intrinsic boundary scalar curvature; that version is attached to the
    record.
    """
    tol = tol if tol is not None else triple.tol.cert
    m = triple.dim
    chart = triple.chart

    def lhs_field(p):
        jet = kernel.metric_jet(chart, p)
        hess = kernel.hessian(chart, triple.u, p)
        lap = float(np.einsum("ij,ij->", jet.inv, hess))
        ring = hess - (lap / m) * jet.g
        du = kernel.gradient_covector(chart, triple.u, p)
        gu = jet.inv @ du
        nrm2 = float(gu @ jet.g @ gu)
        if nrm2 < MIN_GRAD**2:
            raise CriticalPoint(f"|grad u| ~ 0 near boundary at {p}")
        nu = -gu / np.sqrt(nrm2)
        return float(nu @ ring @ nu) / triple.u(p)

    def trq_minus_s(p):
        return triple.trace_q(p) - kernel.scalar_curvature(chart, p)

    lhs = float(boundary.extrapolate(lhs_field, q))
    rhs = float(boundary.extrapolate(trq_minus_s, q)) / m

    extra = {}
    if lambda_value is not None:
        surf_chart = boundary.surface.induced_chart(
            margins=([1e-3] * (m - 1), [1e-3] * (m - 1))
        )
        s_sigma = kernel.scalar_curvature(surf_chart, q)
        trq = float(boundary.extrapolate(lambda p: triple.trace_q(p), q))
        alt = (m - 1) * (m - 2) / (2 * m) * lambda_value + 0.5 * trq - 0.5 * s_sigma
        extra = {"lambda_form": alt, "residual_lambda_form": abs(lhs - alt)}
    return IdentityResidual.from_sides("hu0_boundary", boundary.surface.point(q), lhs, rhs, tol, extra)


def check_lem_df(
    triple: SubstaticTriple,
    p: np.ndarray,
    lambda_value: Optional[float] = None,
    tol: Optional[float] = None,
) -> IdentityResidual:
    """div(grad F / u) against its level-set contraction form, where
    F = |grad u|^2 / 2 + Lambda u^2 / (2m).

    Requires Lambda constant (checked by the caller or here); when Q >= 0
    the divergence side is also nonnegative, which is recorded.
    """
    chart = triple.chart
    m = triple.dim
    tol = tol if tol is not None else triple.tol.cert_third
    if lambda_value is None:
        rep = triple.lambda_constant(n=64)
        if not rep["is_constant"]:
            raise LambdaNotConstant(f"spread {rep['spread']:.3e}")
        lambda_value = rep["Lambda"]
    lam = lambda_value
    u = triple.require_positive_lapse(p)

    def F(x):
        return 0.5 * kernel.grad_norm2(chart, triple.u, x) + lam / (2 * m) * triple.u(x) ** 2

    def W(x):
        jet = kernel.metric_jet(chart, x)
        dF = kernel.field_partials(chart, F, x).reshape(-1)
        return (jet.inv @ dF) / triple.u(x)

    lhs = kernel.divergence_vector(chart, W, p)

    h, norm, jet = _frame_hessian(triple, p)
    lap = float(np.trace(h))
    u11 = h[0, 0]
    tang = h[1:, 1:]
    H = (lap - u11) / norm
    ring_a = tang / norm - (H / (m - 1)) * np.eye(m - 1)
    a2 = float(np.sum(ring_a * ring_a))
    gradtan2 = float(np.sum(h[0, 1:] ** 2))
    gradu = jet.inv @ kernel.gradient_covector(chart, triple.u, p)
    q = triple.q_tensor(p)
    quu = float(gradu @ q @ gradu)
    # dF = Hess u(grad u, .) + (lam/m) u du; |dF|^2 in frame components
    dF_frame = h[0, :] * norm
    dF_frame[0] += lam / m * u * norm
    df2 = float(np.sum(dF_frame**2))
    rhs = (
        norm**2 * a2 / u
        + (m - 2) / (m - 1) * gradtan2 / u
        + quu / u
        + m / (m - 1) * df2 / (u * norm**2)
    )
    rec = IdentityResidual.from_sides("lem_df", p, lhs, rhs, tol)
    rec.extra["divergence_side"] = lhs
    rec.extra["nonnegative"] = lhs >= -triple.tol.cert
    return rec


def run_identity_suite(
    triple: SubstaticTriple,
    n_samples: int = 1000,
    seed: int = 0,
    tol: Optional[Tolerances] = None,
    identities: Optional[list] = None,
) -> dict:
    """All identity checks over a low-discrepancy interior sample.

    Identities whose hypotheses the triple does not satisfy (no boundary,
    Lambda not constant) are reported as skipped, mirroring each check's
    error contract.  Points with |grad u| below the conditioning floor are
    excluded and counted.
    """
    tol = tol or triple.tol
    pts = triple.sample_interior(n_samples, seed=seed, min_grad=MIN_GRAD)
    wanted = identities or ["qdu", "sh1", "sh2", "hu0", "hu0_boundary", "lem_df"]
    out = {
        "triple": triple.name,
        "n_samples": len(pts),
        "excluded_critical": pts.excluded,
        "results": {},
        "skipped": {},
    }

    lam_rep = triple.lambda_constant(n=min(128, max(32, n_samples // 4)), seed=seed)
    lam = lam_rep["Lambda"] if lam_rep["is_constant"] else None

    pointwise = {
        "qdu": lambda p: check_qdu(triple, p, tol=tol.cert_third),
        "sh1": lambda p: check_sh1(triple, p, tol=tol.cert_third),
        "sh2": lambda p: check_sh2(triple, p, tol=tol.cert_third),
        "hu0": lambda p: check_hu0(triple, p, tol=tol.cert),
    }
    if "lem_df" in wanted:
        if lam is None:
            out["skipped"]["lem_df"] = f"LambdaNotConstant (spread {lam_rep['spread']:.3e})"
        else:
            pointwise["lem_df"] = lambda p: check_lem_df(triple, p, lambda_value=lam, tol=tol.cert_third)

    for name in wanted:
        if name in ("hu0_boundary",):
            continue
        fn = pointwise.get(name)
        if fn is None:
            continue
        rows = []
        skipped_points = 0
        for p in pts:
            try:
                rows.append(fn(p))
            except CriticalPoint:
                skipped_points += 1
        out["results"][name] = _summarize(rows, skipped_points)

    if "hu0_boundary" in wanted:
        if not triple.boundary:
            out["skipped"]["hu0_boundary"] = "NoBoundary"
        else:
            rows = []
            for b in triple.boundary:
                from .triple import _coarse_nodes

                for q in _coarse_nodes(b.surface, 5):
                    rows.append(check_hu0_boundary(triple, b, q, lambda_value=lam, tol=tol.cert))
            out["results"]["hu0_boundary"] = _summarize(rows, 0)
    return out


def _summarize(rows, skipped):
    if not rows:
        return {"count": 0, "skipped": skipped, "pass_fraction": float("nan")}
    residuals = np.array([r.residual for r in rows])
    return {
        "count": len(rows),
        "skipped": skipped,
        "pass_fraction": float(np.mean([r.verdict == "PASS" for r in rows])),
        "max_residual": float(residuals.max()),
        "median_residual": float(np.median(residuals)),
        "rows": rows,
    }
