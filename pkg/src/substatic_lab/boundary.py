"""Boundary integral inequalities and their divergence-theorem audit.

The family being certified is

    sum_i kappa_i^b  int_{Sigma_i} ( S_Sigma - (m-2)/m S - 2/m tr Q )  >= 0

for b >= -1/(m-1), with equality exactly on the round hemisphere; its
three-dimensional corollary bounds horizon areas by 24 pi / (S - tr Q)
per surface-gravity group; and the closing constraint bounds the boundary
scalar curvature from below when all gravities are normalized to 1.

Boundary values of S, tr Q and |grad u| come from the kernel's transversal
ray extrapolation; S_Sigma comes from the intrinsic kernel on the induced
surface chart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernel
from .chart import ScalarField
from .errors import GravityNotNormalized, NoBoundary, WrongDimension
from .fd import fsum
from .quadrature import volume_integral
from .tolerances import Tolerances
from .triple import SubstaticTriple

__all__ = [
    "ComponentData",
    "boundary_component_data",
    "bgh_functional",
    "divergence_audit",
    "corollary_3d",
    "boundary_scalar_constraint",
]


@dataclass
class ComponentData:
    """Per-boundary-component quadrature data reused by every check."""

    label: str
    kappa: float
    kappa_spread: float
    area: float
    int_S_sigma: float
    int_S_ambient: float
    int_trQ: float
    nodes: list
    weights: list
    dA: np.ndarray
    S_sigma: np.ndarray
    S_ambient: np.ndarray
    trQ: np.ndarray
    euler_characteristic: int
    euler_residual: float


def boundary_component_data(
    triple: SubstaticTriple,
    resolution: Optional[Sequence[int]] = None,
    gravity_nodes: int = 8,
) -> list:
    """Extrapolated boundary fields and intrinsic curvature per component."""
    if not triple.boundary:
        raise NoBoundary(f"{triple.name} has no boundary component")
    out = []
    m = triple.dim
    for b in triple.boundary:
        surf = b.surface if resolution is None else b.surface.with_resolution(resolution)
        kappa, spread = b.surface_gravity(triple, nq=gravity_nodes)
        ichart = surf.induced_chart(margins=([2e-4] * (m - 1), [2e-4] * (m - 1)))
        qs, ws = surf.grid()
        dA, ssig, samb, trq = [], [], [], []
        for q in qs:
            dA.append(surf.area_element(q))
            ssig.append(kernel.scalar_curvature(ichart, q))
            samb.append(float(b.extrapolate(lambda p: kernel.scalar_curvature(triple.chart, p), q)))
            trq.append(float(b.extrapolate(lambda p: triple.trace_q(p), q)))
        dA = np.array(dA)
        ssig = np.array(ssig)
        samb = np.array(samb)
        trq = np.array(trq)
        wsarr = np.array(ws)
        area = fsum(wsarr * dA)
        int_ss = fsum(wsarr * dA * ssig)
        int_sa = fsum(wsarr * dA * samb)
        int_tq = fsum(wsarr * dA * trq)
        chi_real = int_ss / (4 * np.pi)
        chi = int(2 * round(chi_real / 2.0))
        out.append(
            ComponentData(
                label=b.label,
                kappa=kappa,
                kappa_spread=spread,
                area=area,
                int_S_sigma=int_ss,
                int_S_ambient=int_sa,
                int_trQ=int_tq,
                nodes=qs,
                weights=ws,
                dA=dA,
                S_sigma=ssig,
                S_ambient=samb,
                trQ=trq,
                euler_characteristic=chi,
                euler_residual=abs(chi_real - chi),
            )
        )
    return out


@dataclass
class BGHReport:
    b_values: np.ndarray
    V: np.ndarray
    components: list
    hypotheses: dict
    verdicts: dict
    crusciel_value: Optional[float] = None
    crusciel_difference: Optional[float] = None
    rigidity_signal: Optional[float] = None


def bgh_functional(
    triple: SubstaticTriple,
    b_values,
    components: Optional[list] = None,
    tol: Optional[Tolerances] = None,
    n_rigidity_samples: int = 64,
) -> BGHReport:
    """The boundary functional V(b) for each requested exponent b.

    Lambda non-constancy and sub-threshold b are reported as hypothesis
    warnings; the functional is still computed.  When the triple is
    vacuum-normalized (tr Q ~ 0, S ~ m(m-1) on the boundary) the classical
    b = 1 form sum kappa_i int (S_Sigma - (m-2)(m-1)) is evaluated from the
    same per-node data and the difference recorded.
    """
    tol = tol or triple.tol
    m = triple.dim
    comps = components or boundary_component_data(triple)
    b_values = np.atleast_1d(np.asarray(b_values, dtype=float))

    lam = triple.lambda_constant(n=128)
    b_floor = -1.0 / (m - 1)
    hypotheses = {
        "lambda_constant": lam["is_constant"],
        "lambda_spread": lam["spread"],
        "Lambda": lam["Lambda"],
        "b_floor": b_floor,
        "b_below_floor": [float(b) for b in b_values if b < b_floor - 1e-12],
    }

    V = []
    for b in b_values:
        terms = []
        for c in comps:
            integrand = c.int_S_sigma - (m - 2) / m * c.int_S_ambient - 2.0 / m * c.int_trQ
            terms.append(c.kappa**b * integrand)
        V.append(fsum(terms))
    V = np.array(V)

    scale = max(1.0, max(abs(c.int_S_sigma) for c in comps))
    nonneg = bool(np.all(V >= -tol.quad * scale - tol.cert))

    # rigidity signal: size of the traceless Hessian of u over the interior
    pts = triple.sample_interior(n_rigidity_samples, seed=11)
    ring_max = 0.0
    for p in pts:
        jet = kernel.metric_jet(triple.chart, p)
        hess = kernel.hessian(triple.chart, triple.u, p)
        lap = float(np.einsum("ij,ij->", jet.inv, hess))
        ring = hess - (lap / m) * jet.g
        ring_max = max(ring_max, float(np.max(np.abs(ring))))
    equality = bool(np.all(np.abs(V) < 10 * tol.cert * scale) and ring_max < 10 * tol.cert)

    crus_val = None
    crus_diff = None
    vacuum_normalized = all(
        abs(c.int_trQ) < 1e-3 * max(1.0, c.area)
        and abs(c.int_S_ambient - m * (m - 1) * c.area) < 1e-3 * max(1.0, c.area)
        for c in comps
    )
    if vacuum_normalized:
        crus_val = fsum(
            c.kappa * (c.int_S_sigma - (m - 2) * (m - 1) * c.area) for c in comps
        )
        if 1.0 in b_values:
            v1 = float(V[list(b_values).index(1.0)])
            crus_diff = abs(v1 - crus_val)

    return BGHReport(
        b_values=b_values,
        V=V,
        components=comps,
        hypotheses=hypotheses,
        verdicts={"nonneg": nonneg, "equality_case": equality},
        crusciel_value=crus_val,
        crusciel_difference=crus_diff,
        rigidity_signal=ring_max,
    )


def divergence_audit(
    triple: SubstaticTriple,
    a: float,
    vol_ns: Optional[Sequence[int]] = None,
    boundary_resolution: Optional[Sequence[int]] = None,
    n_interior: int = 200,
    tol: Optional[Tolerances] = None,
    u_band: float = 0.04,
) -> dict:
    """Divergence-theorem audit of the field X = (2F)^a grad F / u.

    F = |grad u|^2/2 + Lambda u^2/(2m) with Lambda the sampled mean.  The
    boundary side integrates the extrapolated flux <X, nu>; the volume side
    integrates div X assembled from the F-field jet (the Laplacian of F is
    taken by differentiating the computed F, not by reusing the flux path).
    Volume nodes with u below ``u_band`` take their integrand from the
    transversal ray extrapolation, since div X is a 0/0 quotient there.
    Also reports the pointwise minimum of div X over an interior sample and
    whether a is above the admissibility floor 2a+1 >= -1/(m-1).
    """
    tol = tol or triple.tol
    if not triple.boundary:
        raise NoBoundary(f"{triple.name} has no boundary")
    m = triple.dim
    chart = triple.chart
    lam_rep = triple.lambda_constant(n=128)
    lam = lam_rep["Lambda"]

    a_floor = -m / (2.0 * (m - 1))
    flag = a < a_floor - 1e-12

    F = ScalarField(
        lambda p: 0.5 * kernel.grad_norm2(chart, triple.u, p) + lam / (2 * m) * triple.u(p) ** 2,
        name="bgh-F",
    )

    def flux(p):
        jet = kernel.metric_jet(chart, p)
        dF = kernel.scalar_jet(chart, F, p)[1]
        du = kernel.gradient_covector(chart, triple.u, p)
        gu = jet.inv @ du
        nrm = np.sqrt(max(gu @ jet.g @ gu, 1e-300))
        nu = -gu / nrm
        fval = F(p)
        return (2.0 * fval) ** a * float(dF @ nu) / triple.u(p)

    lhs_terms = []
    for b in triple.boundary:
        surf = (
            b.surface
            if boundary_resolution is None
            else b.surface.with_resolution(boundary_resolution)
        )
        qs, ws = surf.grid()
        for q, w in zip(qs, ws):
            da = surf.area_element(q)
            lhs_terms.append(w * da * float(b.extrapolate(flux, q)))
    lhs = fsum(lhs_terms)

    def divx(p):
        fval = F(p)
        jet = kernel.metric_jet(chart, p)
        _, dF, _ = kernel.scalar_jet(chart, F, p)
        lapF = kernel.laplacian(chart, F, p)
        du = kernel.gradient_covector(chart, triple.u, p)
        gu = jet.inv @ du
        uval = triple.u(p)
        dF2 = float(dF @ jet.inv @ dF)
        return (2.0 * fval) ** a * (
            a * dF2 / (fval * uval) + lapF / uval - float(dF @ gu) / uval**2
        )

    def divx_safe(p):
        # div X extends continuously to u = 0 but is a 0/0 quotient there;
        # near the boundary sample deeper along the inward ray and
        # extrapolate back to the node.
        if triple.u(p) >= u_band:
            return divx(p)
        b = min(
            triple.boundary,
            key=lambda bb: abs(
                p[int(np.argmax(np.abs(bb.inward)))]
                - (chart.box.lo if bb.inward[int(np.argmax(np.abs(bb.inward)))] > 0 else chart.box.hi)[
                    int(np.argmax(np.abs(bb.inward)))
                ]
            ),
        )
        d0 = float(np.max(b.ray_offsets)) / 2.0
        t0 = d0
        while triple.u(p + t0 * b.inward) < u_band and t0 < 40 * d0:
            t0 += d0
        offs = [t0 + k * d0 for k in range(4)]
        return float(kernel.extrapolate_along_ray(divx, p, b.inward, offs))

    rhs = volume_integral(chart, integrand=divx_safe, ns=vol_ns or [24] * m)

    pts = triple.sample_interior(n_interior, seed=17)
    div_min = min(divx(p) for p in pts)

    scale = max(1.0, abs(lhs), abs(rhs))
    return {
        "a": a,
        "Lambda": lam,
        "lambda_constant": lam_rep["is_constant"],
        "lambda_spread": lam_rep["spread"],
        "lhs_boundary_flux": lhs,
        "rhs_volume_divergence": rhs,
        "residual": abs(lhs - rhs),
        "scale": scale,
        "agreement": abs(lhs - rhs) < 1e-5 * scale,
        "div_min_interior": float(div_min),
        "div_nonnegative": div_min >= -tol.cert,
        "a_floor": a_floor,
        "hypothesis_violated": flag,
    }


def corollary_3d(
    triple: SubstaticTriple,
    components: Optional[list] = None,
    tol: Optional[Tolerances] = None,
) -> dict:
    """Surface-gravity-grouped horizon area bounds in dimension 3.

    Groups boundary components by kappa (ascending, ties within the
    constancy tolerance), checks |Sigma_hat_top| <= 24 pi / (S - tr Q),
    estimates Euler characteristics by Gauss-Bonnet, and walks the
    equality cascade downward from the top group.
    """
    tol = tol or triple.tol
    if triple.dim != 3:
        raise WrongDimension("the area corollary is three-dimensional")
    comps = components or boundary_component_data(triple)

    lam_rep = triple.lambda_constant(n=128)
    lam = lam_rep["Lambda"]
    s_minus_trq = 2.0 * lam  # (m-1) Lambda with m = 3
    bound = 24.0 * np.pi / s_minus_trq if s_minus_trq > 0 else np.inf

    order = np.argsort([c.kappa for c in comps])
    groups = []
    for i in order:
        c = comps[i]
        if groups and abs(c.kappa - groups[-1]["kappa"]) < max(tol.constancy, 1e-4 * abs(c.kappa)):
            groups[-1]["members"].append(c)
            groups[-1]["area"] += c.area
        else:
            groups.append({"kappa": c.kappa, "members": [c], "area": c.area})

    for g in groups:
        g["has_sphere"] = any(c.euler_characteristic == 2 for c in g["members"])
        g["area_bound"] = bound
        g["bound_satisfied"] = g["area"] <= bound * (1 + 1e-6) + tol.cert
        g["equality"] = abs(g["area"] - bound) < 1e-4 * max(1.0, bound)

    top = groups[-1]
    cascade = []
    all_eq = True
    for g in reversed(groups):
        if g["equality"]:
            cascade.append(g["kappa"])
        else:
            all_eq = False
            break

    return {
        "Lambda": lam,
        "lambda_constant": lam_rep["is_constant"],
        "S_minus_trQ": s_minus_trq,
        "S_minus_trQ_positive": s_minus_trq > 0,
        "area_bound": bound,
        "groups": groups,
        "top_group_bound_ok": top["bound_satisfied"],
        "top_group_has_sphere": top["has_sphere"],
        "equality_cascade_kappas": cascade,
        "full_equality_case": all_eq and len(cascade) == len(groups),
        "euler_characteristics": [c.euler_characteristic for c in comps],
        "euler_residuals": [c.euler_residual for c in comps],
        "euler_ok": all(c.euler_residual <= 0.1 for c in comps),
    }


def boundary_scalar_constraint(
    triple: SubstaticTriple,
    components: Optional[list] = None,
    tol: Optional[Tolerances] = None,
) -> dict:
    """min over boundary nodes of S_Sigma - Lambda (m-1)(m-2)/m - tr Q.

    Requires every surface gravity equal to 1 within the constancy band
    (rescale u otherwise); equality of the minimum with zero is the round
    hemisphere signature.
    """
    tol = tol or triple.tol
    comps = components or boundary_component_data(triple)
    m = triple.dim
    bad = [c.label for c in comps if abs(c.kappa - 1.0) > 100 * tol.constancy]
    if bad:
        raise GravityNotNormalized(
            f"surface gravities not normalized to 1 on {bad}; rescale u"
        )
    lam = triple.lambda_constant(n=128)["Lambda"]
    slack = np.inf
    argmin = None
    for c in comps:
        vals = c.S_sigma - lam * (m - 1) * (m - 2) / m - c.trQ
        i = int(np.argmin(vals))
        if vals[i] < slack:
            slack = float(vals[i])
            argmin = (c.label, c.nodes[i])
    return {
        "min_slack": slack,
        "verdict": "PASS" if slack >= -tol.cert else "FAIL",
        "at": argmin,
        "Lambda": lam,
    }
