"""Closed-form fixture geometries with analytic ground truth.

Every downstream check is exercised against these entries.  Each entry
records its analytic ground truth together with a provenance tag:
``closed-form`` (hand-derived constants), ``derived`` (values produced by
an independent oracle computation), or ``convention`` (normalization
choices).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chart import Box, Chart, DerivConfig, ScalarField
from .errors import MetricDegenerate, UnknownEntry
from .surfaces import LevelSurface
from .triple import BoundarySurface, MatterSource, SubstaticTriple

__all__ = [
    "CatalogEntry",
    "load",
    "names",
    "perturb",
    "isotropic_radius",
    "areal_radius",
]

_ANALYTIC_CFG = DerivConfig(scheme="richardson", rel_step=1e-4, rel_step_second=5e-4)


@dataclass
class CatalogEntry:
    name: str
    triple: SubstaticTriple
    ground_truth: dict
    build_params: dict = field(default_factory=dict)
    rebuild: Optional[Callable[..., "CatalogEntry"]] = None


# ---------------------------------------------------------------------------
# sphere helpers
# ---------------------------------------------------------------------------


def _sphere_chart(radius: float = 1.0, r_hi: float = np.pi / 2, name: str = "sphere-cap"):
    """Geodesic polar chart on the round 3-sphere of given radius.

    Coordinates (r, theta, phi); r is arclength from the pole, the
    boundary (if any) is the coordinate face r = r_hi.
    """
    R = radius

    def metric(p):
        r, th = p[0], p[1]
        s = R * np.sin(r / R)
        return np.diag([1.0, s * s, (s * np.sin(th)) ** 2])

    def partials(p):
        r, th = p[0], p[1]
        s = R * np.sin(r / R)
        ds = np.cos(r / R)
        d = np.zeros((3, 3, 3))
        d[0, 1, 1] = 2 * s * ds
        d[0, 2, 2] = 2 * s * ds * np.sin(th) ** 2
        d[1, 2, 2] = s * s * 2 * np.sin(th) * np.cos(th)
        return d

    box = Box.build(
        [(0.0, r_hi), (0.0, np.pi), (0.0, 2 * np.pi)],
        margins=[(1e-3, 0.0), (1e-3, 1e-3), (0.0, 0.0)],
        periodic=[False, False, True],
    )
    return Chart(box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG, name=name)


def _round_sphere_surface(chart: Chart, r0: float, outward_sign: float, resolution=(48, 96), name="sphere"):
    embed = lambda q: np.array([r0, q[0], q[1]])
    jac = lambda q: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pbox = Box.build([(0.0, np.pi), (0.0, 2 * np.pi)], periodic=[False, True])
    orient = lambda q, p: np.array([outward_sign, 0.0, 0.0])
    return LevelSurface(chart, embed, pbox, orient, jacobian=jac, resolution=list(resolution), name=name)


# ---------------------------------------------------------------------------
# entries
# ---------------------------------------------------------------------------


def hemisphere(m: int = 3, radius: float = 1.0, resolution=(48, 96)) -> CatalogEntry:
    """Round hemisphere cap with the height-function lapse u = cos(r/R)."""
    if m != 3:
        raise UnknownEntry("hemisphere fixtures are built in dimension 3")
    R = radius
    chart = _sphere_chart(R, r_hi=R * np.pi / 2, name=f"hemisphere-{m}")
    u = ScalarField(
        lambda p: np.cos(p[0] / R),
        analytic_grad=lambda p: np.array([-np.sin(p[0] / R) / R, 0.0, 0.0]),
        name="height",
    )
    bsurf = BoundarySurface(
        _round_sphere_surface(chart, R * np.pi / 2, +1.0, resolution, name="equator"),
        inward=np.array([-1.0, 0.0, 0.0]),
        label="equator",
    )
    triple = SubstaticTriple(
        chart,
        u,
        boundary=[bsurf],
        source=MatterSource("vacuum"),
        sampling_shrink=np.array([0.10 * R * np.pi / 2, 0.20, 0.0]),
        name=f"hemisphere-{m}",
    )
    gt = {
        "S": (m * (m - 1) / R**2, "closed-form"),
        "Lambda": (m / R**2, "closed-form"),
        "kappa": (1.0 / R, "closed-form"),
        "boundary_area": (4 * np.pi * R**2, "closed-form"),
        "Q_rank": (0, "closed-form"),
        "vacuum": (True, "closed-form"),
        "equality_case": (True, "closed-form"),
        "compact": (True, "closed-form"),
    }
    return CatalogEntry(f"hemisphere-{m}", triple, gt, {"m": m, "radius": radius})


def isotropic_radius(r_areal: float, M: float) -> float:
    """Isotropic radius of an areal radius r >= 2M."""
    return 0.5 * (r_areal - M + math.sqrt(r_areal * (r_areal - 2 * M)))


def areal_radius(rbar: float, M: float) -> float:
    return rbar * (1 + M / (2 * rbar)) ** 2


def schwarzschild(M: float = 1.0, r_max: float = 20.0, resolution=(48, 96)) -> CatalogEntry:
    """Schwarzschild spatial slice in isotropic coordinates.

    g = psi^4 (drbar^2 + rbar^2 dOmega^2), psi = 1 + M/(2 rbar), with lapse
    u = (1 - M/(2 rbar)) / (1 + M/(2 rbar)).  The horizon rbar = M/2 is a
    smooth chart face where u vanishes; areal radius there is 2M and the
    surface gravity is 1/(4M).
    """
    rb_min = M / 2
    rb_max = isotropic_radius(r_max, M)
    L = rb_max - rb_min

    def psi(rb):
        return 1.0 + M / (2 * rb)

    def metric(p):
        rb, th = p[0], p[1]
        c = psi(rb) ** 4
        return np.diag([c, c * rb * rb, c * (rb * np.sin(th)) ** 2])

    def partials(p):
        rb, th = p[0], p[1]
        f = psi(rb)
        df = -M / (2 * rb * rb)
        d = np.zeros((3, 3, 3))
        dc = 4 * f**3 * df
        d[0, 0, 0] = dc
        d[0, 1, 1] = dc * rb * rb + f**4 * 2 * rb
        d[0, 2, 2] = (dc * rb * rb + f**4 * 2 * rb) * np.sin(th) ** 2
        d[1, 2, 2] = f**4 * rb * rb * 2 * np.sin(th) * np.cos(th)
        return d

    box = Box.build(
        [(rb_min, rb_max), (0.0, np.pi), (0.0, 2 * np.pi)],
        margins=[(0.0, 0.0), (1e-3, 1e-3), (0.0, 0.0)],
        periodic=[False, False, True],
    )
    step_scale = lambda p: np.array([min(1.0, 4.0 * p[0] / L), 1.0, 1.0])
    chart = Chart(
        box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG,
        step_scale=step_scale, name="schwarzschild-iso",
    )

    def u_fn(p):
        rb = p[0]
        return (1.0 - M / (2 * rb)) / (1.0 + M / (2 * rb))

    def du_fn(p):
        rb = p[0]
        return np.array([(M / rb**2) / psi(rb) ** 2, 0.0, 0.0])

    u = ScalarField(u_fn, analytic_grad=du_fn, name="schwarzschild-lapse")
    horizon = BoundarySurface(
        _round_sphere_surface(chart, rb_min, -1.0, resolution, name="horizon"),
        inward=np.array([1.0, 0.0, 0.0]),
        label="horizon",
        ray_offsets=[0.02, 0.04, 0.06, 0.08],
    )
    triple = SubstaticTriple(
        chart,
        u,
        boundary=[horizon],
        source=MatterSource("vacuum"),
        sampling_shrink=np.array([0.25, 0.20, 0.0]),
        name="schwarzschild",
    )
    gt = {
        "S": (0.0, "closed-form"),
        "Lambda": (0.0, "closed-form"),
        "kappa": (1.0 / (4 * M), "derived"),
        "horizon_area": (16 * np.pi * M * M, "closed-form"),
        "vacuum": (True, "closed-form"),
        "u_complete_end": (True, "derived"),
        "compact": (False, "closed-form"),
    }
    return CatalogEntry("schwarzschild-1", triple, gt, {"M": M, "r_max": r_max})


def flat_cylinder(s_max: float = 40.0, torus_len: float = 2 * np.pi, lapse: str = "linear",
                  resolution=(32, 32)) -> CatalogEntry:
    """Product end [0, s_max] x T^2 with flat metric.

    ``lapse`` selects u = s (the flat sub-static end, boundary at s = 0)
    or u = exp(-s) (a toy end whose u-integral converges).
    """
    box = Box.build(
        [(0.0, s_max), (0.0, torus_len), (0.0, torus_len)],
        periodic=[False, True, True],
    )
    chart = Chart(
        box,
        lambda p: np.eye(3),
        analytic_partials=lambda p: np.zeros((3, 3, 3)),
        deriv_config=_ANALYTIC_CFG,
        name="flat-cylinder",
    )
    if lapse == "linear":
        u = ScalarField(lambda p: p[0], analytic_grad=lambda p: np.array([1.0, 0.0, 0.0]), name="s")
        pbox = Box.build([(0.0, torus_len), (0.0, torus_len)], periodic=[True, True])
        surf = LevelSurface(
            chart,
            lambda q: np.array([0.0, q[0], q[1]]),
            pbox,
            lambda q, p: np.array([-1.0, 0.0, 0.0]),
            jacobian=lambda q: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            resolution=list(resolution),
            name="torus-foot",
        )
        bnd = [BoundarySurface(surf, inward=np.array([1.0, 0.0, 0.0]), label="torus-foot",
                               ray_offsets=[0.05, 0.10, 0.15, 0.20])]
        name = "flat-cylinder-T2"
        gt = {
            "S": (0.0, "closed-form"),
            "Lambda": (0.0, "closed-form"),
            "kappa": (1.0, "closed-form"),
            "boundary_area": (torus_len**2, "closed-form"),
            "vacuum": (True, "closed-form"),
            "u_complete_end": (True, "closed-form"),
            "u_integral_growth": (2.0, "closed-form"),
            "u_inv_integral_growth": ("log", "closed-form"),
        }
    else:
        u = ScalarField(
            lambda p: np.exp(-p[0]),
            analytic_grad=lambda p: np.array([-np.exp(-p[0]), 0.0, 0.0]),
            name="exp(-s)",
        )
        bnd = []
        name = "exp-end-toy"
        gt = {
            "u_complete_end": (False, "closed-form"),
            "Q_psd": (True, "closed-form"),
        }
    triple = SubstaticTriple(
        chart,
        u,
        boundary=bnd,
        source=MatterSource("vacuum") if lapse == "linear" else None,
        sampling_shrink=np.array([min(1.0, 0.05 * s_max), 0.0, 0.0]),
        name=name,
    )
    return CatalogEntry(name, triple, gt, {"s_max": s_max, "lapse": lapse})


def flat_space(r_max: float = 12.0) -> CatalogEntry:
    """Euclidean space in polar coordinates with u = 1."""

    def metric(p):
        r, th = p[0], p[1]
        return np.diag([1.0, r * r, (r * np.sin(th)) ** 2])

    def partials(p):
        r, th = p[0], p[1]
        d = np.zeros((3, 3, 3))
        d[0, 1, 1] = 2 * r
        d[0, 2, 2] = 2 * r * np.sin(th) ** 2
        d[1, 2, 2] = r * r * 2 * np.sin(th) * np.cos(th)
        return d

    box = Box.build(
        [(0.0, r_max), (0.0, np.pi), (0.0, 2 * np.pi)],
        margins=[(1e-3, 0.0), (1e-3, 1e-3), (0.0, 0.0)],
        periodic=[False, False, True],
    )
    chart = Chart(box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG, name="flat-R3")
    u = ScalarField.constant(1.0)
    triple = SubstaticTriple(
        chart, u, source=MatterSource("vacuum"),
        sampling_shrink=np.array([0.4, 0.2, 0.0]), name="flat-R3",
    )
    gt = {"S": (0.0, "closed-form"), "vacuum": (True, "closed-form")}
    return CatalogEntry("flat-R3", triple, gt, {"r_max": r_max})


def round_sphere(radius: float = 1.0) -> CatalogEntry:
    """Full round 3-sphere (both poles excluded by margins)."""
    R = radius

    def metric(p):
        r, th = p[0], p[1]
        s = R * np.sin(r / R)
        return np.diag([1.0, s * s, (s * np.sin(th)) ** 2])

    def partials(p):
        r, th = p[0], p[1]
        s = R * np.sin(r / R)
        ds = np.cos(r / R)
        d = np.zeros((3, 3, 3))
        d[0, 1, 1] = 2 * s * ds
        d[0, 2, 2] = 2 * s * ds * np.sin(th) ** 2
        d[1, 2, 2] = s * s * 2 * np.sin(th) * np.cos(th)
        return d

    box = Box.build(
        [(0.0, np.pi * R), (0.0, np.pi), (0.0, 2 * np.pi)],
        margins=[(1e-3, 1e-3), (1e-3, 1e-3), (0.0, 0.0)],
        periodic=[False, False, True],
    )
    chart = Chart(box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG, name="round-S3")
    u = ScalarField.constant(1.0)
    triple = SubstaticTriple(chart, u, sampling_shrink=np.array([0.25, 0.25, 0.0]), name="round-S3")
    return CatalogEntry("round-S3", triple, {"S": (6.0 / R**2, "closed-form")}, {"radius": radius})


def perfect_fluid(A: float = 1.2, B: float = 1.0) -> CatalogEntry:
    """Exact fluid triple on the round 3-sphere: u = A - B cos(chi).

    For A > B the lapse is positive on the whole sphere and
    Q = (2A/u) g, so rho + P = 2A/u: positive semidefinite for A > 0,
    violated everywhere for A < 0.  S - tr Q = 6 - 6A/u is genuinely
    non-constant whenever A != 0.
    """
    if A > B:
        lo, hi = 0.0, np.pi
        margins = [(1e-3, 1e-3), (1e-3, 1e-3), (0.0, 0.0)]
        shrink = np.array([0.25, 0.25, 0.0])
        name = "perfect-fluid-S3"
    else:
        # cap around the antipode where u = A - B cos chi > 0
        chi0 = math.acos(max(-1.0, min(1.0, A / B)))
        lo, hi = chi0, np.pi
        margins = [(0.15 * (hi - lo), 1e-3), (1e-3, 1e-3), (0.0, 0.0)]
        shrink = np.array([0.12 * (hi - lo), 0.25, 0.0])
        name = "perfect-fluid-nec"

    def metric(p):
        r, th = p[0], p[1]
        s = np.sin(r)
        return np.diag([1.0, s * s, (s * np.sin(th)) ** 2])

    def partials(p):
        r, th = p[0], p[1]
        s, c = np.sin(r), np.cos(r)
        d = np.zeros((3, 3, 3))
        d[0, 1, 1] = 2 * s * c
        d[0, 2, 2] = 2 * s * c * np.sin(th) ** 2
        d[1, 2, 2] = s * s * 2 * np.sin(th) * np.cos(th)
        return d

    box = Box.build(
        [(lo, hi), (0.0, np.pi), (0.0, 2 * np.pi)],
        margins=margins,
        periodic=[False, False, True],
    )
    chart = Chart(box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG, name=name)
    u = ScalarField(
        lambda p: A - B * np.cos(p[0]),
        analytic_grad=lambda p: np.array([B * np.sin(p[0]), 0.0, 0.0]),
        name="fluid-lapse",
    )
    rho_plus_p = lambda p: 2.0 * A / (A - B * np.cos(p[0]))
    source = MatterSource(
        "perfect_fluid",
        rho=ScalarField(lambda p: 0.5 * rho_plus_p(p), name="rho"),
        pressure=ScalarField(lambda p: 0.5 * rho_plus_p(p), name="P"),
    )
    triple = SubstaticTriple(chart, u, source=source, sampling_shrink=shrink, name=name)
    gt = {
        "S": (6.0, "closed-form"),
        "q_isotropy_coefficient": ("2A/u", "closed-form"),
        "nec": (A > 0, "closed-form"),
        "lambda_constant": (False, "closed-form"),
    }
    return CatalogEntry(name, triple, gt, {"A": A, "B": B})


def reissner_nordstrom(M: float = 1.0, q: float = 0.8, r_lo: float = 2.0, r_hi: float = 6.0) -> CatalogEntry:
    """Charged static slice on an annulus outside the horizon.

    u^2 = 1 - 2M/r + q^2/r^2 with electric potential eta = sqrt(2) q / r
    (the normalization that makes the declared electrostatic Q equal the
    geometric one).  Q has eigenvalues {0, 2q^2/r^4, 2q^2/r^4} against g,
    with kernel along grad eta; the lapse is not harmonic here
    (Delta u = sqrt(u^2) q^2/r^4) and S - tr Q = -2q^2/r^4 varies.
    """

    def u2(r):
        return 1.0 - 2 * M / r + q * q / (r * r)

    def metric(p):
        r, th = p[0], p[1]
        return np.diag([1.0 / u2(r), r * r, (r * np.sin(th)) ** 2])

    def partials(p):
        r, th = p[0], p[1]
        du2 = 2 * M / r**2 - 2 * q * q / r**3
        d = np.zeros((3, 3, 3))
        d[0, 0, 0] = -du2 / u2(r) ** 2
        d[0, 1, 1] = 2 * r
        d[0, 2, 2] = 2 * r * np.sin(th) ** 2
        d[1, 2, 2] = r * r * 2 * np.sin(th) * np.cos(th)
        return d

    box = Box.build(
        [(r_lo, r_hi), (0.0, np.pi), (0.0, 2 * np.pi)],
        margins=[(0.0, 0.0), (1e-3, 1e-3), (0.0, 0.0)],
        periodic=[False, False, True],
    )
    chart = Chart(box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG, name="rn-annulus")
    u = ScalarField(
        lambda p: np.sqrt(u2(p[0])),
        analytic_grad=lambda p: np.array(
            [(M / p[0] ** 2 - q * q / p[0] ** 3) / np.sqrt(u2(p[0])), 0.0, 0.0]
        ),
        name="rn-lapse",
    )
    c_eta = math.sqrt(2.0) * q
    eta = ScalarField(
        lambda p: c_eta / p[0],
        analytic_grad=lambda p: np.array([-c_eta / p[0] ** 2, 0.0, 0.0]),
        name="electric-potential",
    )
    triple = SubstaticTriple(
        chart,
        u,
        source=MatterSource("electrostatic", eta=eta),
        sampling_shrink=np.array([0.3, 0.2, 0.0]),
        name="electrostatic-annulus",
    )
    gt = {
        "q_eigenvalue": ("2 q^2/r^4 (double), 0 (radial)", "derived"),
        "lambda_constant": (False, "derived"),
        "lambda_field": ("-q^2/r^4", "derived"),
        "lapse_laplacian": ("u q^2/r^4", "derived"),
        "nec": (True, "closed-form"),
    }
    return CatalogEntry("electrostatic-annulus", triple, gt, {"M": M, "q": q})


def warped_product(s_max: float = 3.0, growth: float = 0.4) -> CatalogEntry:
    """Warped fixture g = r(y)^2 ds^2 + dy^2 on [0, s_max] x T^2.

    u(s, y) = r(y) sigma(s) with sigma = exp(growth * s): the exact local
    splitting form.  Cross-sections {s = const} are totally geodesic.
    """

    def rfun(y1, y2):
        return 1.0 + 0.2 * np.sin(y1) + 0.1 * np.cos(2 * y2)

    def drfun(y1, y2):
        return 0.2 * np.cos(y1), -0.2 * np.sin(2 * y2)

    def metric(p):
        r = rfun(p[1], p[2])
        return np.diag([r * r, 1.0, 1.0])

    def partials(p):
        r = rfun(p[1], p[2])
        d1, d2 = drfun(p[1], p[2])
        d = np.zeros((3, 3, 3))
        d[1, 0, 0] = 2 * r * d1
        d[2, 0, 0] = 2 * r * d2
        return d

    box = Box.build(
        [(0.0, s_max), (0.0, 2 * np.pi), (0.0, 2 * np.pi)],
        periodic=[False, True, True],
    )
    chart = Chart(box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG, name="warped-T2")

    def u_fn(p):
        return rfun(p[1], p[2]) * np.exp(growth * p[0])

    def du_fn(p):
        r = rfun(p[1], p[2])
        d1, d2 = drfun(p[1], p[2])
        e = np.exp(growth * p[0])
        return np.array([growth * r * e, d1 * e, d2 * e])

    u = ScalarField(u_fn, analytic_grad=du_fn, name="warped-lapse")
    triple = SubstaticTriple(chart, u, sampling_shrink=np.array([0.2, 0.0, 0.0]), name="warped-T2")
    gt = {
        "warp_rank1": (True, "closed-form"),
        "cross_section_totally_geodesic": (True, "closed-form"),
    }
    return CatalogEntry("warped-T2", triple, gt, {"s_max": s_max, "growth": growth})


def schwarzschild_de_sitter(M: float = 0.08, lam: float = 1.0, resolution=(48, 96)) -> CatalogEntry:
    """Vacuum slice with cosmological constant: two horizons, two gravities.

    u^2 = 1 - 2M/r - lam r^2 / 3 between the black-hole and cosmological
    horizons; S = 2 lam, Q = 0, and the surface gravities
    kappa = |M/r^2 - lam r / 3| at the two roots differ.
    """
    roots = np.sort(np.roots([lam / 3.0, 0.0, -1.0, 2.0 * M]))
    real = [float(np.real(z)) for z in roots if abs(np.imag(z)) < 1e-12 and np.real(z) > 0]
    if len(real) < 2:
        raise MetricDegenerate("no horizon pair; lower M or lam")
    r_b, r_c = real[0], real[1]
    gap = r_c - r_b
    eps = 1e-9 * gap

    def u2(r):
        return 1.0 - 2 * M / r - lam * r * r / 3.0

    def metric(p):
        r, th = p[0], p[1]
        return np.diag([1.0 / u2(r), r * r, (r * np.sin(th)) ** 2])

    def partials(p):
        r, th = p[0], p[1]
        du2 = 2 * M / r**2 - 2 * lam * r / 3.0
        d = np.zeros((3, 3, 3))
        d[0, 0, 0] = -du2 / u2(r) ** 2
        d[0, 1, 1] = 2 * r
        d[0, 2, 2] = 2 * r * np.sin(th) ** 2
        d[1, 2, 2] = r * r * 2 * np.sin(th) * np.cos(th)
        return d

    box = Box.build(
        [(r_b + eps, r_c - eps), (0.0, np.pi), (0.0, 2 * np.pi)],
        margins=[(0.0, 0.0), (1e-3, 1e-3), (0.0, 0.0)],
        periodic=[False, False, True],
    )
    step_scale = lambda p: np.array(
        [min(1.0, 4.0 * min(p[0] - r_b, r_c - p[0]) / gap), 1.0, 1.0]
    )
    chart = Chart(
        box, metric, analytic_partials=partials, deriv_config=_ANALYTIC_CFG,
        step_scale=step_scale, name="sds",
    )
    u = ScalarField(
        lambda p: np.sqrt(max(u2(p[0]), 0.0)),
        analytic_grad=lambda p: np.array(
            [(M / p[0] ** 2 - lam * p[0] / 3.0) / np.sqrt(max(u2(p[0]), 1e-300)), 0.0, 0.0]
        ),
        name="sds-lapse",
    )
    off = [0.04 * gap, 0.08 * gap, 0.12 * gap, 0.16 * gap]
    tight_b = [0.01 * r_b * k for k in (1, 2, 3, 4)]
    bh = BoundarySurface(
        _round_sphere_surface(chart, r_b + eps, -1.0, resolution, name="bh-horizon"),
        inward=np.array([1.0, 0.0, 0.0]),
        label="bh-horizon",
        ray_offsets=off,
        gravity_offsets=tight_b,
    )
    cosmo = BoundarySurface(
        _round_sphere_surface(chart, r_c - eps, +1.0, resolution, name="cosmo-horizon"),
        inward=np.array([-1.0, 0.0, 0.0]),
        label="cosmo-horizon",
        ray_offsets=off,
    )
    kb = abs(M / r_b**2 - lam * r_b / 3.0)
    kc = abs(M / r_c**2 - lam * r_c / 3.0)
    triple = SubstaticTriple(
        chart,
        u,
        boundary=[bh, cosmo],
        source=MatterSource("vacuum"),
        sampling_shrink=np.array([0.15 * gap, 0.2, 0.0]),
        name="schwarzschild-de-sitter",
    )
    gt = {
        "S": (2.0 * lam, "derived"),
        "Lambda": (lam, "derived"),
        "kappa_bh": (kb, "closed-form"),
        "kappa_cosmo": (kc, "closed-form"),
        "r_horizons": ((r_b, r_c), "derived"),
        "areas": ((4 * np.pi * r_b**2, 4 * np.pi * r_c**2), "closed-form"),
        "vacuum": (True, "derived"),
        "compact": (True, "closed-form"),
    }
    return CatalogEntry("schwarzschild-de-sitter", triple, gt, {"M": M, "lam": lam})


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, Callable[..., CatalogEntry]] = {
    "hemisphere-3": hemisphere,
    "schwarzschild-1": schwarzschild,
    "flat-cylinder-T2": flat_cylinder,
    "exp-end-toy": lambda **kw: flat_cylinder(lapse="exp", **{k: v for k, v in kw.items() if k != "lapse"}),
    "flat-R3": flat_space,
    "round-S3": round_sphere,
    "perfect-fluid-S3": perfect_fluid,
    "perfect-fluid-nec": lambda **kw: perfect_fluid(A=kw.pop("A", -0.05), B=kw.pop("B", 1.0), **kw),
    "electrostatic-annulus": reissner_nordstrom,
    "warped-T2": warped_product,
    "schwarzschild-de-sitter": schwarzschild_de_sitter,
}


def names():
    return sorted(_REGISTRY)


def load(name: str, **params) -> CatalogEntry:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownEntry(f"unknown catalog entry {name!r}; known: {', '.join(names())}")
    entry = factory(**params)
    entry.rebuild = factory
    return entry


# ---------------------------------------------------------------------------
# perturbations
# ---------------------------------------------------------------------------


def _bump_profile(t):
    """C-infinity bump on (-1, 1), equal to 1 at 0; value and derivative."""
    t = float(t)
    if abs(t) >= 1.0:
        return 0.0, 0.0
    s = 1.0 - t * t
    v = math.exp(1.0 - 1.0 / s)
    dv = v * (-2.0 * t / (s * s))
    return v, dv


def perturb(
    entry_or_triple,
    amplitude: float,
    seed: int = 0,
    target: str = "both",
    width_frac: float = 0.35,
) -> SubstaticTriple:
    """Compactly supported smooth bump perturbation of g and/or u.

    The bump sits strictly inside the sampling interior (away from
    boundary faces and coordinate margins), so boundary structure and
    near-boundary exactness are untouched.  Deterministic in ``seed``.
    """
    triple = entry_or_triple.triple if isinstance(entry_or_triple, CatalogEntry) else entry_or_triple
    if amplitude == 0.0:
        return triple
    chart = triple.chart
    m = chart.dim
    rng = np.random.default_rng(seed)
    inner = chart.box.shrunk(triple.sampling_shrink)
    lo, hi = inner.inner_lo, inner.inner_hi
    center = lo + (0.35 + 0.3 * rng.random(m)) * (hi - lo)
    width = width_frac * (hi - lo)
    width = np.minimum(width, np.minimum(center - lo, hi - center) * 0.95)
    width = np.maximum(width, 1e-3 * chart.box.lengths)
    bmat = rng.standard_normal((m, m))
    bmat = 0.5 * (bmat + bmat.T)
    bmat /= max(np.max(np.abs(np.linalg.eigvalsh(bmat))), 1e-12)

    def bump(p):
        v = 1.0
        for k in range(m):
            vk, _ = _bump_profile((p[k] - center[k]) / width[k])
            v *= vk
        return v

    def bump_grad(p):
        vals, ders = [], []
        for k in range(m):
            vk, dk = _bump_profile((p[k] - center[k]) / width[k])
            vals.append(vk)
            ders.append(dk / width[k])
        g = np.zeros(m)
        for k in range(m):
            prod = ders[k]
            for j in range(m):
                if j != k:
                    prod *= vals[j]
            g[k] = prod
        return g

    perturb_g = target in ("g", "both")
    perturb_u = target in ("u", "both")

    base_metric = chart.metric_at
    base_partials = chart.analytic_partials

    def metric(p):
        g = base_metric(p)
        if perturb_g:
            scale = np.trace(g) / m
            g = g + amplitude * bump(p) * scale * bmat
        return g

    analytic = None
    if base_partials is not None and perturb_g:
        def analytic(p):
            d = np.asarray(base_partials(p), dtype=float).copy()
            g = base_metric(p)
            scale = np.trace(g) / m
            bg = bump_grad(p)
            bv = bump(p)
            # d_k [amp * bump * (tr g / m) * B]
            dtr = np.einsum("kij,ij->k", np.asarray(base_partials(p), dtype=float), np.eye(m)) / m
            for k in range(m):
                d[k] += amplitude * (bg[k] * scale + bv * dtr[k]) * bmat
            return d
    elif base_partials is not None:
        analytic = base_partials

    new_chart = Chart(
        chart.box, metric, analytic_partials=analytic,
        deriv_config=chart.deriv_config, step_scale=chart.step_scale,
        name=chart.name + f"+bump({amplitude:g},{seed})",
    )
    if perturb_g:
        probe = halton_points(200, inner.inner_lo, inner.inner_hi, seed=seed + 1)
        for p in probe:
            if np.linalg.eigvalsh(new_chart.metric_at(p))[0] <= 0.0:
                raise MetricDegenerate("perturbation amplitude too large: metric lost positivity")

    base_u = triple.u
    if perturb_u:
        u_eval = lambda p: base_u(p) * (1.0 + amplitude * bump(p))
        if base_u.analytic_grad is not None:
            u_grad = lambda p: (
                np.asarray(base_u.analytic_grad(p), dtype=float) * (1.0 + amplitude * bump(p))
                + base_u(p) * amplitude * bump_grad(p)
            )
        else:
            u_grad = None
        new_u = ScalarField(u_eval, analytic_grad=u_grad, name=base_u.name + "+bump")
    else:
        new_u = base_u

    new_boundary = []
    for b in triple.boundary:
        s = b.surface
        new_surface = LevelSurface(
            new_chart, s.embed, s.param_box, s.orientation,
            jacobian=s._jacobian, resolution=s.resolution,
            param_step=s.param_step, name=s.name,
        )
        new_boundary.append(
            BoundarySurface(new_surface, b.inward, label=b.label, ray_offsets=b.ray_offsets)
        )
    return SubstaticTriple(
        new_chart,
        new_u,
        boundary=new_boundary,
        source=triple.source,
        tol=triple.tol,
        sampling_shrink=triple.sampling_shrink,
        name=triple.name + f"+bump({amplitude:g},{seed})",
    )
