"""Tolerance taxonomy shared by every check.

kernel : finite-difference truncation floor (relative).
quad   : quadrature agreement (relative).
cert   : pass/fail threshold for identities on normalized residuals
         (absolute); third-derivative identities use ``cert_third``.
psd_slack : slack for eigenvalue nonnegativity verdicts.
constancy : band for "is constant" predicates (surface gravity, Lambda).
ode    : drift and comparison slack for integrated traces.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    kernel: float = 1e-6
    quad: float = 1e-8
    cert: float = 1e-5
    cert_third: float = 1e-4
    psd_slack: float = 1e-8
    constancy: float = 1e-5
    ode: float = 1e-8

    def with_overrides(self, **kw) -> "Tolerances":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


DEFAULT = Tolerances()
