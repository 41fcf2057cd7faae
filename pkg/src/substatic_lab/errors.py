"""Exception types shared across the library."""


class SubstaticError(Exception):
    """Base class for all library errors."""


class OutOfDomain(SubstaticError):
    """A point lies outside the admissible chart domain."""


class SingularMetric(SubstaticError):
    """Metric matrix is not invertible (or not positive definite) at a point."""


class MetricDegenerate(SubstaticError):
    """A perturbation pushed the metric out of the positive definite cone."""


class DegenerateInducedMetric(SubstaticError):
    """Induced surface metric failed to be positive definite at a node."""


class LapseNonPositive(SubstaticError):
    """Operation requires u > 0 at the evaluation point."""


class LambdaNotConstant(SubstaticError):
    """Operation requires S - tr Q to be constant within the constancy tolerance."""


class CriticalPoint(SubstaticError):
    """|grad u| too small for a level-set quantity to be well conditioned."""


class ExtrapolationFailed(SubstaticError):
    """Boundary extrapolation could not be carried out."""


class NoBoundary(SubstaticError):
    """Operation requires a nonempty boundary."""


class WrongDimension(SubstaticError):
    """Operation is only defined in a specific dimension."""


class GravityNotNormalized(SubstaticError):
    """Surface gravities are not all equal to 1; rescale u first."""


class LeftDomain(SubstaticError):
    """An integrated curve reached the domain edge.

    Carries the exit record as ``args[1]`` when available.
    """


class StepUnderflow(SubstaticError):
    """Adaptive step control requested a step below the hard floor."""


class FlowLeftDomain(SubstaticError):
    """Normal flow of a surface left the chart domain."""


class FocalPoint(SubstaticError):
    """Normal flow or Riccati integration hit a focal point."""


class BlowupBeforeHorizon(SubstaticError):
    """Riccati trace blew up before reaching the requested parameter."""


class DistanceEstimationFailed(SubstaticError):
    """Metric-ball membership could not be decided."""


class KappaTooLarge(SubstaticError):
    """Curvature bound kappa >= 1/(m-1); the quartic estimate does not apply."""


class HypothesesNotMet(SubstaticError):
    """A theorem-level check was invoked with its hypotheses violated.

    ``args[1]``, when present, lists which hypotheses failed.
    """


class UnknownEntry(SubstaticError):
    """No catalog entry registered under that name."""


class UnknownCheck(SubstaticError):
    """No check registered under that name."""


class ParseError(SubstaticError):
    """Scenario file could not be parsed or failed schema validation."""
