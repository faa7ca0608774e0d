"""Exception types shared across the package."""
from __future__ import annotations


class SolsurfError(Exception):
    """Base class for all package errors."""


class NonRealComponents(SolsurfError):
    pass


class NotTraceless(SolsurfError):
    pass


class SingularMatrix(SolsurfError):
    pass


class SingularInput(SolsurfError):
    """Evaluation point lies on a singular set of an equation or Lax pair."""


class StepSizeUnderflow(SolsurfError):
    pass


class NearAiryZero(SolsurfError):
    pass


class DomainError(SolsurfError):
    pass


class MissingRSolution(SolsurfError):
    pass


class WrongParameterRegime(SolsurfError):
    pass


class UnsupportedAlpha6(SolsurfError):
    pass


class NonClosedForm(SolsurfError):
    """Tangent fields fail the integrability (closedness) check."""


class DegenerateTangents(SolsurfError):
    pass


class IsotropicNormal(SolsurfError):
    pass


class DegenerateMetric(SolsurfError):
    pass


class AsymmetricMixedDerivatives(SolsurfError):
    pass


class ConfigError(SolsurfError):
    pass
