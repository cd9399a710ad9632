"""Exception hierarchy shared by the numerical modules and the CLI."""


class CRChainsError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CRChainsError, ValueError):
    """An input parameter is outside its admissible domain."""


class DegenerateBifurcation(CRChainsError):
    """The modulus sits on the bifurcation value where the origin is degenerate."""


class NumericalFailure(CRChainsError):
    """Base for failures of the integration / root-finding machinery."""


class StiffnessError(NumericalFailure):
    """The adaptive step size underflowed."""


class DriftError(NumericalFailure):
    """A Casimir drifted beyond the hard limit during integration."""


class NotClosedWithinHorizon(NumericalFailure):
    """No return to the Poincare section was found before ``t_max``."""


class MomentumLevelViolation(NumericalFailure):
    """The holonomy element left the isotropy subgroup of the momentum value."""


class HomoclinicRegime(CRChainsError):
    """The requested level is the homoclinic figure-eight; no period exists."""


class EmptyLevelSet(CRChainsError):
    """The requested level lies below the minimum of K on the paraboloid."""
