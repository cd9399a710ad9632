"""Chains of the left-invariant CR structures on SU(2)."""
from .closed_form import A1ChainSpec, chain_a1, circle_fit_check, complex_line_check, hopf_chain
from .exceptions import (
    CRChainsError,
    DegenerateBifurcation,
    DriftError,
    EmptyLevelSet,
    HomoclinicRegime,
    MomentumLevelViolation,
    NotClosedWithinHorizon,
    NumericalFailure,
    ParameterError,
    StiffnessError,
)
from .holonomy import (
    ChainClassification,
    ChainKind,
    PhaseReport,
    classify_chain,
    delta_theta,
    dynamic_phase,
    geometric_phase,
    holonomy_from_reconstruction,
)
from .integrator import PeriodReport, Trajectory, detect_period, integrate_reduced, reconstruct_chain
from .lie_group import GroupElement, ReducedState
from .reduced_dynamics import c_of_a, critical_points, homoclinic_level, k_on_paraboloid, level_curve

__version__ = "0.1.0"

__all__ = [
    "A1ChainSpec", "chain_a1", "circle_fit_check", "complex_line_check", "hopf_chain",
    "CRChainsError", "DegenerateBifurcation", "DriftError", "EmptyLevelSet", "HomoclinicRegime",
    "MomentumLevelViolation", "NotClosedWithinHorizon", "NumericalFailure", "ParameterError",
    "StiffnessError", "ChainClassification", "ChainKind", "PhaseReport", "classify_chain",
    "delta_theta", "dynamic_phase", "geometric_phase", "holonomy_from_reconstruction",
    "PeriodReport", "Trajectory", "detect_period", "integrate_reduced", "reconstruct_chain",
    "GroupElement", "ReducedState", "c_of_a", "critical_points", "homoclinic_level",
    "k_on_paraboloid", "level_curve",
]
