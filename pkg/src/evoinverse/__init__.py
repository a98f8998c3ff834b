"""Recover a time-dependent coefficient ``gamma(t)`` in
``u' = A(t) u + gamma(t) u + f(t)`` from scalar measurements
``phi(t) = <u(t), w>`` through a second-kind Volterra equation.
"""

from .problem import (BreakdownError, EvoInverseError, HypothesisError, MatrixFamily,
                      MeasurementSeries, Pairing, Parabolic1D, ProblemSpec, TimeGrid, pair,
                      validate_spec)
from .evolution import Propagator, Tridiagonal, assemble_parabolic_operator, m_matrix_check
from .volterra import (KernelSet, XiSeries, assemble_kernels, positivity_horizon,
                       solve_dense_oracle, solve_stepwise)
from .forward import TrajectoryRecord, forward_direct, forward_mild, synthesize_phi, xi_from_gamma
from .inversion import (GammaSeries, HypothesisReport, InversionError, ResidualReport,
                        check_hypotheses, recover_gamma, smooth_phi, verify_by_forward)
from .presets import PRESETS, get_preset
from .pipeline import InversionResult, invert

__version__ = "0.1.0"

__all__ = [
    "BreakdownError", "EvoInverseError", "HypothesisError", "InversionError",
    "TimeGrid", "Pairing", "MatrixFamily", "Parabolic1D", "ProblemSpec", "MeasurementSeries",
    "pair", "validate_spec",
    "Propagator", "Tridiagonal", "assemble_parabolic_operator", "m_matrix_check",
    "KernelSet", "XiSeries", "assemble_kernels", "solve_stepwise", "solve_dense_oracle",
    "positivity_horizon",
    "TrajectoryRecord", "forward_direct", "forward_mild", "synthesize_phi", "xi_from_gamma",
    "GammaSeries", "HypothesisReport", "ResidualReport", "check_hypotheses", "recover_gamma",
    "smooth_phi", "verify_by_forward",
    "PRESETS", "get_preset", "InversionResult", "invert",
]
