"""End-to-end inversion: kernels, xi, gamma, checks, forward residual."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .evolution import Propagator
from .inversion import (GammaSeries, HypothesisReport, ResidualReport, check_hypotheses,
                        recover_gamma, smooth_phi, verify_by_forward)
from .problem import MeasurementSeries, ProblemSpec, validate_spec
from .volterra import DEFAULT_FLOOR, KernelSet, XiSeries, assemble_kernels, solve_stepwise

__all__ = ["InversionResult", "invert"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InversionResult:
    kernels: KernelSet
    xi: XiSeries
    gamma: GammaSeries
    report: HypothesisReport
    residual: ResidualReport
    phi: MeasurementSeries

    @property
    def truncated(self) -> bool:
        return self.gamma.last < self.xi.xi.shape[0] - 1


def invert(spec: ProblemSpec, phi, threads: Optional[int] = 1, floor: float = DEFAULT_FLOOR,
           smoothing: int = 0) -> InversionResult:
    """Recover ``gamma`` on ``[0, tau]`` from measurements ``phi``.

    Raises :class:`~evoinverse.problem.HypothesisError` when ``phi`` is not
    separated from zero or ``xi_0 <= 0``; other hypothesis failures only
    show up in the report.
    """
    problems = validate_spec(spec)
    if problems:
        raise ValueError("invalid problem: " + "; ".join(problems))
    if not isinstance(phi, MeasurementSeries):
        phi = MeasurementSeries(phi)
    if len(phi) != spec.grid.N + 1:
        raise ValueError(f"phi has {len(phi)} samples, expected {spec.grid.N + 1}")
    phi = smooth_phi(phi, smoothing)

    prop = Propagator.from_spec(spec)
    k = assemble_kernels(prop, spec, threads=threads)
    report = check_hypotheses(spec, k, phi, prop=prop, floor=floor)
    xi = solve_stepwise(k, phi, spec.grid, floor=floor)
    if xi.positivity_horizon < spec.grid.N:
        log.warning("xi loses positivity after node %d; gamma truncated", xi.positivity_horizon)
    gamma = recover_gamma(xi, spec.grid)
    residual = verify_by_forward(gamma, spec, phi)
    return InversionResult(k, xi, gamma, report, residual, phi)
