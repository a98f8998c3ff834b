"""Synthetic data: solve the perturbed problem for a known ``gamma``.

Two routes are provided.  :func:`forward_direct` time-steps the shifted
generator ``A(t) + gamma(t) I`` and never forms ``xi``; it is the data
generator for round trips.  :func:`forward_mild` rebuilds the state from
the unperturbed family through the scalar factor ``xi(s)/xi(t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .evolution import Propagator
from .problem import MeasurementSeries, ProblemSpec, TimeGrid

__all__ = [
    "TrajectoryRecord",
    "cumulative_trapezoid",
    "xi_from_gamma",
    "forward_direct",
    "forward_mild",
    "synthesize_phi",
]


@dataclass(frozen=True)
class TrajectoryRecord:
    states: np.ndarray               # (n_nodes, d)
    phi: MeasurementSeries
    method: Literal["mild", "direct"]
    gamma_used: np.ndarray


def cumulative_trapezoid(values, h: float) -> np.ndarray:
    """Running trapezoid integral starting at 0."""
    v = np.asarray(values, dtype=float)
    out = np.zeros_like(v)
    out[1:] = np.cumsum(0.5 * h * (v[1:] + v[:-1]))
    return out


def xi_from_gamma(gamma, h: float) -> np.ndarray:
    """``exp(-int_0^t gamma)`` with the integral done by trapezoid."""
    return np.exp(-cumulative_trapezoid(gamma, h))


def _gamma_samples(gamma, grid: TimeGrid, last: int) -> np.ndarray:
    if callable(gamma):
        gamma = gamma(grid.nodes)
    g = np.broadcast_to(np.asarray(gamma, dtype=float), (grid.N + 1,)).copy()
    if not np.all(np.isfinite(g[: last + 1])):
        raise ValueError("gamma must be finite on the simulated range")
    g[last + 1:] = 0.0
    return g


def _record(states, spec, gamma, method) -> TrajectoryRecord:
    phi = spec.pairing.columns(states.T)
    return TrajectoryRecord(states, MeasurementSeries(phi, "synthetic"), method, gamma)


def forward_direct(gamma, spec: ProblemSpec, last: Optional[int] = None) -> TrajectoryRecord:
    """Time-step ``u' = (A + gamma) u + f`` over nodes ``0..last``.

    The source enters as ``h (f_n + f_{n+1}) / 2`` for Crank-Nicolson and
    as ``h f_{n+1}`` for implicit Euler.  ``gamma`` is an array of node
    samples, a scalar, or a callable of time.
    """
    grid = spec.grid
    last = grid.N if last is None else int(last)
    g = _gamma_samples(gamma, grid, last)
    prop = Propagator.from_spec(spec, shift=g)
    h = grid.h
    f = spec.source
    states = np.empty((last + 1, spec.dim))
    u = np.array(spec.u0)
    states[0] = u
    cn = spec.stepper == "CrankNicolson"
    for n in range(last):
        forcing = 0.5 * h * (f[n] + f[n + 1]) if cn else h * f[n + 1]
        u = prop.step(u, n, forcing=forcing)
        states[n + 1] = u
    return _record(states, spec, g[: last + 1], "direct")


def forward_mild(gamma, spec: ProblemSpec, prop: Optional[Propagator] = None,
                 last: Optional[int] = None) -> TrajectoryRecord:
    """Variation-of-constants form with the unperturbed propagator.

    ``u_n = (U(n,0) u0 + h * sum''_j xi_j U(n,j) f_j) / xi_n``; the
    weighted source sum is carried forward by linearity of ``U``.
    """
    grid = spec.grid
    last = grid.N if last is None else int(last)
    g = _gamma_samples(gamma, grid, last)
    prop = Propagator.from_spec(spec) if prop is None else prop
    h = grid.h
    f = spec.source
    xi = xi_from_gamma(g[: last + 1], h)

    states = np.empty((last + 1, spec.dim))
    free = np.array(spec.u0)
    # acc_n = sum_{j<=n} c_j xi_j U(n,j) f_j with c_0 = 1/2, c_j = 1 otherwise
    acc = 0.5 * xi[0] * f[0]
    states[0] = spec.u0 / xi[0]
    for n in range(last):
        free = prop.step(free, n)
        acc = prop.step(acc, n) + xi[n + 1] * f[n + 1]
        integral = h * (acc - 0.5 * xi[n + 1] * f[n + 1])
        states[n + 1] = (free + integral) / xi[n + 1]
    return _record(states, spec, g[: last + 1], "mild")


def synthesize_phi(traj: TrajectoryRecord, noise_level: float = 0.0,
                   seed: Optional[int] = None) -> MeasurementSeries:
    """Measurements with multiplicative uniform noise ``phi (1 + eps)``."""
    if noise_level < 0:
        raise ValueError("noise_level must be >= 0")
    clean = np.array(traj.phi.phi)
    if noise_level == 0:
        return MeasurementSeries(clean, "synthetic", seed)
    rng = np.random.default_rng(seed)
    eps = rng.uniform(-noise_level, noise_level, size=clean.shape)
    return MeasurementSeries(clean * (1.0 + eps), "synthetic", seed)
