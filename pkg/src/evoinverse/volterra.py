"""Kernel assembly and the second-kind Volterra solve for ``xi``.

The discrete equation on a uniform grid, trapezoid weights in ``s``::

    phi_n xi_n = alpha_n + h * (beta_{n,0} xi_0 / 2 + sum_{0<j<n} beta_{n,j} xi_j
                                + beta_{n,n} xi_n / 2)

with ``alpha_n = <U(t_n, 0) u0, w>`` and ``beta_{n,j} = <U(t_n, t_j) f(t_j), w>``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .evolution import Propagator
from .problem import BreakdownError, EvoInverseError, HypothesisError, ProblemSpec, TimeGrid

__all__ = [
    "KernelSet",
    "XiSeries",
    "assemble_kernels",
    "solve_stepwise",
    "solve_dense_oracle",
    "positivity_horizon",
    "trapezoid_residual",
    "DEFAULT_FLOOR",
]

log = logging.getLogger(__name__)

DEFAULT_FLOOR = 1e-12
# fixed column blocking so beta is bitwise independent of the worker count
_CHUNK = 32


@dataclass(frozen=True)
class KernelSet:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        for name in ("alpha", "beta"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class XiSeries:
    xi: np.ndarray
    positivity_horizon: int

    def __post_init__(self):
        arr = np.array(self.xi, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "xi", arr)


def positivity_horizon(xi) -> int:
    """Largest ``n`` with ``xi_j > 0`` for every ``j <= n``."""
    xi = np.asarray(getattr(xi, "xi", xi), dtype=float)
    if not xi[0] > 0:
        raise HypothesisError(
            "no positivity at t=0, phi(0)*alpha(0) sign condition violated")
    bad = np.flatnonzero(~(xi > 0))
    return int(bad[0] - 1) if bad.size else xi.shape[0] - 1


def _beta_columns(prop: Propagator, spec: ProblemSpec, cols: range) -> np.ndarray:
    N = spec.grid.N
    j0 = cols.start
    out = np.zeros((N + 1, len(cols)))
    state = np.array(spec.source[cols.start:cols.stop].T)   # (d, k)
    for n in range(j0, N + 1):
        if n > j0:
            active = min(n, cols.stop) - j0      # columns with j <= n-1
            state[:, :active] = prop.step(state[:, :active], n - 1)
        k = min(n + 1, cols.stop) - j0           # columns with j <= n
        out[n, :k] = spec.pairing.columns(state[:, :k])
    return out


def assemble_kernels(prop: Propagator, spec: ProblemSpec, threads: int | None = 1) -> KernelSet:
    """Sample ``alpha`` over the grid and ``beta`` over the lower triangle.

    Columns of ``beta`` are propagated in fixed blocks; ``threads`` only
    decides how many blocks run at once.
    """
    N = spec.grid.N
    try:
        traj = prop.trajectory(spec.u0)
    except BreakdownError as exc:
        raise BreakdownError(f"alpha assembly: {exc}") from exc
    alpha = spec.pairing.columns(traj.T)

    beta = np.zeros((N + 1, N + 1))
    blocks = [range(j, min(j + _CHUNK, N + 1)) for j in range(0, N + 1, _CHUNK)]
    blocks = [b for b in blocks if np.any(spec.source[b.start:b.stop] != 0)]

    def work(cols):
        try:
            return cols, _beta_columns(prop, spec, cols)
        except BreakdownError as exc:
            raise BreakdownError(f"beta assembly, columns j={cols.start}..{cols.stop - 1}: {exc}") from exc

    if threads is None or threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    for cols, block in results:
        beta[:, cols.start:cols.stop] = block
    beta = np.tril(beta)
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise BreakdownError("non-finite kernel entries")
    return KernelSet(alpha, beta)


def _check_inputs(k: KernelSet, phi, grid: TimeGrid, floor: float) -> np.ndarray:
    phi = np.asarray(getattr(phi, "phi", phi), dtype=float)
    N = grid.N
    if phi.shape[0] != N + 1 or k.alpha.shape[0] != N + 1:
        raise ValueError(f"series lengths must be N+1 = {N + 1}")
    small = np.flatnonzero(~(np.abs(phi) >= floor))
    if small.size:
        raise HypothesisError(f"measurement not separated from zero at node {int(small[0])}")
    if not np.sign(k.alpha[0]) == np.sign(phi[0]) or k.alpha[0] == 0:
        raise HypothesisError(
            "no positivity at t=0, phi(0)*alpha(0) sign condition violated")
    return phi


def _denominators(k: KernelSet, phi: np.ndarray, h: float, floor: float) -> np.ndarray:
    den = phi - 0.5 * h * np.diag(k.beta)
    den[0] = phi[0]
    small = np.flatnonzero(~(np.abs(den) >= floor))
    if small.size:
        raise BreakdownError(
            f"quadrature denominator degenerate, refine h (node {int(small[0])})")
    return den


def solve_stepwise(k: KernelSet, phi, grid: TimeGrid, floor: float = DEFAULT_FLOOR) -> XiSeries:
    """March the trapezoid recursion forward one node at a time."""
    phi = _check_inputs(k, phi, grid, floor)
    h = grid.h
    beta = k.beta
    den = _denominators(k, phi, h, floor)
    xi = np.empty(grid.N + 1)
    xi[0] = k.alpha[0] / phi[0]
    for n in range(1, grid.N + 1):
        acc = 0.5 * beta[n, 0] * xi[0] + np.dot(beta[n, 1:n], xi[1:n])
        xi[n] = (k.alpha[n] + h * acc) / den[n]
    return XiSeries(xi, _horizon(xi))


def quadrature_matrix(k: KernelSet, grid: TimeGrid) -> np.ndarray:
    """Trapezoid weights times ``beta``; row ``n`` gives the integral at ``t_n``."""
    h = grid.h
    Q = h * np.tril(k.beta)
    Q[:, 0] *= 0.5
    Q[np.diag_indices_from(Q)] *= 0.5
    Q[0, 0] = 0.0
    return Q


def solve_dense_oracle(k: KernelSet, phi, grid: TimeGrid, floor: float = DEFAULT_FLOOR) -> XiSeries:
    """Solve the whole lower-triangular system in one call."""
    phi = _check_inputs(k, phi, grid, floor)
    _denominators(k, phi, grid.h, floor)
    system = np.diag(phi) - quadrature_matrix(k, grid)
    xi = solve_triangular(system, k.alpha, lower=True, check_finite=True)
    return XiSeries(xi, _horizon(xi))


def trapezoid_residual(k: KernelSet, phi, grid: TimeGrid, xi) -> float:
    """``max_n |phi_n xi_n - alpha_n - Q_n(xi)|`` for a candidate ``xi``."""
    phi = np.asarray(getattr(phi, "phi", phi), dtype=float)
    xi = np.asarray(getattr(xi, "xi", xi), dtype=float)
    r = phi * xi - k.alpha - quadrature_matrix(k, grid) @ xi
    return float(np.max(np.abs(r)))


def _horizon(xi) -> int:
    try:
        return positivity_horizon(xi)
    except EvoInverseError:
        return -1
