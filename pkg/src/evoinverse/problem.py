"""Grids, pairings and the declarative problem description.

Every other module consumes a :class:`ProblemSpec`.  States are plain
1-D numpy arrays; time-sampled tables carry one row per grid node.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Optional, Union

import numpy as np

__all__ = [
    "EvoInverseError",
    "HypothesisError",
    "BreakdownError",
    "TimeGrid",
    "Pairing",
    "MatrixFamily",
    "Parabolic1D",
    "ProblemSpec",
    "MeasurementSeries",
    "pair",
    "validate_spec",
    "STEPPERS",
]

STEPPERS = ("CrankNicolson", "ImplicitEuler")


class EvoInverseError(Exception):
    """Base class for errors raised by this package."""


class HypothesisError(EvoInverseError):
    """A hypothesis without which the discrete problem is undefined failed."""


class BreakdownError(EvoInverseError):
    """A linear solve or quadrature denominator degenerated."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition ``t_n = n*h`` of ``[0, T]`` with ``h = T/N``."""

    T: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be positive and finite, got {self.T!r}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.N + 1) * self.h
        t[-1] = self.T
        return t

    def triangle(self):
        """Index pairs ``(n, j)`` with ``0 <= j <= n <= N``."""
        return np.tril_indices(self.N + 1)

    def subgrid(self, last: int) -> "TimeGrid":
        """Grid over ``[0, t_last]`` with the same step."""
        return TimeGrid(last * self.h, last)


@dataclass(frozen=True)
class Pairing:
    """Discrete representative of the functional ``w``.

    ``scale`` is the quadrature weight: 1 for matrix families, ``dx``
    for the parabolic backend.
    """

    weight: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weight", _frozen(self.weight).reshape(-1))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    def columns(self, states: np.ndarray) -> np.ndarray:
        """Pair every column of a ``(d, k)`` block with the weight.

        Rows are accumulated in a fixed order so a column's value does not
        depend on which other columns share the block.
        """
        w = self.weight
        acc = w[0] * states[0]
        for i in range(1, w.shape[0]):
            acc = acc + w[i] * states[i]
        return self.scale * acc


def pair(u, p: Pairing) -> float:
    """Return ``scale * sum_i u_i * weight_i``."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != p.dim:
        raise ValueError(
            f"dimension mismatch: state has {u.shape[0]} entries, weight has {p.dim}")
    return float(p.columns(u[:, None])[0])


@dataclass(frozen=True)
class MatrixFamily:
    """Generator sampled as a dense ``(N+1, d, d)`` table."""

    matrices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrices", _frozen(self.matrices))

    @classmethod
    def constant(cls, matrix, n_nodes: int) -> "MatrixFamily":
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(np.broadcast_to(m, (n_nodes,) + m.shape))


@dataclass(frozen=True)
class Parabolic1D:
    """Coefficients of ``(a u_x)_x + b u_x + c u`` on ``[0, L]``.

    ``a``, ``b``, ``c`` are ``(N+1, M+2)`` tables over all spatial nodes
    ``x_i = i*dx`` including the two Dirichlet boundary nodes; the state
    lives on the ``M`` interior nodes.
    """

    L: float
    M: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "M", int(self.M))
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _frozen(np.atleast_2d(getattr(self, name))))

    @property
    def dx(self) -> float:
        return self.L / (self.M + 1)

    @property
    def x(self) -> np.ndarray:
        """All spatial nodes, boundary included."""
        x = np.arange(self.M + 2) * self.dx
        x[-1] = self.L
        return x

    @property
    def interior(self) -> np.ndarray:
        return self.x[1:-1]


Backend = Union[MatrixFamily, Parabolic1D]


@dataclass(frozen=True)
class ProblemSpec:
    backend: Backend
    u0: np.ndarray
    source: np.ndarray
    pairing: Pairing
    grid: TimeGrid
    stepper: Literal["CrankNicolson", "ImplicitEuler"] = "CrankNicolson"

    def __post_init__(self):
        object.__setattr__(self, "u0", _frozen(self.u0).reshape(-1))
        object.__setattr__(self, "source", _frozen(np.atleast_2d(self.source)))

    @property
    def dim(self) -> int:
        return self.u0.shape[0]

    def replace(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)

    def restrict(self, last: int) -> "ProblemSpec":
        """Same problem on nodes ``0..last``."""
        if not 2 <= last <= self.grid.N:
            raise ValueError(f"cannot restrict to {last} steps")
        be = self.backend
        if isinstance(be, MatrixFamily):
            be = MatrixFamily(be.matrices[: last + 1])
        else:
            be = Parabolic1D(be.L, be.M, be.a[: last + 1], be.b[: last + 1], be.c[: last + 1])
        return ProblemSpec(be, self.u0, self.source[: last + 1], self.pairing,
                           self.grid.subgrid(last), self.stepper)


@dataclass(frozen=True)
class MeasurementSeries:
    phi: np.ndarray
    provenance: Literal["synthetic", "external"] = "external"
    noise_seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen(self.phi).reshape(-1))
        if not np.all(np.isfinite(self.phi)):
            raise ValueError("measurement series contains non-finite samples")

    def __len__(self):
        return self.phi.shape[0]


def validate_spec(spec: ProblemSpec) -> list[str]:
    """List every broken invariant of ``spec``; empty when consistent."""
    out = []
    n_nodes = spec.grid.N + 1
    d = spec.u0.shape[0]

    if spec.stepper not in STEPPERS:
        out.append(f"stepper: unknown scheme {spec.stepper!r}")
    if d != spec.pairing.dim:
        out.append("u0/weight dimension mismatch")
    if spec.source.shape[0] != n_nodes:
        out.append(f"source: length {spec.source.shape[0]}, expected {n_nodes}")
    if spec.source.shape[1] != d:
        out.append(f"source: dimension {spec.source.shape[1]}, expected {d}")
    if not spec.pairing.scale > 0:
        out.append("pairing: scale must be positive")

    be = spec.backend
    if isinstance(be, MatrixFamily):
        m = be.matrices
        if m.ndim != 3 or m.shape[1:] != (d, d):
            out.append(f"backend: matrix table shape {m.shape}, expected ({n_nodes}, {d}, {d})")
        elif m.shape[0] != n_nodes:
            out.append(f"backend: length {m.shape[0]}, expected {n_nodes}")
        tables = {"backend": m}
    elif isinstance(be, Parabolic1D):
        if be.M != d:
            out.append(f"backend: M = {be.M} interior nodes but state dimension is {d}")
        if be.M < 2:
            out.append("backend: need at least 2 interior nodes")
        if not be.L > 0:
            out.append("backend: L must be positive")
        tables = {}
        for name in ("a", "b", "c"):
            tab = getattr(be, name)
            tables[f"backend.{name}"] = tab
            if tab.shape != (n_nodes, be.M + 2):
                out.append(f"backend.{name}: shape {tab.shape}, expected ({n_nodes}, {be.M + 2})")
    else:
        out.append(f"backend: unsupported type {type(be).__name__}")
        tables = {}

    tables.update(u0=spec.u0, source=spec.source, weight=spec.pairing.weight)
    for name, tab in tables.items():
        if not np.all(np.isfinite(tab)):
            out.append(f"{name}: non-finite entries")
    return out
