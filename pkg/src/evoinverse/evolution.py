"""Discrete evolution family of ``u' = A(t) u``.

One step from node ``n`` to ``n+1`` solves

    (I - theta*h*A(t_{n+1})) z = (I + (1-theta)*h*A(t_n)) v

with ``theta = 1/2`` (Crank-Nicolson) or ``theta = 1`` (implicit Euler).
Left-hand factorizations are computed once per node when the propagator
is built, so a :class:`Propagator` is read-only afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import lapack

from .problem import BreakdownError, MatrixFamily, Parabolic1D, ProblemSpec, STEPPERS

__all__ = [
    "Tridiagonal",
    "assemble_parabolic_operator",
    "generator_table",
    "m_matrix_check",
    "Propagator",
    "THETA",
]

THETA = {"CrankNicolson": 0.5, "ImplicitEuler": 1.0}


@dataclass(frozen=True)
class Tridiagonal:
    """Square tridiagonal matrix stored by diagonals."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v2 = v.reshape(self.size, -1)
        out = self.diag[:, None] * v2
        out[1:] += self.lower[:, None] * v2[:-1]
        out[:-1] += self.upper[:, None] * v2[1:]
        return out.reshape(v.shape)

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1))

    def identity_plus(self, coef: float) -> "Tridiagonal":
        """Return ``I + coef * self``."""
        return Tridiagonal(coef * self.lower, 1.0 + coef * self.diag, coef * self.upper)

    def shifted(self, mu: float) -> "Tridiagonal":
        return Tridiagonal(self.lower, self.diag + mu, self.upper)


Operator = Union[np.ndarray, Tridiagonal]


def assemble_parabolic_operator(a, b, c, dx: float) -> Tridiagonal:
    """Finite-difference matrix of ``(a u_x)_x + b u_x + c u`` on interior nodes.

    Parameters
    ----------
    a, b, c : array_like
        Coefficients at all ``M+2`` spatial nodes, boundary included.
    dx : float
        Mesh width.

    Notes
    -----
    Diffusion is differenced conservatively with face values
    ``a_{i+-1/2} = (a_i + a_{i+-1}) / 2``; advection is centered.
    Zero Dirichlet boundary values drop out of the first and last rows.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    bad = np.flatnonzero(~(a > 0))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"ellipticity violated: a = {a[i]!r} <= 0 at spatial node {i}")
    face = 0.5 * (a[:-1] + a[1:])          # face k sits between nodes k and k+1
    west, east = face[:-1], face[1:]         # for interior nodes 1..M
    bi, ci = b[1:-1], c[1:-1]
    inv2 = 1.0 / dx**2
    diag = -(west + east) * inv2 + ci
    lower = west[1:] * inv2 - bi[1:] / (2 * dx)
    upper = east[:-1] * inv2 + bi[:-1] / (2 * dx)
    return Tridiagonal(lower, diag, upper)


def generator_table(spec: ProblemSpec, shift=None) -> list[Operator]:
    """Generator snapshots ``A(t_n) + shift_n I`` for every node."""
    n_nodes = spec.grid.N + 1
    shift = np.zeros(n_nodes) if shift is None else np.asarray(shift, dtype=float)
    be = spec.backend
    ops: list[Operator] = []
    if isinstance(be, MatrixFamily):
        eye = np.eye(spec.dim)
        for n in range(n_nodes):
            ops.append(be.matrices[n] + shift[n] * eye)
    elif isinstance(be, Parabolic1D):
        for n in range(n_nodes):
            op = assemble_parabolic_operator(be.a[n], be.b[n], be.c[n], be.dx)
            ops.append(op.shifted(shift[n]))
    else:
        raise TypeError(f"unsupported backend {type(be).__name__}")
    return ops


def m_matrix_check(system: Operator) -> tuple[bool, str]:
    """Check that ``system`` has the M-matrix sign pattern.

    Sufficient test: positive diagonal, nonpositive off-diagonals and
    weak row diagonal dominance that is strict in at least one row, plus
    irreducibility (nonzero off-diagonals) for tridiagonal input.  Dense
    input must be strictly diagonally dominant.
    """
    if isinstance(system, Tridiagonal):
        d, lo, up = system.diag, system.lower, system.upper
        off = np.zeros_like(d)
        off[1:] += lo
        off[:-1] += up
        if np.any(d <= 0):
            return False, f"nonpositive diagonal at row {int(np.flatnonzero(d <= 0)[0])}"
        pos = np.flatnonzero(np.concatenate([lo, up]) > 0)
        if pos.size:
            return False, "positive off-diagonal entry (advection dominates diffusion)"
        rows = d + off
        if np.any(rows < 0):
            return False, f"row {int(np.flatnonzero(rows < 0)[0])} not diagonally dominant"
        if not np.any(rows > 0):
            return False, "no strictly dominant row"
        if np.any(lo == 0) or np.any(up == 0):
            if np.any(rows <= 0):
                return False, "reducible and not strictly dominant"
        return True, "M-matrix sign pattern verified"
    A = np.asarray(system)
    d = np.diag(A)
    off = A - np.diag(d)
    if np.any(d <= 0):
        return False, "nonpositive diagonal"
    if np.any(off > 0):
        return False, "positive off-diagonal entry"
    if np.any(d + off.sum(axis=1) <= 0):
        return False, "not strictly diagonally dominant"
    return True, "M-matrix sign pattern verified"


class _DenseFactor:
    def __init__(self, matrix: np.ndarray, node: int):
        lu, piv, info = lapack.dgetrf(matrix)
        scale = np.abs(matrix).max() if matrix.size else 0.0
        if info != 0 or np.min(np.abs(np.diag(lu))) <= np.finfo(float).eps * scale:
            raise BreakdownError(f"singular system matrix at time node {node}")
        self.lu, self.piv = lu, piv

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = lapack.dgetrs(self.lu, self.piv, rhs)
        return x


class _TridiagonalFactor:
    def __init__(self, system: Tridiagonal, node: int):
        dl, d, du, du2, ipiv, info = lapack.dgttrf(system.lower, system.diag, system.upper)
        scale = max(np.abs(system.diag).max(), 1.0)
        if info != 0 or np.min(np.abs(d)) <= np.finfo(float).eps * scale:
            raise BreakdownError(f"singular system matrix at time node {node}")
        self.factors = (dl, d, du, du2, ipiv)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = lapack.dgttrs(*self.factors, rhs)
        return x


class Propagator:
    """Discrete evolution family ``U(t_n, t_m)`` built from generator snapshots.

    Parameters
    ----------
    operators : sequence
        ``N+1`` generator snapshots, dense ``(d, d)`` arrays or
        :class:`Tridiagonal`.
    h : float
        Time step.
    stepper : {"CrankNicolson", "ImplicitEuler"}
    """

    def __init__(self, operators: Sequence[Operator], h: float, stepper: str = "CrankNicolson"):
        if stepper not in STEPPERS:
            raise ValueError(f"unknown stepper {stepper!r}")
        self.stepper = stepper
        self.h = float(h)
        self.N = len(operators) - 1
        theta = THETA[stepper]
        self.theta = theta
        first = operators[0]
        self.dim = first.size if isinstance(first, Tridiagonal) else first.shape[0]

        # left factor keyed by the node it is evaluated at (1..N)
        self._left = {}
        self._right = {}
        for n in range(1, self.N + 1):
            sys_ = self._identity_plus(operators[n], -theta * self.h)
            if isinstance(sys_, Tridiagonal):
                self._left[n] = _TridiagonalFactor(sys_, n)
            else:
                self._left[n] = _DenseFactor(sys_, n)
        if theta < 1.0:
            for n in range(self.N):
                self._right[n] = self._identity_plus(operators[n], (1 - theta) * self.h)

    @classmethod
    def from_spec(cls, spec: ProblemSpec, shift=None) -> "Propagator":
        """Propagator for ``A(t) + shift(t) I`` using the spec's stepper."""
        return cls(generator_table(spec, shift), spec.grid.h, spec.stepper)

    @staticmethod
    def _identity_plus(op: Operator, coef: float) -> Operator:
        if isinstance(op, Tridiagonal):
            return op.identity_plus(coef)
        return np.eye(op.shape[0]) + coef * op

    def step(self, v, n: int, forcing=None) -> np.ndarray:
        """Advance ``v`` from node ``n`` to ``n+1``.

        ``v`` may be a single state ``(d,)`` or a block of states ``(d, k)``.
        ``forcing`` is added to the right-hand side before the solve.
        """
        if not 0 <= n < self.N:
            raise IndexError(f"step index {n} outside 0..{self.N - 1}")
        v = np.asarray(v, dtype=float)
        block = v.reshape(self.dim, -1)
        right = self._right.get(n)
        if right is None:
            rhs = block.copy()
        elif isinstance(right, Tridiagonal):
            rhs = right.matvec(block)
        else:
            rhs = right @ block
        if forcing is not None:
            rhs = rhs + np.asarray(forcing, dtype=float).reshape(self.dim, -1)
        z = self._left[n + 1].solve(np.asfortranarray(rhs))
        return z.reshape(v.shape)

    def propagate(self, v, m: int, n: int) -> np.ndarray:
        """Apply ``U(t_n, t_m)`` to ``v`` by stepping ``m, m+1, ..., n-1``."""
        if not 0 <= m <= n <= self.N:
            raise IndexError(f"need 0 <= m <= n <= {self.N}, got m={m}, n={n}")
        z = np.array(v, dtype=float)
        for k in range(m, n):
            z = self.step(z, k)
        return z

    def trajectory(self, v, m: int = 0) -> np.ndarray:
        """States ``U(t_n, t_m) v`` for ``n = m..N`` stacked along axis 0."""
        z = np.array(v, dtype=float)
        out = np.empty((self.N + 1 - m,) + z.shape)
        out[0] = z
        for k in range(m, self.N):
            z = self.step(z, k)
            out[k - m + 1] = z
        return out
