"""Built-in problems with a known coefficient ``gamma``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .problem import MatrixFamily, Pairing, Parabolic1D, ProblemSpec, TimeGrid

__all__ = ["Preset", "PRESETS", "get_preset"]


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str                        # "matrix" or "parabolic"
    gamma: Callable[[np.ndarray], np.ndarray]
    _build: Callable
    T: float = 1.0
    L: Optional[float] = None
    M: Optional[int] = None
    exact_phi: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def spec(self, N: int, T: Optional[float] = None, stepper: str = "CrankNicolson",
             L: Optional[float] = None, M: Optional[int] = None) -> ProblemSpec:
        grid = TimeGrid(self.T if T is None else T, N)
        if self.kind == "parabolic":
            return self._build(grid, stepper, self.L if L is None else L, self.M if M is None else M)
        return self._build(grid, stepper)


def _scalar(a: float, u0: float, f: float):
    def build(grid, stepper):
        n = grid.N + 1
        return ProblemSpec(MatrixFamily.constant([[a]], n), [u0], np.full((n, 1), f),
                           Pairing([1.0]), grid, stepper)
    return build


def _parabolic(a, b, c, u0, w, f):
    def build(grid, stepper, L, M):
        t = grid.nodes[:, None]
        dx = L / (M + 1)
        x = np.arange(M + 2) * dx
        x[-1] = L
        shape = (grid.N + 1, M + 2)
        coef = [np.broadcast_to(np.asarray(g(x[None, :], t, L), dtype=float), shape)
                for g in (a, b, c)]
        xi = x[1:-1]
        src = np.broadcast_to(f(xi[None, :], t, L), (grid.N + 1, M))
        return ProblemSpec(Parabolic1D(L, M, *coef), u0(xi, L), src,
                           Pairing(w(xi, L), dx), grid, stepper)
    return build


def _sine(x, L):
    return np.sin(np.pi * x / L)


PRESETS = {
    "scalar_decay": Preset(
        "scalar_decay", "matrix", lambda t: np.full_like(np.asarray(t, float), 0.5),
        _scalar(-1.0, 1.0, 0.0),
        exact_phi=lambda t: np.exp(-0.5 * np.asarray(t, float))),
    "scalar_source": Preset(
        "scalar_source", "matrix", lambda t: np.zeros_like(np.asarray(t, float)),
        _scalar(0.0, 1.0, 1.0),
        exact_phi=lambda t: 1.0 + np.asarray(t, float)),
    "heat_sine": Preset(
        "heat_sine", "parabolic", lambda t: 1.0 + 0.5 * np.sin(2 * np.pi * np.asarray(t, float)),
        _parabolic(lambda x, t, L: 1.0, lambda x, t, L: 0.0, lambda x, t, L: 0.0,
                   _sine, _sine, lambda x, t, L: 0.0 * x * t),
        L=np.pi, M=64),
    "advection_reaction": Preset(
        "advection_reaction", "parabolic", lambda t: 0.5 * np.cos(np.pi * np.asarray(t, float)),
        _parabolic(lambda x, t, L: 1.0, lambda x, t, L: 0.5, lambda x, t, L: -0.2,
                   _sine, _sine, lambda x, t, L: x * (L - x) / L**2 * (1.0 + t)),
        L=np.pi, M=64),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
