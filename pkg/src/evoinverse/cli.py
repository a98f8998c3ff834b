"""Command line driver.

    evoinverse --config run.cfg [--mode M] [--threads K] [--out DIR]

The config is a flat ``key = value`` file; ``#`` starts a comment and
unknown keys are rejected.  Exit codes: 0 success, 2 hypothesis hard
failure, 3 numerical breakdown, 4 config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .forward import TrajectoryRecord, forward_direct, synthesize_phi
from .inversion import max_principle_status
from .io import read_series, write_series
from .pipeline import invert
from .presets import PRESETS, get_preset
from .problem import (BreakdownError, EvoInverseError, MeasurementSeries, Parabolic1D,
                      STEPPERS, validate_spec)

log = logging.getLogger("evoinverse")

EXIT_OK, EXIT_HYPOTHESIS, EXIT_BREAKDOWN, EXIT_CONFIG = 0, 2, 3, 4
MODES = ("forward", "invert", "roundtrip", "convergence")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    mode: str = "roundtrip"
    preset: str = ""
    T: Optional[float] = None
    N: int = 200
    L: Optional[float] = None
    M: Optional[int] = None
    stepper: str = "CrankNicolson"
    noise_level: float = 0.0
    seed: int = 0
    out: str = "out"
    precision: int = 17
    smoothing: int = 0
    phi_path: Optional[str] = None
    gamma_path: Optional[str] = None
    data_N: Optional[int] = None
    levels: int = 3
    phi_floor: float = 1e-12
    threads: Optional[int] = None

    def check(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if not self.preset:
            raise ConfigError("preset: required (defines A(t), u0, f and w)")
        if self.preset not in PRESETS:
            raise ConfigError(f"preset: unknown {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.N < 2:
            raise ConfigError(f"N: must be >= 2, got {self.N}")
        if self.T is not None and not self.T > 0:
            raise ConfigError(f"T: must be positive, got {self.T}")
        if self.M is not None and self.M < 2:
            raise ConfigError(f"M: must be >= 2, got {self.M}")
        if self.stepper not in STEPPERS:
            raise ConfigError(f"stepper: expected one of {STEPPERS}, got {self.stepper!r}")
        if self.noise_level < 0:
            raise ConfigError("noise_level: must be >= 0")
        if not 1 <= self.precision <= 17:
            raise ConfigError("precision: significant digits must be in 1..17")
        if self.data_N is not None and self.data_N < 2:
            raise ConfigError(f"data_N: must be >= 2, got {self.data_N}")
        if self.mode == "convergence" and self.levels < 2:
            raise ConfigError("convergence mode needs >= 2 levels")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads: must be >= 1")


_TYPES = {
    "T": float, "N": int, "L": float, "M": int, "noise_level": float, "seed": int,
    "precision": int, "smoothing": int, "data_N": int, "levels": int, "phi_floor": float,
    "threads": int,
}


def parse_config(text: str) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        conv = _TYPES.get(key, str)
        try:
            values[key] = conv(value)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {value!r} as {conv.__name__}") from None
    return RunConfig(**values)


def _build(cfg: RunConfig, N: int):
    p = get_preset(cfg.preset)
    return p, p.spec(N, T=cfg.T, stepper=cfg.stepper, L=cfg.L, M=cfg.M)


def _gamma_for(cfg: RunConfig, preset, grid):
    if cfg.gamma_path is None:
        return preset.gamma(grid.nodes)
    t, g = read_series(cfg.gamma_path, column="gamma")
    _match_grid(t, grid, cfg.gamma_path)
    return g


def _match_grid(t, grid, path):
    if t.shape[0] != grid.N + 1 or np.max(np.abs(t - grid.nodes)) > 1e-9 * grid.T:
        raise ConfigError(f"{path}: node times do not match the grid (T={grid.T}, N={grid.N})")


def _synthetic_phi(cfg: RunConfig, N: int) -> MeasurementSeries:
    """Data from the direct forward solver on the ``data_N`` grid, sampled at ``N`` nodes.

    A ``gamma_path`` table, if given, must be sampled on the ``data_N`` grid.
    """
    data_N = cfg.data_N or N
    if data_N % N:
        raise ConfigError(f"data_N: {data_N} must be a multiple of N = {N}")
    stride = data_N // N
    preset, fine = _build(cfg, data_N)
    traj = forward_direct(_gamma_for(cfg, preset, fine.grid), fine)
    coarse = TrajectoryRecord(traj.states[::stride],
                              MeasurementSeries(traj.phi.phi[::stride], "synthetic"),
                              traj.method, traj.gamma_used[::stride])
    return synthesize_phi(coarse, cfg.noise_level, cfg.seed)


def run_forward(cfg: RunConfig, out: Path) -> int:
    preset, spec = _build(cfg, cfg.N)
    _require_valid(spec)
    g = _gamma_for(cfg, preset, spec.grid)
    traj = forward_direct(g, spec)
    phi = synthesize_phi(traj, cfg.noise_level, cfg.seed)
    t = spec.grid.nodes
    write_series(out / "phi.csv", t, phi.phi, digits=cfg.precision)
    lines = [
        f"preset: {cfg.preset}",
        f"grid: T = {spec.grid.T:.17g}, N = {spec.grid.N}",
        f"stepper: {spec.stepper}",
        f"noise_level: {cfg.noise_level:.17g} (seed {cfg.seed})",
        f"gamma range: [{np.min(g):.17g}, {np.max(g):.17g}]",
        f"phi(0) = {phi.phi[0]:.17g}, phi(T) = {phi.phi[-1]:.17g}",
        f"state min = {np.min(traj.states):.17g}, max = {np.max(traj.states):.17g}",
    ]
    if isinstance(spec.backend, Parabolic1D):
        status, detail = max_principle_status(spec)
        lines.append(f"discrete maximum principle: {status.upper()} {detail}")
        nonneg = np.min(traj.states) >= 0
        lines.append(f"state nonnegative on all nodes: {'yes' if nonneg else 'no'}")
    (out / "trajectory.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _require_valid(spec):
    problems = validate_spec(spec)
    if problems:
        raise ConfigError("; ".join(problems))


def _load_phi(cfg: RunConfig, spec) -> MeasurementSeries:
    if cfg.phi_path is not None:
        t, v = read_series(cfg.phi_path)
        _match_grid(t, spec.grid, cfg.phi_path)
        return MeasurementSeries(v, "external")
    return _synthetic_phi(cfg, cfg.N)


def _write_inversion(cfg: RunConfig, out: Path, spec, result) -> None:
    t = spec.grid.nodes
    last = result.gamma.last
    write_series(out / "xi.csv", t, result.xi.xi, digits=cfg.precision)
    write_series(out / "gamma.csv", t[: last + 1], result.gamma.valid(), column="gamma",
                 digits=cfg.precision)
    text = result.report.to_text()
    if result.truncated:
        text += (f"WARNING: positivity horizon at node {last} (t = {t[last]:.17g}) < N = "
                 f"{spec.grid.N}; gamma.csv truncated\n")
    (out / "hypotheses.txt").write_text(text)
    (out / "residual.txt").write_text(result.residual.to_text())


def run_invert(cfg: RunConfig, out: Path) -> int:
    preset, spec = _build(cfg, cfg.N)
    _require_valid(spec)
    phi = _load_phi(cfg, spec)
    result = invert(spec, phi, threads=cfg.threads, floor=cfg.phi_floor, smoothing=cfg.smoothing)
    _write_inversion(cfg, out, spec, result)
    if cfg.mode == "roundtrip":
        write_series(out / "phi.csv", spec.grid.nodes, phi.phi, digits=cfg.precision)
        err, rel = _gamma_error(preset, spec, result)
        (out / "roundtrip.txt").write_text(
            f"data grid N = {cfg.data_N or cfg.N}, inversion grid N = {cfg.N}\n"
            f"max interior |gamma - gamma_exact|: {err:.17g}\n"
            f"relative: {rel:.17g}\n")
    return EXIT_OK


def _gamma_error(preset, spec, result) -> tuple[float, float]:
    last = result.gamma.last
    exact = preset.gamma(spec.grid.nodes)[1:last]
    err = float(np.max(np.abs(result.gamma.gamma[1:last] - exact)))
    return err, err / float(np.max(np.abs(exact))) if np.any(exact) else err


def run_convergence(cfg: RunConfig, out: Path) -> int:
    levels = [cfg.N * 2**i for i in range(cfg.levels)]
    data_N = cfg.data_N or 4 * levels[-1]
    rows = []
    for N in levels:
        preset, spec = _build(cfg, N)
        _require_valid(spec)
        sub = RunConfig(**{**cfg.__dict__, "N": N, "data_N": data_N})
        phi = _synthetic_phi(sub, N)
        result = invert(spec, phi, threads=cfg.threads, floor=cfg.phi_floor,
                        smoothing=cfg.smoothing)
        rows.append((N, spec.grid.h, _gamma_error(preset, spec, result)[0]))
    p = cfg.precision
    with open(out / "convergence.csv", "w", newline="\n") as fh:
        fh.write("N,h,error,order\n")
        prev = None
        for N, h, e in rows:
            order = "" if prev is None else f"{np.log2(prev / e):.{p}g}"
            fh.write(f"{N},{h:.{p}g},{e:.{p}g},{order}\n")
            prev = e
    return EXIT_OK


RUNNERS = {"forward": run_forward, "invert": run_invert, "roundtrip": run_invert,
           "convergence": run_convergence}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="evoinverse", description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", required=True, help="flat key = value config file")
    ap.add_argument("--mode", choices=MODES, help="override the config's mode")
    ap.add_argument("--threads", type=int, help="workers for kernel assembly")
    ap.add_argument("--out", help="output directory")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")

    try:
        cfg = parse_config(Path(args.config).read_text())
        for key in ("mode", "threads", "out"):
            if getattr(args, key) is not None:
                setattr(cfg, key, getattr(args, key))
        cfg.check()
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        return RUNNERS[cfg.mode](cfg, out)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BreakdownError as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except EvoInverseError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
