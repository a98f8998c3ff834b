"""Coefficient recovery ``gamma = -d/dt log xi`` and its checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .evolution import Propagator, Tridiagonal, generator_table, m_matrix_check
from .forward import cumulative_trapezoid, forward_direct
from .problem import EvoInverseError, MeasurementSeries, Parabolic1D, ProblemSpec, TimeGrid, pair
from .volterra import DEFAULT_FLOOR, KernelSet, XiSeries, positivity_horizon

__all__ = [
    "GammaSeries",
    "HypothesisReport",
    "ResidualReport",
    "InversionError",
    "recover_gamma",
    "reintegrate_xi",
    "check_hypotheses",
    "verify_by_forward",
    "smooth_phi",
    "positivity_horizon",
    "PHI0_RTOL",
]

PHI0_RTOL = 1e-8


class InversionError(EvoInverseError):
    pass


@dataclass(frozen=True)
class GammaSeries:
    """Recovered coefficient; entries past ``valid_range[1]`` are NaN."""

    gamma: np.ndarray
    valid_range: tuple[int, int]

    @property
    def last(self) -> int:
        return self.valid_range[1]

    def valid(self) -> np.ndarray:
        return self.gamma[: self.last + 1]


def recover_gamma(xi, grid: TimeGrid, last: Optional[int] = None) -> GammaSeries:
    """Second-order differences of ``log xi`` on nodes ``0..last``.

    ``last`` defaults to the positivity horizon of ``xi``.  Central
    differences in the interior, three-point one-sided formulas at both
    ends of the range.
    """
    if last is None:
        last = xi.positivity_horizon if isinstance(xi, XiSeries) else positivity_horizon(xi)
    values = np.asarray(getattr(xi, "xi", xi), dtype=float)
    seg = values[: last + 1]
    bad = np.flatnonzero(~(seg > 0))
    if bad.size:
        raise InversionError(f"positivity horizon exceeded at node {int(bad[0])}")
    if last < 2:
        raise InversionError(f"need at least 3 positive nodes to differentiate, have {last + 1}")
    h = grid.h
    ln = np.log(seg)
    d = np.empty_like(ln)
    d[1:-1] = (ln[2:] - ln[:-2]) / (2 * h)
    d[0] = (-3 * ln[0] + 4 * ln[1] - ln[2]) / (2 * h)
    d[-1] = (3 * ln[-1] - 4 * ln[-2] + ln[-3]) / (2 * h)
    gamma = np.full(values.shape[0], np.nan)
    gamma[: last + 1] = -d
    return GammaSeries(gamma, (0, int(last)))


def reintegrate_xi(gamma: GammaSeries, grid: TimeGrid, xi0: float = 1.0) -> np.ndarray:
    """``xi0 * exp(-trapezoid(gamma))`` over the valid range."""
    return xi0 * np.exp(-cumulative_trapezoid(gamma.valid(), grid.h))


def smooth_phi(phi: MeasurementSeries, window: int) -> MeasurementSeries:
    """Centered moving average; the window shrinks symmetrically at the ends.

    ``window <= 1`` returns the input unchanged.
    """
    if window <= 1:
        return phi
    half = window // 2
    v = phi.phi
    n = v.shape[0]
    out = np.empty(n)
    csum = np.concatenate([[0.0], np.cumsum(v)])
    for i in range(n):
        r = min(half, i, n - 1 - i)
        out[i] = (csum[i + r + 1] - csum[i - r]) / (2 * r + 1)
    return MeasurementSeries(out, phi.provenance, phi.noise_seed)


@dataclass
class HypothesisReport:
    entries: list = field(default_factory=list)

    def add(self, name: str, status: str, detail: str, ref: str = ""):
        assert status in ("pass", "fail", "warn")
        assert name not in self.names(), name
        self.entries.append({"name": name, "status": status, "detail": detail, "ref": ref})

    def names(self) -> list[str]:
        return [e["name"] for e in self.entries]

    def __getitem__(self, name: str) -> dict:
        for e in self.entries:
            if e["name"] == name:
                return e
        raise KeyError(name)

    def status(self, name: str) -> str:
        return self[name]["status"]

    @property
    def local_expected(self) -> bool:
        return all(self.status(n) == "pass" for n in LOCAL_CHECKS) and \
            self.status("alpha_phi_sign") != "fail"

    @property
    def global_expected(self) -> bool:
        return self.local_expected and all(self.status(n) == "pass" for n in GLOBAL_CHECKS)

    @property
    def hard_failure(self) -> bool:
        return self.status("phi_separated") == "fail"

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            ref = f"  [{e['ref']}]" if e["ref"] else ""
            lines.append(f"{e['status'].upper():4s}  {e['name']}: {e['detail']}{ref}")
        lines.append(f"local solvability expected: {'yes' if self.local_expected else 'no'}")
        lines.append(f"global solvability expected: {'yes' if self.global_expected else 'no'}")
        return "\n".join(lines) + "\n"


LOCAL_CHECKS = ("phi_separated", "phi0_consistency")
GLOBAL_CHECKS = ("alpha_phi_sign", "glob_phi_positive", "glob_alpha_positive",
                 "glob_beta_nonnegative")

HYPOTHESES = LOCAL_CHECKS + ("phi_sign_constant",) + GLOBAL_CHECKS + (
    "parabolic_positive_data", "discrete_max_principle", "propagator_bound", "phi_regularity")


def _first(mask) -> Optional[int]:
    idx = np.flatnonzero(mask)
    return int(idx[0]) if idx.size else None


def _probe_growth(spec: ProblemSpec, prop: Propagator, n_probes: int = 3) -> float:
    """Largest ``|U(t_n, 0) v|_inf / |v|_inf`` over a few probe vectors."""
    rng = np.random.default_rng(0)
    probes = [np.array(spec.u0), np.array(spec.source[0])]
    probes += [rng.standard_normal(spec.dim) for _ in range(n_probes)]
    probes = [p for p in probes if np.max(np.abs(p)) > 0]
    block = np.stack(probes, axis=1)
    traj = prop.trajectory(block)
    norms = np.max(np.abs(traj), axis=1)
    return float(np.max(norms / np.max(np.abs(block), axis=0)))


def check_hypotheses(spec: ProblemSpec, k: KernelSet, phi, prop: Optional[Propagator] = None,
                     floor: float = DEFAULT_FLOOR) -> HypothesisReport:
    """Evaluate every solvability hypothesis on the sampled data. Never raises."""
    phi = np.asarray(getattr(phi, "phi", phi), dtype=float)
    rep = HypothesisReport()
    alpha, beta = k.alpha, k.beta

    n = _first(~(np.abs(phi) >= floor))
    if n is None:
        rep.add("phi_separated", "pass", f"min |phi| = {np.min(np.abs(phi)):.6g} >= {floor:g}",
                "uniqueness: phi(t) >= c > 0")
    else:
        rep.add("phi_separated", "fail", f"|phi| = {abs(phi[n]):.6g} below {floor:g} at node {n}",
                "uniqueness: phi(t) >= c > 0")

    p0 = pair(spec.u0, spec.pairing)
    dev = abs(phi[0] - p0)
    if p0 == 0:
        rep.add("phi0_consistency", "fail", "<u0, w> = 0", "local: phi(0) = <u0,w> != 0")
    elif dev > PHI0_RTOL * abs(p0):
        rep.add("phi0_consistency", "fail",
                f"phi(0) = {phi[0]:.17g} but <u0, w> = {p0:.17g} (relative gap {dev / abs(p0):.3g})",
                "local: phi(0) = <u0,w> != 0")
    else:
        rep.add("phi0_consistency", "pass", f"phi(0) matches <u0, w> = {p0:.12g}",
                "local: phi(0) = <u0,w> != 0")

    s = np.sign(phi)
    n = _first(s != s[0])
    rep.add("phi_sign_constant", "pass" if n is None else "warn",
            "phi keeps one sign" if n is None else f"phi changes sign at node {n}")

    prod = alpha * phi
    n = _first(~(prod > 0))
    if n is None:
        rep.add("alpha_phi_sign", "pass", "alpha*phi > 0 on all nodes", "lemma: alpha(t)phi(t) > 0")
    elif n == 0:
        rep.add("alpha_phi_sign", "fail", "alpha*phi <= 0 at t=0", "lemma: alpha(t)phi(t) > 0")
    else:
        rep.add("alpha_phi_sign", "warn",
                f"alpha*phi > 0 only up to node {n - 1}; solvability is local",
                "lemma: alpha(t)phi(t) > 0")

    for name, arr, desc in (("glob_phi_positive", phi, "phi > 0"),
                            ("glob_alpha_positive", alpha, "alpha > 0")):
        n = _first(~(arr > 0))
        rep.add(name, "pass" if n is None else "fail",
                f"{desc} on all nodes" if n is None else f"{desc} fails at node {n}",
                "global positivity")
    tri = np.tril_indices(beta.shape[0])
    neg = np.flatnonzero(beta[tri] < 0)
    if neg.size:
        i = neg[0]
        rep.add("glob_beta_nonnegative", "fail",
                f"beta < 0 at (n, j) = ({tri[0][i]}, {tri[1][i]})", "global: <U(t,s)f(s),w> >= 0")
    else:
        rep.add("glob_beta_nonnegative", "pass", "beta >= 0 on the triangle",
                "global: <U(t,s)f(s),w> >= 0")

    u0, f, w = spec.u0, spec.source, spec.pairing.weight
    problems = []
    if np.any(u0 < 0):
        problems.append("u0 has negative entries")
    if not np.any(u0 != 0):
        problems.append("u0 = 0")
    if np.any(f < 0):
        problems.append("f has negative entries")
    if not np.all(w > 0):
        problems.append("w not strictly positive")
    label = "parabolic" if isinstance(spec.backend, Parabolic1D) else "matrix backend"
    rep.add("parabolic_positive_data", "pass" if not problems else "warn",
            f"{label}: u0 >= 0, u0 != 0, f >= 0, w > 0" if not problems
            else f"{label}: " + "; ".join(problems),
            "parabolic global: w > 0; u0, f >= 0, u0 != 0")

    try:
        rep.add("discrete_max_principle", *max_principle_status(spec))
    except EvoInverseError as exc:
        rep.add("discrete_max_principle", "warn", f"could not evaluate: {exc}")

    try:
        prop = Propagator.from_spec(spec) if prop is None else prop
        growth = _probe_growth(spec, prop)
        rep.add("propagator_bound", "pass" if growth < 1e6 else "warn",
                f"observed max growth |U(t,0)v|/|v| = {growth:.6g} on probe vectors",
                "|U(t,s)| <= M (estimate, not a bound)")
    except EvoInverseError as exc:
        rep.add("propagator_bound", "warn", f"could not evaluate: {exc}")

    h = spec.grid.h
    energy = float(h * np.sum((np.diff(phi) / h) ** 2)) if phi.shape[0] > 1 else 0.0
    rep.add("phi_regularity", "pass" if np.isfinite(energy) else "warn",
            f"difference-quotient energy h*sum((dphi/dt)^2) = {energy:.6g} (heuristic only)")
    return rep


def max_principle_status(spec: ProblemSpec) -> tuple[str, str]:
    """Sign pattern of the implicit Euler system ``I - h A(t_n)`` at every node."""
    h = spec.grid.h
    ops = generator_table(spec)
    for n, op in enumerate(ops[1:], start=1):
        sys_ = op.identity_plus(-h) if isinstance(op, Tridiagonal) else np.eye(spec.dim) - h * op
        ok, why = m_matrix_check(sys_)
        if not ok:
            return "warn", f"ImplicitEuler system at node {n}: {why}"
    extra = "" if spec.stepper == "ImplicitEuler" else \
        " (holds for ImplicitEuler; CrankNicolson does not preserve it discretely)"
    return "pass", f"ImplicitEuler system is an M-matrix at every node{extra}"


@dataclass(frozen=True)
class ResidualReport:
    abs_residual: float
    rel_residual: float
    last: int

    def to_text(self) -> str:
        return (f"nodes checked: 0..{self.last}\n"
                f"max |<u(t_n), w> - phi_n|: {self.abs_residual:.17g}\n"
                f"relative residual: {self.rel_residual:.17g}\n")


def verify_by_forward(gamma: GammaSeries, spec: ProblemSpec, phi) -> ResidualReport:
    """Re-simulate with the recovered coefficient and compare to ``phi``."""
    phi = np.asarray(getattr(phi, "phi", phi), dtype=float)
    last = gamma.last
    traj = forward_direct(gamma.valid(), spec.restrict(last) if last < spec.grid.N else spec)
    diff = np.abs(traj.phi.phi - phi[: last + 1])
    a = float(np.max(diff))
    return ResidualReport(a, a / float(np.max(np.abs(phi[: last + 1]))), last)
