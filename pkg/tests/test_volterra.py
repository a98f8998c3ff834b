from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evoinverse import (BreakdownError, HypothesisError, KernelSet, Propagator, TimeGrid,
                        assemble_kernels, get_preset, positivity_horizon, solve_dense_oracle,
                        solve_stepwise)
from evoinverse.volterra import trapezoid_residual

from conftest import scalar_spec


def exact_recursion(alpha, beta, phi, h):
    """Trapezoid recursion in exact rational arithmetic."""
    alpha, phi = [Fraction(a) for a in alpha], [Fraction(p) for p in phi]
    beta = [[Fraction(b) for b in row] for row in beta]
    h = Fraction(h)
    xi = [alpha[0] / phi[0]]
    for n in range(1, len(alpha)):
        s = beta[n][0] * xi[0] / 2 + sum(beta[n][j] * xi[j] for j in range(1, n))
        xi.append((alpha[n] + h * s) / (phi[n] - h * beta[n][n] / 2))
    return xi


def test_hand_case_N2():
    beta = np.tril(np.ones((3, 3)))
    k = KernelSet(np.ones(3), beta)
    grid = TimeGrid(1.0, 2)
    oracle = exact_recursion(k.alpha, beta, np.ones(3), 0.5)
    assert oracle == [1, Fraction(5, 3), Fraction(25, 9)]
    for solver in (solve_stepwise, solve_dense_oracle):
        xi = solver(k, np.ones(3), grid).xi
        assert np.allclose(xi, [float(x) for x in oracle], rtol=1e-15)


def test_decoupled_when_beta_zero():
    grid = TimeGrid(2.0, 40)
    t = grid.nodes
    alpha, phi = np.exp(-t), np.exp(-1.5 * t)
    k = KernelSet(alpha, np.zeros((41, 41)))
    for solver in (solve_stepwise, solve_dense_oracle):
        xi = solver(k, phi, grid).xi
        assert np.array_equal(xi, alpha / phi)
        assert np.allclose(xi, np.exp(0.5 * t), rtol=1e-14)


def test_constant_solution_is_exact_fixed_point():
    grid = TimeGrid(1.0, 50)
    t = grid.nodes
    k = KernelSet(np.ones(51), np.tril(np.ones((51, 51))))
    # xi = 1 substituted into the discrete equation: (1+t_n) = 1 + h*(n) exactly
    assert trapezoid_residual(k, 1 + t, grid, np.ones(51)) < 1e-13
    xi = solve_stepwise(k, 1 + t, grid).xi
    assert np.max(np.abs(xi - 1)) <= 1e-12


def test_matches_exact_rational_oracle_random():
    rng = np.random.default_rng(11)
    N = 12
    grid = TimeGrid(1.2, N)
    alpha = rng.uniform(0.5, 2, N + 1)
    phi = rng.uniform(0.5, 2, N + 1)
    beta = np.tril(rng.uniform(-1, 1, (N + 1, N + 1)))
    oracle = np.array([float(x) for x in exact_recursion(alpha, beta, phi, grid.h)])
    k = KernelSet(alpha, beta)
    assert np.allclose(solve_stepwise(k, phi, grid).xi, oracle, rtol=1e-13)
    assert np.allclose(solve_dense_oracle(k, phi, grid).xi, oracle, rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**31))
def test_stepwise_equals_dense_and_residual_small(N, seed):
    rng = np.random.default_rng(seed)
    grid = TimeGrid(1.0, N)
    alpha = rng.uniform(-2, 2, N + 1)
    alpha[0] = abs(alpha[0]) + 0.1
    phi = rng.uniform(0.5, 2, N + 1) * rng.choice([-1, 1], N + 1)
    phi[0] = abs(phi[0])
    beta = np.tril(rng.uniform(-2, 2, (N + 1, N + 1)))
    k = KernelSet(alpha, beta)
    a = solve_stepwise(k, phi, grid)
    b = solve_dense_oracle(k, phi, grid)
    scale = max(1.0, np.max(np.abs(a.xi)))
    assert np.max(np.abs(a.xi - b.xi)) <= 1e-10 * scale
    resid = trapezoid_residual(k, phi, grid, a.xi)
    assert resid <= 1e-10 * np.max(np.abs(phi * a.xi))
    assert a.positivity_horizon == positivity_horizon(a.xi)


def test_phi_not_separated():
    grid = TimeGrid(1.0, 4)
    phi = np.array([1.0, 0.5, 0.0, -0.5, -1.0])
    k = KernelSet(np.ones(5), np.zeros((5, 5)))
    for solver in (solve_stepwise, solve_dense_oracle):
        with pytest.raises(HypothesisError, match="not separated from zero at node 2"):
            solver(k, phi, grid)


def test_sign_mismatch_at_zero():
    grid = TimeGrid(1.0, 4)
    k = KernelSet(-np.ones(5), np.zeros((5, 5)))
    with pytest.raises(HypothesisError, match="sign condition"):
        solve_stepwise(k, np.ones(5), grid)


def test_degenerate_denominator():
    grid = TimeGrid(1.0, 4)          # h = 0.25, so phi - h*beta/2 = 0 for beta = 8
    beta = np.zeros((5, 5))
    beta[3, 3] = 8.0
    k = KernelSet(np.ones(5), beta)
    with pytest.raises(BreakdownError, match="refine h"):
        solve_stepwise(k, np.ones(5), grid)


@pytest.mark.parametrize("xi,expected", [
    (np.ones(6), 5),
    (np.array([1.0, 0.5, -0.1, 2.0]), 1),
])
def test_positivity_horizon(xi, expected):
    assert positivity_horizon(xi) == expected


def test_positivity_horizon_cosine():
    grid = TimeGrid(2.0, 200)
    assert positivity_horizon(np.cos(grid.nodes)) == 157


def test_positivity_horizon_requires_positive_start():
    with pytest.raises(HypothesisError, match="no positivity at t=0"):
        positivity_horizon([-1.0, 1.0])


def test_kernels_zero_source():
    spec = scalar_spec(a=-0.7, u0=2.0, w=3.0, f=0.0, N=10)
    k = assemble_kernels(Propagator.from_spec(spec), spec)
    assert np.all(k.beta == 0) and k.alpha[0] == 6.0


def test_kernels_zero_generator():
    spec = scalar_spec(a=0.0, u0=1.0, f=1.0, w=1.0, N=10)
    k = assemble_kernels(Propagator.from_spec(spec), spec)
    assert np.all(k.alpha == 1.0)
    assert np.array_equal(k.beta, np.tril(np.ones((11, 11))))


def test_kernels_scalar_recursion():
    spec = scalar_spec(a=-1.0, f=1.0, T=1.0, N=10, stepper="ImplicitEuler")
    k = assemble_kernels(Propagator.from_spec(spec), spec)
    n = np.arange(11)
    assert np.allclose(k.alpha, (1 / 1.1) ** n, rtol=1e-14)
    nn, jj = np.tril_indices(11)
    assert np.allclose(k.beta[nn, jj], (1 / 1.1) ** (nn - jj), rtol=1e-14)


def test_kernels_column_oracle_parabolic():
    spec = get_preset("advection_reaction").spec(40, M=16)
    prop = Propagator.from_spec(spec)
    k = assemble_kernels(prop, spec, threads=3)
    for j in (0, 7, 31, 33, 40):
        col = [spec.pairing.columns(prop.propagate(spec.source[j], j, n)[:, None])[0]
               for n in range(j, 41)]
        assert np.array_equal(k.beta[j:, j], col)
    assert np.array_equal(np.diag(k.beta),
                          [spec.pairing.columns(f[:, None])[0] for f in spec.source])
    assert k.alpha[0] == spec.pairing.columns(spec.u0[:, None])[0]
    assert np.all(np.triu(k.beta, 1) == 0)


def test_kernels_independent_of_thread_count():
    spec = get_preset("advection_reaction").spec(100, M=20)
    prop = Propagator.from_spec(spec)
    ref = assemble_kernels(prop, spec, threads=1)
    for threads in (2, 5, None):
        k = assemble_kernels(prop, spec, threads=threads)
        assert np.array_equal(k.alpha, ref.alpha) and np.array_equal(k.beta, ref.beta)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**31))
def test_positive_data_gives_positive_xi(N, seed):
    rng = np.random.default_rng(seed)
    grid = TimeGrid(rng.uniform(0.1, 5), N)
    alpha = rng.uniform(1e-3, 3, N + 1)
    beta = np.tril(rng.uniform(0, 3, (N + 1, N + 1)))
    phi = grid.h * np.diag(beta) / 2 + rng.uniform(1e-3, 3, N + 1)
    xi = solve_stepwise(KernelSet(alpha, beta), phi, grid)
    assert np.all(xi.xi > 0) and xi.positivity_horizon == N
