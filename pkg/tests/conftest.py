import numpy as np
import pytest

from evoinverse import MatrixFamily, Pairing, ProblemSpec, TimeGrid


def scalar_spec(a=-1.0, u0=1.0, f=0.0, w=1.0, T=1.0, N=10, stepper="CrankNicolson"):
    grid = TimeGrid(T, N)
    n = N + 1
    return ProblemSpec(MatrixFamily.constant([[a]], n), [u0], np.full((n, 1), f),
                       Pairing([w]), grid, stepper)


@pytest.fixture
def make_scalar():
    return scalar_spec
