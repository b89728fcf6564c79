import numpy as np
import pytest

from bandzeros.geometry import (
    BernsteinSzegoWeight,
    IntervalSystem,
    PolynomialFactorization,
    WeightSpec,
)


def make_spec(endpoints, r_roots=(), bs_roots=(), scale=1.0):
    sys = IntervalSystem(endpoints)
    fac = PolynomialFactorization(sys, r_roots)
    return WeightSpec(fac, BernsteinSzegoWeight(tuple(bs_roots), scale))


@pytest.fixture(scope="session")
def sym2():
    return IntervalSystem([-1.0, -0.5, 0.5, 1.0])


@pytest.fixture(scope="session")
def asym2():
    return IntervalSystem([0.0, 1.0, 2.0, 3.5])


@pytest.fixture(scope="session")
def tri3():
    return IntervalSystem([0.0, 1.0, 2.0, 3.5, 5.0, 6.0])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_system(rng, l):
    """A non-degenerate random system: spacing bounded away from zero."""
    cuts = np.sort(rng.uniform(-3.0, 3.0, size=2 * l))
    while np.min(np.diff(cuts)) < 0.3:
        cuts = np.sort(rng.uniform(-3.0, 3.0, size=2 * l))
    return IntervalSystem(cuts)
