import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import quasiband as qb

settings.register_profile(
    "default",
    deadline=None,  # numba JIT warmup blows fixed deadlines
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def z1():
    return qb.build_hypercubic(1)


@pytest.fixture(scope="session")
def z2():
    return qb.build_hypercubic(2)


@pytest.fixture(scope="session")
def z3():
    return qb.build_hypercubic(3)


@pytest.fixture(scope="session")
def honeycomb():
    return qb.build_honeycomb()


@pytest.fixture(scope="session")
def two_pendant():
    # chain vertex with two degree-1 decorations per cell; the antisymmetric
    # combination of the pendants never disperses, giving a flat band at 1
    return qb.PeriodicGraph(
        dim=1,
        vertices=("c", "p1", "p2"),
        edges=(
            ("c", "c", (1,)),
            ("c", "p1", (0,)),
            ("c", "p2", (0,)),
        ),
    )


def random_symmetric(rng, n, kind):
    """Random test matrices spanning the counting kernels' dispatch paths."""
    if kind == "tridiagonal":
        d = rng.normal(size=n)
        e = rng.normal(size=n - 1)
        m = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    elif kind == "banded":
        b = int(rng.integers(2, 6))
        m = np.zeros((n, n))
        for k in range(b + 1):
            e = rng.normal(size=n - k)
            m += np.diag(e, k)
            if k:
                m += np.diag(e, -k)
    elif kind == "sparse":
        m = np.zeros((n, n))
        nnz = max(n, int(0.02 * n * n))
        rows = rng.integers(0, n, size=nnz)
        cols = rng.integers(0, n, size=nnz)
        vals = rng.normal(size=nnz)
        for i, j, v in zip(rows, cols, vals):
            m[i, j] += v
            if i != j:
                m[j, i] += v
        m += np.diag(rng.normal(size=n))
    else:  # dense
        a = rng.normal(size=(n, n))
        m = (a + a.T) / 2.0
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
