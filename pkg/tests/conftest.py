import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from genbound.prob import DiscreteScenario, SupersampleScenario
from genbound.transport import MetricSpace


def memorizer(n_symbols: int = 2) -> DiscreteScenario:
    """n = 1 learner that returns its training sample; discrete loss, uniform data."""
    k = n_symbols
    return DiscreteScenario(
        samples=range(k), n=1, p_z=np.full(k, 1 / k), hypotheses=range(k),
        kernel=np.eye(k), loss=1.0 - np.eye(k), name="memorizer",
    )


def independent(rng: np.random.Generator, n: int = 2, nz: int = 3, nw: int = 4) -> DiscreteScenario:
    """Learner whose output law ignores the data."""
    row = rng.dirichlet(np.ones(nw))
    return DiscreteScenario(
        samples=range(nz), n=n, p_z=rng.dirichlet(np.ones(nz)), hypotheses=range(nw),
        kernel=np.broadcast_to(row, (nz,) * n + (nw,)), loss=rng.random((nw, nz)),
        name="independent",
    )


def random_scenario(rng: np.random.Generator, n: int = 2, nz: int = 3, nw: int = 4, nr: int = 1,
                    conc: float = 0.5, euclidean: bool = False) -> DiscreteScenario:
    metric = MetricSpace.from_points(rng.random((nw, 2)), range(nw)).dist if euclidean else "discrete"
    return DiscreteScenario(
        samples=range(nz), n=n, p_z=rng.dirichlet(np.full(nz, 2.0)), hypotheses=range(nw),
        kernel=rng.dirichlet(np.full(nw, conc), size=(nz,) * n + (nr,)), loss=rng.random((nw, nz)),
        metric=metric, aux=range(nr), p_r=rng.dirichlet(np.ones(nr)),
    )


def random_supersample(rng: np.random.Generator, n: int = 2, nz: int = 2, nw: int = 4, nr: int = 1,
                       conc: float = 0.5) -> SupersampleScenario:
    kernel = rng.dirichlet(np.full(nw, conc), size=(nz,) * (2 * n) + (2,) * n + (nr,))
    return SupersampleScenario(
        samples=range(nz), n=n, p_z=rng.dirichlet(np.full(nz, 2.0)), hypotheses=range(nw),
        kernel=kernel, loss=rng.random((nw, nz)), aux=range(nr), p_r=rng.dirichlet(np.ones(nr)),
    )


def lattice_metric(rng: np.random.Generator, k: int, step: float = 1e-3) -> MetricSpace:
    """Random metric whose distances are integer multiples of ``step``."""
    raw = rng.integers(50, 1000, size=(k, k))
    raw = np.triu(raw, 1)
    raw = raw + raw.T
    closed = shortest_path(raw.astype(float), directed=False)
    return MetricSpace(tuple(range(k)), np.round(closed) * step)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
