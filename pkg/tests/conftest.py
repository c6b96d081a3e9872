"""Общие фикстуры тестов"""
import numpy as np
import pytest

from models.latent import DirichletParams
from models.network import ChangeWindow, EventLog, VertexSubset
from models.settings import ScenarioConfig
from utils.constants import MODE_ATTRIBUTED, MODE_UNATTRIBUTED


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_log(rng, n=6, N=20, K=2, T=10.0, attributed=False) -> EventLog:
    """Случайный игрушечный поток рёбер"""
    times = np.sort(rng.uniform(0.0, T, size=N))
    first = rng.integers(0, n, size=N)
    second = (first + rng.integers(1, n, size=N)) % n
    return EventLog(
        times=times, u=first, v=second, n=n, T=T, K=K,
        mode=MODE_ATTRIBUTED if attributed else MODE_UNATTRIBUTED,
        attrs=rng.integers(1, K + 1, size=N) if attributed else None,
    )


def random_alpha(rng, K=2) -> DirichletParams:
    return DirichletParams(tuple(rng.uniform(0.5, 5.0, size=K + 1)))


@pytest.fixture
def make_log():
    return random_log


@pytest.fixture
def make_alpha():
    return random_alpha


def planted_scenario(mode=MODE_UNATTRIBUTED, n=30, m=6, lam=None, seed=7,
                     alpha0=(1.0, 50.0, 1.0), alpha1=(50.0, 1.0, 1.0),
                     edges_per_pair=10.0) -> ScenarioConfig:
    """Сценарий с почти ортогональными режимами: подмножество 0..m-1, окно (30, 70]"""
    base = DirichletParams(alpha0)
    if lam is None:
        pairs = n * (n - 1) / 2
        lam = edges_per_pair * pairs / (100.0 * float(base.mean @ base.mean))
    return ScenarioConfig(
        n=n, T=100.0, K=2, lam=lam,
        alpha0=base, alpha1=DirichletParams(alpha1),
        window=ChangeWindow(30.0, 70.0),
        subset=VertexSubset(frozenset(range(m)), n),
        mode=mode, seed=seed, name="planted",
    )


@pytest.fixture
def make_planted():
    return planted_scenario
