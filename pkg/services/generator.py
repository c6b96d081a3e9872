"""
Генератор потоков рёбер: однородный пуассоновский процесс возможностей,
прореженный моделью случайного скалярного произведения.
"""
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))
from config import DEFAULT_SEED
from models.latent import DirichletParams, expected_dot, sample_latent_batch
from models.network import ChangeWindow, EventLog, VertexSubset
from models.settings import ScenarioConfig
from utils.constants import (
    MODE_ATTRIBUTED, MODE_UNATTRIBUTED,
    SCENARIO_SIZES, SCENARIO_M, SCENARIO_T, SCENARIO_WINDOW, SCENARIO_EDGES_PER_PAIR,
    SCENARIO_K, SCENARIO_ALPHA0, SCENARIO_ALPHA1,
)
from utils.logger import setup_logger

logger = setup_logger(__name__)

Opportunities = Tuple[np.ndarray, np.ndarray, np.ndarray]


def generate_opportunities(config: ScenarioConfig, rng: np.random.Generator) -> Opportunities:
    """
    Возможности рёбер: N+ ~ Poisson(lam * T) моментов на (0, T),
    каждому - равновероятная неупорядоченная пара u != v

    Returns:
        (times, u, v), упорядочено по времени, u < v
    """
    count = rng.poisson(config.lam * config.T)
    times = np.sort(rng.uniform(0.0, config.T, size=count))
    first = rng.integers(0, config.n, size=count)
    second = rng.integers(0, config.n - 1, size=count)
    second = second + (second >= first)
    return times, np.minimum(first, second), np.maximum(first, second)


def _regime_params(config: ScenarioConfig, times: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Маска: конец события разыгрывается из F(alpha1)"""
    return config.window.contains(times) & config.subset.mask[vertices]


def _draw_positions(config: ScenarioConfig, anomalous: np.ndarray,
                    rng: np.random.Generator) -> np.ndarray:
    positions = np.empty((anomalous.size, config.K))
    positions[~anomalous] = sample_latent_batch(config.alpha0, int((~anomalous).sum()), rng)
    positions[anomalous] = sample_latent_batch(config.alpha1, int(anomalous.sum()), rng)
    return positions


def realize_events(opportunities: Opportunities, config: ScenarioConfig,
                   rng: np.random.Generator) -> EventLog:
    """
    Прореживание возможностей: свежие латентные позиции для обоих концов,
    затем Бернулли (без атрибутов) или категориальный атрибут с отбрасыванием k = 0
    """
    times, u, v = opportunities
    x_u = _draw_positions(config, _regime_params(config, times, u), rng)
    x_v = _draw_positions(config, _regime_params(config, times, v), rng)
    per_attr = x_u * x_v
    draws = rng.random(times.size)

    attrs = None
    if config.mode == MODE_ATTRIBUTED:
        cumulative = np.cumsum(per_attr, axis=1)
        k = (draws[:, None] >= cumulative).sum(axis=1) + 1
        keep = k <= config.K
        attrs = k[keep]
    else:
        keep = draws < per_attr.sum(axis=1)

    log = EventLog(
        times=times[keep], u=u[keep], v=v[keep],
        n=config.n, T=config.T, K=config.K, mode=config.mode, attrs=attrs,
    )
    logger.debug(f"Реализовано {log.N} рёбер из {times.size} возможностей ({config.name})")
    return log


def simulate_log(config: ScenarioConfig, rng: Optional[np.random.Generator] = None) -> EventLog:
    """Полный прогон генератора; без rng используется seed сценария"""
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    return realize_events(generate_opportunities(config, rng), config, rng)


def lambda_for_edges_per_pair(edges_per_pair: float, n: int, T: float,
                              alpha0: DirichletParams) -> float:
    """lambda, при которой вне окна в среднем edges_per_pair рёбер на пару за время T"""
    return edges_per_pair * comb(n, 2) / (T * expected_dot(alpha0, alpha0))


def study_scenarios(sizes: Sequence[int] = SCENARIO_SIZES,
                    levels: Optional[Iterable[str]] = None,
                    edges_per_pair: Sequence[float] = SCENARIO_EDGES_PER_PAIR,
                    mode: str = MODE_UNATTRIBUTED,
                    seed: int = DEFAULT_SEED,
                    alpha0: Optional[DirichletParams] = None,
                    alpha1: Optional[dict] = None) -> List[ScenarioConfig]:
    """
    Шаблоны сценариев исследования: n из sizes, m = 10, T = 100, окно (30, 70],
    три уровня разделения alpha1 и сетка lambda по среднему числу рёбер на пару

    Args:
        sizes: Размеры сети
        levels: Уровни разделения (ключи alpha1); по умолчанию все
        edges_per_pair: Сетка среднего числа рёбер на пару
        alpha0: Базовое распределение (переопределение)
        alpha1: Словарь уровень -> DirichletParams (переопределение)

    Returns:
        Список ScenarioConfig
    """
    base = alpha0 or DirichletParams(SCENARIO_ALPHA0)
    shifted = alpha1 or {name: DirichletParams(a) for name, a in SCENARIO_ALPHA1.items()}
    levels = list(levels) if levels is not None else list(shifted)
    window = ChangeWindow(*SCENARIO_WINDOW)

    scenarios = []
    for n in sizes:
        subset = VertexSubset(frozenset(range(SCENARIO_M)), n)
        for level in levels:
            for npp in edges_per_pair:
                scenarios.append(ScenarioConfig(
                    n=n, T=SCENARIO_T, K=SCENARIO_K,
                    lam=lambda_for_edges_per_pair(npp, n, SCENARIO_T, base),
                    alpha0=base, alpha1=shifted[level],
                    window=window, subset=subset, mode=mode, seed=seed,
                    name=f"{level}_n{n}",
                ))
    return scenarios


def null_scenario(n: int, lam: float, mode: str = MODE_UNATTRIBUTED,
                  seed: int = DEFAULT_SEED,
                  alpha: Optional[DirichletParams] = None) -> ScenarioConfig:
    """Нулевой сценарий: alpha1 = alpha0, окно и подмножество номинальные"""
    base = alpha or DirichletParams(SCENARIO_ALPHA0)
    return ScenarioConfig(
        n=n, T=SCENARIO_T, K=base.K, lam=lam, alpha0=base, alpha1=base,
        window=ChangeWindow(*SCENARIO_WINDOW),
        subset=VertexSubset(frozenset(range(SCENARIO_M)), n),
        mode=mode, seed=seed, name=f"null_n{n}",
    )
