"""
Симуляционное исследование: мощность BIC, чувствительность/специфичность
восстановления подмножества и ошибка точек изменения по сетке сценариев.
"""
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import comb
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))
from config import DEFAULT_SEED
from models.latent import separation_angle
from models.network import VertexSubset
from models.results import ReplicateOutcome, StudyMetrics
from models.settings import EMConfig, InitConfig, ScenarioConfig
from services.em_fitter import EMFitter, fix_lambda
from services.generator import simulate_log
from services.model_selection import bic_compare
from utils.constants import DECISION_HETEROGENEOUS, STUDY_COLUMNS
from utils.exceptions import DetectorError, InvalidInputError
from utils.logger import setup_logger

logger = setup_logger(__name__)


def replicate_seed(master: int, scenario_index: int, replicate: int) -> np.random.SeedSequence:
    """Сид реплики по счётчику (мастер-сид, номер сценария, номер реплики)"""
    return np.random.SeedSequence([int(master), int(scenario_index), int(replicate)])


def subset_recovery(truth: VertexSubset, estimate: VertexSubset):
    """(чувствительность, специфичность) оценённого подмножества"""
    true_mask, est_mask = truth.mask, estimate.mask
    sensitivity = float((true_mask & est_mask).sum() / true_mask.sum())
    outside = ~true_mask
    specificity = float((outside & ~est_mask).sum() / outside.sum())
    return sensitivity, specificity


def run_replicate(scenario: ScenarioConfig, seed: np.random.SeedSequence,
                  em_config: EMConfig, init_config: InitConfig,
                  time_unit: Optional[float] = None) -> ReplicateOutcome:
    """Одна реплика: генерация, обе модели, сравнение по BIC"""
    data_seed, fit_seed = seed.spawn(2)
    try:
        log = simulate_log(scenario, np.random.default_rng(data_seed))
        avg_edges = log.N / comb(log.n, 2)
        if log.N == 0:
            return ReplicateOutcome(False, np.nan, np.nan, np.nan, avg_edges)
        lam = fix_lambda(log, time_unit or log.T / 100)
        fitter = EMFitter(em_config, init_config, np.random.default_rng(fit_seed))
        hom = fitter.fit_homogeneous(log, lam)
        het = fitter.fit(log, lam)
        report = bic_compare(log, hom, het)
    except (DetectorError, FloatingPointError, np.linalg.LinAlgError) as e:
        logger.warning(f"Реплика {scenario.name} не удалась: {e}")
        return ReplicateOutcome(False, np.nan, np.nan, np.nan, np.nan, error=str(e))

    rejected = report.decision == DECISION_HETEROGENEOUS
    sensitivity, specificity = subset_recovery(scenario.subset, het.model.subset)
    window = het.model.window
    cp_error = (abs(scenario.window.tau1 - window.tau1) + abs(scenario.window.tau2 - window.tau2)) / 2
    return ReplicateOutcome(rejected, sensitivity, specificity, cp_error, avg_edges, window)


def aggregate(scenario: ScenarioConfig, outcomes: Sequence[ReplicateOutcome]) -> StudyMetrics:
    """
    Метрики точки сетки: мощность по всем успешным репликам,
    чувствительность, специфичность и ошибка окна - только по отвергнувшим однородность
    """
    ok = [o for o in outcomes if o.error is None]
    rejecting = [o for o in ok if o.rejected]

    def mean(values) -> float:
        return float(np.mean(values)) if len(values) else float('nan')

    return StudyMetrics(
        scenario=scenario.name,
        n=scenario.n,
        m=scenario.m,
        lam=scenario.lam,
        avg_edges_per_pair=mean([o.avg_edges_per_pair for o in ok]),
        power=mean([float(o.rejected) for o in ok]),
        sensitivity=mean([o.sensitivity for o in rejecting]),
        specificity=mean([o.specificity for o in rejecting]),
        cp_error=mean([o.cp_error for o in rejecting]),
        replicates=len(outcomes),
        failures=len(outcomes) - len(ok),
        phi=float(np.degrees(separation_angle(scenario.alpha0, scenario.alpha1))),
    )


def run_study(scenarios: Sequence[ScenarioConfig], replicates: int,
              em_config: Optional[EMConfig] = None,
              init_config: Optional[InitConfig] = None,
              seed: int = DEFAULT_SEED, threads: int = 1,
              time_unit: Optional[float] = None) -> List[StudyMetrics]:
    """
    Прогон сетки сценариев

    Args:
        scenarios: Точки сетки (сценарий x lambda)
        replicates: Число реплик на точку
        seed: Мастер-сид; сиды реплик выводятся по счётчику
        threads: Число процессов joblib

    Returns:
        Список StudyMetrics в порядке сценариев
    """
    if replicates < 1:
        raise InvalidInputError(f"Число реплик должно быть >= 1: {replicates}")
    em_config = em_config or EMConfig()
    init_config = init_config or InitConfig()

    tasks = [
        (index, scenario, replicate_seed(seed, index, r))
        for index, scenario in enumerate(scenarios)
        for r in range(replicates)
    ]
    logger.info(f"Исследование: {len(scenarios)} точек x {replicates} реплик, потоков {threads}")
    outcomes = Parallel(n_jobs=threads)(
        delayed(run_replicate)(scenario, child, em_config, init_config, time_unit)
        for _, scenario, child in tasks
    )

    results = []
    for index, scenario in enumerate(scenarios):
        chunk = outcomes[index * replicates:(index + 1) * replicates]
        metrics = aggregate(scenario, chunk)
        logger.info(f"{scenario.name} lambda={scenario.lam:.4f}: power={metrics.power:.3f}, "
                    f"N/pair={metrics.avg_edges_per_pair:.3f}, отказов {metrics.failures}")
        results.append(metrics)
    return results


def study_table(metrics: Sequence[StudyMetrics]) -> pd.DataFrame:
    """Таблица метрик в фиксированном порядке колонок"""
    return pd.DataFrame([m.to_row() for m in metrics], columns=STUDY_COLUMNS)
