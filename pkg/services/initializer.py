"""
Инициализация EM: сегменты времени, спектральные латентные позиции
по матрице смежности с дополненной диагональю, кандидаты подмножеств.
"""
from typing import List, Optional, Union

from joblib import Parallel, delayed
import numpy as np
from scipy.linalg import eigh
from scipy.special import comb
from sklearn.cluster import KMeans
import skfuzzy
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LIKELIHOOD_EXPOSURE, LIKELIHOOD_GAMMA_FORM
from models.latent import DirichletParams
from models.network import ChangeWindow, EventLog, MultiAdjacency, VertexSubset
from models.results import Candidate, StartPoint, SufficientStats
from models.settings import InitConfig
from services.likelihood import compute_stats, loglik
from utils.constants import (
    AUGMENT_MAX_ITERS, FLAG_START_FALLBACK, FUZZY_MAX_ITERS, MEAN_FLOOR, SIMPLEX_CEIL,
)
from utils.exceptions import InvalidInputError
from utils.logger import setup_logger

logger = setup_logger(__name__)

MatrixLike = Union[MultiAdjacency, np.ndarray]


def augment_diagonal(A: MatrixLike, K: int, tolerance: float = 1e-6,
                     max_iters: int = AUGMENT_MAX_ITERS,
                     deltas: Optional[List[float]] = None) -> np.ndarray:
    """
    Дополнение диагонали: старт с (сумма строки) / (n - 1), затем диагональ
    заменяется диагональю ранг-K восстановления до сходимости

    Args:
        A: Симметричная матрица числа рёбер
        K: Ранг восстановления
        tolerance: Порог изменения диагонали
        deltas: Если передан список, в него пишутся изменения по итерациям

    Returns:
        Матрица A с заполненной диагональю
    """
    counts = A.counts if isinstance(A, MultiAdjacency) else np.asarray(A, dtype=float)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or not np.allclose(counts, counts.T):
        raise InvalidInputError("augment_diagonal: матрица должна быть квадратной и симметричной")
    n = counts.shape[0]
    if not (1 <= K <= n):
        raise InvalidInputError(f"Ранг K={K} вне 1..{n}")

    result = np.array(counts, dtype=float)
    np.fill_diagonal(result, 0.0)
    diag = result.sum(axis=1) / max(n - 1, 1)
    iteration = 0
    for iteration in range(max_iters):
        np.fill_diagonal(result, diag)
        values, vectors = eigh(result, subset_by_index=[n - K, n - 1])
        values = np.clip(values, 0.0, None)
        new_diag = (vectors ** 2) @ values
        delta = float(np.max(np.abs(new_diag - diag)))
        diag = new_diag
        if deltas is not None:
            deltas.append(delta)
        if delta < tolerance:
            break
    np.fill_diagonal(result, diag)
    logger.debug(f"Диагональ дополнена за {iteration + 1} итераций")
    return result


def ls_positions(A_tilde: np.ndarray, b: float, K: int, project: bool = True) -> np.ndarray:
    """
    Позиции наименьших квадратов: минимум ||b X'X - A~||_F через ранг-K
    разложение A~/b, X = diag(sqrt(lambda)) V_K'

    Args:
        A_tilde: Матрица с дополненной диагональю
        b: Ожидаемое число возможностей на пару за интервал
        K: Размерность латентного пространства
        project: Проецировать строки в симплекс

    Returns:
        Массив (n, K): строка i - латентная позиция вершины i
    """
    A_tilde = np.asarray(A_tilde, dtype=float)
    n = A_tilde.shape[0]
    if K > n:
        raise InvalidInputError(f"K={K} больше числа вершин n={n}")
    if not (np.isfinite(b) and b > 0):
        raise InvalidInputError(f"Масштаб b должен быть положительным: {b}")

    values, vectors = eigh(A_tilde / b, subset_by_index=[n - K, n - 1])
    values, vectors = values[::-1], vectors[:, ::-1]
    X = vectors * np.sqrt(np.clip(values, 0.0, None))

    # Знак собственных векторов произволен: разворачиваем к положительной сумме
    signs = np.where(X.sum(axis=0) < 0, -1.0, 1.0)
    X = X * signs
    if project:
        X = project_rows(X)
    return X


def project_rows(X: np.ndarray, ceil: float = SIMPLEX_CEIL) -> np.ndarray:
    """Отрицательные координаты в 0, строки с суммой > 1 масштабируются до ceil"""
    X = np.clip(X, 0.0, None)
    totals = X.sum(axis=1)
    over = totals > 1.0
    X[over] = X[over] * (ceil / totals[over, None])
    return X


def segments(T: float, r: int) -> List[ChangeWindow]:
    """Сегменты ((j-1)T/r, jT/r], j = 1..r"""
    edges = np.linspace(0.0, T, r + 1)
    return [ChangeWindow(edges[j], edges[j + 1]) for j in range(r)]


def attribute_proportions(log: EventLog, window: Optional[ChangeWindow] = None) -> np.ndarray:
    """Доли атрибутов по вершинам (n, K); вершины без событий - нулевые строки"""
    inside = np.ones(log.N, dtype=bool) if window is None else window.contains(log.times)
    counts = np.zeros((log.n, log.K))
    k = log.attrs[inside] - 1
    np.add.at(counts, (log.u[inside], k), 1.0)
    np.add.at(counts, (log.v[inside], k), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)


def _smaller_cluster(labels: np.ndarray, n: int) -> Optional[VertexSubset]:
    sizes = np.bincount(labels, minlength=2)
    if np.count_nonzero(sizes) < 2:
        return None
    return VertexSubset.from_mask(labels == int(np.argmin(sizes)))


def _cluster_segment(log: EventLog, config: InitConfig, lam: float, K: int,
                     index: int, segment: ChangeWindow, seed: int) -> Optional[Candidate]:
    """Кластеризация вершин одного сегмента; None, если сегмент не дал разбиения"""
    positions = None
    if log.attributed:
        features = attribute_proportions(log, segment)
        _, membership, *_ = skfuzzy.cluster.cmeans(
            features.T, c=2, m=config.fuzzifier, error=config.tolerance,
            maxiter=FUZZY_MAX_ITERS, seed=seed,
        )
        labels = np.argmax(membership, axis=0)
    else:
        A_tilde = augment_diagonal(MultiAdjacency.from_log(log, segment), min(K, log.n), config.tolerance)
        b = lam * segment.length / comb(log.n, 2)
        positions = ls_positions(A_tilde, b, min(K, log.n))
        if np.allclose(positions, positions[0]):
            logger.warning(f"Сегмент {index}: позиции неразличимы - пропущен")
            return None
        labels = KMeans(n_clusters=2, n_init=config.kmeans_restarts,
                        random_state=seed).fit_predict(positions)
    subset = _smaller_cluster(labels, log.n)
    if subset is None:
        logger.warning(f"Сегмент {index}: вырожденная кластеризация - пропущен")
        return None
    return Candidate(segment, subset, index, positions)


def candidate_subsets(log: EventLog, config: InitConfig, lam: float,
                      rng: Optional[np.random.Generator] = None,
                      threads: int = 1) -> List[Candidate]:
    """
    Кандидаты (сегмент, подмножество): k-means по спектральным позициям
    (без атрибутов) или нечёткие c-means по долям атрибутов; берётся меньший кластер

    Args:
        log: Поток рёбер
        config: Параметры инициализации
        lam: Интенсивность возможностей
        rng: Генератор для сидов кластеризации
        threads: Число потоков для сегментов (сиды выбираются заранее)

    Returns:
        Список Candidate; сегменты без событий пропускаются
    """
    rng = rng if rng is not None else np.random.default_rng()
    K = config.K or log.K
    jobs = []
    for index, segment in enumerate(segments(log.T, config.r)):
        if not segment.contains(log.times).any():
            logger.warning(f"Сегмент {index} {segment.to_dict()} без событий - пропущен")
            continue
        jobs.append((index, segment, int(rng.integers(0, 2 ** 31 - 1))))

    results = Parallel(n_jobs=threads, prefer='threads')(
        delayed(_cluster_segment)(log, config, lam, K, index, segment, seed)
        for index, segment, seed in jobs
    )
    candidates = [candidate for candidate in results if candidate is not None]
    logger.info(f"Кандидатов подмножеств: {len(candidates)} из {config.r} сегментов")
    return candidates


def _scaled_mean(direction: np.ndarray, magnitude_sq: float) -> np.ndarray:
    """Вектор средних в направлении direction с |mu|^2 = magnitude_sq, внутри симплекса"""
    direction = np.clip(direction, 0.0, None)
    norm = np.linalg.norm(direction)
    if norm == 0:
        direction, norm = np.ones_like(direction), np.sqrt(direction.size)
    mu = direction / norm * np.sqrt(max(magnitude_sq, 0.0))
    mu = np.clip(mu, MEAN_FLOOR, None)
    if mu.sum() > SIMPLEX_CEIL:
        mu = mu * (SIMPLEX_CEIL / mu.sum())
    return mu


def moment_alphas(stats: SufficientStats, K: int, attributed: bool,
                  positions: Optional[np.ndarray] = None,
                  subset: Optional[VertexSubset] = None,
                  total: Optional[float] = None):
    """
    Оценки alpha0, alpha1 методом моментов: E N_{j,k} = gamma_j mu_k^2

    Без атрибутов направление средних берётся из сегментных позиций,
    длина - из N0/gamma0 и N2/gamma2. Сумма концентраций по умолчанию K + 1.
    """
    total = total or float(K + 1)
    if attributed:
        dir0 = np.sqrt(np.asarray(stats.N0, dtype=float) / max(stats.gamma0, MEAN_FLOOR))
        dir1 = np.sqrt(np.asarray(stats.N2, dtype=float) / stats.gamma2) if stats.gamma2 > 0 else dir0
        mu0 = _scaled_mean(dir0, float(dir0 @ dir0))
        mu1 = _scaled_mean(dir1, float(dir1 @ dir1))
    else:
        dir0 = dir1 = np.ones(K)
        if positions is not None and subset is not None:
            mask = subset.mask
            dir0 = positions[~mask].mean(axis=0)
            dir1 = positions[mask].mean(axis=0)
        q0 = stats.Nbar0 / max(stats.gamma0, MEAN_FLOOR)
        q2 = stats.Nbar2 / stats.gamma2 if stats.gamma2 > 0 else q0
        mu0 = _scaled_mean(dir0, q0)
        mu1 = _scaled_mean(dir1, q2)
    return DirichletParams.from_mean(mu0, total), DirichletParams.from_mean(mu1, total)


def best_start(log: EventLog, candidates: List[Candidate], lam: float,
               rng: Optional[np.random.Generator] = None,
               exposure: str = LIKELIHOOD_EXPOSURE,
               gamma_form: str = LIKELIHOOD_GAMMA_FORM) -> StartPoint:
    """
    Кандидат с наибольшим правдоподобием при оценках alpha методом моментов

    Ничья - побеждает меньший номер сегмента. Без кандидатов - запасной старт
    (T/4, 3T/4) со случайным подмножеством из n/10 вершин.
    """
    best = None
    for candidate in sorted(candidates, key=lambda c: c.segment_index):
        stats = compute_stats(log, candidate.window, candidate.subset, lam, gamma_form)
        alpha0, alpha1 = moment_alphas(stats, log.K, log.attributed,
                                       candidate.positions, candidate.subset)
        value = loglik(log, candidate.window, candidate.subset, alpha0, alpha1, lam,
                       exposure, gamma_form)
        logger.debug(f"Кандидат {candidate.segment_index}: m={candidate.subset.m}, loglik={value:.4f}")
        if best is None or value > best.loglik:
            best = StartPoint(candidate.window, candidate.subset, alpha0, alpha1, value,
                              candidate.segment_index)
    if best is not None:
        return best

    rng = rng if rng is not None else np.random.default_rng()
    window = ChangeWindow(log.T / 4, 3 * log.T / 4)
    size = min(max(1, log.n // 10), log.n - 1)
    subset = VertexSubset(frozenset(rng.choice(log.n, size=size, replace=False).tolist()), log.n)
    stats = compute_stats(log, window, subset, lam, gamma_form)
    alpha0, alpha1 = moment_alphas(stats, log.K, log.attributed)
    value = loglik(log, window, subset, alpha0, alpha1, lam, exposure, gamma_form)
    logger.warning(f"{FLAG_START_FALLBACK}: окно {window.to_dict()}, m={size}")
    return StartPoint(window, subset, alpha0, alpha1, value, None, fallback=True)
