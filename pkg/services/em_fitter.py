"""
Стохастический условный EM для гетерогенной модели и подгонка однородной модели.

E-шаг: окно изменения - самонормированное среднее по случайным кандидатам,
принадлежность вершин - правило Байеса с порогом xi.
M-шаг: замкнутые формулы с проверкой градиента (атрибуты) или градиентный
подъём по латентным позициям с MLE Дирихле (без атрибутов).
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import approx_fprime, minimize
from scipy.special import comb, digamma, expit, gammaln, logit, polygamma, softmax, xlogy
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))
from config import DEFAULT_SEED
from models.latent import DirichletParams
from models.network import ChangeWindow, EventLog, MultiAdjacency, PartitionModel, VertexSubset
from models.results import FitResult, HomogeneousFit, StartPoint, SufficientStats, TraceEntry
from models.settings import EMConfig, InitConfig, StepConfig
from services.initializer import augment_diagonal, best_start, candidate_subsets, ls_positions
from services.likelihood import (
    WindowScorer, compute_stats, loglik, loglik_from_stats, loglik_homogeneous,
    membership_log_odds, subset_mask,
)
from utils.constants import (
    DIRICHLET_ALPHA_BOUNDS, DIRICHLET_MLE_MAX_ITERS, DIRICHLET_MLE_TOL,
    FLAG_ALPHA1_SKIPPED, FLAG_CLOSED_FORM_REJECTED, FLAG_MEMBERSHIP_EMPTY,
    FLAG_MEMBERSHIP_FULL, FLAG_MEMBERSHIP_KEPT, FLAG_START_FALLBACK, FLAG_WINDOW_DEGENERATE,
    GRADIENT_CHECK_RTOL, LAMBDA_FACTOR, MEAN_FLOOR, POSITION_FLOOR, SIMPLEX_CEIL,
)
from utils.exceptions import InvalidInputError, NumericalError
from utils.logger import setup_logger

logger = setup_logger(__name__)

# Границы логитов при численной максимизации по средним
LOGIT_BOUND = 40.0
# Допуск монотонности M-шага
MONOTONE_TOL = 1e-9


def fix_lambda(log: EventLog, unit: float) -> float:
    """
    lambda = 1.5 * (максимум числа рёбер в корзине длины unit) / unit

    Args:
        log: Поток рёбер
        unit: Длина корзины (единица времени)

    Returns:
        Интенсивность возможностей на единицу времени
    """
    if log.N == 0:
        raise InvalidInputError("fix_lambda: пустой поток рёбер")
    if not (np.isfinite(unit) and unit > 0):
        raise InvalidInputError(f"fix_lambda: единица времени должна быть положительной: {unit}")
    bins = np.floor(log.times / unit).astype(np.int64)
    peak = int(np.bincount(bins).max())
    lam = LAMBDA_FACTOR * peak / unit
    logger.info(f"lambda = {lam:.4f} (максимум {peak} рёбер за {unit})")
    return lam


# ---------------------------------------------------------------------------
# Средние Дирихле в логит-параметризации
# ---------------------------------------------------------------------------

def mean_from_logits(w: np.ndarray) -> np.ndarray:
    """Первые K компонент softmax([w, 0]): всегда строго внутри симплекса"""
    return softmax(np.append(w, 0.0))[:-1]


def logits_from_mean(mu: np.ndarray) -> np.ndarray:
    mu = np.clip(np.asarray(mu, dtype=float), MEAN_FLOOR, None)
    rest = max(1.0 - mu.sum(), MEAN_FLOOR)
    return np.clip(np.log(mu) - np.log(rest), -LOGIT_BOUND, LOGIT_BOUND)


def maximize_means(objective: Callable[..., float],
                   starts: Sequence[Sequence[np.ndarray]]) -> Tuple[List[np.ndarray], float]:
    """
    Численный максимум objective(mu_1, ..., mu_B) по блокам средних (L-BFGS-B по логитам)

    Returns:
        (лучшие средние, значение); старты тоже участвуют в выборе
    """
    sizes = [len(mu) for mu in starts[0]]
    cuts = np.cumsum(sizes)[:-1]

    def unpack(w):
        return [mean_from_logits(part) for part in np.split(w, cuts)]

    def negative(w):
        value = objective(*unpack(w))
        return -value if np.isfinite(value) else 1e300

    best_means, best_value = None, -np.inf
    for start in starts:
        value = objective(*start)
        if value > best_value:
            best_means, best_value = [np.asarray(mu, dtype=float) for mu in start], value
        w0 = np.concatenate([logits_from_mean(mu) for mu in start])
        result = minimize(negative, w0, method='L-BFGS-B',
                          bounds=[(-LOGIT_BOUND, LOGIT_BOUND)] * w0.size)
        candidate = unpack(result.x)
        value = objective(*candidate)
        if value > best_value:
            best_means, best_value = candidate, value
    return best_means, best_value


def closed_form_mean(counts, gamma_own: float, gamma_cross: float,
                     mu_other: np.ndarray) -> Optional[np.ndarray]:
    """
    Положительный корень 2 gamma_own mu^2 + gamma_cross mu_other mu - counts = 0
    (условный максимум по средним одной группы)
    """
    if gamma_own <= 0:
        return None
    cross = gamma_cross * np.asarray(mu_other, dtype=float)
    counts = np.asarray(counts, dtype=float)
    return (np.sqrt(cross ** 2 + 8.0 * gamma_own * counts) - cross) / (4.0 * gamma_own)


def is_stationary(objective: Callable[[np.ndarray], float], mu: np.ndarray,
                  rtol: float = GRADIENT_CHECK_RTOL) -> bool:
    """Проверка градиента: |mu_k df/dmu_k| мал относительно |f|"""
    value = objective(mu)
    if not np.isfinite(value):
        return False
    grad = approx_fprime(mu, objective, 1e-7 * mu)
    return bool(np.all(np.abs(mu * grad) <= rtol * max(1.0, abs(value))))


# ---------------------------------------------------------------------------
# MLE Дирихле по точкам симплекса
# ---------------------------------------------------------------------------

def _inverse_digamma(y: np.ndarray, iterations: int = 5) -> np.ndarray:
    """Обращение дигамма-функции методом Ньютона"""
    x = np.where(y >= -2.22, np.exp(y) + 0.5, -1.0 / (y - digamma(1.0)))
    for _ in range(iterations):
        x = x - (digamma(x) - y) / polygamma(1, x)
    return x


def dirichlet_mle(points: np.ndarray, initial: Optional[DirichletParams] = None,
                  max_iters: int = DIRICHLET_MLE_MAX_ITERS,
                  tol: float = DIRICHLET_MLE_TOL) -> Optional[DirichletParams]:
    """
    MLE Дирихле неподвижной точкой: alpha <- psi^-1(psi(sum alpha) + mean log p)

    Args:
        points: Массив (N, K); (K+1)-я компонента - остаток до 1
        initial: Стартовое значение (иначе метод моментов)

    Returns:
        DirichletParams или None, если точек меньше двух
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        return None
    full = np.column_stack([points, 1.0 - points.sum(axis=1)])
    full = np.clip(full, POSITION_FLOOR * 1e-3, None)
    full = full / full.sum(axis=1, keepdims=True)
    log_mean = np.log(full).mean(axis=0)
    low, high = DIRICHLET_ALPHA_BOUNDS

    if initial is not None:
        alpha = initial.vector.copy()
    else:
        mean = full.mean(axis=0)
        var = full[:, 0].var()
        precision = mean[0] * (1 - mean[0]) / var - 1 if var > 0 else high
        alpha = mean * np.clip(precision, low, high)
    alpha = np.clip(alpha, low, high)

    for _ in range(max_iters):
        updated = np.clip(_inverse_digamma(digamma(alpha.sum()) + log_mean), low, high)
        if np.max(np.abs(updated - alpha)) < tol * max(1.0, alpha.max()):
            alpha = updated
            break
        alpha = updated
    return DirichletParams(tuple(alpha))


# ---------------------------------------------------------------------------
# Латентные позиции по слотам: базовый слот у каждой вершины,
# слот окна у каждой вершины подмножества
# ---------------------------------------------------------------------------

@dataclass
class SlotProblem:
    """Счётчики C, экспозиции B и режимы слотов для подъёма по позициям"""
    counts: np.ndarray
    exposure: np.ndarray
    regimes: np.ndarray
    members: np.ndarray
    n: int

    @property
    def size(self) -> int:
        return self.counts.shape[0]


def split_adjacency(log: EventLog, window: ChangeWindow, subset) -> Tuple[np.ndarray, np.ndarray]:
    """
    Разложение A = A_check + A_dot: в A_check события без аномальных концов
    ((1 - s) + s (1 - y)(1 - z) = 1), в A_dot остальные
    """
    mask = subset_mask(subset, log.n)
    anomalous = window.contains(log.times) & (mask[log.u] | mask[log.v])
    weights = (~anomalous).astype(float)
    A_check = log.adjacency(weights=weights)
    A_dot = log.adjacency(weights=1.0 - weights)
    return A_check, A_dot


def slot_problem(log: EventLog, window: ChangeWindow, subset, lam: float) -> SlotProblem:
    """
    Сборка задачи по слотам. B_ab - ожидаемое число возможностей пары слотов:
    lam (T - len) / C(n,2) между базовыми слотами вне окна,
    lam len / C(n,2) между слотами, действующими внутри окна
    """
    n = log.n
    mask = subset_mask(subset, n)
    members = np.flatnonzero(mask)
    m = members.size
    size = n + m
    in_slot = np.arange(n)
    in_slot[members] = n + np.arange(m)

    A_check, _ = split_adjacency(log, window, mask)
    counts = np.zeros((size, size))
    counts[:n, :n] = A_check
    inside = window.contains(log.times) & (mask[log.u] | mask[log.v])
    su = np.where(mask[log.u[inside]], in_slot[log.u[inside]], log.u[inside])
    sv = np.where(mask[log.v[inside]], in_slot[log.v[inside]], log.v[inside])
    extra = np.zeros((size, size))
    np.add.at(extra, (su, sv), 1.0)
    counts += extra + extra.T

    pairs = comb(n, 2)
    off_diagonal = 1.0 - np.eye(n)
    exposure = np.zeros((size, size))
    exposure[:n, :n] = lam * (log.T - window.length) / pairs * off_diagonal
    P = np.zeros((n, size))
    P[np.arange(n), in_slot] = 1.0
    exposure += lam * window.length / pairs * (P.T @ off_diagonal @ P)

    regimes = np.concatenate([np.zeros(n, dtype=int), np.ones(m, dtype=int)])
    return SlotProblem(counts, exposure, regimes, members, n)


def _dirichlet_logpdf(Y: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """Лог-плотность Дирихле по строкам Y (K коорд.) с параметрами строк alphas (K+1)"""
    rest = 1.0 - Y.sum(axis=1)
    norm = gammaln(alphas.sum(axis=1)) - gammaln(alphas).sum(axis=1)
    with np.errstate(divide='ignore', invalid='ignore'):
        body = xlogy(alphas[:, :-1] - 1.0, Y).sum(axis=1) + xlogy(alphas[:, -1] - 1.0, rest)
    return norm + body


def slot_objective(Y: np.ndarray, problem: SlotProblem, alphas: np.ndarray) -> float:
    """
    Лог-апостериорная плотность позиций:
    sum_{a<b} [C_ab log(Y_a.Y_b) - B_ab Y_a.Y_b] + sum_s log Dir(Y_s)
    """
    D = Y @ Y.T
    with np.errstate(divide='ignore'):
        edges = 0.5 * (xlogy(problem.counts, D) - problem.exposure * D).sum()
    return float(edges + _dirichlet_logpdf(Y, alphas).sum())


def slot_gradient(Y: np.ndarray, problem: SlotProblem, alphas: np.ndarray) -> np.ndarray:
    """
    Градиент slot_objective по строкам Y:
    (C / (Y Y') - B) Y + (eta - 1) / Y - (alpha_{K+1} - 1) / (1 - sum Y)

    Первое слагаемое с C - рёберная часть печатного градиента (P_check, P_dot);
    экспозиция B и (K+1)-я компонента Дирихле дописаны к нему.
    """
    D = Y @ Y.T
    ratio = np.divide(problem.counts, D, out=np.zeros_like(D), where=problem.counts > 0)
    rest = 1.0 - Y.sum(axis=1, keepdims=True)
    return ((ratio - problem.exposure) @ Y
            + (alphas[:, :-1] - 1.0) / Y
            - (alphas[:, -1:] - 1.0) / rest)


def project_interior(y: np.ndarray) -> np.ndarray:
    """Проекция внутрь симплекса: координаты >= POSITION_FLOOR, сумма <= SIMPLEX_CEIL"""
    y = np.clip(y, POSITION_FLOOR, None)
    total = y.sum()
    if total > SIMPLEX_CEIL:
        excess = y - POSITION_FLOOR
        y = POSITION_FLOOR + excess * (SIMPLEX_CEIL - y.size * POSITION_FLOOR) / excess.sum()
    return y



def _slot_local(y: np.ndarray, s: int, Y: np.ndarray, problem: SlotProblem,
                alpha: np.ndarray) -> float:
    """Слагаемые slot_objective, зависящие от позиции слота s"""
    dots = Y @ y
    dots[s] = 0.0
    with np.errstate(divide='ignore'):
        edges = xlogy(problem.counts[s], dots).sum() - problem.exposure[s] @ dots
    return float(edges + _dirichlet_logpdf(y[None, :], alpha[None, :])[0])


def _slot_local_gradient(y: np.ndarray, s: int, Y: np.ndarray, problem: SlotProblem,
                         alpha: np.ndarray) -> np.ndarray:
    dots = Y @ y
    dots[s] = 1.0
    counts = problem.counts[s]
    ratio = np.divide(counts, dots, out=np.zeros_like(dots), where=counts > 0)
    with np.errstate(divide='ignore', invalid='ignore'):
        return ((ratio - problem.exposure[s]) @ Y
                + (alpha[:-1] - 1.0) / y
                - (alpha[-1] - 1.0) / (1.0 - y.sum()))


def ascend_positions(Y: np.ndarray, problem: SlotProblem, alpha0: DirichletParams,
                     alpha1: DirichletParams, step: StepConfig,
                     rel_tol: float) -> Tuple[np.ndarray, DirichletParams, DirichletParams, float]:
    """
    Последовательные шаги по слотам вдоль градиента с дроблением шага;
    после каждого прохода MLE Дирихле пересчитываются по позициям режимов

    Returns:
        (позиции, alpha0, alpha1, лог-апостериорная плотность)
    """
    Y = np.array([project_interior(y) for y in Y])
    regimes = problem.regimes

    def alpha_rows(a0, a1):
        return np.where(regimes[:, None] == 0, a0.vector, a1.vector)

    alphas = alpha_rows(alpha0, alpha1)
    previous = slot_objective(Y, problem, alphas)
    for sweep in range(step.max_sweeps):
        for s in range(problem.size):
            y = Y[s]
            grad = _slot_local_gradient(y, s, Y, problem, alphas[s])
            if not np.all(np.isfinite(grad)):
                # Позиция на границе: сдвиг внутрь, шаг на следующем проходе
                Y[s] = project_interior(np.maximum(y, 10 * POSITION_FLOOR))
                continue
            norm = np.linalg.norm(grad)
            if norm == 0:
                continue
            direction = grad / norm
            current = _slot_local(y, s, Y, problem, alphas[s])
            t = step.initial_step
            for _ in range(step.max_inner):
                trial = project_interior(y + t * direction)
                if _slot_local(trial, s, Y, problem, alphas[s]) > current:
                    Y[s] = trial
                    break
                t *= step.backtrack

        alpha0 = dirichlet_mle(Y[regimes == 0], alpha0) or alpha0
        alpha1 = dirichlet_mle(Y[regimes == 1], alpha1) or alpha1
        alphas = alpha_rows(alpha0, alpha1)
        value = slot_objective(Y, problem, alphas)
        logger.debug(f"Проход {sweep + 1}: лог-апостериорная плотность {value:.6f}")
        done = abs(value - previous) < rel_tol * max(1.0, abs(previous))
        previous = value
        if done:
            break
    return Y, alpha0, alpha1, previous


class EMFitter:
    """
    Стохастический условный EM.

    Все случайные величины берутся из self.rng; флаги вырожденных
    ситуаций копятся в self.flags и попадают в FitResult.
    """

    def __init__(self, config: Optional[EMConfig] = None,
                 init_config: Optional[InitConfig] = None,
                 rng: Optional[np.random.Generator] = None, threads: int = 1):
        self.config = config or EMConfig()
        self.init_config = init_config or InitConfig()
        self.rng = rng if rng is not None else np.random.default_rng(DEFAULT_SEED)
        self.threads = threads
        self.flags: List[str] = []
        # Позиции предыдущего M-шага для тёплого старта подъёма
        self._positions_log: Optional[EventLog] = None
        self._base_positions: Optional[np.ndarray] = None
        self._window_positions: Dict[int, np.ndarray] = {}

    def _flag(self, flag: str, detail: str = ""):
        message = f"{flag} {detail}".strip()
        if flag in self.flags:
            logger.debug(message)
            return
        self.flags.append(flag)
        logger.warning(message)

    def _loglik(self, log: EventLog, window: ChangeWindow, subset, alpha0: DirichletParams,
                alpha1: DirichletParams, lam: float) -> float:
        return loglik(log, window, subset, alpha0, alpha1, lam,
                      self.config.exposure, self.config.gamma_form)

    # ------------------------------------------------------------------ E-шаг

    def estep_window(self, log: EventLog, subset: VertexSubset, alpha0: DirichletParams,
                     alpha1: DirichletParams, lam: float,
                     current: Optional[ChangeWindow] = None) -> ChangeWindow:
        """
        Условное среднее окна: Z кандидатов, равномерных на (0, T)^2 и упорядоченных,
        с весами p_z ~ exp(loglik), нормированными через log-sum-exp
        """
        draws = np.sort(self.rng.uniform(0.0, log.T, size=(self.config.num_candidates, 2)), axis=1)
        scorer = WindowScorer(log, subset, alpha0, alpha1, lam,
                              self.config.exposure, self.config.gamma_form)
        scores = scorer.score(draws[:, 0], draws[:, 1])
        estimate = None
        if np.isfinite(scores).any():
            weights = softmax(np.where(np.isnan(scores), -np.inf, scores))
            estimate = weights @ draws
        if estimate is None or not np.all(np.isfinite(estimate)) or estimate[0] >= estimate[1]:
            if current is None:
                raise NumericalError("estep_window: вырожденные веса и нет текущего окна")
            self._flag(FLAG_WINDOW_DEGENERATE, f"окно {current.to_dict()}")
            return current
        return ChangeWindow(float(estimate[0]), float(min(estimate[1], log.T)))

    def membership_probabilities(self, log: EventLog, window: ChangeWindow,
                                 subset_prev: VertexSubset, alpha0: DirichletParams,
                                 alpha1: DirichletParams, lam: float) -> np.ndarray:
        """p(i в v | e, окно, alpha0, alpha1, остальные как в subset_prev)"""
        odds = membership_log_odds(log, window, subset_prev, alpha0, alpha1, lam,
                                   self.config.exposure, self.config.gamma_form)
        return expit(odds + logit(self.config.membership_prior))

    def estep_membership(self, log: EventLog, window: ChangeWindow, subset_prev: VertexSubset,
                         alpha0: DirichletParams, alpha1: DirichletParams,
                         lam: float) -> VertexSubset:
        """Вершина входит в подмножество, если её вероятность больше xi"""
        probs = self.membership_probabilities(log, window, subset_prev, alpha0, alpha1, lam)
        if probs.max() - probs.min() < 1e-12:
            self._flag(FLAG_MEMBERSHIP_KEPT)
            return subset_prev
        include = probs > self.config.xi
        if include.all() or not include.any():
            if include.any():
                include[int(np.argmin(probs))] = False
                self._flag(FLAG_MEMBERSHIP_FULL)
            else:
                include[int(np.argmax(probs))] = True
                self._flag(FLAG_MEMBERSHIP_EMPTY)
        return VertexSubset.from_mask(include)

    # ------------------------------------------------------------------ M-шаг

    def _update_block(self, objective: Callable[[np.ndarray], float], mu_prev: np.ndarray,
                      closed_forms: Sequence[Optional[np.ndarray]]) -> np.ndarray:
        """
        Замкнутые формулы по порядку (первая - без удвоения счётчиков пар), каждая с проверкой
        градиента; иначе численный максимум. Значение не убывает.
        """
        floor_value = objective(mu_prev)
        valid = []
        for index, candidate in enumerate(closed_forms):
            if candidate is None:
                continue
            candidate = np.clip(candidate, MEAN_FLOOR, None)
            if candidate.sum() < 1.0:
                valid.append(candidate)
                if (is_stationary(objective, candidate)
                        and objective(candidate) >= floor_value - MONOTONE_TOL):
                    if index > 0:
                        logger.debug(f"Замкнутая формула {index} принята, предыдущие не стационарны")
                    return candidate
        self._flag(FLAG_CLOSED_FORM_REJECTED, "численный максимум")
        (mu,), value = maximize_means(objective, [[mu_prev]] + [[c] for c in valid])
        return mu if value >= floor_value else mu_prev

    def mstep_attributed(self, stats: SufficientStats, alpha0_prev: DirichletParams,
                         alpha1_prev: DirichletParams) -> Tuple[DirichletParams, DirichletParams]:
        """
        Условная максимизация по alpha0, затем по alpha1 (атрибутированная модель)

        Правдоподобие зависит от alpha только через средние, поэтому сумма
        концентраций сохраняется, а alpha_{K+1} = alpha-bar - sum alpha_k.
        """
        exposure = self.config.exposure
        N0, N1, N2 = (np.asarray(c, dtype=float) for c in (stats.N0, stats.N1, stats.N2))
        mu0, mu1 = alpha0_prev.mean, alpha1_prev.mean

        def objective0(mu):
            return loglik_from_stats(stats, mu, mu1, True, exposure)

        mu0 = self._update_block(objective0, mu0, [
            closed_form_mean(N0 + N1, stats.gamma0, stats.gamma1, mu1),
            closed_form_mean(2 * N0 + N1, stats.gamma0, stats.gamma1, mu1),
        ])

        if stats.gamma2 <= 0:
            self._flag(FLAG_ALPHA1_SKIPPED)
        else:
            def objective1(mu):
                return loglik_from_stats(stats, mu0, mu, True, exposure)

            mu1 = self._update_block(objective1, mu1, [
                closed_form_mean(N2 + N1, stats.gamma2, stats.gamma1, mu0),
                closed_form_mean(2 * N2 + N1, stats.gamma2, stats.gamma1, mu0),
            ])
        return (DirichletParams.from_mean(mu0, alpha0_prev.total),
                DirichletParams.from_mean(mu1, alpha1_prev.total))

    def _initial_positions(self, log: EventLog, problem: SlotProblem, lam: float) -> np.ndarray:
        """Базовые позиции - из SVD по всему потоку или с прошлого M-шага; слоты окна - копии"""
        if self._positions_log is not log or self._base_positions is None:
            K = min(log.K, log.n)
            A_tilde = augment_diagonal(MultiAdjacency.from_log(log), K, self.init_config.tolerance)
            self._base_positions = ls_positions(A_tilde, lam * log.T / comb(log.n, 2), K)
            self._window_positions = {}
            self._positions_log = log
        base = self._base_positions
        rows = [self._window_positions.get(int(i), base[i]) for i in problem.members]
        return np.vstack([base] + rows) if rows else base.copy()

    def _store_positions(self, problem: SlotProblem, Y: np.ndarray):
        self._base_positions = Y[:problem.n].copy()
        for j, vertex in enumerate(problem.members):
            self._window_positions[int(vertex)] = Y[problem.n + j].copy()

    def mstep_unattributed(self, log: EventLog, window: ChangeWindow, subset,
                           alpha0_prev: DirichletParams, alpha1_prev: DirichletParams,
                           lam: float) -> Tuple[DirichletParams, DirichletParams]:
        """
        Подъём по латентным позициям с пересчётом MLE Дирихле, затем
        доводка средних по маргинальному правдоподобию от лучшего из
        (прошлые alpha, MLE по позициям)
        """
        problem = slot_problem(log, window, subset, lam)
        Y, alpha0_pos, alpha1_pos, posterior = ascend_positions(
            self._initial_positions(log, problem, lam), problem,
            alpha0_prev, alpha1_prev, self.config.step, self.config.rel_tol,
        )
        self._store_positions(problem, Y)
        logger.debug(f"Подъём по позициям: лог-апостериорная плотность {posterior:.4f}")

        stats = compute_stats(log, window, subset, lam, self.config.gamma_form)
        exposure = self.config.exposure
        if stats.gamma1 + stats.gamma2 <= 0:
            (mu0,), _ = maximize_means(
                lambda mu: loglik_from_stats(stats, mu, mu, False, exposure),
                [[alpha0_prev.mean], [alpha0_pos.mean]],
            )
            return DirichletParams.from_mean(mu0, alpha0_pos.total), alpha1_prev

        (mu0, mu1), _ = maximize_means(
            lambda m0, m1: loglik_from_stats(stats, m0, m1, False, exposure),
            [[alpha0_prev.mean, alpha1_prev.mean], [alpha0_pos.mean, alpha1_pos.mean]],
        )
        return (DirichletParams.from_mean(mu0, alpha0_pos.total),
                DirichletParams.from_mean(mu1, alpha1_pos.total))

    def mstep(self, log: EventLog, window: ChangeWindow, subset: VertexSubset,
              alpha0: DirichletParams, alpha1: DirichletParams,
              lam: float) -> Tuple[DirichletParams, DirichletParams]:
        if log.attributed:
            stats = compute_stats(log, window, subset, lam, self.config.gamma_form)
            return self.mstep_attributed(stats, alpha0, alpha1)
        return self.mstep_unattributed(log, window, subset, alpha0, alpha1, lam)

    # ------------------------------------------------------------------ подгонка

    @staticmethod
    def _relative_change(new: DirichletParams, old: DirichletParams) -> float:
        return float(np.linalg.norm(new.vector - old.vector) / np.linalg.norm(old.vector))

    def fit(self, log: EventLog, lam: Optional[float] = None,
            start: Optional[StartPoint] = None,
            time_unit: Optional[float] = None) -> FitResult:
        """
        Подгонка гетерогенной модели

        Args:
            log: Поток рёбер
            lam: Интенсивность (по умолчанию fix_lambda с единицей time_unit или T/100)
            start: Стартовая точка (по умолчанию best_start по кандидатам)

        Returns:
            FitResult с итерацией наибольшего правдоподобия
        """
        self.flags = []
        if lam is None:
            lam = fix_lambda(log, time_unit or log.T / 100)
        if start is None:
            candidates = candidate_subsets(log, self.init_config, lam, self.rng, self.threads)
            start = best_start(log, candidates, lam, self.rng,
                               self.config.exposure, self.config.gamma_form)
        if start.fallback:
            self._flag(FLAG_START_FALLBACK)

        window, subset, alpha0, alpha1 = start.window, start.subset, start.alpha0, start.alpha1
        value = self._loglik(log, window, subset, alpha0, alpha1, lam)
        best = (value, window, subset, alpha0, alpha1)
        logger.info(f"EM: старт ({window.tau1:.3f}, {window.tau2:.3f}], m={subset.m}, "
                    f"loglik={value:.4f}")

        trace: List[TraceEntry] = []
        converged = False
        for iteration in range(1, self.config.max_iters + 1):
            new_window = self.estep_window(log, subset, alpha0, alpha1, lam, current=window)
            new_subset = self.estep_membership(log, new_window, subset, alpha0, alpha1, lam)
            new_alpha0, new_alpha1 = self.mstep(log, new_window, new_subset, alpha0, alpha1, lam)
            value = self._loglik(log, new_window, new_subset, new_alpha0, new_alpha1, lam)
            trace.append(TraceEntry(new_window.tau1, new_window.tau2, new_subset.m, value))
            logger.debug(f"Итерация {iteration}: ({new_window.tau1:.3f}, {new_window.tau2:.3f}], "
                         f"m={new_subset.m}, loglik={value:.4f}")
            if value > best[0]:
                best = (value, new_window, new_subset, new_alpha0, new_alpha1)

            shift = max(abs(new_window.tau1 - window.tau1), abs(new_window.tau2 - window.tau2))
            change = max(self._relative_change(new_alpha0, alpha0),
                         self._relative_change(new_alpha1, alpha1))
            converged = (new_subset == subset and shift < self.config.rel_tol * log.T
                         and change < self.config.rel_tol)
            window, subset, alpha0, alpha1 = new_window, new_subset, new_alpha0, new_alpha1
            if converged:
                break

        value, window, subset, alpha0, alpha1 = best
        model = PartitionModel(alpha0, alpha1, window, subset, lam)
        logger.info(f"EM: {len(trace)} итераций, сходимость={converged}, окно "
                    f"({window.tau1:.3f}, {window.tau2:.3f}], m={subset.m}, loglik={value:.4f}")
        return FitResult(model, value, len(trace), converged, trace, list(self.flags))

    def fit_homogeneous(self, log: EventLog, lam: Optional[float] = None,
                        time_unit: Optional[float] = None) -> HomogeneousFit:
        """Однородная модель: одна группа, gamma = lam * T"""
        self.flags = []
        if lam is None:
            lam = fix_lambda(log, time_unit or log.T / 100)
        exposure = self.config.exposure
        window = ChangeWindow(0.0, 0.0)
        stats = compute_stats(log, window, None, lam, self.config.gamma_form)
        start = DirichletParams(tuple([1.0] * (log.K + 1)))

        def objective(mu):
            return loglik_from_stats(stats, mu, mu, log.attributed, exposure)

        if log.attributed:
            counts = np.asarray(stats.N0, dtype=float)
            zeros = np.zeros(log.K)
            mu = self._update_block(objective, start.mean, [
                closed_form_mean(counts, stats.gamma0, 0.0, zeros),
                closed_form_mean(2 * counts, stats.gamma0, 0.0, zeros),
            ])
            alpha = DirichletParams.from_mean(mu, start.total)
        else:
            problem = slot_problem(log, window, None, lam)
            _, alpha_pos, _, _ = ascend_positions(
                self._initial_positions(log, problem, lam), problem, start, start,
                self.config.step, self.config.rel_tol,
            )
            (mu,), _ = maximize_means(objective, [[start.mean], [alpha_pos.mean]])
            alpha = DirichletParams.from_mean(mu, alpha_pos.total)

        value = loglik_homogeneous(log, alpha, lam, exposure)
        logger.info(f"Однородная модель: alpha={np.round(alpha.vector, 4).tolist()}, "
                    f"loglik={value:.4f}")
        return HomogeneousFit(alpha, value, lam)
