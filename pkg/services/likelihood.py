"""
Сервис правдоподобия: достаточные статистики и маргинальное логарифмическое
правдоподобие атрибутированной и неатрибутированной моделей.

Латентные позиции проинтегрированы: вклад события зависит только от векторов
средних mu = eta / alpha-bar, вклад ненаблюдённых возможностей - от экспозиций
gamma_j и вероятностей реализации q_j.
"""
from typing import Tuple, Union

import numpy as np
from scipy.special import comb, xlogy
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LIKELIHOOD_EXPOSURE, LIKELIHOOD_GAMMA_FORM
from models.latent import DirichletParams
from models.network import ChangeWindow, EventLog, VertexSubset
from models.results import IndicatorView, SufficientStats
from utils.constants import (
    EXPOSURE_POISSON, EXPOSURES, GAMMA_PAIRS, GAMMA_PRINTED,
)
from utils.exceptions import InvalidInputError
from utils.logger import setup_logger

logger = setup_logger(__name__)

SubsetLike = Union[VertexSubset, np.ndarray, None]


def subset_mask(subset: SubsetLike, n: int) -> np.ndarray:
    """Булева маска подмножества (None - пустое подмножество)"""
    if subset is None:
        return np.zeros(n, dtype=bool)
    if isinstance(subset, VertexSubset):
        return subset.mask
    mask = np.asarray(subset, dtype=bool)
    if mask.shape != (n,):
        raise InvalidInputError(f"Маска подмножества должна иметь длину {n}")
    return mask


def indicators(log: EventLog, window: ChangeWindow, subset: SubsetLike) -> IndicatorView:
    """Индикаторы (s_i, y_i, z_i) для каждого события"""
    mask = subset_mask(subset, log.n)
    return IndicatorView(
        s=window.contains(log.times).astype(int),
        y=mask[log.u].astype(int),
        z=mask[log.v].astype(int),
    )


def exposure_rates(n: int, m, T: float, length, lam: float,
                   gamma_form: str = LIKELIHOOD_GAMMA_FORM) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Ожидаемые числа возможностей gamma0, gamma1, gamma2 (векторизовано по m и length)

    gamma0 + gamma1 + gamma2 = lam * T всегда.
    """
    pairs = comb(n, 2)
    m = np.asarray(m, dtype=float)
    length = np.asarray(length, dtype=float)
    share_out = comb(n - m, 2) / pairs      # обе вершины вне подмножества
    share_in = comb(m, 2) / pairs            # обе вершины в подмножестве
    if gamma_form == GAMMA_PAIRS:
        gamma0 = lam * (T - length) + lam * length * share_out
    elif gamma_form == GAMMA_PRINTED:
        gamma0 = lam * (T - length * share_out)
    else:
        raise InvalidInputError(f"Неизвестная форма экспозиции пар: {gamma_form}")
    gamma2 = lam * length * share_in
    gamma1 = lam * T - gamma0 - gamma2
    return gamma0, gamma1, gamma2


def _check_inputs(log: EventLog, window: ChangeWindow, lam: float):
    if not (np.isfinite(lam) and lam > 0):
        raise InvalidInputError(f"lambda должна быть положительной: {lam}")
    if not window.within(log.T):
        raise InvalidInputError(f"Окно {window} вне (0, {log.T})")


def compute_stats(log: EventLog, window: ChangeWindow, subset: SubsetLike, lam: float,
                  gamma_form: str = LIKELIHOOD_GAMMA_FORM) -> SufficientStats:
    """
    Счётчики событий по числу аномальных концов и экспозиции

    Args:
        log: Поток рёбер
        window: Окно изменения
        subset: Аномальное подмножество (None - пустое)
        lam: Интенсивность возможностей рёбер

    Returns:
        SufficientStats
    """
    _check_inputs(log, window, lam)
    view = indicators(log, window, subset)
    m = int(subset_mask(subset, log.n).sum())
    cls = view.n_anomalous
    gamma0, gamma1, gamma2 = exposure_rates(log.n, m, log.T, window.length, lam, gamma_form)

    if log.attributed:
        counts = np.zeros((3, log.K))
        np.add.at(counts, (cls, log.attrs - 1), 1.0)
        N0, N1, N2 = counts
        Nbar = counts.sum(axis=1)
    else:
        Nbar = np.bincount(cls, minlength=3).astype(float)
        N0, N1, N2 = Nbar
    return SufficientStats(
        N0=N0, N1=N1, N2=N2,
        Nbar0=float(Nbar[0]), Nbar1=float(Nbar[1]), Nbar2=float(Nbar[2]),
        gamma0=float(gamma0), gamma1=float(gamma1), gamma2=float(gamma2),
    )


def realization_probs(alpha0: DirichletParams, alpha1: DirichletParams) -> np.ndarray:
    """q0, q1, q2: E(X.X) для пар (0,0), (0,1), (1,1)"""
    mu0, mu1 = alpha0.mean, alpha1.mean
    return np.array([mu0 @ mu0, mu0 @ mu1, mu1 @ mu1])


def log_term_table(alpha0: DirichletParams, alpha1: DirichletParams,
                   attributed: bool) -> np.ndarray:
    """
    Таблица логарифмов вкладов событий по режимам концов (a, b)

    Атрибутированный случай: [a, b, k] = log(mu_a,k * mu_b,k), форма (2, 2, K).
    Неатрибутированный: [a, b] = log(mu_a . mu_b), форма (2, 2).
    """
    means = np.vstack([alpha0.mean, alpha1.mean])
    with np.errstate(divide='ignore'):
        if attributed:
            return np.log(means[:, None, :] * means[None, :, :])
        return np.log(means @ means.T)


def event_log_terms(log: EventLog, regime_u: np.ndarray, regime_v: np.ndarray,
                    table: np.ndarray) -> np.ndarray:
    """Логарифмы вкладов отдельных событий по таблице режимов"""
    if log.attributed:
        return table[regime_u, regime_v, log.attrs - 1]
    return table[regime_u, regime_v]


def exposure_term(gammas, totals, q: np.ndarray, exposure: str = LIKELIHOOD_EXPOSURE):
    """
    Вклад ненаблюдённых возможностей (векторизовано по первой оси gammas/totals)

    poisson:  -sum_j gamma_j q_j
    binomial: sum_j (gamma_j - N_j) log(1 - q_j)
    """
    gammas = np.asarray(gammas, dtype=float)
    totals = np.asarray(totals, dtype=float)
    if exposure not in EXPOSURES:
        raise InvalidInputError(f"Неизвестная форма экспозиции: {exposure}")
    if np.any(q >= 1.0):
        return np.full(gammas.shape[:-1], -np.inf) if gammas.ndim > 1 else -np.inf
    if exposure == EXPOSURE_POISSON:
        return -(gammas @ q)
    return (gammas - totals) @ np.log1p(-q)


def _loglik(stats: SufficientStats, log: EventLog, window: ChangeWindow, subset: SubsetLike,
            alpha0: DirichletParams, alpha1: DirichletParams, exposure: str) -> float:
    view = indicators(log, window, subset)
    table = log_term_table(alpha0, alpha1, log.attributed)
    terms = event_log_terms(log, view.s * view.y, view.s * view.z, table)
    if np.any(np.isneginf(terms)):
        return -np.inf
    q = realization_probs(alpha0, alpha1)
    return float(terms.sum() + exposure_term(stats.gammas, stats.totals, q, exposure))


def loglik_attributed(stats: SufficientStats, log: EventLog, window: ChangeWindow,
                      subset: SubsetLike, alpha0: DirichletParams, alpha1: DirichletParams,
                      exposure: str = LIKELIHOOD_EXPOSURE) -> float:
    """Логарифм правдоподобия атрибутированной модели (с точностью до константы)"""
    if not log.attributed:
        raise InvalidInputError("loglik_attributed требует атрибутированный поток")
    return _loglik(stats, log, window, subset, alpha0, alpha1, exposure)


def loglik_unattributed(stats: SufficientStats, log: EventLog, window: ChangeWindow,
                        subset: SubsetLike, alpha0: DirichletParams, alpha1: DirichletParams,
                        exposure: str = LIKELIHOOD_EXPOSURE) -> float:
    """Логарифм правдоподобия неатрибутированной модели (с точностью до константы)"""
    if log.attributed:
        raise InvalidInputError("loglik_unattributed требует неатрибутированный поток")
    return _loglik(stats, log, window, subset, alpha0, alpha1, exposure)


def loglik(log: EventLog, window: ChangeWindow, subset: SubsetLike,
           alpha0: DirichletParams, alpha1: DirichletParams, lam: float,
           exposure: str = LIKELIHOOD_EXPOSURE, gamma_form: str = LIKELIHOOD_GAMMA_FORM) -> float:
    """Правдоподобие гетерогенной модели в режиме потока"""
    stats = compute_stats(log, window, subset, lam, gamma_form)
    return _loglik(stats, log, window, subset, alpha0, alpha1, exposure)


def loglik_homogeneous(log: EventLog, alpha: DirichletParams, lam: float,
                       exposure: str = LIKELIHOOD_EXPOSURE) -> float:
    """Однородная модель: гетерогенное правдоподобие при alpha0 = alpha1 = alpha"""
    if not (np.isfinite(lam) and lam > 0):
        raise InvalidInputError(f"lambda должна быть положительной: {lam}")
    table = log_term_table(alpha, alpha, log.attributed)
    zeros = np.zeros(log.N, dtype=int)
    terms = event_log_terms(log, zeros, zeros, table)
    if np.any(np.isneginf(terms)):
        return -np.inf
    q = np.array([alpha.mean @ alpha.mean])
    return float(terms.sum() + exposure_term(np.array([lam * log.T]), np.array([log.N]), q, exposure))


class WindowScorer:
    """
    Быстрая оценка правдоподобия для множества окон-кандидатов
    при фиксированных подмножестве и параметрах.

    События упорядочены по времени, поэтому вклад окна - разность кумулятивных сумм.
    """

    def __init__(self, log: EventLog, subset: SubsetLike, alpha0: DirichletParams,
                 alpha1: DirichletParams, lam: float, exposure: str = LIKELIHOOD_EXPOSURE,
                 gamma_form: str = LIKELIHOOD_GAMMA_FORM):
        self.log = log
        self.lam = lam
        self.exposure = exposure
        self.gamma_form = gamma_form
        mask = subset_mask(subset, log.n)
        self.m = int(mask.sum())
        y = mask[log.u].astype(int)
        z = mask[log.v].astype(int)
        table = log_term_table(alpha0, alpha1, log.attributed)
        zeros = np.zeros(log.N, dtype=int)
        outside = event_log_terms(log, zeros, zeros, table)
        inside = event_log_terms(log, y, z, table)
        self.q = realization_probs(alpha0, alpha1)

        # Бесконечные вклады считаются отдельно, чтобы не портить кумулятивные суммы
        out_inf, in_inf = np.isneginf(outside), np.isneginf(inside)
        self._out_total = float(outside[~out_inf].sum())
        self._out_inf_total = int(out_inf.sum())
        self._cum_out = np.concatenate(([0.0], np.cumsum(np.where(out_inf, 0.0, outside))))
        self._cum_in = np.concatenate(([0.0], np.cumsum(np.where(in_inf, 0.0, inside))))
        self._cum_out_inf = np.concatenate(([0], np.cumsum(out_inf)))
        self._cum_in_inf = np.concatenate(([0], np.cumsum(in_inf)))
        cls = y + z
        self._cum_cls1 = np.concatenate(([0], np.cumsum(cls == 1)))
        self._cum_cls2 = np.concatenate(([0], np.cumsum(cls == 2)))

    def score(self, tau1, tau2) -> np.ndarray:
        """Логарифмы правдоподобия для массивов границ окон"""
        tau1 = np.atleast_1d(np.asarray(tau1, dtype=float))
        tau2 = np.atleast_1d(np.asarray(tau2, dtype=float))
        lo = np.searchsorted(self.log.times, tau1, side='right')
        # непустое окно от 0 включает события в t = 0
        lo = np.where((tau1 == 0) & (tau2 > tau1), 0, lo)
        hi = np.searchsorted(self.log.times, tau2, side='right')

        events = (self._out_total - (self._cum_out[hi] - self._cum_out[lo])
                  + (self._cum_in[hi] - self._cum_in[lo]))
        n_inf = (self._out_inf_total - (self._cum_out_inf[hi] - self._cum_out_inf[lo])
                 + (self._cum_in_inf[hi] - self._cum_in_inf[lo]))

        n1 = (self._cum_cls1[hi] - self._cum_cls1[lo]).astype(float)
        n2 = (self._cum_cls2[hi] - self._cum_cls2[lo]).astype(float)
        n0 = self.log.N - n1 - n2
        g0, g1, g2 = exposure_rates(self.log.n, self.m, self.log.T, tau2 - tau1,
                                    self.lam, self.gamma_form)
        gammas = np.column_stack([g0, g1, g2])
        totals = np.column_stack([n0, n1, n2])
        result = events + exposure_term(gammas, totals, self.q, self.exposure)
        return np.where(n_inf > 0, -np.inf, result)


def membership_log_odds(log: EventLog, window: ChangeWindow, subset: SubsetLike,
                        alpha0: DirichletParams, alpha1: DirichletParams, lam: float,
                        exposure: str = LIKELIHOOD_EXPOSURE,
                        gamma_form: str = LIKELIHOOD_GAMMA_FORM) -> np.ndarray:
    """
    log p(e | i в v) - log p(e | i вне v) для каждой вершины i,
    остальные принадлежности фиксированы на текущем подмножестве.

    Меняются только вклады событий окна, инцидентных i, и экспозиции.
    """
    n = log.n
    mask = subset_mask(subset, n)
    m = int(mask.sum())
    table = log_term_table(alpha0, alpha1, log.attributed)
    inside = window.contains(log.times)
    u, v = log.u[inside], log.v[inside]
    r_u, r_v = mask[u].astype(int), mask[v].astype(int)

    if log.attributed:
        k = log.attrs[inside] - 1
        delta_u = table[1, r_v, k] - table[0, r_v, k]
        delta_v = table[1, r_u, k] - table[0, r_u, k]
    else:
        delta_u = table[1, r_v] - table[0, r_v]
        delta_v = table[1, r_u] - table[0, r_u]

    with np.errstate(invalid='ignore'):
        events = np.zeros(n)
        np.add.at(events, u, delta_u)
        np.add.at(events, v, delta_v)

    # Инцидентные события окна по режиму второго конца
    partner_in = np.zeros(n)
    partner_out = np.zeros(n)
    np.add.at(partner_in, u, r_v)
    np.add.at(partner_in, v, r_u)
    np.add.at(partner_out, u, 1 - r_v)
    np.add.at(partner_out, v, 1 - r_u)

    # Итоги классов при i вне подмножества и при i внутри
    base = compute_stats(log, window, mask, lam, gamma_form).totals
    sign = np.where(mask, 1.0, 0.0)
    totals_out = np.tile(base, (n, 1))
    totals_out[:, 0] += sign * partner_out
    totals_out[:, 1] += sign * (partner_in - partner_out)
    totals_out[:, 2] -= sign * partner_in
    totals_in = totals_out.copy()
    totals_in[:, 0] -= partner_out
    totals_in[:, 1] += partner_out - partner_in
    totals_in[:, 2] += partner_in

    m_out = m - mask.astype(int)
    m_in = m_out + 1
    q = realization_probs(alpha0, alpha1)
    g_out = np.column_stack(exposure_rates(n, m_out, log.T, window.length, lam, gamma_form))
    g_in = np.column_stack(exposure_rates(n, m_in, log.T, window.length, lam, gamma_form))
    exposures = exposure_term(g_in, totals_in, q, exposure) - exposure_term(g_out, totals_out, q, exposure)
    odds = events + exposures
    return np.nan_to_num(odds, nan=0.0)


def loglik_from_stats(stats: SufficientStats, mu0: np.ndarray, mu1: np.ndarray,
                      attributed: bool, exposure: str = LIKELIHOOD_EXPOSURE) -> float:
    """
    То же правдоподобие через достаточные статистики и векторы средних

    Атрибутированный случай: событие класса j с атрибутом k даёт log mu_a,k + log mu_b,k,
    неатрибутированный: log q_j. Используется в M-шаге.
    """
    mu0 = np.asarray(mu0, dtype=float)
    mu1 = np.asarray(mu1, dtype=float)
    q = np.array([mu0 @ mu0, mu0 @ mu1, mu1 @ mu1])
    if attributed:
        N0, N1, N2 = (np.asarray(c, dtype=float) for c in (stats.N0, stats.N1, stats.N2))
        events = xlogy(2 * N0 + N1, mu0).sum() + xlogy(N1 + 2 * N2, mu1).sum()
    else:
        events = xlogy(stats.totals, q).sum()
    if not np.isfinite(events):
        return -np.inf
    return float(events + exposure_term(stats.gammas, stats.totals, q, exposure))
