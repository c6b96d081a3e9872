"""Достаточные статистики и маргинальное правдоподобие"""
import numpy as np
import pytest
from scipy.special import comb, gammaln, logsumexp
from scipy.stats import poisson

from models.latent import DirichletParams, expected_dot, sample_latent_batch
from models.network import ChangeWindow, EventLog, VertexSubset
from services.likelihood import (
    WindowScorer, compute_stats, exposure_rates, exposure_term, loglik, loglik_attributed,
    loglik_from_stats, loglik_homogeneous, loglik_unattributed, membership_log_odds,
)
from utils.constants import (
    EXPOSURE_BINOMIAL, EXPOSURE_POISSON, GAMMA_PAIRS, GAMMA_PRINTED, MODE_ATTRIBUTED,
)
from utils.exceptions import InvalidInputError


def test_printed_gamma_example():
    gamma0, gamma1, gamma2 = exposure_rates(50, 10, 100.0, 40.0, 1.0, GAMMA_PRINTED)
    assert gamma0 == pytest.approx(74.5306, abs=1e-4)
    assert gamma2 == pytest.approx(1.4694, abs=1e-4)
    assert gamma1 == pytest.approx(24.0, abs=1e-9)


def test_pairs_gamma_example():
    gamma0, gamma1, gamma2 = exposure_rates(50, 10, 100.0, 40.0, 1.0, GAMMA_PAIRS)
    assert gamma0 == pytest.approx(60.0 + 40.0 * 780 / 1225)
    assert gamma1 == pytest.approx(40.0 * 400 / 1225)
    assert gamma2 == pytest.approx(40.0 * 45 / 1225)


@pytest.mark.parametrize("form", [GAMMA_PAIRS, GAMMA_PRINTED])
def test_gamma_identity(rng, form):
    for _ in range(200):
        n = int(rng.integers(2, 200))
        m = int(rng.integers(0, n))
        T = rng.uniform(1.0, 500.0)
        length = rng.uniform(0.0, T)
        lam = rng.uniform(0.01, 50.0)
        gammas = exposure_rates(n, m, T, length, lam, form)
        assert abs(sum(gammas) - lam * T) <= 1e-12 * lam * T
        assert min(gammas) >= -1e-9


def test_empty_subset_gives_only_class_zero(make_log, rng):
    log = make_log(rng, n=6, N=15)
    stats = compute_stats(log, ChangeWindow(2.0, 8.0), None, 1.0, GAMMA_PAIRS)
    assert stats.gamma1 == 0.0 and stats.gamma2 == 0.0
    assert stats.Nbar0 == log.N


def test_zero_length_window(make_log, rng):
    log = make_log(rng, n=6, N=15)
    subset = VertexSubset(frozenset({0, 1}), 6)
    for form in (GAMMA_PAIRS, GAMMA_PRINTED):
        stats = compute_stats(log, ChangeWindow(5.0, 5.0), subset, 2.0, form)
        assert stats.gamma1 == pytest.approx(0.0, abs=1e-12)
        assert stats.gamma2 == 0.0
        assert stats.Nbar1 == stats.Nbar2 == 0


def test_all_events_in_subset_and_window():
    log = EventLog(times=[1.0, 2.0, 3.0], u=[0, 1, 0], v=[1, 2, 2], n=5, T=10.0, K=2)
    stats = compute_stats(log, ChangeWindow(0.5, 5.0), VertexSubset(frozenset({0, 1, 2}), 5), 1.0)
    assert (stats.Nbar0, stats.Nbar1, stats.Nbar2) == (0, 0, 3)


def test_totals_sum_to_event_count(make_log, rng):
    log = make_log(rng, n=8, N=40, attributed=True)
    stats = compute_stats(log, ChangeWindow(3.0, 6.0), VertexSubset(frozenset({1, 4}), 8), 1.5)
    assert stats.Nbar0 + stats.Nbar1 + stats.Nbar2 == log.N
    np.testing.assert_allclose(np.add.reduce([stats.N0, stats.N1, stats.N2]).sum(), log.N)


def test_window_is_half_open():
    log = EventLog(times=[2.0, 5.0], u=[0, 0], v=[1, 1], n=3, T=10.0, K=1)
    subset = VertexSubset(frozenset({0, 1}), 3)
    stats = compute_stats(log, ChangeWindow(2.0, 5.0), subset, 1.0)
    assert stats.Nbar2 == 1 and stats.Nbar0 == 1


def test_invalid_inputs_rejected(make_log, rng):
    log = make_log(rng)
    with pytest.raises(InvalidInputError):
        compute_stats(log, ChangeWindow(1.0, 2.0), None, 0.0)
    with pytest.raises(InvalidInputError):
        compute_stats(log, ChangeWindow(1.0, log.T + 1.0), None, 1.0)
    with pytest.raises(InvalidInputError):
        loglik_attributed(compute_stats(log, ChangeWindow(1.0, 2.0), None, 1.0), log,
                          ChangeWindow(1.0, 2.0), None,
                          DirichletParams((1, 1, 1)), DirichletParams((1, 1, 1)))


@pytest.mark.parametrize("attributed", [False, True])
@pytest.mark.parametrize("exposure", [EXPOSURE_POISSON, EXPOSURE_BINOMIAL])
def test_equal_alphas_reduce_to_homogeneous(make_log, make_alpha, rng, attributed, exposure):
    log = make_log(rng, n=7, N=25, attributed=attributed)
    alpha = make_alpha(rng)
    expected = loglik_homogeneous(log, alpha, 2.0, exposure)
    for _ in range(5):
        tau = np.sort(rng.uniform(0, log.T, 2))
        members = rng.choice(7, size=int(rng.integers(1, 6)), replace=False)
        value = loglik(log, ChangeWindow(*tau), VertexSubset(frozenset(members.tolist()), 7),
                       alpha, alpha, 2.0, exposure)
        assert value == pytest.approx(expected, rel=1e-10)


def test_homogeneous_empty_log():
    log = EventLog(times=[], u=[], v=[], n=4, T=10.0, K=2)
    alpha = DirichletParams((2.0, 3.0, 5.0))
    assert loglik_homogeneous(log, alpha, 3.0) == pytest.approx(-30.0 * expected_dot(alpha, alpha))


def test_scalar_hand_computation():
    log = EventLog(times=[1.0, 4.0], u=[0, 1], v=[1, 2], n=3, T=10.0, K=1)
    alpha = DirichletParams((1.0, 3.0))
    q = 0.25 ** 2
    expected = 2 * np.log(q) - 10.0 * q
    assert loglik_homogeneous(log, alpha, 1.0) == pytest.approx(expected)
    stats = compute_stats(log, ChangeWindow(0.0, 5.0), VertexSubset(frozenset({0}), 3), 1.0)
    assert loglik_unattributed(stats, log, ChangeWindow(0.0, 5.0), VertexSubset(frozenset({0}), 3),
                               alpha, alpha) == pytest.approx(expected)


@pytest.mark.parametrize("attributed", [False, True])
def test_mass_on_remainder_gives_minus_infinity(make_log, rng, attributed):
    log = make_log(rng, attributed=attributed)
    alpha = DirichletParams((1e-200, 1e-200, 1.0))
    assert loglik_homogeneous(log, alpha, 1.0) == -np.inf
    assert loglik(log, ChangeWindow(1.0, 5.0), VertexSubset(frozenset({0}), log.n),
                  alpha, alpha, 1.0) == -np.inf


def test_exposure_term_rejects_certain_realization():
    assert exposure_term([1.0, 1.0, 1.0], [0, 0, 0], np.array([0.5, 1.0, 0.2])) == -np.inf
    with pytest.raises(InvalidInputError):
        exposure_term([1.0], [0], np.array([0.5]), "other")


def test_binomial_exposure_form():
    gammas, totals, q = np.array([10.0, 5.0, 2.0]), np.array([3.0, 1.0, 0.0]), np.array([0.1, 0.2, 0.3])
    expected = (7.0 * np.log(0.9) + 4.0 * np.log(0.8) + 2.0 * np.log(0.7))
    assert exposure_term(gammas, totals, q, EXPOSURE_BINOMIAL) == pytest.approx(expected)


def test_unattributed_invariant_under_component_permutation(make_log, make_alpha, rng):
    log = make_log(rng, n=6, N=20, K=3)
    a0, a1 = make_alpha(rng, 3), make_alpha(rng, 3)
    window, subset = ChangeWindow(2.0, 7.0), VertexSubset(frozenset({1, 3}), 6)
    order = [2, 0, 1, 3]
    permuted = [DirichletParams(tuple(a.vector[order])) for a in (a0, a1)]
    assert loglik(log, window, subset, a0, a1, 1.3) == pytest.approx(
        loglik(log, window, subset, *permuted, 1.3))


def test_invariant_under_vertex_relabeling(make_log, make_alpha, rng):
    log = make_log(rng, n=6, N=20, attributed=True)
    perm = rng.permutation(6)
    relabeled = EventLog(times=log.times, u=perm[log.u], v=perm[log.v], n=6, T=log.T, K=2,
                         mode=MODE_ATTRIBUTED, attrs=log.attrs)
    a0, a1 = make_alpha(rng), make_alpha(rng)
    window = ChangeWindow(2.0, 7.0)
    subset = VertexSubset(frozenset({0, 2}), 6)
    moved = VertexSubset(frozenset(perm[[0, 2]].tolist()), 6)
    assert loglik(log, window, subset, a0, a1, 1.0) == pytest.approx(
        loglik(relabeled, window, moved, a0, a1, 1.0))


@pytest.mark.parametrize("attributed", [False, True])
@pytest.mark.parametrize("exposure", [EXPOSURE_POISSON, EXPOSURE_BINOMIAL])
def test_stats_form_matches_event_form(make_log, make_alpha, rng, attributed, exposure):
    log = make_log(rng, n=7, N=30, attributed=attributed)
    a0, a1 = make_alpha(rng), make_alpha(rng)
    window, subset = ChangeWindow(2.5, 6.0), VertexSubset(frozenset({0, 3, 5}), 7)
    stats = compute_stats(log, window, subset, 1.7)
    assert loglik_from_stats(stats, a0.mean, a1.mean, attributed, exposure) == pytest.approx(
        loglik(log, window, subset, a0, a1, 1.7, exposure))


@pytest.mark.parametrize("form", [GAMMA_PAIRS, GAMMA_PRINTED])
@pytest.mark.parametrize("exposure", [EXPOSURE_POISSON, EXPOSURE_BINOMIAL])
def test_window_scorer_matches_loglik(make_log, make_alpha, rng, form, exposure):
    log = make_log(rng, n=8, N=40, attributed=True)
    a0, a1 = make_alpha(rng), make_alpha(rng)
    subset = VertexSubset(frozenset({1, 2, 6}), 8)
    scorer = WindowScorer(log, subset, a0, a1, 0.9, exposure, form)
    bounds = np.sort(rng.uniform(0, log.T, size=(20, 2)), axis=1)
    bounds[0] = (log.times[3], log.times[10])
    scores = scorer.score(bounds[:, 0], bounds[:, 1])
    for (tau1, tau2), score in zip(bounds, scores):
        expected = loglik(log, ChangeWindow(tau1, tau2), subset, a0, a1, 0.9, exposure, form)
        assert score == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_window_from_zero_counts_event_at_zero(make_alpha, rng):
    log = EventLog(times=[0.0, 1.0, 3.0, 6.0], u=[0, 1, 2, 0], v=[1, 2, 3, 3], n=4, T=8.0, K=2)
    a0, a1 = make_alpha(rng), make_alpha(rng)
    subset = VertexSubset(frozenset({0, 1}), 4)
    window = ChangeWindow(0.0, 2.0)
    assert compute_stats(log, window, subset, 1.0).N2 == 1
    scorer = WindowScorer(log, subset, a0, a1, 1.0)
    assert scorer.score(0.0, 2.0)[0] == pytest.approx(loglik(log, window, subset, a0, a1, 1.0))


@pytest.mark.parametrize("attributed", [False, True])
@pytest.mark.parametrize("exposure", [EXPOSURE_POISSON, EXPOSURE_BINOMIAL])
def test_membership_log_odds_brute_force(make_log, make_alpha, rng, attributed, exposure):
    log = make_log(rng, n=7, N=35, attributed=attributed)
    a0, a1 = make_alpha(rng), make_alpha(rng)
    window = ChangeWindow(2.0, 8.0)
    mask = np.zeros(7, dtype=bool)
    mask[[1, 4]] = True
    odds = membership_log_odds(log, window, mask, a0, a1, 1.2, exposure)
    for i in range(7):
        with_i, without_i = mask.copy(), mask.copy()
        with_i[i], without_i[i] = True, False
        expected = (loglik(log, window, with_i, a0, a1, 1.2, exposure)
                    - loglik(log, window, without_i, a0, a1, 1.2, exposure))
        assert odds[i] == pytest.approx(expected, rel=1e-8, abs=1e-8)


def _logs_differing_by_class_two_event():
    """Вспомогательная сборка пары потоков, отличающихся одним событием класса 2"""
    base = EventLog(times=[1.0, 6.0], u=[0, 2], v=[3, 3], n=4, T=10.0, K=2)
    extra = EventLog(times=[1.0, 5.0, 6.0], u=[0, 0, 2], v=[3, 1, 3], n=4, T=10.0, K=2)
    return base, extra


def test_adding_subset_window_event_touches_class_two():
    base, extra = _logs_differing_by_class_two_event()
    window, subset = ChangeWindow(4.0, 7.0), VertexSubset(frozenset({0, 1}), 4)
    before = compute_stats(base, window, subset, 1.0)
    after = compute_stats(extra, window, subset, 1.0)
    assert after.Nbar2 == before.Nbar2 + 1
    assert (after.Nbar0, after.Nbar1) == (before.Nbar0, before.Nbar1)
    np.testing.assert_allclose(after.gammas, before.gammas)


def oracle_loglik(log: EventLog, window: ChangeWindow, subset: VertexSubset,
                  alpha0: DirichletParams, alpha1: DirichletParams, lam: float,
                  rng, draws: int = 400_000) -> float:
    """
    Правдоподобие перебором: вероятности событий - Монте-Карло по латентным позициям,
    число ненаблюдённых возможностей - усечённый ряд Пуассона
    """
    x = {0: sample_latent_batch(alpha0, draws, rng), 1: sample_latent_batch(alpha0, draws, rng)}
    y = {0: sample_latent_batch(alpha1, draws, rng), 1: sample_latent_batch(alpha1, draws, rng)}

    def positions(regime, side):
        return (x if regime == 0 else y)[side]

    mask = subset.mask
    inside = window.contains(log.times)
    total = 0.0
    for i in range(log.N):
        ra = int(inside[i] and mask[log.u[i]])
        rb = int(inside[i] and mask[log.v[i]])
        per_attr = positions(ra, 0) * positions(rb, 1)
        p = per_attr[:, log.attrs[i] - 1].mean() if log.attributed else per_attr.sum(axis=1).mean()
        total += np.log(p)

    # Средняя вероятность реализации по парам и времени
    q = {}
    for ra in (0, 1):
        for rb in (0, 1):
            q[ra, rb] = (positions(ra, 0) * positions(rb, 1)).sum(axis=1).mean()
    pairs = comb(log.n, 2)
    expected_realized = lam * (log.T - window.length) * q[0, 0]
    for a in range(log.n):
        for b in range(a + 1, log.n):
            expected_realized += lam * window.length / pairs * q[int(mask[a]), int(mask[b])]
    Lambda = lam * log.T
    q_bar = expected_realized / Lambda

    N = log.N
    M = np.arange(0, int(Lambda + 20 * np.sqrt(Lambda) + 50))
    series = logsumexp(poisson.logpmf(N + M, Lambda) + gammaln(N + M + 1) - gammaln(N + 1)
                       - gammaln(M + 1) + M * np.log1p(-q_bar))
    # Константы N log(Lambda) - log N! не зависят от параметров
    return float(total + series - N * np.log(Lambda) + gammaln(N + 1))


@pytest.mark.parametrize("attributed", [False, True])
def test_matches_monte_carlo_poisson_oracle(rng, make_log, make_alpha, attributed):
    for _ in range(10):
        n = int(rng.integers(3, 7))
        K = int(rng.integers(1, 4))
        log = make_log(rng, n=n, N=int(rng.integers(1, 21)), K=K, attributed=attributed)
        a0, a1 = make_alpha(rng, K), make_alpha(rng, K)
        window = ChangeWindow(*np.sort(rng.uniform(0, log.T, 2)))
        subset = VertexSubset(frozenset({0}), n)
        lam = rng.uniform(0.5, 3.0)
        value = loglik(log, window, subset, a0, a1, lam, EXPOSURE_POISSON, GAMMA_PAIRS)
        expected = oracle_loglik(log, window, subset, a0, a1, lam, rng)
        assert value == pytest.approx(expected, rel=0.01)
