"""Симуляционное исследование: метрики реплик, агрегирование, сиды"""
import numpy as np
import pandas as pd
import pytest

from models.latent import separation_angle
from models.network import VertexSubset
from models.results import ReplicateOutcome
from models.settings import EMConfig, InitConfig
from services.generator import lambda_for_edges_per_pair, null_scenario, study_scenarios
from services.sim_study import (
    aggregate, replicate_seed, run_replicate, run_study, study_table, subset_recovery,
)
from utils.constants import MODE_ATTRIBUTED, STUDY_COLUMNS
from utils.exceptions import InvalidInputError

FAST_EM = EMConfig(num_candidates=100, max_iters=3)
FAST_INIT = InitConfig(r=4, kmeans_restarts=2)


def test_subset_recovery():
    truth = VertexSubset(frozenset({0, 1, 2}), 10)
    estimate = VertexSubset(frozenset({1, 2, 3}), 10)
    sensitivity, specificity = subset_recovery(truth, estimate)
    assert sensitivity == pytest.approx(2 / 3)
    assert specificity == pytest.approx(6 / 7)
    assert subset_recovery(truth, truth) == (1.0, 1.0)


def test_replicate_seed_is_counter_based():
    first = replicate_seed(7, 2, 3).generate_state(4)
    np.testing.assert_array_equal(first, replicate_seed(7, 2, 3).generate_state(4))
    assert not np.array_equal(first, replicate_seed(7, 3, 2).generate_state(4))


class TestAggregate:

    def test_single_replicate(self, make_planted):
        scenario = make_planted()
        outcome = ReplicateOutcome(True, 0.8, 0.95, 4.0, 3.5)
        metrics = aggregate(scenario, [outcome])
        assert (metrics.power, metrics.sensitivity, metrics.specificity, metrics.cp_error) == \
            (1.0, 0.8, 0.95, 4.0)
        assert metrics.avg_edges_per_pair == 3.5
        assert (metrics.replicates, metrics.failures) == (1, 0)
        assert metrics.phi == pytest.approx(np.degrees(separation_angle(scenario.alpha0, scenario.alpha1)))

    def test_recovery_only_over_rejecting_replicates(self, make_planted):
        outcomes = [
            ReplicateOutcome(True, 1.0, 1.0, 2.0, 3.0),
            ReplicateOutcome(False, 0.0, 0.0, 50.0, 5.0),
            ReplicateOutcome(False, np.nan, np.nan, np.nan, np.nan, error="singular"),
        ]
        metrics = aggregate(make_planted(), outcomes)
        assert metrics.power == 0.5
        assert (metrics.sensitivity, metrics.specificity, metrics.cp_error) == (1.0, 1.0, 2.0)
        assert metrics.avg_edges_per_pair == 4.0
        assert (metrics.replicates, metrics.failures) == (3, 1)

    def test_no_rejections(self, make_planted):
        metrics = aggregate(make_planted(), [ReplicateOutcome(False, 0.5, 0.5, 1.0, 2.0)])
        assert metrics.power == 0.0
        assert np.isnan(metrics.sensitivity) and np.isnan(metrics.cp_error)

    def test_order_invariant(self, make_planted, rng):
        outcomes = [ReplicateOutcome(bool(rng.integers(2)), *rng.uniform(size=4)) for _ in range(12)]
        forward = aggregate(make_planted(), outcomes).to_row()
        backward = aggregate(make_planted(), outcomes[::-1]).to_row()
        assert forward.keys() == backward.keys()
        for key, value in forward.items():
            assert backward[key] == (value if isinstance(value, str) else pytest.approx(value, nan_ok=True))


def test_replicate_outcome(make_planted):
    scenario = make_planted(mode=MODE_ATTRIBUTED, n=20, m=4)
    outcome = run_replicate(scenario, replicate_seed(1, 0, 0), FAST_EM, FAST_INIT)
    assert outcome.error is None
    assert 0.0 <= outcome.sensitivity <= 1.0 and 0.0 <= outcome.specificity <= 1.0
    assert outcome.avg_edges_per_pair > 0
    assert outcome.window is not None


class TestRunStudy:

    @staticmethod
    def _grid():
        return study_scenarios(sizes=[20], levels=["large"], edges_per_pair=[4.0], mode=MODE_ATTRIBUTED)

    def test_table_and_determinism(self):
        first = run_study(self._grid(), 2, FAST_EM, FAST_INIT, seed=5)
        second = run_study(self._grid(), 2, FAST_EM, FAST_INIT, seed=5)
        table = study_table(first)
        assert list(table.columns) == STUDY_COLUMNS
        assert len(table) == 1 and table.loc[0, 'replicates'] == 2
        pd.testing.assert_frame_equal(table, study_table(second))

    def test_thread_count_does_not_change_results(self):
        serial = study_table(run_study(self._grid(), 2, FAST_EM, FAST_INIT, seed=5, threads=1))
        parallel = study_table(run_study(self._grid(), 2, FAST_EM, FAST_INIT, seed=5, threads=2))
        pd.testing.assert_frame_equal(serial, parallel)

    def test_requires_replicates(self):
        with pytest.raises(InvalidInputError):
            run_study(self._grid(), 0)


@pytest.mark.slow
def test_power_under_large_separation():
    grid = study_scenarios(sizes=[50], levels=["large"], edges_per_pair=[6.0], mode=MODE_ATTRIBUTED)
    metrics = run_study(grid, 10, seed=11)[0]
    assert metrics.power >= 0.7
    assert metrics.sensitivity >= 0.8 and metrics.specificity >= 0.8


@pytest.mark.slow
def test_false_positive_rate_under_null():
    lam = lambda_for_edges_per_pair(4.0, 50, 100.0, null_scenario(50, 1.0).alpha0)
    metrics = run_study([null_scenario(50, lam, MODE_ATTRIBUTED)], 10, seed=13)[0]
    assert metrics.power < 0.2
