"""Выбор модели по BIC и иерархическое разбиение"""
import numpy as np
import pytest

from models.latent import DirichletParams
from models.network import ChangeWindow, EventLog, PartitionModel, VertexSubset
from models.results import FitResult, HomogeneousFit, SelectionReport
from models.settings import EMConfig, SelectionConfig
from services.generator import simulate_log
from services.model_selection import PartitionSearch, Region, bic, bic_compare, iterative_partition
from utils.constants import (
    DECISION_HETEROGENEOUS, DECISION_HOMOGENEOUS, MODE_ATTRIBUTED,
    STOP_DEPTH, STOP_ROOT_HOMOGENEOUS, STOP_TOO_FEW_EVENTS,
)

ALPHA = DirichletParams((1.0, 2.0, 1.0))


def _fits(n, het_loglik, hom_loglik, T=10.0):
    model = PartitionModel(ALPHA, ALPHA, ChangeWindow(T / 4, 3 * T / 4),
                           VertexSubset(frozenset({0}), n), 1.0)
    return HomogeneousFit(ALPHA, hom_loglik, 1.0), FitResult(model, het_loglik, 1, True)


class TestBic:

    def test_delta_example(self, make_log, rng):
        log = make_log(rng, n=10, N=100)
        hom, het = _fits(10, -480.0, -500.0)
        report = bic_compare(log, hom, het)
        assert report.delta_bic == pytest.approx(-40.0 + 5 * np.log(100), abs=1e-9)
        assert report.delta_bic == pytest.approx(-16.97, abs=0.01)
        assert report.decision == DECISION_HETEROGENEOUS

    def test_equal_logliks_prefer_homogeneous(self, make_log, rng):
        log = make_log(rng, n=10, N=100)
        hom, het = _fits(10, -500.0, -500.0)
        assert bic_compare(log, hom, het).decision == DECISION_HOMOGENEOUS

    def test_empty_log(self):
        log = EventLog(times=[], u=[], v=[], n=4, T=10.0, K=2)
        hom, het = _fits(4, 0.0, 0.0)
        report = bic_compare(log, hom, het)
        assert report.decision == DECISION_HOMOGENEOUS
        assert report.bic_het == np.inf

    def test_penalty_grows_with_parameters(self):
        assert bic(-100.0, 8, 50) > bic(-100.0, 3, 50)
        assert bic(-100.0, 3, 500) > bic(-100.0, 3, 50)


class TestRegion:
    region = Region(((0.0, 10.0), (20.0, 30.0)))

    def test_clock_mapping(self):
        assert self.region.length == 20.0
        np.testing.assert_allclose(self.region.to_local([5.0, 25.0]), [5.0, 15.0])
        assert self.region.sub_region(12.0, 15.0).segments == ((22.0, 25.0),)

    def test_membership_of_boundaries(self):
        inside = self.region.contains([0.0, 10.0, 15.0, 20.0, 30.0])
        np.testing.assert_array_equal(inside, [True, True, False, False, True])

    def test_sub_region(self):
        assert self.region.sub_region(5.0, 15.0).segments == ((5.0, 10.0), (20.0, 25.0))

    def test_sub_region_skips_removed_gap(self):
        complement = Region(((0.0, 30.0), (70.0, 100.0)))
        pieces = complement.sub_region(25.0, 40.0).to_list()
        assert pieces == [(25.0, 30.0), (70.0, 80.0)]
        assert all(b <= 30.0 or a >= 70.0 for a, b in pieces)

    def test_localize(self):
        log = EventLog(times=[1.0, 12.0, 22.0, 29.0], u=[0, 0, 1, 2], v=[1, 2, 2, 3],
                       n=4, T=40.0, K=2)
        local = self.region.localize(log)
        assert local.T == 20.0
        np.testing.assert_allclose(local.times, [1.0, 12.0, 19.0])
        np.testing.assert_array_equal(local.u, [0, 1, 2])

    def test_window_partitions_events(self, make_log, rng):
        log = make_log(rng, n=6, N=200)
        root = Region(((0.0, log.T),))
        window = ChangeWindow(2.5, 7.5)
        outside = Region(root.sub_region(0.0, window.tau1).segments
                         + root.sub_region(window.tau2, log.T).segments)
        inside = root.sub_region(window.tau1, window.tau2)
        assert outside.localize(log).N + inside.localize(log).N == log.N


def _scripted(decide):
    """Подмена сравнения моделей: решение по локальному потоку, окно - середина"""

    def compare(self, local, unit):
        T = local.T
        hom, het = _fits(local.n, -5.0, -10.0, T)
        decision = decide(local)
        report = SelectionReport(bic_hom=10.0, bic_het=5.0 if decision == DECISION_HETEROGENEOUS else 20.0,
                                 decision=decision)
        return 1.0, hom, het, report

    return compare


class TestPartitionSearch:

    def test_root_homogeneous(self, make_log, rng, monkeypatch):
        monkeypatch.setattr(PartitionSearch, '_compare', _scripted(lambda local: DECISION_HOMOGENEOUS))
        report = iterative_partition(make_log(rng, n=6, N=100))
        assert report.decision == DECISION_HOMOGENEOUS
        assert report.partitions == []
        assert report.stopped_reason == STOP_ROOT_HOMOGENEOUS
        assert [leaf['node_id'] for leaf in report.leaves] == ["0"]

    def test_depth_limit(self, make_log, rng, monkeypatch):
        monkeypatch.setattr(PartitionSearch, '_compare', _scripted(lambda local: DECISION_HETEROGENEOUS))
        log = make_log(rng, n=6, N=100)
        report = iterative_partition(log, SelectionConfig(max_depth=0, min_events=0))
        assert [p.node_id for p in report.partitions] == ["0"]
        assert [leaf['node_id'] for leaf in report.leaves] == ["0.0", "0.1"]
        assert report.stopped_reason == STOP_DEPTH
        membership = report.partitions[0].membership
        assert membership.shape == (6,) and np.all((membership >= 0) & (membership <= 1))

    def test_depth_first_ids_and_original_clock(self, make_log, rng, monkeypatch):
        monkeypatch.setattr(PartitionSearch, '_compare', _scripted(lambda local: DECISION_HETEROGENEOUS))
        log = make_log(rng, n=6, N=400)
        report = iterative_partition(log, SelectionConfig(max_depth=1, min_events=0))
        assert [p.node_id for p in report.partitions] == ["0", "0.0", "0.1"]
        assert [p.parent_id for p in report.partitions] == [None, "0", "0"]
        assert [leaf['node_id'] for leaf in report.leaves] == ["0.0.0", "0.0.1", "0.1.0", "0.1.1"]
        window = report.partitions[2].model.window
        assert (window.tau1, window.tau2) == pytest.approx((3.75, 6.25))
        complement = report.partitions[1]
        assert complement.region == [(0.0, 2.5), (7.5, 10.0)]
        # локальное окно (1.25, 3.75] пересекает вырезанное окно родителя
        np.testing.assert_allclose(complement.window_pieces, [(1.25, 2.5), (7.5, 8.75)])
        assert (complement.model.window.tau1, complement.model.window.tau2) == pytest.approx((1.25, 2.5))
        root = report.partitions[0].model.window
        for a, b in complement.window_pieces:
            assert b <= root.tau1 or a >= root.tau2
        np.testing.assert_allclose(complement.to_dict()['window_pieces'], [[1.25, 2.5], [7.5, 8.75]])

    def test_too_few_events(self, make_log, rng, monkeypatch):
        monkeypatch.setattr(PartitionSearch, '_compare', _scripted(lambda local: DECISION_HETEROGENEOUS))
        report = iterative_partition(make_log(rng, n=6, N=100),
                                     SelectionConfig(max_depth=3, min_events=10 ** 6))
        assert len(report.partitions) == 1
        assert report.stopped_reason == STOP_TOO_FEW_EVENTS

    def test_empty_log(self):
        log = EventLog(times=[], u=[], v=[], n=4, T=10.0, K=2)
        report = iterative_partition(log)
        assert report.decision == DECISION_HOMOGENEOUS
        assert report.stopped_reason == STOP_ROOT_HOMOGENEOUS

    @pytest.mark.slow
    def test_planted_window_accepted(self, make_planted):
        scenario = make_planted(mode=MODE_ATTRIBUTED, n=40, m=8)
        log = simulate_log(scenario, np.random.default_rng(2))
        report = iterative_partition(log, SelectionConfig(max_depth=0),
                                     EMConfig(num_candidates=1000, max_iters=30),
                                     rng=np.random.default_rng(2))
        assert report.decision == DECISION_HETEROGENEOUS
        root = report.partitions[0]
        assert abs(root.model.window.tau1 - 30.0) <= 10.0
        assert abs(root.model.window.tau2 - 70.0) <= 10.0
