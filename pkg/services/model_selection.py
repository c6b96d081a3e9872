"""
Выбор модели по BIC (однородная против гетерогенной) и иерархическое разбиение.

Регионы рекурсии - объединения отрезков исходного времени; внутри региона
события переводятся на локальные часы (0, длина региона).
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))
from models.network import ChangeWindow, EventLog, PartitionModel
from models.results import AcceptedPartition, FitResult, HomogeneousFit, SelectionReport
from models.settings import EMConfig, InitConfig, SelectionConfig
from services.em_fitter import EMFitter, fix_lambda
from utils.constants import (
    DECISION_HETEROGENEOUS, DECISION_HOMOGENEOUS,
    STOP_DEPTH, STOP_HOMOGENEOUS, STOP_ROOT_HOMOGENEOUS, STOP_TOO_FEW_EVENTS,
)
from utils.logger import setup_logger

logger = setup_logger(__name__)


def bic(loglik: float, n_params: int, n_obs: int) -> float:
    """BIC = -2 loglik + p ln N"""
    return -2.0 * loglik + n_params * np.log(n_obs)


def bic_compare(log: EventLog, hom: HomogeneousFit, het: Optional[FitResult]) -> SelectionReport:
    """
    Сравнение по BIC: p_hom = K + 1, p_het = 2(K + 1) + 2 (alpha0, alpha1, tau1, tau2)

    При N = 0 решение однородное по соглашению.
    """
    K = log.K
    if log.N == 0 or het is None:
        return SelectionReport(bic_hom=-2.0 * hom.loglik, bic_het=np.inf,
                               decision=DECISION_HOMOGENEOUS)
    bic_hom = bic(hom.loglik, K + 1, log.N)
    bic_het = bic(het.loglik, 2 * (K + 1) + 2, log.N)
    decision = DECISION_HETEROGENEOUS if bic_het < bic_hom else DECISION_HOMOGENEOUS
    return SelectionReport(bic_hom=float(bic_hom), bic_het=float(bic_het), decision=decision)


@dataclass(frozen=True)
class Region:
    """Объединение отрезков (a, b] исходного времени; корневой отрезок включает 0"""
    segments: Tuple[Tuple[float, float], ...]

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.segments))

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum([b - a for a, b in self.segments])))

    def _segment_masks(self, times: np.ndarray):
        for a, b in self.segments:
            lower = times >= a if a == 0 else times > a
            yield lower & (times <= b)

    def contains(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        mask = np.zeros(times.shape, dtype=bool)
        for inside in self._segment_masks(times):
            mask |= inside
        return mask

    def to_local(self, times) -> np.ndarray:
        """Исходное время -> локальные часы региона"""
        times = np.asarray(times, dtype=float)
        local = np.full(times.shape, np.nan)
        for (a, _), offset, inside in zip(self.segments, self.offsets, self._segment_masks(times)):
            local[inside] = offset + (times[inside] - a)
        return local

    def sub_region(self, lo: float, hi: float) -> 'Region':
        """Часть региона, соответствующая локальному интервалу (lo, hi]"""
        pieces = []
        for (a, b), offset in zip(self.segments, self.offsets):
            start, end = max(lo, offset), min(hi, offset + (b - a))
            if end > start:
                pieces.append((a + (start - offset), a + (end - offset)))
        return Region(tuple(pieces))

    def localize(self, log: EventLog) -> EventLog:
        """Подпоток событий региона на локальных часах"""
        mask = self.contains(log.times)
        horizon = self.length
        local = np.minimum(self.to_local(log.times[mask]), np.nextafter(horizon, 0.0))
        return log.select(mask, times=local, T=horizon)

    def to_list(self) -> List[Tuple[float, float]]:
        return [(float(a), float(b)) for a, b in self.segments]


class PartitionSearch:
    """
    Иерархическое разбиение: при принятии гетерогенной модели рекурсия по
    (а) временному дополнению окна и (б) самому окну, в порядке обхода в глубину
    """

    def __init__(self, selection: Optional[SelectionConfig] = None,
                 em_config: Optional[EMConfig] = None,
                 init_config: Optional[InitConfig] = None,
                 rng: Optional[np.random.Generator] = None, threads: int = 1):
        self.selection = selection or SelectionConfig()
        self.em_config = em_config or EMConfig()
        self.init_config = init_config or InitConfig()
        self.fitter = EMFitter(self.em_config, self.init_config, rng, threads)
        self.partitions: List[AcceptedPartition] = []
        self.leaves: List[Dict[str, str]] = []

    def _leaf(self, node_id: str, region: Region, reason: str):
        self.leaves.append({'node_id': node_id, 'reason': reason,
                            'region': str(region.to_list())})
        logger.info(f"Узел {node_id}: остановка ({reason})")

    def _compare(self, local: EventLog, unit: float):
        lam = fix_lambda(local, unit)
        hom = self.fitter.fit_homogeneous(local, lam)
        het = self.fitter.fit(local, lam)
        return lam, hom, het, bic_compare(local, hom, het)

    def _accept(self, node_id: str, parent_id: Optional[str], depth: int, region: Region,
                local: EventLog, lam: float, hom: HomogeneousFit, het: FitResult,
                report: SelectionReport) -> PartitionModel:
        fitted = het.model
        membership = self.fitter.membership_probabilities(
            local, fitted.window, fitted.subset, fitted.alpha0, fitted.alpha1, lam)
        pieces = region.sub_region(fitted.window.tau1, fitted.window.tau2).to_list()
        if len(pieces) > 1:
            logger.warning(f"Узел {node_id}: окно разорвано вырезанным окном родителя: {pieces}")
        # основное окно модели - самый длинный кусок в исходном времени
        window = ChangeWindow(*max(pieces, key=lambda piece: piece[1] - piece[0]))
        model = PartitionModel(fitted.alpha0, fitted.alpha1, window, fitted.subset, lam)
        self.partitions.append(AcceptedPartition(
            node_id=node_id, parent_id=parent_id, depth=depth, region=region.to_list(),
            model=model, delta_bic=report.delta_bic, loglik_het=het.loglik,
            loglik_hom=hom.loglik, membership=membership,
            window_pieces=pieces,
        ))
        logger.info(f"Узел {node_id}: принято окно {pieces}, "
                    f"m={fitted.subset.m}, dBIC={report.delta_bic:.3f}")
        return fitted

    def _visit(self, log: EventLog, region: Region, node_id: str, parent_id: str,
               depth: int, unit: float):
        if depth > self.selection.max_depth:
            self._leaf(node_id, region, STOP_DEPTH)
            return
        local = region.localize(log)
        if local.N < max(self.selection.min_events, 1):
            self._leaf(node_id, region, STOP_TOO_FEW_EVENTS)
            return
        lam, hom, het, report = self._compare(local, unit)
        if report.decision != DECISION_HETEROGENEOUS:
            self._leaf(node_id, region, STOP_HOMOGENEOUS)
            return
        fitted = self._accept(node_id, parent_id, depth, region, local, lam, hom, het, report)
        self._descend(log, region, fitted.window, node_id, depth, unit)

    def _descend(self, log: EventLog, region: Region, window: ChangeWindow, node_id: str,
                 depth: int, unit: float):
        total = region.length
        outside = Region(region.sub_region(0.0, window.tau1).segments
                         + region.sub_region(window.tau2, total).segments)
        inside = region.sub_region(window.tau1, window.tau2)
        self._visit(log, outside, f"{node_id}.0", node_id, depth + 1, unit)
        self._visit(log, inside, f"{node_id}.1", node_id, depth + 1, unit)

    def run(self, log: EventLog) -> SelectionReport:
        """Корневое сравнение и рекурсия по принятым разбиениям"""
        self.partitions, self.leaves = [], []
        unit = self.selection.time_unit or log.T / 100
        root = Region(((0.0, log.T),))

        if log.N == 0:
            hom = self.fitter.fit_homogeneous(log, 1.0)
            report = bic_compare(log, hom, None)
            report.stopped_reason = STOP_ROOT_HOMOGENEOUS
            return report

        lam, hom, het, report = self._compare(log, unit)
        if report.decision != DECISION_HETEROGENEOUS:
            report.stopped_reason = STOP_ROOT_HOMOGENEOUS
            self._leaf("0", root, STOP_ROOT_HOMOGENEOUS)
            report.leaves = list(self.leaves)
            return report

        fitted = self._accept("0", None, 0, root, log, lam, hom, het, report)
        self._descend(log, root, fitted.window, "0", 0, unit)
        report.partitions = list(self.partitions)
        report.leaves = list(self.leaves)
        report.stopped_reason = "; ".join(sorted({leaf['reason'] for leaf in self.leaves}))
        return report


def iterative_partition(log: EventLog, config: Optional[SelectionConfig] = None,
                        em_config: Optional[EMConfig] = None,
                        init_config: Optional[InitConfig] = None,
                        rng: Optional[np.random.Generator] = None,
                        threads: int = 1) -> SelectionReport:
    """
    Иерархическое разбиение потока; остановка по однородному решению,
    малому числу событий в регионе или глубине рекурсии (корень - глубина 0)
    """
    return PartitionSearch(config, em_config, init_config, rng, threads).run(log)
