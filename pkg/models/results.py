"""Модели результатов: статистики, подгонка, выбор модели, исследование"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .latent import DirichletParams
from .network import ChangeWindow, PartitionModel, VertexSubset


@dataclass(frozen=True, eq=False)
class IndicatorView:
    """Индикаторы событий: s (в окне), y (u в подмножестве), z (v в подмножестве)"""
    s: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def n_anomalous(self) -> np.ndarray:
        """Число концов события, разыгранных из F(alpha1): 0, 1 или 2"""
        return self.s * (self.y.astype(int) + self.z.astype(int))


Counts = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class SufficientStats:
    """
    Счётчики N0/N1/N2 и экспозиции gamma0/gamma1/gamma2.

    В атрибутированном режиме N_j - векторы длины K, иначе скаляры.
    """
    N0: Counts
    N1: Counts
    N2: Counts
    Nbar0: float
    Nbar1: float
    Nbar2: float
    gamma0: float
    gamma1: float
    gamma2: float

    @property
    def gammas(self) -> np.ndarray:
        return np.array([self.gamma0, self.gamma1, self.gamma2])

    @property
    def totals(self) -> np.ndarray:
        return np.array([self.Nbar0, self.Nbar1, self.Nbar2])


@dataclass(frozen=True, eq=False)
class Candidate:
    """Кандидат стартовой конфигурации: сегмент времени и подмножество"""
    window: ChangeWindow
    subset: VertexSubset
    segment_index: int
    positions: Optional[np.ndarray] = None


@dataclass
class StartPoint:
    """Стартовая точка EM"""
    window: ChangeWindow
    subset: VertexSubset
    alpha0: DirichletParams
    alpha1: DirichletParams
    loglik: float
    segment_index: Optional[int] = None
    fallback: bool = False


@dataclass(frozen=True)
class TraceEntry:
    """Одна итерация EM"""
    tau1: float
    tau2: float
    subset_size: int
    loglik: float


@dataclass
class FitResult:
    """Результат подгонки гетерогенной модели"""
    model: PartitionModel
    loglik: float
    iterations: int
    converged: bool
    trace: List[TraceEntry] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        return {
            'model': self.model.to_dict(labels),
            'loglik': self.loglik,
            'iterations': self.iterations,
            'converged': self.converged,
            'trace': [vars(entry) for entry in self.trace],
            'flags': list(self.flags),
        }


@dataclass
class HomogeneousFit:
    """Результат подгонки однородной модели (Model 1)"""
    alpha: DirichletParams
    loglik: float
    lam: float

    def to_dict(self) -> dict:
        return {'alpha': list(self.alpha.alpha), 'loglik': self.loglik, 'lambda': self.lam}


@dataclass
class AcceptedPartition:
    """Принятое разбиение с привязкой к родительскому региону"""
    node_id: str
    parent_id: Optional[str]
    depth: int
    region: List[Tuple[float, float]]
    model: PartitionModel
    delta_bic: float
    loglik_het: float
    loglik_hom: float
    membership: np.ndarray
    window_pieces: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        return {
            'node_id': self.node_id,
            'parent_id': self.parent_id,
            'depth': self.depth,
            'region': [list(seg) for seg in self.region],
            'delta_bic': self.delta_bic,
            'loglik_het': self.loglik_het,
            'loglik_hom': self.loglik_hom,
            **self.model.to_dict(labels),
            'window_pieces': [list(piece) for piece in self.window_pieces]
            or [[self.model.window.tau1, self.model.window.tau2]],
        }


@dataclass
class SelectionReport:
    """Итог сравнения Model 1 / Model 2 и иерархического разбиения"""
    bic_hom: float
    bic_het: float
    decision: str
    partitions: List[AcceptedPartition] = field(default_factory=list)
    stopped_reason: str = ""
    leaves: List[Dict[str, str]] = field(default_factory=list)

    @property
    def delta_bic(self) -> float:
        return self.bic_het - self.bic_hom

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        return {
            'bic_hom': self.bic_hom,
            'bic_het': self.bic_het,
            'decision': self.decision,
            'stopped_reason': self.stopped_reason,
            'leaves': list(self.leaves),
            'partitions': [p.to_dict(labels) for p in self.partitions],
        }


@dataclass
class ReplicateOutcome:
    """Исход одной реплики симуляционного исследования"""
    rejected: bool
    sensitivity: float
    specificity: float
    cp_error: float
    avg_edges_per_pair: float
    window: Optional[ChangeWindow] = None
    error: Optional[str] = None


@dataclass
class StudyMetrics:
    """Агрегированные метрики для одной точки (сценарий, lambda)"""
    scenario: str
    n: int
    m: int
    lam: float
    avg_edges_per_pair: float
    power: float
    sensitivity: float
    specificity: float
    cp_error: float
    replicates: int
    failures: int
    phi: float = float('nan')

    def to_row(self) -> dict:
        """Строка таблицы в порядке колонок отчёта"""
        return {
            'scenario': self.scenario,
            'n': self.n,
            'm': self.m,
            'lambda': self.lam,
            'avg_edges_per_pair': self.avg_edges_per_pair,
            'power': self.power,
            'sensitivity': self.sensitivity,
            'specificity': self.specificity,
            'cp_error': self.cp_error,
            'replicates': self.replicates,
            'failures': self.failures,
        }
