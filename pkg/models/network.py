"""Модели потока рёбер, окна изменения и разбиения"""
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from utils.constants import MODE_ATTRIBUTED, MODE_UNATTRIBUTED, MODES
from utils.exceptions import InvalidInputError
from utils.validators import validate_positive
from .latent import DirichletParams


@dataclass(frozen=True)
class EdgeEvent:
    """Наблюдённое ребро (t, u, v[, k])"""
    t: float
    u: int
    v: int
    attr: Optional[int] = None

    def __post_init__(self):
        if self.u == self.v:
            raise InvalidInputError(f"Петля {self.u}-{self.v} недопустима")
        if self.t < 0:
            raise InvalidInputError(f"Отрицательное время события: {self.t}")


@dataclass(frozen=True)
class ChangeWindow:
    """
    Окно (tau1, tau2]; события с tau1 < t <= tau2 считаются внутри.

    Непустое окно от 0 замкнуто слева (как корневой отрезок региона).
    """
    tau1: float
    tau2: float

    def __post_init__(self):
        if not (np.isfinite(self.tau1) and np.isfinite(self.tau2)):
            raise InvalidInputError(f"Границы окна не конечны: ({self.tau1}, {self.tau2})")
        if self.tau1 < 0 or self.tau2 < self.tau1:
            raise InvalidInputError(f"Некорректное окно: ({self.tau1}, {self.tau2})")
        object.__setattr__(self, 'tau1', float(self.tau1))
        object.__setattr__(self, 'tau2', float(self.tau2))

    @property
    def length(self) -> float:
        return self.tau2 - self.tau1

    @property
    def is_proper(self) -> bool:
        return self.tau1 < self.tau2

    def within(self, T: float) -> bool:
        """Окно внутри горизонта наблюдения [0, T]"""
        return 0.0 <= self.tau1 and self.tau2 <= T

    def contains(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        lower = t >= 0.0 if self.tau1 == 0 and self.is_proper else t > self.tau1
        return lower & (t <= self.tau2)

    def to_dict(self) -> dict:
        return {'tau1': self.tau1, 'tau2': self.tau2}

    @classmethod
    def from_dict(cls, data: dict) -> 'ChangeWindow':
        return cls(float(data['tau1']), float(data['tau2']))


@dataclass(frozen=True)
class VertexSubset:
    """Аномальное подмножество вершин: непустое собственное подмножество {0..n-1}"""
    members: FrozenSet[int]
    n: int

    def __post_init__(self):
        members = frozenset(int(i) for i in self.members)
        if not members:
            raise InvalidInputError("Подмножество вершин пусто")
        if len(members) >= self.n:
            raise InvalidInputError("Подмножество вершин должно быть собственным")
        if min(members) < 0 or max(members) >= self.n:
            raise InvalidInputError(f"Номера вершин вне диапазона 0..{self.n - 1}")
        object.__setattr__(self, 'members', members)

    @classmethod
    def from_mask(cls, mask) -> 'VertexSubset':
        mask = np.asarray(mask, dtype=bool)
        return cls(frozenset(np.flatnonzero(mask).tolist()), mask.size)

    @property
    def m(self) -> int:
        return len(self.members)

    @property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[sorted(self.members)] = True
        return out

    def sorted_members(self) -> List[int]:
        return sorted(self.members)

    def jaccard(self, other: 'VertexSubset') -> float:
        union = self.members | other.members
        return len(self.members & other.members) / len(union) if union else 1.0


@dataclass(frozen=True)
class PartitionModel:
    """Гетерогенная модель: (alpha0, alpha1, окно, подмножество, lambda)"""
    alpha0: DirichletParams
    alpha1: DirichletParams
    window: ChangeWindow
    subset: VertexSubset
    lam: float

    def __post_init__(self):
        if not validate_positive(self.lam):
            raise InvalidInputError(f"lambda должна быть положительной: {self.lam}")
        if not self.window.is_proper:
            raise InvalidInputError(f"Окно модели вырождено: {self.window}")
        if self.alpha0.K != self.alpha1.K:
            raise InvalidInputError("alpha0 и alpha1 разной размерности")

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        members = self.subset.sorted_members()
        return {
            'alpha0': list(self.alpha0.alpha),
            'alpha1': list(self.alpha1.alpha),
            'window': self.window.to_dict(),
            'members': [labels[i] for i in members] if labels is not None else members,
            'lambda': self.lam,
        }


@dataclass(frozen=True, eq=False)
class EventLog:
    """
    Упорядоченный по времени поток наблюдённых рёбер.

    Хранится столбцами (numpy); вершины 0..n-1, пары неориентированные (u < v).
    """
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    n: int
    T: float
    K: int
    mode: str = MODE_UNATTRIBUTED
    attrs: Optional[np.ndarray] = None
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        u = np.array(self.u, dtype=np.int64).reshape(-1)
        v = np.array(self.v, dtype=np.int64).reshape(-1)
        if self.mode not in MODES:
            raise InvalidInputError(f"Неизвестный режим: {self.mode}")
        if not (times.size == u.size == v.size):
            raise InvalidInputError("Столбцы t, u, v разной длины")
        if self.n < 2 or self.K < 1:
            raise InvalidInputError(f"Нужно n >= 2 и K >= 1 (n={self.n}, K={self.K})")
        if not (np.isfinite(self.T) and self.T > 0):
            raise InvalidInputError(f"Горизонт T должен быть положительным: {self.T}")
        if times.size:
            if np.any(np.diff(times) < 0):
                raise InvalidInputError("События не упорядочены по времени")
            if times[0] < 0 or times[-1] >= self.T:
                raise InvalidInputError(f"Время события вне [0, {self.T})")
            if np.any(u == v):
                raise InvalidInputError("Петли недопустимы")
            lo, hi = np.minimum(u, v), np.maximum(u, v)
            if lo.min() < 0 or hi.max() >= self.n:
                raise InvalidInputError(f"Номер вершины вне 0..{self.n - 1}")
            u, v = lo, hi
        attrs = None
        if self.mode == MODE_ATTRIBUTED:
            if self.attrs is None:
                raise InvalidInputError("Атрибутированный режим требует столбец k")
            attrs = np.array(self.attrs, dtype=np.int64).reshape(-1)
            if attrs.size != times.size:
                raise InvalidInputError("Столбец k другой длины")
            if attrs.size and (attrs.min() < 1 or attrs.max() > self.K):
                raise InvalidInputError(f"Атрибут вне диапазона 1..{self.K}")
            attrs.setflags(write=False)
        labels = tuple(self.labels) if self.labels else tuple(str(i + 1) for i in range(self.n))
        if len(labels) != self.n:
            raise InvalidInputError("Число меток не совпадает с n")
        for arr in (times, u, v):
            arr.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'v', v)
        object.__setattr__(self, 'attrs', attrs)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'T', float(self.T))

    @classmethod
    def from_events(cls, events: Iterable[EdgeEvent], n: int, T: float, K: int,
                    mode: str = MODE_UNATTRIBUTED,
                    labels: Sequence[str] = ()) -> 'EventLog':
        """Сборка из списка EdgeEvent (с сортировкой по времени)"""
        ordered = sorted(events, key=lambda e: e.t)
        attrs = None
        if mode == MODE_ATTRIBUTED:
            attrs = [e.attr for e in ordered]
        return cls(
            times=np.array([e.t for e in ordered], dtype=float),
            u=np.array([e.u for e in ordered], dtype=np.int64),
            v=np.array([e.v for e in ordered], dtype=np.int64),
            n=n, T=T, K=K, mode=mode, attrs=attrs, labels=tuple(labels),
        )

    @property
    def N(self) -> int:
        return int(self.times.size)

    @property
    def attributed(self) -> bool:
        return self.mode == MODE_ATTRIBUTED

    @property
    def events(self) -> List[EdgeEvent]:
        attrs = self.attrs if self.attrs is not None else [None] * self.N
        return [
            EdgeEvent(float(t), int(a), int(b), None if k is None else int(k))
            for t, a, b, k in zip(self.times, self.u, self.v, attrs)
        ]

    def select(self, mask, times: Optional[np.ndarray] = None,
               T: Optional[float] = None) -> 'EventLog':
        """Подпоток по маске событий, с необязательной перенумерацией времени"""
        mask = np.asarray(mask, dtype=bool)
        new_times = self.times[mask] if times is None else np.asarray(times, dtype=float)
        return EventLog(
            times=new_times,
            u=self.u[mask],
            v=self.v[mask],
            n=self.n,
            T=self.T if T is None else T,
            K=self.K,
            mode=self.mode,
            attrs=None if self.attrs is None else self.attrs[mask],
            labels=self.labels,
        )

    def adjacency(self, window: Optional[ChangeWindow] = None,
                  weights: Optional[np.ndarray] = None) -> np.ndarray:
        """Симметричная мультиматрица смежности (по окну и/или весам событий)"""
        mask = np.ones(self.N, dtype=bool) if window is None else window.contains(self.times)
        w = np.ones(self.N) if weights is None else np.asarray(weights, dtype=float)
        A = np.zeros((self.n, self.n))
        np.add.at(A, (self.u[mask], self.v[mask]), w[mask])
        return A + A.T


@dataclass(frozen=True, eq=False)
class MultiAdjacency:
    """Симметричная матрица числа рёбер по парам за интервал"""
    counts: np.ndarray
    interval: Optional[ChangeWindow] = None

    def __post_init__(self):
        counts = np.array(self.counts, dtype=float)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InvalidInputError(f"Матрица смежности должна быть квадратной: {counts.shape}")
        if not np.allclose(counts, counts.T):
            raise InvalidInputError("Матрица смежности несимметрична")
        if np.any(counts < 0):
            raise InvalidInputError("Отрицательные числа рёбер")
        counts.setflags(write=False)
        object.__setattr__(self, 'counts', counts)

    @classmethod
    def from_log(cls, log: EventLog, interval: Optional[ChangeWindow] = None) -> 'MultiAdjacency':
        return cls(log.adjacency(interval), interval)

    @property
    def n(self) -> int:
        return self.counts.shape[0]
