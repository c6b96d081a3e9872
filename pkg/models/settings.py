"""Конфигурации алгоритмов и запусков"""
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from config import (
    DEFAULT_SEED, DEFAULT_K, THREADS, LIKELIHOOD_EXPOSURE, LIKELIHOOD_GAMMA_FORM,
    EM_NUM_CANDIDATES, EM_XI, EM_MAX_ITERS, EM_REL_TOL, EM_MEMBERSHIP_PRIOR,
    STEP_INITIAL, STEP_BACKTRACK, STEP_MAX_INNER, STEP_MAX_SWEEPS,
    INIT_SEGMENTS, INIT_KMEANS_RESTARTS, INIT_FUZZIFIER, INIT_TOLERANCE,
    SELECTION_MAX_DEPTH, SELECTION_MIN_EVENTS, STUDY_REPLICATES,
    STUDY_SIZES, STUDY_LEVELS, STUDY_EDGES_PER_PAIR, STUDY_INCLUDE_NULL,
)
from utils.constants import (
    MODES, MODE_UNATTRIBUTED, EXPOSURES, GAMMA_FORMS, SCENARIO_ALPHA1, SCENARIO_M,
)
from utils.exceptions import ConfigError
from .latent import DirichletParams
from .network import ChangeWindow, VertexSubset


@dataclass(frozen=True)
class StepConfig:
    """Управление градиентным подъёмом по латентным позициям"""
    initial_step: float = STEP_INITIAL
    backtrack: float = STEP_BACKTRACK
    max_inner: int = STEP_MAX_INNER
    max_sweeps: int = STEP_MAX_SWEEPS

    def __post_init__(self):
        if self.initial_step <= 0 or not (0 < self.backtrack < 1):
            raise ConfigError(f"Некорректные параметры шага: {self}")
        if self.max_inner < 1 or self.max_sweeps < 1:
            raise ConfigError(f"Число итераций шага должно быть >= 1: {self}")


@dataclass(frozen=True)
class EMConfig:
    """Параметры стохастического условного EM"""
    num_candidates: int = EM_NUM_CANDIDATES
    xi: float = EM_XI
    max_iters: int = EM_MAX_ITERS
    rel_tol: float = EM_REL_TOL
    membership_prior: float = EM_MEMBERSHIP_PRIOR
    exposure: str = LIKELIHOOD_EXPOSURE
    gamma_form: str = LIKELIHOOD_GAMMA_FORM
    step: StepConfig = field(default_factory=StepConfig)

    def __post_init__(self):
        if self.num_candidates < 1:
            raise ConfigError(f"num_candidates должно быть >= 1: {self.num_candidates}")
        if not (0 < self.xi < 1):
            raise ConfigError(f"xi должно лежать в (0, 1): {self.xi}")
        if not (0 < self.membership_prior < 1):
            raise ConfigError(f"membership_prior должно лежать в (0, 1): {self.membership_prior}")
        if self.max_iters < 1 or self.rel_tol <= 0:
            raise ConfigError(f"Некорректные критерии остановки: {self.max_iters}, {self.rel_tol}")
        if self.exposure not in EXPOSURES:
            raise ConfigError(f"Неизвестная форма экспозиции: {self.exposure}")
        if self.gamma_form not in GAMMA_FORMS:
            raise ConfigError(f"Неизвестная форма разбиения экспозиции: {self.gamma_form}")


@dataclass(frozen=True)
class InitConfig:
    """Параметры инициализации (сегменты, кластеризация)"""
    r: int = INIT_SEGMENTS
    K: Optional[int] = None
    kmeans_restarts: int = INIT_KMEANS_RESTARTS
    tolerance: float = INIT_TOLERANCE
    fuzzifier: float = INIT_FUZZIFIER

    def __post_init__(self):
        if self.r < 2:
            raise ConfigError(f"Число сегментов r должно быть >= 2: {self.r}")
        if self.kmeans_restarts < 1 or self.tolerance <= 0 or self.fuzzifier <= 1:
            raise ConfigError(f"Некорректные параметры инициализации: {self}")


@dataclass(frozen=True)
class SelectionConfig:
    """Параметры иерархического разбиения"""
    max_depth: int = SELECTION_MAX_DEPTH
    min_events: int = SELECTION_MIN_EVENTS
    time_unit: Optional[float] = None

    def __post_init__(self):
        if self.max_depth < 0 or self.min_events < 0:
            raise ConfigError(f"Некорректные параметры разбиения: {self}")
        if self.time_unit is not None and self.time_unit <= 0:
            raise ConfigError(f"time_unit должна быть положительной: {self.time_unit}")


def split_list(text: str, cast) -> tuple:
    try:
        return tuple(cast(item.strip()) for item in text.split(',') if item.strip())
    except ValueError:
        raise ConfigError(f"Некорректный список: {text}")


@dataclass(frozen=True)
class StudyConfig:
    """Сетка симуляционного исследования"""
    sizes: Tuple[int, ...] = field(default_factory=lambda: split_list(STUDY_SIZES, int))
    levels: Tuple[str, ...] = field(default_factory=lambda: split_list(STUDY_LEVELS, str))
    edges_per_pair: Tuple[float, ...] = field(default_factory=lambda: split_list(STUDY_EDGES_PER_PAIR, float))
    include_null: bool = STUDY_INCLUDE_NULL

    def __post_init__(self):
        if not self.sizes or min(self.sizes) <= SCENARIO_M + 1:
            raise ConfigError(f"Размеры сети должны быть > {SCENARIO_M + 1}: {self.sizes}")
        unknown = [level for level in self.levels if level not in SCENARIO_ALPHA1]
        if unknown:
            raise ConfigError(f"Неизвестные уровни разделения: {unknown}")
        if not self.edges_per_pair or min(self.edges_per_pair) <= 0:
            raise ConfigError(f"Сетка рёбер на пару должна быть положительной: {self.edges_per_pair}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Сценарий генерации потока рёбер"""
    n: int
    T: float
    K: int
    lam: float
    alpha0: DirichletParams
    alpha1: DirichletParams
    window: ChangeWindow
    subset: VertexSubset
    mode: str = MODE_UNATTRIBUTED
    seed: int = DEFAULT_SEED
    name: str = "custom"

    def __post_init__(self):
        if self.n < 2 or self.T <= 0 or not (np.isfinite(self.lam) and self.lam > 0):
            raise ConfigError(f"Некорректный сценарий: n={self.n}, T={self.T}, lambda={self.lam}")
        if self.mode not in MODES:
            raise ConfigError(f"Неизвестный режим: {self.mode}")
        if self.alpha0.K != self.K or self.alpha1.K != self.K:
            raise ConfigError(f"Размерность alpha не совпадает с K={self.K}")
        if self.subset.n != self.n or self.subset.m >= self.n:
            raise ConfigError("Подмножество не согласовано с n")
        if not (0 < self.window.tau1 < self.window.tau2 < self.T):
            raise ConfigError(f"Окно {self.window} вне (0, {self.T})")

    @property
    def m(self) -> int:
        return self.subset.m

    def to_dict(self) -> dict:
        return {
            'name': self.name, 'n': self.n, 'T': self.T, 'K': self.K, 'lambda': self.lam,
            'alpha0': list(self.alpha0.alpha), 'alpha1': list(self.alpha1.alpha),
            'window': self.window.to_dict(), 'subset': self.subset.sorted_members(),
            'mode': self.mode, 'seed': self.seed,
        }


@dataclass(frozen=True)
class RunConfig:
    """Полная конфигурация запуска CLI"""
    mode: str = MODE_UNATTRIBUTED
    K: int = DEFAULT_K
    time_unit: Optional[float] = None
    horizon: Optional[float] = None
    n_vertices: Optional[int] = None
    em: EMConfig = field(default_factory=EMConfig)
    init: InitConfig = field(default_factory=InitConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    study: StudyConfig = field(default_factory=StudyConfig)
    seed: int = DEFAULT_SEED
    threads: int = THREADS
    replicates: int = STUDY_REPLICATES
    input_path: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"Неизвестный режим: {self.mode}")
        if self.K < 1:
            raise ConfigError(f"K должно быть >= 1: {self.K}")
        if self.time_unit is not None and self.time_unit <= 0:
            raise ConfigError(f"time_unit должна быть положительной: {self.time_unit}")
        if self.horizon is not None and self.horizon <= 0:
            raise ConfigError(f"Горизонт должен быть положительным: {self.horizon}")
        if self.threads < 1 or self.replicates < 1:
            raise ConfigError("threads и replicates должны быть >= 1")

    def to_dict(self) -> dict:
        return asdict(self)
