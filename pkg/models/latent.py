"""Латентные позиции, параметры Дирихле и ядро скалярного произведения"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from utils.exceptions import InvalidInputError
from utils.validators import validate_simplex, validate_alpha


@dataclass(frozen=True)
class LatentPosition:
    """
    Точка подмножества симплекса S (первые K компонент; (K+1)-я неявна: 1 - sum)
    """
    coords: Tuple[float, ...]

    def __post_init__(self):
        ok, clamped = validate_simplex(self.coords)
        if not ok:
            raise InvalidInputError(f"Точка вне симплекса: {tuple(self.coords)}")
        object.__setattr__(self, 'coords', tuple(float(c) for c in clamped))

    @property
    def K(self) -> int:
        return len(self.coords)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class DirichletParams:
    """(K+1)-мерный вектор концентраций alpha распределения F(theta)"""
    alpha: Tuple[float, ...]

    def __post_init__(self):
        if not validate_alpha(self.alpha):
            raise InvalidInputError(f"Некорректные параметры Дирихле: {tuple(self.alpha)}")
        object.__setattr__(self, 'alpha', tuple(float(a) for a in self.alpha))

    @property
    def K(self) -> int:
        return len(self.alpha) - 1

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)

    @property
    def total(self) -> float:
        """alpha-bar"""
        return float(sum(self.alpha))

    @property
    def eta(self) -> np.ndarray:
        """Первые K компонент alpha"""
        return self.vector[:-1]

    @property
    def mean(self) -> np.ndarray:
        """Вектор средних латентной позиции (первые K компонент)"""
        return self.eta / self.total

    @classmethod
    def from_mean(cls, mean, total: float) -> 'DirichletParams':
        """Сборка из вектора средних (K компонент) и суммы концентраций"""
        mu = np.asarray(mean, dtype=float)
        rest = 1.0 - mu.sum()
        return cls(tuple(np.append(mu, rest) * total))

    def to_dict(self) -> dict:
        return {'alpha': list(self.alpha)}

    @classmethod
    def from_dict(cls, data: dict) -> 'DirichletParams':
        return cls(tuple(data['alpha']))


PositionLike = Union[LatentPosition, np.ndarray, Tuple[float, ...]]


def _coords(x: PositionLike) -> np.ndarray:
    if isinstance(x, LatentPosition):
        return x.vector
    return np.asarray(x, dtype=float)


def dot_product(x: PositionLike, y: PositionLike) -> float:
    """Вероятность реализации ребра: sum_k x_k y_k"""
    a, b = _coords(x), _coords(y)
    if a.shape != b.shape:
        raise InvalidInputError(f"Размерности не совпадают: {a.shape} и {b.shape}")
    return float(np.clip(a @ b, 0.0, 1.0))


def attribute_probs(x: PositionLike, y: PositionLike) -> np.ndarray:
    """
    Распределение атрибута ребра (p_0, p_1, ..., p_K)

    p_k = x_k * y_k для k >= 1, p_0 = 1 - sum_k x_k y_k
    """
    a, b = _coords(x), _coords(y)
    if a.shape != b.shape:
        raise InvalidInputError(f"Размерности не совпадают: {a.shape} и {b.shape}")
    per_attr = a * b
    return np.concatenate(([1.0 - per_attr.sum()], per_attr))


def sample_latent(params: DirichletParams, rng: np.random.Generator) -> LatentPosition:
    """Первые K компонент (K+1)-мерной случайной величины Дирихле"""
    draw = rng.dirichlet(params.vector)
    return LatentPosition(tuple(draw[:-1]))


def sample_latent_batch(params: DirichletParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Пакетная выборка: массив (size, K)"""
    if size == 0:
        return np.empty((0, params.K))
    return rng.dirichlet(params.vector, size=size)[:, :-1]


def expected_dot(params_a: DirichletParams, params_b: DirichletParams) -> float:
    """E(X_u . X_v) для независимых X_u ~ F(a), X_v ~ F(b)"""
    if params_a.K != params_b.K:
        raise InvalidInputError(f"Размерности не совпадают: K={params_a.K} и K={params_b.K}")
    return float(params_a.mean @ params_b.mean)


def separation_angle(params_a: DirichletParams, params_b: DirichletParams) -> float:
    """Угол phi (радианы) между векторами средних двух распределений"""
    mu_a, mu_b = params_a.mean, params_b.mean
    cosine = mu_a @ mu_b / (np.linalg.norm(mu_a) * np.linalg.norm(mu_b))
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))
