"""Валидация данных"""
from typing import Tuple

import numpy as np

from .constants import SIMPLEX_TOL


def validate_simplex(coords) -> Tuple[bool, np.ndarray]:
    """
    Проверка точки симплекса S = {x >= 0, sum(x) <= 1} с допуском SIMPLEX_TOL

    Returns:
        (True, координаты с обрезкой к границе) или (False, исходный массив)
    """
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size == 0 or not np.all(np.isfinite(x)):
        return False, x
    if np.any(x < -SIMPLEX_TOL) or x.sum() > 1.0 + SIMPLEX_TOL:
        return False, x
    x = np.clip(x, 0.0, None)
    total = x.sum()
    if total > 1.0:
        x = x / total
    return True, x


def validate_alpha(alpha) -> bool:
    """Параметры Дирихле: конечные и строго положительные, длина >= 2"""
    a = np.asarray(alpha, dtype=float)
    return a.ndim == 1 and a.size >= 2 and bool(np.all(np.isfinite(a))) and bool(np.all(a > 0))


def validate_positive(value) -> bool:
    """Строго положительное конечное число"""
    try:
        return bool(np.isfinite(value)) and value > 0
    except TypeError:
        return False


def parse_time(text: str) -> Tuple[bool, float]:
    """Разбор метки времени (неотрицательное вещественное число)"""
    try:
        value = float(text.strip().replace(',', '.'))
    except (ValueError, AttributeError):
        return False, 0.0
    if not np.isfinite(value) or value < 0:
        return False, 0.0
    return True, value


def parse_attribute(text: str, K: int) -> Tuple[bool, int]:
    """Разбор атрибута ребра: целое в диапазоне 1..K"""
    try:
        value = int(text.strip())
    except (ValueError, AttributeError):
        return False, 0
    if 1 <= value <= K:
        return True, value
    return False, value
