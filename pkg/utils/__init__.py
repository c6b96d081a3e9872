"""Вспомогательные функции и утилиты"""
from .logger import setup_logger
from .validators import validate_simplex, validate_alpha, validate_positive
from .exceptions import DetectorError, InvalidInputError, ConfigError, DataError, NumericalError
from .constants import *
