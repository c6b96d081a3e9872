"""Исключения приложения и коды завершения"""
from typing import Optional

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class DetectorError(Exception):
    """Базовая ошибка детектора"""
    exit_code = EXIT_NUMERICAL


class InvalidInputError(DetectorError, ValueError):
    """Нарушение предусловий библиотечной функции"""
    exit_code = EXIT_DATA


class ConfigError(DetectorError):
    """Некорректная конфигурация запуска"""
    exit_code = EXIT_CONFIG


class DataError(DetectorError):
    """Ошибка во входных данных (с номером строки, если известен)"""
    exit_code = EXIT_DATA

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"строка {line}: {message}"
        super().__init__(message)


class NumericalError(DetectorError):
    """Численный сбой (расходимость, вырожденные веса и т.п.)"""
    exit_code = EXIT_NUMERICAL
