"""Настройка логирования"""
import logging
import sys
from pathlib import Path
from typing import Dict

# Добавляем корневую директорию в путь для импорта config
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_LEVEL, LOG_FILE

FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATEFMT = '%Y-%m-%d %H:%M:%S'

# Консольные handlers всех логгеров детектора (для --verbose)
_console_handlers: Dict[str, logging.Handler] = {}


def setup_logger(name: str) -> logging.Logger:
    """Создаёт и настраивает logger"""
    logger = logging.getLogger(name)

    # Проверяем, что handlers ещё не добавлены
    if logger.handlers:
        return logger

    logger.setLevel(getattr(logging, LOG_LEVEL.upper(), logging.INFO))
    logger.propagate = False
    formatter = logging.Formatter(FORMAT, datefmt=DATEFMT)

    # stdout занят данными (ingest-check), логи - в stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)
    _console_handlers[name] = console_handler

    if LOG_FILE:
        file_handler = logging.FileHandler(LOG_FILE, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def set_console_level(level: int):
    """
    Уровень консоли для всех логгеров детектора

    Трассы итераций EM пишутся в DEBUG; логгер пропускает их только если
    его собственный уровень не выше.
    """
    for name, handler in _console_handlers.items():
        handler.setLevel(level)
        logger = logging.getLogger(name)
        if logger.level > level:
            logger.setLevel(level)
