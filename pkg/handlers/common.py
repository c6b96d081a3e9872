"""Общие функции команд: сборка конфигурации запуска и коды завершения"""
import argparse
from collections import defaultdict
from dataclasses import replace
from typing import Any, Callable, Dict
import sys
from pathlib import Path

from dotenv import dotenv_values

sys.path.insert(0, str(Path(__file__).parent.parent))
from models.settings import (
    EMConfig, InitConfig, RunConfig, SelectionConfig, StepConfig, StudyConfig, split_list,
)
from utils.constants import CONFIG_PREFIXES, DEFAULT_OUT_DIR, MSG_DONE, MSG_FAILED
from utils.exceptions import EXIT_NUMERICAL, EXIT_OK, ConfigError, DetectorError
from utils.logger import setup_logger

logger = setup_logger(__name__)


def _flag(text: str) -> bool:
    value = text.strip().lower()
    if value in ('1', 'true', 'yes'):
        return True
    if value in ('0', 'false', 'no'):
        return False
    raise ValueError(text)


# Ключ файла -> (секция, поле, приведение типа)
CONFIG_KEYS: Dict[str, tuple] = {
    'EM_NUM_CANDIDATES': ('em', 'num_candidates', int),
    'EM_XI': ('em', 'xi', float),
    'EM_MAX_ITERS': ('em', 'max_iters', int),
    'EM_REL_TOL': ('em', 'rel_tol', float),
    'EM_MEMBERSHIP_PRIOR': ('em', 'membership_prior', float),
    'EM_EXPOSURE': ('em', 'exposure', str),
    'EM_GAMMA_FORM': ('em', 'gamma_form', str),
    'STEP_INITIAL': ('step', 'initial_step', float),
    'STEP_BACKTRACK': ('step', 'backtrack', float),
    'STEP_MAX_INNER': ('step', 'max_inner', int),
    'STEP_MAX_SWEEPS': ('step', 'max_sweeps', int),
    'INIT_SEGMENTS': ('init', 'r', int),
    'INIT_K': ('init', 'K', int),
    'INIT_KMEANS_RESTARTS': ('init', 'kmeans_restarts', int),
    'INIT_TOLERANCE': ('init', 'tolerance', float),
    'INIT_FUZZIFIER': ('init', 'fuzzifier', float),
    'SELECTION_MAX_DEPTH': ('selection', 'max_depth', int),
    'SELECTION_MIN_EVENTS': ('selection', 'min_events', int),
    'SELECTION_TIME_UNIT': ('selection', 'time_unit', float),
    'STUDY_REPLICATES': ('run', 'replicates', int),
    'STUDY_SIZES': ('study', 'sizes', lambda text: split_list(text, int)),
    'STUDY_LEVELS': ('study', 'levels', lambda text: split_list(text, str)),
    'STUDY_EDGES_PER_PAIR': ('study', 'edges_per_pair', lambda text: split_list(text, float)),
    'STUDY_INCLUDE_NULL': ('study', 'include_null', _flag),
    'RUN_MODE': ('run', 'mode', str),
    'RUN_K': ('run', 'K', int),
    'RUN_TIME_UNIT': ('run', 'time_unit', float),
    'RUN_HORIZON': ('run', 'horizon', float),
    'RUN_N_VERTICES': ('run', 'n_vertices', int),
    'RUN_SEED': ('run', 'seed', int),
    'RUN_THREADS': ('run', 'threads', int),
    'RUN_INPUT': ('run', 'input_path', str),
    'RUN_OUT': ('run', 'out', str),
}

# Флаг CLI (атрибут argparse) -> поле RunConfig
CLI_FLAGS = {
    'seed': 'seed', 'threads': 'threads', 'out': 'out', 'input': 'input_path',
    'mode': 'mode', 'K': 'K', 'time_unit': 'time_unit', 'horizon': 'horizon',
    'n_vertices': 'n_vertices', 'replicates': 'replicates',
}


def read_config_file(path: str) -> Dict[str, Dict[str, Any]]:
    """
    Файл конфигурации запуска в формате dotenv; секции задаются префиксами
    EM_, STEP_, INIT_, SELECTION_, STUDY_, RUN_. Прочие ключи игнорируются.
    """
    if not Path(path).is_file():
        raise ConfigError(f"Файл конфигурации не найден: {path}")
    sections: Dict[str, Dict[str, Any]] = defaultdict(dict)
    for key, text in dotenv_values(path).items():
        if not key.startswith(CONFIG_PREFIXES):
            continue
        if key not in CONFIG_KEYS:
            raise ConfigError(f"Неизвестный ключ конфигурации: {key}")
        if text is None or not text.strip():
            raise ConfigError(f"Пустое значение ключа {key}")
        section, name, cast = CONFIG_KEYS[key]
        try:
            sections[section][name] = cast(text.strip())
        except ValueError:
            raise ConfigError(f"Некорректное значение {key}={text}")
    return sections


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Флаги CLI > файл конфигурации > окружение / .env > значения по умолчанию"""
    config_path = getattr(args, 'config', None)
    sections = read_config_file(config_path) if config_path else defaultdict(dict)
    run = dict(sections['run'])
    for attr, name in CLI_FLAGS.items():
        value = getattr(args, attr, None)
        if value is not None:
            run[name] = value
    try:
        em = EMConfig(step=StepConfig(**sections['step']), **sections['em'])
        selection = SelectionConfig(**sections['selection'])
        if run.get('time_unit') is not None and selection.time_unit is None:
            selection = replace(selection, time_unit=run['time_unit'])
        config = RunConfig(
            em=em,
            init=InitConfig(**sections['init']),
            selection=selection,
            study=StudyConfig(**sections['study']),
            **run,
        )
    except TypeError as e:
        raise ConfigError(f"Некорректная конфигурация: {e}")
    logger.debug(f"Конфигурация запуска: {config}")
    return config


def out_dir(config: RunConfig) -> str:
    return config.out or DEFAULT_OUT_DIR


def require_input(config: RunConfig) -> str:
    if not config.input_path:
        raise ConfigError("Не задан входной файл (--input или RUN_INPUT)")
    return config.input_path


def execute(command: Callable[[RunConfig, argparse.Namespace], Any],
            args: argparse.Namespace) -> int:
    """Запуск команды с отображением ошибок в коды завершения"""
    try:
        config = build_run_config(args)
        command(config, args)
    except DetectorError as e:
        logger.error(f"{args.command}: {e}")
        print(MSG_FAILED.format(error=e), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command}: непредвиденная ошибка: {e}")
        print(MSG_FAILED.format(error=e), file=sys.stderr)
        return EXIT_NUMERICAL
    logger.info(MSG_DONE.format(what=args.command))
    return EXIT_OK
