"""Команда simulate: генерация потока рёбер и файла истинных параметров"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))
from handlers.common import out_dir
from models.latent import DirichletParams
from models.network import EventLog
from models.settings import RunConfig, ScenarioConfig
from services.event_io import ReportWriter
from services.generator import lambda_for_edges_per_pair, null_scenario, simulate_log, study_scenarios
from utils.constants import FILE_EVENTS, FILE_TRUTH, SCENARIO_ALPHA0, SCENARIO_ALPHA1, SCENARIO_T
from utils.exceptions import ConfigError
from utils.logger import setup_logger

logger = setup_logger(__name__)

LEVEL_NULL = "null"


def build_scenario(config: RunConfig, level: str, n: int, edges_per_pair: float) -> ScenarioConfig:
    """Сценарий по уровню разделения (large/medium/small) или нулевой"""
    if level == LEVEL_NULL:
        lam = lambda_for_edges_per_pair(edges_per_pair, n, SCENARIO_T, DirichletParams(SCENARIO_ALPHA0))
        return null_scenario(n, lam, mode=config.mode, seed=config.seed)
    if level not in SCENARIO_ALPHA1:
        raise ConfigError(f"Неизвестный уровень разделения: {level}")
    return study_scenarios([n], [level], [edges_per_pair], mode=config.mode, seed=config.seed)[0]


def handle(config: RunConfig, args: argparse.Namespace) -> EventLog:
    scenario = build_scenario(config, args.level, args.n, args.edges_per_pair)
    log = simulate_log(scenario, np.random.default_rng(config.seed))

    writer = ReportWriter(out_dir(config))
    writer.events(FILE_EVENTS, log)
    writer.truth(FILE_TRUTH, scenario, log, config)
    logger.info(f"Сценарий {scenario.name}: {log.N} рёбер, lambda={scenario.lam:.4f}")
    return log
