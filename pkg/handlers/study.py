"""Команда study: симуляционное исследование по сетке сценариев"""
import argparse
import sys
from pathlib import Path
from typing import List

sys.path.insert(0, str(Path(__file__).parent.parent))
from handlers.common import out_dir
from models.latent import DirichletParams
from models.results import StudyMetrics
from models.settings import RunConfig, ScenarioConfig
from services.event_io import ReportWriter, write_study
from services.generator import lambda_for_edges_per_pair, null_scenario, study_scenarios
from services.sim_study import run_study
from utils.constants import SCENARIO_ALPHA0, SCENARIO_T
from utils.logger import setup_logger

logger = setup_logger(__name__)


def build_grid(config: RunConfig) -> List[ScenarioConfig]:
    """Сетка: уровни разделения x размеры x lambda, плюс нулевые сценарии"""
    grid = config.study
    scenarios = study_scenarios(grid.sizes, grid.levels, grid.edges_per_pair,
                                mode=config.mode, seed=config.seed)
    if grid.include_null:
        base = DirichletParams(SCENARIO_ALPHA0)
        for n in grid.sizes:
            for npp in grid.edges_per_pair:
                lam = lambda_for_edges_per_pair(npp, n, SCENARIO_T, base)
                scenarios.append(null_scenario(n, lam, mode=config.mode, seed=config.seed))
    return scenarios


def handle(config: RunConfig, args: argparse.Namespace) -> List[StudyMetrics]:
    scenarios = build_grid(config)
    metrics = run_study(scenarios, config.replicates, config.em, config.init,
                        seed=config.seed, threads=config.threads, time_unit=config.time_unit)
    write_study(ReportWriter(out_dir(config)), metrics, config, scenarios)
    return metrics
