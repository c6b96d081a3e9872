"""Команда detect: фиксация lambda и иерархическое разбиение потока"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))
from handlers.common import out_dir, require_input
from models.results import SelectionReport
from models.settings import RunConfig
from services.event_io import ReportWriter, detection_payload, ingest, membership_frame
from services.model_selection import iterative_partition
from utils.constants import FILE_DETECT, FILE_MEMBERSHIP
from utils.logger import setup_logger

logger = setup_logger(__name__)


def handle(config: RunConfig, args: argparse.Namespace) -> SelectionReport:
    log = ingest(require_input(config), config)
    rng = np.random.default_rng(config.seed)
    report = iterative_partition(log, config.selection, config.em, config.init, rng, config.threads)

    writer = ReportWriter(out_dir(config))
    writer.json(FILE_DETECT, detection_payload(report, log, config))
    writer.frame(FILE_MEMBERSHIP, membership_frame(report, log))
    logger.info(f"Решение: {report.decision}, разбиений {len(report.partitions)}, "
                f"остановка: {report.stopped_reason}")
    return report
