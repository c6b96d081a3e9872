"""Команда ingest-check: проверка входного CSV и сводка потока"""
import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))
from handlers.common import require_input
from models.network import EventLog
from models.settings import RunConfig
from services.event_io import ReportWriter, ingest
from utils.constants import FILE_INGEST, SCHEMA_VERSION
from utils.logger import setup_logger

logger = setup_logger(__name__)


def summarize(log: EventLog) -> dict:
    """Сводка потока: размеры, горизонт, диапазон времени"""
    summary = {
        'N': log.N, 'n': log.n, 'T': log.T, 'K': log.K, 'mode': log.mode,
        'first_t': float(log.times[0]) if log.N else None,
        'last_t': float(log.times[-1]) if log.N else None,
        'active_vertices': int(len(set(log.u.tolist()) | set(log.v.tolist()))),
    }
    if log.attributed:
        summary['attribute_counts'] = [int((log.attrs == k).sum()) for k in range(1, log.K + 1)]
    return summary


def handle(config: RunConfig, args: argparse.Namespace) -> dict:
    """Без --out сводка печатается в stdout"""
    log = ingest(require_input(config), config)
    summary = summarize(log)
    if config.out:
        ReportWriter(config.out).json(FILE_INGEST, {'config': config.to_dict(), 'summary': summary})
    else:
        print(json.dumps({'schema_version': SCHEMA_VERSION, 'summary': summary},
                         sort_keys=True, ensure_ascii=False))
    logger.info(f"Проверка пройдена: N={log.N}, n={log.n}")
    return summary
