"""Обработчики команд CLI"""
from . import detect, fit_hom, ingest_check, simulate, study
from .common import build_run_config, execute

COMMANDS = {
    'ingest-check': ingest_check.handle,
    'detect': detect.handle,
    'simulate': simulate.handle,
    'study': study.handle,
    'fit-hom': fit_hom.handle,
}
