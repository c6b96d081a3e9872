"""Команда fit-hom (отладка): подгонка только однородной модели"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))
from handlers.common import out_dir, require_input
from models.results import HomogeneousFit
from models.settings import RunConfig
from services.em_fitter import EMFitter, fix_lambda
from services.event_io import ReportWriter, ingest
from utils.constants import FILE_FIT_HOM
from utils.logger import setup_logger

logger = setup_logger(__name__)


def handle(config: RunConfig, args: argparse.Namespace) -> HomogeneousFit:
    log = ingest(require_input(config), config)
    lam = fix_lambda(log, config.time_unit or log.T / 100)
    fitter = EMFitter(config.em, config.init, np.random.default_rng(config.seed))
    fit = fitter.fit_homogeneous(log, lam)
    ReportWriter(out_dir(config)).json(FILE_FIT_HOM, {
        'config': config.to_dict(), 'seed': config.seed, 'fit': fit.to_dict(),
    })
    logger.info(f"Однородная модель: alpha={np.round(fit.alpha.alpha, 4).tolist()}, "
                f"loglik={fit.loglik:.4f}")
    return fit
