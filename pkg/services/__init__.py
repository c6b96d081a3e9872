"""Сервисы: генератор, правдоподобие, инициализация, EM, выбор модели, исследование, ввод-вывод"""
from .likelihood import (
    compute_stats, loglik, loglik_attributed, loglik_unattributed, loglik_homogeneous,
    WindowScorer,
)
from .generator import generate_opportunities, realize_events, simulate_log, study_scenarios, null_scenario
from .initializer import augment_diagonal, ls_positions, candidate_subsets, best_start
from .em_fitter import EMFitter, fix_lambda
from .model_selection import bic_compare, iterative_partition, PartitionSearch, Region
from .sim_study import run_study, study_table
from .event_io import ingest, ReportWriter, membership_frame
