"""Конфигурация приложения"""
import os
from dotenv import load_dotenv

load_dotenv()

# Логирование
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FILE = os.getenv('LOG_FILE', '')  # пусто - только консоль

# Воспроизводимость
DEFAULT_SEED = int(os.getenv('DEFAULT_SEED', 20240101))
THREADS = int(os.getenv('THREADS', 1))

# Размерность: число атрибутов / латентных координат
DEFAULT_K = int(os.getenv('DEFAULT_K', 2))

# Правдоподобие
LIKELIHOOD_EXPOSURE = os.getenv('LIKELIHOOD_EXPOSURE', 'poisson')
LIKELIHOOD_GAMMA_FORM = os.getenv('LIKELIHOOD_GAMMA_FORM', 'pairs')

# EM-алгоритм
EM_NUM_CANDIDATES = int(os.getenv('EM_NUM_CANDIDATES', 5000))
EM_XI = float(os.getenv('EM_XI', 0.5))
EM_MAX_ITERS = int(os.getenv('EM_MAX_ITERS', 100))
EM_REL_TOL = float(os.getenv('EM_REL_TOL', 1e-4))
EM_MEMBERSHIP_PRIOR = float(os.getenv('EM_MEMBERSHIP_PRIOR', 0.5))

# Градиентный подъём (неатрибутированный M-шаг)
STEP_INITIAL = float(os.getenv('STEP_INITIAL', 0.05))
STEP_BACKTRACK = float(os.getenv('STEP_BACKTRACK', 0.5))
STEP_MAX_INNER = int(os.getenv('STEP_MAX_INNER', 20))
STEP_MAX_SWEEPS = int(os.getenv('STEP_MAX_SWEEPS', 50))

# Инициализация
INIT_SEGMENTS = int(os.getenv('INIT_SEGMENTS', 5))
INIT_KMEANS_RESTARTS = int(os.getenv('INIT_KMEANS_RESTARTS', 10))
INIT_FUZZIFIER = float(os.getenv('INIT_FUZZIFIER', 2.0))
INIT_TOLERANCE = float(os.getenv('INIT_TOLERANCE', 1e-6))

# Иерархическое разбиение
SELECTION_MAX_DEPTH = int(os.getenv('SELECTION_MAX_DEPTH', 3))
SELECTION_MIN_EVENTS = int(os.getenv('SELECTION_MIN_EVENTS', 50))

# Симуляционное исследование
STUDY_REPLICATES = int(os.getenv('STUDY_REPLICATES', 50))
STUDY_SIZES = os.getenv('STUDY_SIZES', '50,150')
STUDY_LEVELS = os.getenv('STUDY_LEVELS', 'large,medium,small')
STUDY_EDGES_PER_PAIR = os.getenv('STUDY_EDGES_PER_PAIR', '1,2,4,6')
STUDY_INCLUDE_NULL = os.getenv('STUDY_INCLUDE_NULL', 'true').lower() in ('1', 'true', 'yes')
