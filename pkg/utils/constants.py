"""Константы приложения"""

# Режимы данных
MODE_ATTRIBUTED = "attributed"
MODE_UNATTRIBUTED = "unattributed"
MODES = (MODE_ATTRIBUTED, MODE_UNATTRIBUTED)

# Формы экспозиционного члена правдоподобия
EXPOSURE_POISSON = "poisson"      # точное маргинальное правдоподобие прореженного процесса
EXPOSURE_BINOMIAL = "binomial"    # печатная форма (gamma - N) * log(1 - q)
EXPOSURES = (EXPOSURE_POISSON, EXPOSURE_BINOMIAL)

# Разбиение экспозиции gamma0/gamma1/gamma2 по парам вершин
GAMMA_PAIRS = "pairs"        # доли пар C(n-m,2), m(n-m), C(m,2) внутри окна
GAMMA_PRINTED = "printed"    # gamma0 = lam * (T - len * C(n-m,2) / C(n,2))
GAMMA_FORMS = (GAMMA_PAIRS, GAMMA_PRINTED)

# Решения выбора модели
DECISION_HOMOGENEOUS = "homogeneous"
DECISION_HETEROGENEOUS = "heterogeneous"

# Численные допуски
SIMPLEX_TOL = 1e-12              # допуск проверки симплекса
SIMPLEX_CEIL = 1.0 - 1e-6        # потолок суммы координат после проекции
POSITION_FLOOR = 1e-6            # пол координат внутри симплекса
MEAN_FLOOR = 1e-9                # пол компонент средних Дирихле в M-шаге
AUGMENT_MAX_ITERS = 50
DIRICHLET_MLE_MAX_ITERS = 200
DIRICHLET_MLE_TOL = 1e-8
DIRICHLET_ALPHA_BOUNDS = (1e-3, 1e6)
GRADIENT_CHECK_RTOL = 1e-4
FUZZY_MAX_ITERS = 300

# Правило фиксации lambda: в 1.5 раза больше максимума рёбер за единицу времени
LAMBDA_FACTOR = 1.5

# Горизонт при загрузке: T = max(t) * 1.0001
HORIZON_PAD = 1.0001

# Форматы файлов
SCHEMA_VERSION = "1.0"
CSV_COLUMNS = ["t", "u", "v"]
CSV_ATTR_COLUMN = "k"
MEMBERSHIP_COLUMNS = ["node", "vertex", "probability", "member"]
STUDY_COLUMNS = [
    "scenario", "n", "m", "lambda", "avg_edges_per_pair", "power",
    "sensitivity", "specificity", "cp_error", "replicates", "failures",
]
SILENT_LABEL = "__silent_{index}"

# Симуляционный протокол
SCENARIO_SIZES = (50, 150)
SCENARIO_M = 10
SCENARIO_T = 100.0
SCENARIO_WINDOW = (30.0, 70.0)
SCENARIO_EDGES_PER_PAIR = (1.0, 2.0, 4.0, 6.0)
SCENARIO_K = 2
# Приближения к графическим значениям: базовое распределение и три уровня разделения
SCENARIO_ALPHA0 = (2.0, 8.0, 2.0)
SCENARIO_ALPHA1 = {
    "large": (8.0, 2.0, 2.0),     # phi ~ 62 градуса
    "medium": (5.0, 5.0, 2.0),    # phi ~ 31 градус
    "small": (3.0, 7.0, 2.0),     # phi ~ 8.5 градуса
}

# Причины остановки иерархического разбиения
STOP_ROOT_HOMOGENEOUS = "root homogeneous"
STOP_HOMOGENEOUS = "homogeneous"
STOP_TOO_FEW_EVENTS = "too few events"
STOP_DEPTH = "depth limit"

# Флаги вырожденных ситуаций
FLAG_WINDOW_DEGENERATE = "estep_window: degenerate weights, window kept"
FLAG_MEMBERSHIP_EMPTY = "estep_membership: empty subset, best vertex kept"
FLAG_MEMBERSHIP_FULL = "estep_membership: full subset, worst vertex dropped"
FLAG_MEMBERSHIP_KEPT = "estep_membership: uninformative probabilities, subset kept"
FLAG_ALPHA1_SKIPPED = "mstep: zero subset-window exposure, alpha1 kept"
FLAG_CLOSED_FORM_REJECTED = "mstep: closed-form updates failed gradient check"
FLAG_START_FALLBACK = "best_start: no usable candidates, fallback start"

# Сообщения CLI
MSG_DONE = "Готово: {what}"
MSG_FAILED = "Ошибка: {error}"
MSG_SELF_LOOP = "строка {line}: петля {u}-{u} пропущена"
MSG_ATTR_IGNORED = "колонка k проигнорирована: режим unattributed"

# Файлы отчётов
DEFAULT_OUT_DIR = "out"
FILE_EVENTS = "events.csv"
FILE_TRUTH = "truth.json"
FILE_DETECT = "detect.json"
FILE_MEMBERSHIP = "membership.csv"
FILE_INGEST = "ingest.json"
FILE_FIT_HOM = "fit_hom.json"

# Ключи файла конфигурации запуска
CONFIG_PREFIXES = ("EM_", "STEP_", "INIT_", "SELECTION_", "STUDY_", "RUN_")
