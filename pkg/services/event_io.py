"""Сервис ввода-вывода: загрузка CSV потока рёбер, запись потоков, отчётов и таблиц"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import sys

sys.path.insert(0, str(Path(__file__).parent.parent))
from models.network import EventLog
from models.results import SelectionReport, StudyMetrics
from models.settings import RunConfig, ScenarioConfig
from services.sim_study import study_table
from utils.constants import (
    CSV_ATTR_COLUMN, CSV_COLUMNS, HORIZON_PAD, MEMBERSHIP_COLUMNS, MODE_ATTRIBUTED,
    MSG_ATTR_IGNORED, MSG_SELF_LOOP, SCHEMA_VERSION, SILENT_LABEL,
)
from utils.exceptions import DataError, InvalidInputError
from utils.logger import setup_logger
from utils.validators import parse_attribute, parse_time

logger = setup_logger(__name__)

PathLike = Union[str, Path]


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise DataError(f"Файл не найден: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Не удалось прочитать CSV {path}: {e}")
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"Нет колонок {missing}; ожидается заголовок t,u,v[,k]", line=1)
    return frame


def ingest(path: PathLike, config: RunConfig) -> EventLog:
    """
    Загрузка потока рёбер из CSV с заголовком t,u,v[,k]

    Метки вершин нумеруются 0..n-1 в порядке первого появления; петли
    пропускаются с предупреждением; T = max(t) * 1.0001, если горизонт не задан.

    Args:
        path: Путь к CSV
        config: Конфигурация запуска (режим, K, горизонт, число вершин)

    Returns:
        EventLog

    Raises:
        DataError: Некорректная строка (с номером строки) или файл
    """
    path = Path(path)
    frame = _read_frame(path)
    attributed = config.mode == MODE_ATTRIBUTED
    has_attr = CSV_ATTR_COLUMN in frame.columns
    if attributed and not has_attr:
        raise DataError("Режим attributed требует колонку k", line=1)
    if has_attr and not attributed:
        logger.warning(MSG_ATTR_IGNORED)

    index: Dict[str, int] = {}
    times: List[float] = []
    pairs: List[tuple] = []
    attrs: List[int] = []
    for row_number, row in enumerate(frame.to_dict('records')):
        line = row_number + 2
        ok, t = parse_time(row['t'])
        if not ok:
            raise DataError(f"некорректное время '{row['t']}'", line=line)
        u, v = row['u'].strip(), row['v'].strip()
        if not u or not v:
            raise DataError("пустая метка вершины", line=line)
        if u == v:
            logger.warning(MSG_SELF_LOOP.format(line=line, u=u))
            continue
        if attributed:
            ok, k = parse_attribute(row[CSV_ATTR_COLUMN], config.K)
            if not ok:
                raise DataError(f"атрибут '{row[CSV_ATTR_COLUMN]}' вне 1..{config.K}", line=line)
            attrs.append(k)
        times.append(t)
        pairs.append((index.setdefault(u, len(index)), index.setdefault(v, len(index))))

    labels = list(index)
    if config.n_vertices is not None:
        if config.n_vertices < len(labels):
            raise DataError(f"n_vertices={config.n_vertices} меньше числа меток {len(labels)}")
        labels += [SILENT_LABEL.format(index=i) for i in range(len(labels), config.n_vertices)]
    if len(labels) < 2:
        raise DataError(f"Нужно минимум 2 вершины, найдено {len(labels)}")

    times_arr = np.asarray(times, dtype=float)
    if config.horizon is not None:
        T = float(config.horizon)
        if times_arr.size and times_arr.max() >= T:
            raise DataError(f"Событие t={times_arr.max()} вне горизонта T={T}")
    elif times_arr.size and times_arr.max() > 0:
        T = float(times_arr.max() * HORIZON_PAD)
    else:
        raise DataError("Горизонт не определяется по данным: задайте RUN_HORIZON")

    order = np.argsort(times_arr, kind='stable')
    pair_arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    try:
        log = EventLog(
            times=times_arr[order], u=pair_arr[order, 0], v=pair_arr[order, 1],
            n=len(labels), T=T, K=config.K, mode=config.mode,
            attrs=np.asarray(attrs, dtype=np.int64)[order] if attributed else None,
            labels=tuple(labels),
        )
    except InvalidInputError as e:
        raise DataError(str(e))
    logger.info(f"Загружено {log.N} рёбер, n={log.n}, T={log.T:.4f} из {path.name}")
    return log


def events_frame(log: EventLog) -> pd.DataFrame:
    """Поток рёбер как таблица t,u,v[,k] с метками вершин"""
    labels = np.asarray(log.labels, dtype=object)
    data = {'t': log.times, 'u': labels[log.u], 'v': labels[log.v]}
    if log.attributed:
        data[CSV_ATTR_COLUMN] = log.attrs
    return pd.DataFrame(data)


def _jsonable(value: Any) -> Any:
    """numpy-типы и не-конечные числа -> JSON (NaN/inf -> null)"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    return value


class ReportWriter:
    """Запись отчётов в каталог: JSON с версией схемы, CSV без индекса"""

    def __init__(self, out_dir: PathLike):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / name
        document = {'schema_version': SCHEMA_VERSION, **payload}
        path.write_text(json.dumps(_jsonable(document), sort_keys=True, indent=2,
                                   ensure_ascii=False) + "\n", encoding='utf-8')
        logger.debug(f"Записан {path}")
        return path

    def frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.out_dir / name
        frame.to_csv(path, index=False, lineterminator='\n')
        logger.debug(f"Записан {path}")
        return path

    def events(self, name: str, log: EventLog) -> Path:
        return self.frame(name, events_frame(log))

    def truth(self, name: str, scenario: ScenarioConfig, log: EventLog,
              config: Optional[RunConfig] = None) -> Path:
        """Файл истинных параметров сценария (окно, подмножество) для оценки"""
        payload = scenario.to_dict()
        payload['members'] = [log.labels[i] for i in scenario.subset.sorted_members()]
        document = {'scenario': payload}
        if config is not None:
            document.update(config=config.to_dict(), seed=config.seed)
        return self.json(name, document)


def membership_frame(report: SelectionReport, log: EventLog) -> pd.DataFrame:
    """Вероятности членства вершин для каждого принятого разбиения"""
    rows = []
    for partition in report.partitions:
        mask = partition.model.subset.mask
        for vertex, probability in enumerate(partition.membership):
            rows.append({
                'node': partition.node_id,
                'vertex': log.labels[vertex],
                'probability': float(probability),
                'member': bool(mask[vertex]),
            })
    return pd.DataFrame(rows, columns=MEMBERSHIP_COLUMNS)


def detection_payload(report: SelectionReport, log: EventLog, config: RunConfig) -> dict:
    return {
        'config': config.to_dict(),
        'seed': config.seed,
        'data': {'N': log.N, 'n': log.n, 'T': log.T, 'K': log.K, 'mode': log.mode},
        'selection': report.to_dict(log.labels),
    }


def study_payload(metrics: Sequence[StudyMetrics], config: RunConfig,
                  scenarios: Optional[Sequence[ScenarioConfig]] = None) -> dict:
    rows = [dict(m.to_row(), phi=m.phi) for m in metrics]
    payload = {'config': config.to_dict(), 'seed': config.seed, 'rows': rows}
    if scenarios is not None:
        payload['scenarios'] = [s.to_dict() for s in scenarios]
    return payload


def write_study(writer: ReportWriter, metrics: Sequence[StudyMetrics], config: RunConfig,
                scenarios: Optional[Sequence[ScenarioConfig]] = None) -> List[Path]:
    return [
        writer.frame('study.csv', study_table(metrics)),
        writer.json('study.json', study_payload(metrics, config, scenarios)),
    ]
