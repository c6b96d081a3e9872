"""Команды CLI: коды завершения, файлы отчётов, воспроизводимость"""
import json
import logging

import pandas as pd
import pytest

from handlers import build_run_config
from main import build_parser, main
from utils.constants import FILE_DETECT, FILE_EVENTS, FILE_FIT_HOM, FILE_MEMBERSHIP, FILE_TRUTH
from utils.exceptions import EXIT_CONFIG, EXIT_DATA, EXIT_OK
from utils.logger import set_console_level, setup_logger

FAST = "\n".join([
    "EM_NUM_CANDIDATES=100",
    "EM_MAX_ITERS=3",
    "INIT_SEGMENTS=3",
    "INIT_KMEANS_RESTARTS=2",
    "SELECTION_MAX_DEPTH=0",
    "STUDY_SIZES=20",
    "STUDY_LEVELS=large",
    "STUDY_EDGES_PER_PAIR=4",
    "STUDY_INCLUDE_NULL=false",
    "STUDY_REPLICATES=1",
    "UNRELATED_SETTING=ignored",
    "",
])


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "run.env"
    path.write_text(FAST, encoding='utf-8')
    return str(path)


@pytest.fixture
def simulated(tmp_path):
    out = tmp_path / "sim"
    code = main(['simulate', '--seed', '3', '--n', '20', '--edges-per-pair', '2',
                 '--mode', 'attributed', '--out', str(out)])
    assert code == EXIT_OK
    return out


def test_simulate_is_reproducible(simulated):
    first = {name: (simulated / name).read_bytes() for name in (FILE_EVENTS, FILE_TRUTH)}
    assert main(['simulate', '--seed', '3', '--n', '20', '--edges-per-pair', '2',
                 '--mode', 'attributed', '--out', str(simulated)]) == EXIT_OK
    for name, content in first.items():
        assert (simulated / name).read_bytes() == content
    truth = json.loads((simulated / FILE_TRUTH).read_text(encoding='utf-8'))
    assert truth['seed'] == 3
    assert truth['config']['seed'] == 3 and truth['config']['mode'] == 'attributed'
    assert truth['config']['em']['num_candidates'] > 0
    assert truth['scenario']['window'] == {'tau1': 30.0, 'tau2': 70.0}
    assert len(truth['scenario']['members']) == 10


def test_ingest_check_prints_summary(simulated, capsys):
    events = pd.read_csv(simulated / FILE_EVENTS)
    code = main(['ingest-check', '--input', str(simulated / FILE_EVENTS),
                 '--mode', 'attributed', '-K', '2'])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)['summary']
    assert summary['N'] == len(events)
    assert sum(summary['attribute_counts']) == len(events)


def test_fit_hom_writes_report(simulated, tmp_path):
    out = tmp_path / "hom"
    code = main(['fit-hom', '--input', str(simulated / FILE_EVENTS), '--mode', 'attributed',
                 '--out', str(out)])
    assert code == EXIT_OK
    fit = json.loads((out / FILE_FIT_HOM).read_text(encoding='utf-8'))['fit']
    assert len(fit['alpha']) == 3 and fit['lambda'] > 0


def test_detect_is_reproducible(simulated, fast_config, tmp_path):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main(['detect', '--input', str(simulated / FILE_EVENTS), '--mode', 'attributed',
                     '--config', fast_config, '--seed', '9', '--out', str(out)])
        assert code == EXIT_OK
        outputs.append(out)
    reports = [json.loads((out / FILE_DETECT).read_text(encoding='utf-8')) for out in outputs]
    for report in reports:
        report.pop('config')
    assert reports[0] == reports[1]
    assert reports[0]['selection']['decision'] in ("homogeneous", "heterogeneous")
    assert (outputs[0] / FILE_MEMBERSHIP).read_bytes() == (outputs[1] / FILE_MEMBERSHIP).read_bytes()


def test_detect_threads_do_not_change_report(simulated, fast_config, tmp_path):
    reports = []
    for threads in ("1", "3"):
        out = tmp_path / f"threads{threads}"
        assert main(['detect', '--input', str(simulated / FILE_EVENTS), '--mode', 'attributed',
                     '--config', fast_config, '--seed', '9', '--threads', threads,
                     '--out', str(out)]) == EXIT_OK
        report = json.loads((out / FILE_DETECT).read_text(encoding='utf-8'))
        assert report.pop('config')['threads'] == int(threads)
        reports.append(report)
    assert reports[0] == reports[1]


def test_study_writes_table(fast_config, tmp_path):
    out = tmp_path / "study"
    assert main(['study', '--mode', 'attributed', '--config', fast_config, '--out', str(out)]) == EXIT_OK
    table = pd.read_csv(out / "study.csv")
    assert table['scenario'].tolist() == ["large_n20"]
    assert table['replicates'].tolist() == [1]
    assert json.loads((out / "study.json").read_text(encoding='utf-8'))['rows'][0]['phi'] > 0


def test_flags_override_config_file(fast_config):
    args = build_parser().parse_args(['study', '--config', fast_config, '--replicates', '4'])
    config = build_run_config(args)
    assert config.replicates == 4
    assert config.em.num_candidates == 100
    assert config.study.sizes == (20,)


def test_verbose_lowers_console_level(simulated):
    logger = setup_logger("services.em_fitter")
    try:
        assert main(['ingest-check', '-v', '--input', str(simulated / FILE_EVENTS)]) == EXIT_OK
        assert logger.handlers[0].level == logging.DEBUG
        assert logger.isEnabledFor(logging.DEBUG)
    finally:
        set_console_level(logging.INFO)
        logger.setLevel(logging.INFO)


class TestExitCodes:

    def test_unknown_config_key(self, tmp_path, simulated):
        path = tmp_path / "bad.env"
        path.write_text("EM_UNKNOWN=1\n", encoding='utf-8')
        assert main(['ingest-check', '--input', str(simulated / FILE_EVENTS),
                     '--config', str(path)]) == EXIT_CONFIG

    def test_bad_config_value(self, tmp_path, simulated):
        path = tmp_path / "bad.env"
        path.write_text("EM_XI=often\n", encoding='utf-8')
        assert main(['ingest-check', '--input', str(simulated / FILE_EVENTS),
                     '--config', str(path)]) == EXIT_CONFIG

    def test_missing_input(self):
        assert main(['detect']) == EXIT_CONFIG

    def test_nonexistent_input(self, tmp_path):
        assert main(['ingest-check', '--input', str(tmp_path / "nope.csv")]) == EXIT_DATA

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,u,v\n1,a,b\nx,b,c\n", encoding='utf-8')
        assert main(['ingest-check', '--input', str(path)]) == EXIT_DATA

    @pytest.mark.parametrize("argv", [[], ['detect', '--seed', 'x'], ['unknown-command']])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as error:
            main(argv)
        assert error.value.code == EXIT_CONFIG
