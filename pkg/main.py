"""
Точка входа: детектор аномальных подгрупп в динамических сетях

Команды:
- ingest-check: проверка входного CSV потока рёбер
- detect: иерархический поиск окон изменения и аномальных подмножеств
- simulate: генерация синтетического потока с файлом истинных параметров
- study: симуляционное исследование мощности и точности
- fit-hom: подгонка однородной модели (отладка)
"""
import argparse
import logging
import sys
from typing import List, Optional

from handlers import COMMANDS, execute
from utils.constants import MODES, SCENARIO_ALPHA1
from utils.exceptions import EXIT_CONFIG
from utils.logger import set_console_level, setup_logger

logger = setup_logger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """Ошибки использования завершаются кодом 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: ошибка: {message}\n")


def _common_options(parser: argparse.ArgumentParser):
    parser.add_argument('--seed', type=int, help='Сид генератора случайных чисел')
    parser.add_argument('--config', help='Файл конфигурации запуска (формат dotenv)')
    parser.add_argument('--out', help='Каталог отчётов')
    parser.add_argument('--threads', type=int, help='Число процессов')
    parser.add_argument('-v', '--verbose', action='store_true', help='Отладочный вывод в консоль')
    parser.add_argument('--mode', choices=MODES, help='Режим данных')
    parser.add_argument('-K', '--K', dest='K', type=int, help='Число атрибутов / размерность')
    parser.add_argument('--time-unit', dest='time_unit', type=float,
                        help='Единица времени для фиксации lambda (по умолчанию T/100)')


def _input_options(parser: argparse.ArgumentParser):
    parser.add_argument('--input', help='CSV с заголовком t,u,v[,k]')
    parser.add_argument('--horizon', type=float, help='Горизонт T (по умолчанию max t * 1.0001)')
    parser.add_argument('--n-vertices', dest='n_vertices', type=int,
                        help='Число вершин с учётом молчащих')


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(prog='detector', description=__doc__,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
    commands = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    for name in ('ingest-check', 'detect', 'fit-hom'):
        command = commands.add_parser(name)
        _common_options(command)
        _input_options(command)

    simulate = commands.add_parser('simulate')
    _common_options(simulate)
    simulate.add_argument('--level', default='large', choices=[*SCENARIO_ALPHA1, 'null'],
                          help='Уровень разделения alpha1')
    simulate.add_argument('--n', type=int, default=50, help='Число вершин')
    simulate.add_argument('--edges-per-pair', dest='edges_per_pair', type=float, default=2.0,
                          help='Среднее число рёбер на пару вне окна')

    study = commands.add_parser('study')
    _common_options(study)
    study.add_argument('--replicates', type=int, help='Реплик на точку сетки')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Разбор аргументов и запуск команды"""
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_console_level(logging.DEBUG)
    logger.debug(f"Команда {args.command}")
    return execute(COMMANDS[args.command], args)


if __name__ == '__main__':
    sys.exit(main())
