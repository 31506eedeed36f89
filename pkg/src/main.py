"""
Главный модуль (CLI стенда).

Подкоманды:
    run       - эксперимент по файлу конфигурации и флагам
    scenario  - трассы встроенного сценария KNORA-E / KNORA-B / KNORA-BI
    gen       - синтетические несбалансированные датасеты в KEEL или CSV
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import ConfigError, config, load_experiment_config
from .dataset import write_csv, write_keel
from .experiment import run_experiment
from .knora import write_traces
from .models import DataError
from .report import emit_report
from .scenario import describe_trace, scenario_predictions, scenario_traces
from .synthetic import synthetic_suite

logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL),
    format="%(asctime)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler(sys.stdout)]
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_DATA_ERROR = 2
EXIT_IO_ERROR = 3


def _split_list(value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [item.strip() for item in value.split(",") if item.strip()]


def cmd_run(args: argparse.Namespace) -> int:
    overrides = {
        "seed": args.seed,
        "k": args.k,
        "pool_size": args.pool_size,
        "techniques": _split_list(args.techniques),
        "output_dir": args.out,
        "workers": args.workers,
        "formats": _split_list(args.formats),
        "trace": True if args.trace else None,
    }
    cfg = load_experiment_config(args.config, overrides)
    if not cfg.datasets:
        raise ConfigError("Не задано ни одного датасета (DATASETS в файле конфигурации)")
    report = run_experiment(cfg)
    paths = emit_report(report, cfg.output_dir, cfg.formats)
    for summary in sorted(report.technique_summaries, key=lambda s: s.average_rank):
        print(f"{summary.technique}: AUC {summary.mean_auc:.4f} ({summary.std_auc:.4f}), rank {summary.average_rank:.2f}")
    print(f"Отчёт: {', '.join(str(p) for p in paths)}")
    return EXIT_OK


def cmd_scenario(args: argparse.Namespace) -> int:
    traces = scenario_traces()
    predictions = scenario_predictions()
    for name, trace in traces.items():
        print(f"{describe_trace(trace)}; предсказание: {predictions[name]}")
    if args.out:
        write_traces(traces.values(), args.out)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    datasets = synthetic_suite(
        count=args.count,
        ir_min=args.ir_min,
        ir_max=args.ir_max,
        n_samples=args.samples,
        overlap=args.overlap,
        n_features=args.features,
        seed=args.seed,
    )
    for dataset in datasets:
        if args.format == "keel":
            path = write_keel(dataset, args.out / f"{dataset.name}.dat")
        else:
            path = write_csv(dataset, args.out / f"{dataset.name}.csv")
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knorabench",
        description="Стенд динамического выбора ансамбля KNORA-U/DBU/E/B/BI",
        epilog="Коды выхода: 0 - успех, 1 - ошибка конфигурации, 2 - ошибка данных, 3 - ошибка записи результатов.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Запустить эксперимент")
    run.add_argument("config", type=Path, nargs="?", help="Файл конфигурации KEY=VALUE")
    run.add_argument("--seed", type=int)
    run.add_argument("--k", type=int, help="Размер region of competence")
    run.add_argument("--pool-size", type=int)
    run.add_argument("--techniques", type=str, help="Через запятую, префикс F - вариант с DFP")
    run.add_argument("--out", type=Path, help="Каталог отчёта")
    run.add_argument("--workers", type=int)
    run.add_argument("--formats", type=str, help="markdown,csv,json")
    run.add_argument("--trace", action="store_true", help="Записать трассы выбора (JSON lines)")
    run.set_defaults(handler=cmd_run)

    scenario = subparsers.add_parser("scenario", help="Трассы встроенного сценария")
    scenario.add_argument("--out", type=Path, help="Файл JSON lines для трасс")
    scenario.set_defaults(handler=cmd_scenario)

    gen = subparsers.add_parser("gen", help="Сгенерировать синтетические датасеты")
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--count", type=int, default=12)
    gen.add_argument("--ir-min", type=float, default=2.0)
    gen.add_argument("--ir-max", type=float, default=30.0)
    gen.add_argument("--samples", type=int, default=400)
    gen.add_argument("--overlap", type=float, default=1.0)
    gen.add_argument("--features", type=int, default=2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--format", choices=("keel", "csv"), default="keel")
    gen.set_defaults(handler=cmd_gen)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config.validate()
        return args.handler(args)
    except ConfigError as e:
        logger.error(f"Ошибка конфигурации: {e}")
        return EXIT_CONFIG_ERROR
    except DataError as e:
        logger.error(f"Ошибка данных: {e}")
        return EXIT_DATA_ERROR
    except OSError as e:
        logger.error(f"Ошибка записи: {e}")
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
