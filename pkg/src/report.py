"""
Вывод отчёта эксперимента: markdown-таблица, CSV сырых AUC,
CSV побед/ничьих/поражений и JSON со всеми метаданными.

Вывод детерминирован: одинаковый отчёт даёт одинаковые байты.
"""

import json
import logging
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from .config import REPORT_FORMATS, config
from .schemas import REPORT_FORMAT_VERSION, ExperimentReport, PairwiseRecord

logger = logging.getLogger(__name__)


def _pairwise_cell(report: ExperimentReport, reference: str, technique: str) -> str:
    if technique == reference:
        return "-"
    for record in report.pairwise:
        if record.reference == reference and record.technique == technique:
            return f"{record.wilcoxon_p:.4f} ({record.wilcoxon_sign})"
    return ""


def _row(cells: Sequence[str]) -> str:
    return "| " + " | ".join(cells) + " |"


def render_markdown(report: ExperimentReport) -> str:
    """Таблица техник (AUC, ранг, p-value и знак против эталонов) и сводки."""
    lines: List[str] = ["# Результаты динамического выбора ансамбля", ""]

    header = ["Technique", "AUC (std)", "Avg. rank"] + [f"p vs {r}" for r in report.reference_techniques]
    lines.append(_row(header))
    lines.append(_row(["---"] * len(header)))
    order = {t: i for i, t in enumerate(report.techniques)}
    summaries = sorted(report.technique_summaries, key=lambda s: (s.average_rank, order[s.technique]))
    for summary in summaries:
        cells = [
            summary.technique,
            f"{summary.mean_auc:.4f} ({summary.std_auc:.4f})",
            f"{summary.average_rank:.2f}",
        ] + [_pairwise_cell(report, reference, summary.technique) for reference in report.reference_techniques]
        lines.append(_row(cells))

    lines += ["", "## Датасеты", ""]
    lines.append(_row(["Dataset", "#Feats.", "#Samples", "IR", "Replications", "Skipped"]))
    lines.append(_row(["---"] * 6))
    for record in report.datasets:
        lines.append(_row([
            record.name,
            str(record.n_features),
            str(record.n_samples),
            f"{record.ir:.2f}",
            str(record.replications),
            str(record.skipped),
        ]))

    if report.pairwise:
        lines += ["", f"## Победы / ничьи / поражения (pairing: {report.pairing})", ""]
        lines.append(_row(["Reference", "Technique", "W/T/L", "n_c (0.10/0.05/0.01)"]))
        lines.append(_row(["---"] * 4))
        for record in report.pairwise:
            critical = "/".join(f"{record.critical_values[k]:.2f}" for k in sorted(record.critical_values, reverse=True))
            lines.append(_row([
                record.reference,
                record.technique,
                f"{record.wins}/{record.ties}/{record.losses}",
                critical,
            ]))

    lines += ["", "## Решения", ""]
    for key in sorted(report.decisions):
        lines.append(f"- {key}: {report.decisions[key]}")
    lines += ["", f"seed: {report.config.get('seed')}, версия: {report.package_version}", ""]
    return "\n".join(lines)


def runs_frame(report: ExperimentReport) -> pd.DataFrame:
    """Плоская таблица сырых AUC: dataset, technique, replication, auc."""
    return pd.DataFrame(
        [run.model_dump() for run in report.runs],
        columns=["dataset", "technique", "replication", "auc"],
    )


def _wtl_row(record: PairwiseRecord) -> dict:
    row = {
        "reference": record.reference,
        "technique": record.technique,
        "wins": record.wins,
        "ties": record.ties,
        "losses": record.losses,
        "n_exp": record.n_exp,
    }
    for level in sorted(record.critical_values, reverse=True):
        row[f"n_c_{level}"] = record.critical_values[level]
        row[f"reject_{level}"] = record.sign_test_reject.get(level, False)
    return row


def wtl_frame(report: ExperimentReport) -> pd.DataFrame:
    return pd.DataFrame([_wtl_row(record) for record in report.pairwise])


def emit_report(
    report: ExperimentReport,
    output_dir: Path,
    formats: Sequence[str] = REPORT_FORMATS,
) -> List[Path]:
    """
    Записывает отчёт в выбранных форматах.

    Args:
        report: Отчёт эксперимента
        output_dir: Каталог (создаётся при необходимости)
        formats: Подмножество ("markdown", "csv", "json")

    Returns:
        Пути записанных файлов

    Raises:
        ValueError: неизвестный формат
        OSError: каталог недоступен для записи
    """
    unknown = [f for f in formats if f not in REPORT_FORMATS]
    if unknown:
        raise ValueError(f"Неизвестные форматы отчёта: {', '.join(unknown)}")
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    markdown_path, csv_path, json_path = config.get_report_paths(output_dir)
    written: List[Path] = []

    if "markdown" in formats:
        markdown_path.write_text(render_markdown(report), encoding="utf-8")
        written.append(markdown_path)

    if "csv" in formats:
        runs_frame(report).to_csv(csv_path, index=False, lineterminator="\n")
        written.append(csv_path)
        if report.pairwise:
            wtl_path = output_dir / config.WTL_FILENAME
            wtl_frame(report).to_csv(wtl_path, index=False, lineterminator="\n")
            written.append(wtl_path)

    if "json" in formats:
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(report.model_dump(mode="json"), f, sort_keys=True, indent=2, ensure_ascii=False)
            f.write("\n")
        written.append(json_path)

    for path in written:
        logger.info(f"Отчёт записан: {path}")
    return written


def load_report(path: Path) -> ExperimentReport:
    """
    Читает JSON-отчёт обратно.

    Raises:
        FileNotFoundError: Если файл не найден
        ValueError: Неподдерживаемая версия формата
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Отчёт не найден: {path}")
    report = ExperimentReport.model_validate_json(path.read_text(encoding="utf-8"))
    if report.format_version != REPORT_FORMAT_VERSION:
        raise ValueError(
            f"Неподдерживаемая версия формата отчёта: {report.format_version} (ожидается {REPORT_FORMAT_VERSION})"
        )
    return report
