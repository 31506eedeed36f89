"""
Конфигурация приложения.
"""

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

# Загружаем переменные окружения из .env
load_dotenv()


class ConfigError(ValueError):
    """Ошибка конфигурации эксперимента (CLI возвращает код 1)."""


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


class Config:
    """Центральная конфигурация приложения."""

    # Логирование
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # ===== Region of competence и пул =====
    # K = 7 и 100 персептронов по умолчанию
    KNORA_K: int = int(os.getenv("KNORA_K", "7"))
    POOL_SIZE: int = int(os.getenv("POOL_SIZE", "100"))
    # Гиперпараметры персептрона
    PERCEPTRON_EPOCHS: int = int(os.getenv("PERCEPTRON_EPOCHS", "100"))
    LEARNING_RATE: float = float(os.getenv("LEARNING_RATE", "0.1"))

    # ===== Протокол (5 x 4 stratified CV = 20 репликаций) =====
    MASTER_SEED: int = int(os.getenv("MASTER_SEED", "0"))
    OUTER_FOLDS: int = int(os.getenv("OUTER_FOLDS", "5"))
    INNER_FOLDS: int = int(os.getenv("INNER_FOLDS", "4"))
    ALPHA: float = float(os.getenv("ALPHA", "0.05"))

    # Параллельные репликации
    WORKERS: int = int(os.getenv("WORKERS", "4"))

    # Пути
    OUTPUT_DIR: Path = Path(os.getenv("OUTPUT_DIR", "./results"))

    # Трассировка выбора (JSON lines) в каталоге отчёта
    TRACE_SELECTION: bool = _env_bool("TRACE_SELECTION", "false")

    # До какого n Wilcoxon считается по точному распределению
    EXACT_WILCOXON_MAX_N: int = int(os.getenv("EXACT_WILCOXON_MAX_N", "15"))

    # Порог пропускной способности выбора (выборов в секунду)
    MIN_SELECTIONS_PER_SECOND: float = float(os.getenv("MIN_SELECTIONS_PER_SECOND", "10000"))

    # Имена файлов отчёта
    MARKDOWN_FILENAME: str = "report.md"
    CSV_FILENAME: str = "aucs.csv"
    JSON_FILENAME: str = "report.json"
    WTL_FILENAME: str = "wins_ties_losses.csv"
    TRACE_FILENAME: str = "selection_trace.jsonl"

    @classmethod
    def validate(cls) -> None:
        """Проверяет параметры конфигурации."""
        if cls.KNORA_K < 1:
            raise ConfigError(f"KNORA_K должен быть >= 1, получено {cls.KNORA_K}")
        if cls.POOL_SIZE < 1:
            raise ConfigError(f"POOL_SIZE должен быть >= 1, получено {cls.POOL_SIZE}")
        if cls.PERCEPTRON_EPOCHS < 1:
            raise ConfigError("PERCEPTRON_EPOCHS должен быть >= 1")
        if not 0.0 < cls.ALPHA < 0.5:
            raise ConfigError(f"ALPHA должен лежать в (0, 0.5), получено {cls.ALPHA}")
        if cls.WORKERS < 1:
            raise ConfigError("WORKERS должен быть >= 1")

    @classmethod
    def get_report_paths(cls, output_dir: Path) -> Tuple[Path, Path, Path]:
        """
        Получить пути к report.md, aucs.csv и report.json.

        Args:
            output_dir: Каталог отчёта

        Returns:
            Кортеж (markdown, csv, json)
        """
        return (
            output_dir / cls.MARKDOWN_FILENAME,
            output_dir / cls.CSV_FILENAME,
            output_dir / cls.JSON_FILENAME,
        )


# Глобальный экземпляр конфигурации
config = Config()


DEFAULT_TECHNIQUES: Tuple[str, ...] = ("KNORA-U", "KNORA-E", "KNORA-B", "KNORA-BI")
REPORT_FORMATS: Tuple[str, ...] = ("markdown", "csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:
    """Параметры одного запуска стенда."""

    datasets: List[Path] = field(default_factory=list)
    techniques: List[str] = field(default_factory=lambda: list(DEFAULT_TECHNIQUES))
    k: int = config.KNORA_K
    pool_size: int = config.POOL_SIZE
    epochs: int = config.PERCEPTRON_EPOCHS
    learning_rate: float = config.LEARNING_RATE
    seed: int = config.MASTER_SEED
    outer_folds: int = config.OUTER_FOLDS
    inner_folds: int = config.INNER_FOLDS
    alpha: float = config.ALPHA
    workers: int = config.WORKERS
    output_dir: Path = config.OUTPUT_DIR
    label_column: Optional[str] = None
    formats: List[str] = field(default_factory=lambda: list(REPORT_FORMATS))
    trace: bool = config.TRACE_SELECTION

    def validate(self) -> None:
        """Проверяет инварианты конфигурации, бросает ConfigError."""
        # Локальный импорт: реестр техник живёт в knora
        from .knora import is_known_technique

        if self.k < 1:
            raise ConfigError(f"k должен быть >= 1, получено {self.k}")
        if self.pool_size < 1:
            raise ConfigError(f"pool_size должен быть >= 1, получено {self.pool_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs должен быть >= 1, получено {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate должен быть > 0")
        if self.outer_folds < 2 or self.inner_folds < 2:
            raise ConfigError("outer_folds и inner_folds должны быть >= 2")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError(f"alpha должен лежать в (0, 0.5), получено {self.alpha}")
        if self.workers < 1:
            raise ConfigError("workers должен быть >= 1")
        if not self.techniques:
            raise ConfigError("Не задано ни одной техники")
        unknown = [t for t in self.techniques if not is_known_technique(t)]
        if unknown:
            raise ConfigError(f"Неизвестные техники: {', '.join(unknown)}")
        if len(set(self.techniques)) != len(self.techniques):
            raise ConfigError("Техники в списке повторяются")
        bad_formats = [f for f in self.formats if f not in REPORT_FORMATS]
        if bad_formats:
            raise ConfigError(f"Неизвестные форматы отчёта: {', '.join(bad_formats)}")

    def echo(self) -> Dict[str, Any]:
        """Словарь для отчёта (config echo)."""
        return {
            "datasets": [str(p) for p in self.datasets],
            "techniques": list(self.techniques),
            "k": self.k,
            "pool_size": self.pool_size,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "outer_folds": self.outer_folds,
            "inner_folds": self.inner_folds,
            "alpha": self.alpha,
            "label_column": self.label_column,
        }


def _split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


# Ключ файла -> (поле ExperimentConfig, конвертер)
_FILE_KEYS: Dict[str, Tuple[str, Any]] = {
    "DATASETS": ("datasets", lambda v: [Path(p) for p in _split_list(v)]),
    "TECHNIQUES": ("techniques", _split_list),
    "K": ("k", int),
    "POOL_SIZE": ("pool_size", int),
    "EPOCHS": ("epochs", int),
    "LEARNING_RATE": ("learning_rate", float),
    "SEED": ("seed", int),
    "OUTER_FOLDS": ("outer_folds", int),
    "INNER_FOLDS": ("inner_folds", int),
    "ALPHA": ("alpha", float),
    "WORKERS": ("workers", int),
    "OUTPUT_DIR": ("output_dir", Path),
    "LABEL_COLUMN": ("label_column", str),
    "FORMATS": ("formats", _split_list),
    "TRACE": ("trace", lambda v: v.strip().lower() == "true"),
}


def load_experiment_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Собирает ExperimentConfig: значения Config <- файл KEY=VALUE <- флаги CLI.

    Формат файла тот же, что у .env (комментарии через '#', кавычки опциональны).
    Относительные пути датасетов разрешаются от каталога файла.

    Args:
        path: Путь к файлу конфигурации (может отсутствовать)
        overrides: Значения из флагов CLI (None пропускаются)

    Returns:
        Проверенный ExperimentConfig

    Raises:
        ConfigError: Неизвестный ключ, неверное значение или нарушены инварианты
    """
    cfg = ExperimentConfig()
    values: Dict[str, Any] = {}

    if path is not None:
        if not path.exists():
            raise ConfigError(f"Файл конфигурации не найден: {path}")
        raw = dotenv_values(path)
        for key, value in raw.items():
            name = key.strip().upper()
            if name not in _FILE_KEYS:
                raise ConfigError(f"Неизвестный ключ конфигурации: {key}")
            if value is None:
                raise ConfigError(f"Ключ без значения: {key}")
            field_name, convert = _FILE_KEYS[name]
            try:
                values[field_name] = convert(value)
            except ValueError as e:
                raise ConfigError(f"Неверное значение {key}={value!r}: {e}") from e
        if "datasets" in values:
            values["datasets"] = [
                p if p.is_absolute() else (path.parent / p) for p in values["datasets"]
            ]

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        cfg = replace(cfg, **values)
    except TypeError as e:
        raise ConfigError(f"Неверный параметр конфигурации: {e}") from e
    cfg.validate()
    return cfg
