"""
Загрузка датасетов (KEEL .dat, CSV), нормализация и вложенное
стратифицированное разбиение протокола 5 x 4.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn import preprocessing
from sklearn.model_selection import StratifiedKFold

from .models import DataError, Dataset, FoldPlan, ImbalanceSummary, Replication

logger = logging.getLogger(__name__)

# @attribute Name real [0.0, 1.0] | @attribute Class {positive, negative}
_ATTRIBUTE_RE = re.compile(r"^@attribute\s+('[^']*'|[^\s{]+)\s*(.*)$", re.IGNORECASE)
_NUMERIC_TYPES = ("real", "integer", "numeric")


@dataclass(frozen=True)
class KeelAttribute:
    name: str
    numeric: bool
    values: Tuple[str, ...] = ()


def _parse_float_cells(cells: np.ndarray, source: str) -> np.ndarray:
    """Строки -> float64. Общий путь для KEEL и CSV, чтобы значения совпадали бит в бит."""
    try:
        return np.char.strip(np.asarray(cells, dtype=str)).astype(np.float64)
    except ValueError as e:
        raise DataError(f"{source}: non-numeric значение признака ({e})") from e


def _parse_attribute(line: str, path: Path) -> KeelAttribute:
    match = _ATTRIBUTE_RE.match(line)
    if not match:
        raise DataError(f"{path}: malformed header, не разобрана строка '{line}'")
    name = match.group(1).strip("'")
    spec = match.group(2).strip()
    if spec.startswith("{"):
        if not spec.endswith("}"):
            raise DataError(f"{path}: malformed header, незакрытый список значений у {name}")
        values = tuple(v.strip() for v in spec[1:-1].split(",") if v.strip())
        return KeelAttribute(name=name, numeric=False, values=values)
    type_name = spec.split("[")[0].strip().lower()
    if type_name not in _NUMERIC_TYPES:
        raise DataError(f"{path}: malformed header, неизвестный тип атрибута {name}: '{spec}'")
    return KeelAttribute(name=name, numeric=True)


def _split_names(value: str) -> List[str]:
    return [v.strip().strip("'") for v in value.split(",") if v.strip()]


def load_keel(path: Path) -> Dataset:
    """
    Загружает датасет в формате KEEL (.dat).

    Ключевые слова заголовка регистронезависимы, строки с '%' игнорируются.
    Без @inputs/@outputs входами считаются все атрибуты, кроме последнего.

    Args:
        path: Путь к файлу .dat

    Returns:
        Бинарный Dataset; заголовок сохраняется в metadata

    Raises:
        FileNotFoundError: Если файл не найден
        DataError: malformed header, non-binary, non-numeric, empty data section
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Файл датасета не найден: {path}")

    logger.info(f"Загрузка KEEL датасета из {path}")

    relation = path.stem
    attributes: List[KeelAttribute] = []
    inputs: Optional[List[str]] = None
    outputs: Optional[List[str]] = None
    rows: List[List[str]] = []
    in_data = False

    with open(path, "r", encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if in_data:
                rows.append([cell.strip() for cell in line.split(",")])
                continue
            keyword = line.split(None, 1)[0].lower()
            rest = line[len(keyword):].strip()
            if keyword == "@relation":
                relation = rest.strip("'") or relation
            elif keyword.startswith("@attribute"):
                attributes.append(_parse_attribute(line, path))
            elif keyword in ("@inputs", "@input"):
                inputs = _split_names(rest)
            elif keyword in ("@outputs", "@output"):
                outputs = _split_names(rest)
            elif keyword == "@data":
                in_data = True
            else:
                raise DataError(f"{path}: malformed header, неожиданная строка '{line}'")

    if not in_data:
        raise DataError(f"{path}: malformed header, нет секции @data")
    if not attributes:
        raise DataError(f"{path}: malformed header, нет ни одного @attribute")
    if not rows:
        raise DataError(f"{path}: empty data section")

    by_name: Dict[str, int] = {a.name: i for i, a in enumerate(attributes)}
    if outputs is None:
        outputs = [attributes[-1].name]
    if inputs is None:
        inputs = [a.name for a in attributes if a.name not in outputs]
    if len(outputs) != 1:
        raise DataError(f"{path}: malformed header, ожидается один выходной атрибут, получено {outputs}")
    for name in inputs + outputs:
        if name not in by_name:
            raise DataError(f"{path}: malformed header, атрибут '{name}' не объявлен")

    for name in inputs:
        if not attributes[by_name[name]].numeric:
            raise DataError(f"{path}: non-numeric входной атрибут '{name}' (категориальные входы не поддерживаются)")

    width = len(attributes)
    for number, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(
                f"{path}: строка данных {number} содержит {len(row)} значений вместо {width}"
            )

    table = np.asarray(rows, dtype=str)
    features = _parse_float_cells(table[:, [by_name[n] for n in inputs]], str(path))
    labels = table[:, by_name[outputs[0]]]

    dataset = Dataset(
        features=features,
        labels=labels,
        name=path.stem,
        metadata={"relation": relation, "format": "keel", "source": str(path)},
    )
    dataset.check_binary()

    logger.info(
        f"Загружено: {dataset.name}, N={dataset.n_samples}, F={dataset.n_features}, "
        f"IR={imbalance_summary(dataset).ir:.2f}"
    )
    return dataset


def load_csv(path: Path, label_column: Union[str, int, None] = None) -> Dataset:
    """
    Загружает датасет из CSV с заголовком (RFC-4180, десятичная точка).

    Args:
        path: Путь к CSV
        label_column: Имя или индекс столбца меток (по умолчанию последний)

    Returns:
        Бинарный Dataset

    Raises:
        FileNotFoundError: Если файл не найден
        DataError: missing column, non-numeric / non-finite feature, non-binary
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Файл датасета не найден: {path}")

    logger.info(f"Загрузка CSV датасета из {path}")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"{path}: ошибка разбора CSV: {e}") from e

    if frame.shape[0] == 0:
        raise DataError(f"{path}: empty data section")

    columns = [str(c) for c in frame.columns]
    if label_column is None:
        label_name = columns[-1]
    elif str(label_column) in columns:
        label_name = str(label_column)
    elif isinstance(label_column, int) or str(label_column).lstrip("-").isdigit():
        position = int(label_column)
        if not -len(columns) <= position < len(columns):
            raise DataError(f"{path}: missing column с индексом {position}")
        label_name = columns[position]
    else:
        raise DataError(f"{path}: missing column '{label_column}'")

    feature_names = [c for c in columns if c != label_name]
    if not feature_names:
        raise DataError(f"{path}: нет столбцов признаков")

    features = _parse_float_cells(frame[feature_names].to_numpy(dtype=str), str(path))
    labels = frame[label_name].str.strip().to_numpy(dtype=str)

    dataset = Dataset(
        features=features,
        labels=labels,
        name=path.stem,
        metadata={"format": "csv", "source": str(path), "label_column": label_name},
    )
    dataset.check_binary()
    logger.info(f"Загружено: {dataset.name}, N={dataset.n_samples}, F={dataset.n_features}")
    return dataset


def load_dataset(path: Path, label_column: Union[str, int, None] = None) -> Dataset:
    """Выбирает загрузчик по расширению (.dat -> KEEL, иначе CSV)."""
    path = Path(path)
    if path.suffix.lower() == ".dat":
        return load_keel(path)
    return load_csv(path, label_column)


def _format_value(value: float) -> str:
    return repr(float(value))


def write_keel(dataset: Dataset, path: Path, output_name: str = "Class") -> Path:
    """Записывает Dataset в формате KEEL; load_keel вернёт равный датасет."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    input_names = [f"x{i + 1}" for i in range(dataset.n_features)]
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"@relation {dataset.name}\n")
        for j, name in enumerate(input_names):
            column = dataset.features[:, j]
            f.write(f"@attribute {name} real [{_format_value(column.min())}, {_format_value(column.max())}]\n")
        f.write(f"@attribute {output_name} {{{', '.join(dataset.classes)}}}\n")
        f.write(f"@inputs {', '.join(input_names)}\n")
        f.write(f"@outputs {output_name}\n")
        f.write("@data\n")
        for row, label in zip(dataset.features, dataset.labels):
            f.write(", ".join(_format_value(v) for v in row) + f", {label}\n")
    logger.info(f"KEEL файл записан: {path}")
    return path


def write_csv(dataset: Dataset, path: Path, label_column: str = "class") -> Path:
    """Записывает Dataset в CSV (метки - последний столбец)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {f"x{j + 1}": [_format_value(v) for v in dataset.features[:, j]] for j in range(dataset.n_features)}
    )
    frame[label_column] = dataset.labels
    frame.to_csv(path, index=False)
    logger.info(f"CSV файл записан: {path}")
    return path


def imbalance_summary(dataset: Dataset) -> ImbalanceSummary:
    """
    IR = max(count) / min(count); миноритарный класс - с минимальным числом
    образцов, при равенстве - лексикографически меньшая метка.
    """
    counts = dataset.class_counts()
    if not counts:
        raise DataError(f"Датасет {dataset.name} пуст")
    ordered = sorted(counts.items(), key=lambda item: (item[1], item[0]))
    minority = ordered[0][0]
    majority = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[0][0]
    if len(counts) == 1:
        majority = minority
    ir = max(counts.values()) / min(counts.values())
    return ImbalanceSummary(ir=float(ir), minority=minority, majority=majority, counts=counts)


@dataclass(frozen=True, eq=False)
class MinMaxScaler:
    """Min-max отображение, подобранное на обучающей части (sklearn MinMaxScaler без обрезки)."""
    scaler: preprocessing.MinMaxScaler

    @classmethod
    def fit(cls, features: np.ndarray) -> "MinMaxScaler":
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        return cls(scaler=preprocessing.MinMaxScaler(feature_range=(0.0, 1.0), clip=False).fit(features))

    @property
    def n_features(self) -> int:
        return int(self.scaler.n_features_in_)

    @property
    def constant(self) -> np.ndarray:
        return self.scaler.data_range_ == 0.0

    def transform(self, features: np.ndarray) -> np.ndarray:
        # Без обрезки: validation/test могут выйти за [0, 1]
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.n_features:
            raise DataError(
                f"dimension mismatch: scaler обучен на {self.n_features} признаках, получено {features.shape[1]}"
            )
        out = self.scaler.transform(features)
        # Постоянный на train столбец -> 0 для любых данных
        out[:, self.constant] = 0.0
        return out


def minmax_normalize(dataset: Dataset, scaler: Optional[MinMaxScaler] = None) -> Dataset:
    """
    Аффинно переводит каждый признак в [0, 1]; постоянные столбцы -> 0.

    Args:
        dataset: Датасет (или его часть)
        scaler: Параметры, подобранные на train; если None - подбираются на dataset

    Returns:
        Новый Dataset с нормализованными признаками
    """
    scaler = scaler or MinMaxScaler.fit(dataset.features)
    return dataset.with_features(scaler.transform(dataset.features))


def _random_state(seed: int) -> int:
    return int(seed) % (2**32)


def stratified_nested_split(
    dataset: Dataset,
    outer_k: int = 5,
    inner_k: int = 4,
    seed: int = 0,
) -> FoldPlan:
    """
    Вложенная стратифицированная кросс-валидация: внешний outer_k-fold
    (1 фолд - test), внутри него inner_k-fold по оставшимся образцам
    (1 фолд - validation, остальные - train). 5 x 4 = 20 репликаций 60/20/20.

    Raises:
        DataError: insufficient minority samples, если у класса меньше outer_k образцов
    """
    counts = dataset.class_counts()
    for label, count in sorted(counts.items()):
        if count < outer_k:
            raise DataError(
                f"Датасет {dataset.name}: insufficient minority samples - класс '{label}' "
                f"содержит {count} образцов при outer_k={outer_k}"
            )
        # Во внутреннем цикле у класса остаётся не меньше count - ceil(count / outer_k)
        if count - -(-count // outer_k) < inner_k:
            raise DataError(
                f"Датасет {dataset.name}: insufficient minority samples - класс '{label}' "
                f"слишком мал для inner_k={inner_k}"
            )

    labels = dataset.labels
    placeholder = np.zeros(dataset.n_samples)
    outer = StratifiedKFold(n_splits=outer_k, shuffle=True, random_state=_random_state(seed))

    replications: List[Replication] = []
    for outer_fold, (rest, test) in enumerate(outer.split(placeholder, labels)):
        inner = StratifiedKFold(
            n_splits=inner_k, shuffle=True, random_state=_random_state(seed + 1 + outer_fold)
        )
        for inner_fold, (train_pos, val_pos) in enumerate(inner.split(rest, labels[rest])):
            replications.append(
                Replication(
                    train=np.sort(rest[train_pos]),
                    validation=np.sort(rest[val_pos]),
                    test=np.sort(test),
                    outer_fold=outer_fold,
                    inner_fold=inner_fold,
                )
            )

    logger.debug(f"{dataset.name}: построено {len(replications)} репликаций (seed={seed})")
    return FoldPlan(replications=tuple(replications), seed=seed)


def split_parts(dataset: Dataset, replication: Replication) -> Tuple[Dataset, Dataset, Dataset]:
    """Train / validation / test представления одной репликации."""
    return (
        dataset.subset(replication.train),
        dataset.subset(replication.validation),
        dataset.subset(replication.test),
    )

