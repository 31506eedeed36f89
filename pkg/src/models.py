"""
Модели данных.
"""
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

# Метка класса: всегда строка, сравнение точное
ClassLabel = str


class DataError(ValueError):
    """Ошибка входных данных: файл, датасет или разбиение (CLI возвращает код 2)."""


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Матрица признаков N x F и вектор меток длины N.

    Используется и как "представление" (подмножество строк): Dataset.subset
    не требует двух классов, бинарность проверяют загрузчики (check_binary).
    """
    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        features = _frozen_array(self.features, np.float64)
        if features.ndim == 1:
            features = _frozen_array(features.reshape(-1, 1), np.float64)
        labels = _frozen_array([str(v) for v in np.asarray(self.labels).ravel()], str)
        if features.ndim != 2 or features.shape[1] < 1:
            raise DataError(f"Ожидается матрица N x F с F >= 1, получено {features.shape}")
        if features.shape[0] != labels.shape[0]:
            raise DataError(
                f"dimension mismatch: {features.shape[0]} строк признаков и {labels.shape[0]} меток"
            )
        if not np.all(np.isfinite(features)):
            raise DataError(f"non-finite feature в датасете {self.name}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def classes(self) -> List[ClassLabel]:
        return sorted(set(self.labels.tolist()))

    def class_counts(self) -> Dict[ClassLabel, int]:
        values, counts = np.unique(self.labels, return_counts=True)
        return {str(v): int(c) for v, c in zip(values, counts)}

    def check_binary(self) -> None:
        """Проверяет инварианты полного датасета: N >= 2 и ровно два класса."""
        if self.n_samples < 2:
            raise DataError(f"Датасет {self.name}: нужно хотя бы 2 строки, получено {self.n_samples}")
        if len(self.classes) != 2:
            raise DataError(
                f"Датасет {self.name}: non-binary метки, найдено классов {len(self.classes)}: "
                f"{self.classes}"
            )

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            name=self.name,
            metadata=dict(self.metadata),
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features=features, labels=self.labels, name=self.name, metadata=dict(self.metadata))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.features.shape == other.features.shape
            and bool(np.array_equal(self.features, other.features))
            and bool(np.array_equal(self.labels, other.labels))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ImbalanceSummary:
    """Сводка дисбаланса (столбцы #Samples и IR таблицы датасетов)."""
    ir: float
    minority: ClassLabel
    majority: ClassLabel
    counts: Dict[ClassLabel, int]


@dataclass(frozen=True, eq=False)
class Replication:
    """Одна репликация протокола: индексы train / validation / test."""
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    outer_fold: int = 0
    inner_fold: int = 0

    def __post_init__(self):
        for name in ("train", "validation", "test"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), np.int64))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Replication):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("train", "validation", "test")
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class FoldPlan:
    replications: Tuple[Replication, ...]
    seed: int = 0

    def __len__(self) -> int:
        return len(self.replications)


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """
    Линейный классификатор: positive_label iff w·x + b >= 0.
    Граница (ровно 0) относится к positive_label.
    """
    weights: np.ndarray
    bias: float
    positive_label: ClassLabel
    negative_label: ClassLabel

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen_array(self.weights, np.float64))
        object.__setattr__(self, "bias", float(self.bias))
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValueError("Параметры классификатора должны быть конечными")

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.weights.shape[0]:
            raise DataError(
                f"dimension mismatch: классификатор ждёт {self.weights.shape[0]} признаков, "
                f"получено {features.shape[1]}"
            )
        return features @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return np.where(
            self.decision_function(features) >= 0.0, self.positive_label, self.negative_label
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearClassifier):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and self.bias == other.bias
            and self.positive_label == other.positive_label
            and self.negative_label == other.negative_label
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class ClassifierPool:
    """Упорядоченный пул C; индексы выбора ссылаются на этот порядок."""
    classifiers: Tuple[LinearClassifier, ...]
    bag_seeds: Tuple[int, ...]
    degenerate: Tuple[bool, ...] = ()
    epochs: int = 0
    learning_rate: float = 0.0

    def __post_init__(self):
        if len(self.classifiers) < 1:
            raise ValueError("Пул должен содержать хотя бы один классификатор")
        if len(self.bag_seeds) != len(self.classifiers):
            raise ValueError("bag_seeds не совпадает с размером пула")
        if not self.degenerate:
            object.__setattr__(self, "degenerate", tuple(False for _ in self.classifiers))
        first = self.classifiers[0]
        for clf in self.classifiers:
            if (clf.positive_label, clf.negative_label) != (first.positive_label, first.negative_label):
                raise ValueError("Все классификаторы пула должны иметь одинаковые метки")
        # Сложенные параметры для предсказаний одним матричным произведением
        object.__setattr__(
            self, "_weights", _frozen_array([c.weights for c in self.classifiers], np.float64)
        )
        object.__setattr__(
            self, "_biases", _frozen_array([c.bias for c in self.classifiers], np.float64)
        )

    def __len__(self) -> int:
        return len(self.classifiers)

    @property
    def positive_label(self) -> ClassLabel:
        return self.classifiers[0].positive_label

    @property
    def negative_label(self) -> ClassLabel:
        return self.classifiers[0].negative_label

    @property
    def n_features(self) -> int:
        return int(self._weights.shape[1])  # type: ignore[attr-defined]

    def decision_matrix(self, features: np.ndarray) -> np.ndarray:
        """Сырые оценки M x T."""
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.n_features:
            raise DataError(
                f"dimension mismatch: пул ждёт {self.n_features} признаков, получено {features.shape[1]}"
            )
        return self._weights @ features.T + self._biases[:, None]  # type: ignore[attr-defined]

    def predict_matrix(self, features: np.ndarray) -> np.ndarray:
        """Предсказания M x T."""
        return np.where(
            self.decision_matrix(features) >= 0.0, self.positive_label, self.negative_label
        )

    def subset(self, indices: Sequence[int]) -> "ClassifierPool":
        idx = [int(i) for i in indices]
        return ClassifierPool(
            classifiers=tuple(self.classifiers[i] for i in idx),
            bag_seeds=tuple(self.bag_seeds[i] for i in idx),
            degenerate=tuple(self.degenerate[i] for i in idx),
            epochs=self.epochs,
            learning_rate=self.learning_rate,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassifierPool):
            return NotImplemented
        return self.classifiers == other.classifiers and self.bag_seeds == other.bag_seeds

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class OracleMatrix:
    """correct[i, j] = классификатор i верно классифицирует validation-образец j."""
    correct: np.ndarray

    def __post_init__(self):
        correct = _frozen_array(self.correct, bool)
        if correct.ndim != 2:
            raise ValueError(f"OracleMatrix должна быть M x V, получено {correct.shape}")
        object.__setattr__(self, "correct", correct)

    @property
    def pool_size(self) -> int:
        return int(self.correct.shape[0])

    @property
    def validation_size(self) -> int:
        return int(self.correct.shape[1])

    def restrict(self, rows: Sequence[int]) -> "OracleMatrix":
        return OracleMatrix(self.correct[np.asarray(rows, dtype=np.int64)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, OracleMatrix):
            return NotImplemented
        return bool(np.array_equal(self.correct, other.correct))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class RegionOfCompetence:
    """
    Ψ: индексы validation-образцов, от ближайшего к дальнему.
    labels - снимок меток соседей, чтобы сокращать регион без validation set.
    Пустой регион - штатный сигнал перехода к fallback.
    """
    indices: Tuple[int, ...]
    distances: Tuple[float, ...]
    labels: Tuple[ClassLabel, ...]
    query_id: Optional[str] = None

    def __post_init__(self):
        if not (len(self.indices) == len(self.distances) == len(self.labels)):
            raise ValueError("indices, distances и labels региона должны быть одной длины")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("Индексы региона должны быть уникальны")
        if any(b < a for a, b in zip(self.distances, self.distances[1:])):
            raise ValueError("Расстояния региона должны быть неубывающими")

    @classmethod
    def empty(cls, query_id: Optional[str] = None) -> "RegionOfCompetence":
        return cls(indices=(), distances=(), labels=(), query_id=query_id)

    @property
    def size(self) -> int:
        return len(self.indices)

    def is_empty(self) -> bool:
        return not self.indices

    @property
    def class_set(self) -> FrozenSet[ClassLabel]:
        return frozenset(self.labels)

    def without(self, position: int) -> "RegionOfCompetence":
        """Регион без соседа на позиции position (0 - ближайший)."""
        keep = [i for i in range(self.size) if i != position]
        return RegionOfCompetence(
            indices=tuple(self.indices[i] for i in keep),
            distances=tuple(self.distances[i] for i in keep),
            labels=tuple(self.labels[i] for i in keep),
            query_id=self.query_id,
        )


@dataclass(frozen=True)
class RegionClassProfile:
    class_set: FrozenSet[ClassLabel]
    counts: Dict[ClassLabel, int]


@dataclass(frozen=True)
class SelectedEnsemble:
    """EoC: пары (индекс классификатора, вес голоса)."""
    members: Tuple[Tuple[int, int], ...]

    @property
    def indices(self) -> List[int]:
        return [i for i, _ in self.members]

    @property
    def weights(self) -> List[int]:
        return [w for _, w in self.members]

    def is_empty(self) -> bool:
        return not self.members

    @classmethod
    def uniform(cls, indices: Sequence[int]) -> "SelectedEnsemble":
        return cls(members=tuple((int(i), 1) for i in indices))


@dataclass(frozen=True)
class TraceIteration:
    """Шаг выбора: регион на входе шага, сколько выбрано, кого удалили."""
    region: Tuple[int, ...]
    classes: Tuple[ClassLabel, ...]
    selected: int
    removed: Optional[int] = None
    stage: str = "main"


@dataclass
class SelectionTrace:
    """Накопитель трассы выбора."""
    technique: str
    iterations: List[TraceIteration] = field(default_factory=list)
    fallback_used: bool = False
    query_id: Optional[str] = None
    selected: Tuple[int, ...] = ()

    def record(self, iteration: TraceIteration) -> None:
        self.iterations.append(iteration)

    def removed_sequence(self, stage: str = "main") -> List[int]:
        return [it.removed for it in self.iterations if it.stage == stage and it.removed is not None]

    def to_records(self) -> List[Dict]:
        records = []
        for number, it in enumerate(self.iterations, start=1):
            records.append({
                "technique": self.technique,
                "query_id": self.query_id,
                "iteration": number,
                "stage": it.stage,
                "region": list(it.region),
                "remaining_classes": sorted(set(it.classes)),
                "selected_count": it.selected,
                "removed": it.removed,
                "fallback_used": self.fallback_used,
                "selected": list(self.selected),
            })
        return records

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in self.to_records())


class Sign(Enum):
    BETTER = "+"
    EQUAL = "="
    WORSE = "-"

    def flipped(self) -> "Sign":
        if self is Sign.BETTER:
            return Sign.WORSE
        if self is Sign.WORSE:
            return Sign.BETTER
        return Sign.EQUAL


@dataclass(frozen=True, eq=False)
class ScoredPredictions:
    scores: np.ndarray
    truth: np.ndarray
    positive: ClassLabel

    def __post_init__(self):
        object.__setattr__(self, "scores", _frozen_array(self.scores, np.float64))
        object.__setattr__(self, "truth", _frozen_array([str(v) for v in np.asarray(self.truth).ravel()], str))
        if self.scores.ndim != 1 or self.scores.shape != self.truth.shape:
            raise ValueError("scores и truth должны быть векторами одной длины")
        if self.scores.size < 1:
            raise ValueError("Нужен хотя бы один образец")


@dataclass(frozen=True)
class PairwiseVerdict:
    p_value: float
    sign: Sign
    alpha: float
    statistic: float = 0.0
    method: str = ""


@dataclass(frozen=True)
class WinTieLoss:
    wins: int
    ties: int
    losses: int

    @property
    def n_exp(self) -> int:
        return self.wins + self.ties + self.losses

    @property
    def score(self) -> float:
        """Победы плюс половина ничьих."""
        return self.wins + self.ties / 2.0
