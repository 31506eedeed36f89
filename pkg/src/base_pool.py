"""
Пул базовых классификаторов: bagging из персептронов и oracle-матрица
правильности пула на validation set.
"""

import json
import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from .models import (
    ClassifierPool,
    ClassLabel,
    DataError,
    Dataset,
    LinearClassifier,
    OracleMatrix,
)
from .schemas import POOL_FORMAT_VERSION, PoolClassifierRecord, PoolDocument

logger = logging.getLogger(__name__)


def _resolve_labels(
    train: Dataset,
    positive_label: Optional[ClassLabel],
    negative_label: Optional[ClassLabel],
) -> Tuple[ClassLabel, ClassLabel]:
    """Положительный класс по умолчанию - миноритарный класс train."""
    if positive_label is not None and negative_label is not None:
        return positive_label, negative_label
    # Локальный импорт, чтобы не тянуть загрузчики при импорте пула
    from .dataset import imbalance_summary

    classes = train.classes
    if len(classes) != 2:
        raise ValueError(
            "Для обучающей выборки с одним классом метки positive/negative нужно передать явно"
        )
    summary = imbalance_summary(train)
    positive = positive_label or summary.minority
    negative = negative_label or next(c for c in classes if c != positive)
    return positive, negative


def _fit_perceptron_batch(
    features: np.ndarray,
    targets: np.ndarray,
    rngs: Sequence[np.random.Generator],
    epochs: int,
    learning_rate: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Классический персептрон сразу для M независимых выборок.

    features: M x n x F, targets: M x n (значения -1/+1), rngs: генератор на модель,
    из него на каждой эпохе берётся перестановка образцов.
    Шаг t эпохи e у всех M моделей независим, поэтому строки обновляются
    векторно; результат для каждой строки совпадает с последовательным обучением.
    Правило: ошибка, если предсказание (score >= 0 -> +1) не равно цели,
    тогда w <- w + lr*y*x, b <- b + lr*y. Веса стартуют с нуля.
    """
    n_models, n_samples, n_features = features.shape
    weights = np.zeros((n_models, n_features))
    biases = np.zeros(n_models)
    rows = np.arange(n_models)

    for _ in range(epochs):
        order = np.stack([rng.permutation(n_samples) for rng in rngs])
        any_mistake = False
        for t in range(n_samples):
            position = order[:, t]
            x = features[rows, position]
            y = targets[rows, position]
            scores = (weights * x).sum(axis=1) + biases
            wrong = np.where(scores >= 0.0, 1.0, -1.0) != y
            if wrong.any():
                any_mistake = True
                step = learning_rate * y * wrong
                weights += step[:, None] * x
                biases += step
        if not any_mistake:
            # Эпоха без ошибок: дальше веса не меняются
            break

    return weights, biases


def _constant_classifier(label: ClassLabel, n_features: int, positive: ClassLabel, negative: ClassLabel) -> LinearClassifier:
    return LinearClassifier(
        weights=np.zeros(n_features),
        bias=1.0 if label == positive else -1.0,
        positive_label=positive,
        negative_label=negative,
    )


def train_perceptron(
    train: Dataset,
    epochs: int = 100,
    learning_rate: float = 0.1,
    seed: int = 0,
    positive_label: Optional[ClassLabel] = None,
    negative_label: Optional[ClassLabel] = None,
) -> LinearClassifier:
    """
    Обучает один персептрон.

    Порядок образцов перемешивается на каждой эпохе генератором от seed.
    Выборка из одного класса даёт постоянный классификатор этого класса.

    Args:
        train: Обучающая выборка (не пустая)
        epochs: Число эпох
        learning_rate: Шаг обучения
        seed: Seed перемешивания
        positive_label, negative_label: Метки (по умолчанию minority / majority)
    """
    if train.n_samples == 0:
        raise DataError("empty training set")
    positive, negative = _resolve_labels(train, positive_label, negative_label)
    present = set(train.labels.tolist())
    if len(present) == 1:
        return _constant_classifier(present.pop(), train.n_features, positive, negative)

    targets = np.where(train.labels == positive, 1.0, -1.0)
    weights, biases = _fit_perceptron_batch(
        train.features[None, :, :], targets[None, :], [np.random.default_rng(seed)], epochs, learning_rate
    )
    return LinearClassifier(
        weights=weights[0], bias=biases[0], positive_label=positive, negative_label=negative
    )


def bootstrap_indices(n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Bootstrap-выборка размера n_samples с возвращением."""
    return rng.integers(0, n_samples, size=n_samples)


def bagging_pool(
    train: Dataset,
    pool_size: int = 100,
    epochs: int = 100,
    learning_rate: float = 0.1,
    seed: int = 0,
    positive_label: Optional[ClassLabel] = None,
    negative_label: Optional[ClassLabel] = None,
) -> ClassifierPool:
    """
    Bagging-пул из pool_size персептронов.

    Классификатор i обучается на bootstrap-выборке размера |train|, его генератор
    инициализируется seed + i (сначала выборка, затем порядки эпох).
    Однородные bootstrap-выборки дают постоянные классификаторы (без пересэмплирования).

    Raises:
        DataError: empty training set
        ValueError: pool_size < 1
    """
    if train.n_samples == 0:
        raise DataError("empty training set")
    if pool_size < 1:
        raise ValueError(f"pool_size должен быть >= 1, получено {pool_size}")
    positive, negative = _resolve_labels(train, positive_label, negative_label)

    n = train.n_samples
    bags = np.empty((pool_size, n), dtype=np.int64)
    seeds = tuple(seed + i for i in range(pool_size))
    rngs = [np.random.default_rng(bag_seed) for bag_seed in seeds]
    for i, rng in enumerate(rngs):
        bags[i] = bootstrap_indices(n, rng)

    bag_labels = train.labels[bags]
    targets = np.where(bag_labels == positive, 1.0, -1.0)
    weights, biases = _fit_perceptron_batch(train.features[bags], targets, rngs, epochs, learning_rate)

    classifiers = []
    degenerate = []
    for i in range(pool_size):
        present = set(bag_labels[i].tolist())
        if len(present) == 1:
            classifiers.append(_constant_classifier(present.pop(), train.n_features, positive, negative))
            degenerate.append(True)
        else:
            classifiers.append(
                LinearClassifier(
                    weights=weights[i], bias=biases[i], positive_label=positive, negative_label=negative
                )
            )
            degenerate.append(False)

    if any(degenerate):
        logger.warning(
            f"{train.name}: {sum(degenerate)} bootstrap-выборок из одного класса, "
            f"использованы постоянные классификаторы"
        )
    logger.debug(f"{train.name}: пул из {pool_size} персептронов обучен (seed={seed})")

    return ClassifierPool(
        classifiers=tuple(classifiers),
        bag_seeds=seeds,
        degenerate=tuple(degenerate),
        epochs=epochs,
        learning_rate=learning_rate,
    )


def build_oracle_matrix(pool: ClassifierPool, validation: Dataset) -> OracleMatrix:
    """
    correct[i, j] = предсказание классификатора i на x_j совпадает с меткой j.

    Raises:
        ValueError: пустой validation set
        DataError: dimension mismatch
    """
    if validation.n_samples == 0:
        raise ValueError("Validation set пуст")
    predictions = pool.predict_matrix(validation.features)
    return OracleMatrix(predictions == validation.labels[None, :])


def pool_to_document(pool: ClassifierPool) -> PoolDocument:
    return PoolDocument(
        format_version=POOL_FORMAT_VERSION,
        positive_label=pool.positive_label,
        negative_label=pool.negative_label,
        epochs=pool.epochs,
        learning_rate=pool.learning_rate,
        classifiers=[
            PoolClassifierRecord(
                weights=[float(w) for w in clf.weights],
                bias=float(clf.bias),
                seed=int(seed),
                degenerate=bool(flag),
            )
            for clf, seed, flag in zip(pool.classifiers, pool.bag_seeds, pool.degenerate)
        ],
    )


def save_pool(pool: ClassifierPool, path: Path) -> Path:
    """Сохраняет пул в версионированный JSON (кэш стенда)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = pool_to_document(pool)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document.model_dump(mode="json"), f, sort_keys=True, indent=2)
        f.write("\n")
    logger.info(f"Пул сохранён: {path}")
    return path


def load_pool(path: Path) -> ClassifierPool:
    """
    Загружает пул из JSON.

    Raises:
        FileNotFoundError: Если файл не найден
        ValueError: Неподдерживаемая версия формата или невалидный документ
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Файл пула не найден: {path}")
    document = PoolDocument.model_validate_json(path.read_text(encoding="utf-8"))
    if document.format_version != POOL_FORMAT_VERSION:
        raise ValueError(
            f"Неподдерживаемая версия формата пула: {document.format_version} "
            f"(ожидается {POOL_FORMAT_VERSION})"
        )
    return ClassifierPool(
        classifiers=tuple(
            LinearClassifier(
                weights=np.asarray(record.weights),
                bias=record.bias,
                positive_label=document.positive_label,
                negative_label=document.negative_label,
            )
            for record in document.classifiers
        ),
        bag_seeds=tuple(record.seed for record in document.classifiers),
        degenerate=tuple(record.degenerate for record in document.classifiers),
        epochs=document.epochs,
        learning_rate=document.learning_rate,
    )
