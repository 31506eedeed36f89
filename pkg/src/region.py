"""
Region of competence: K ближайших соседей в validation set и
процедуры сокращения региона KNORA-B и KNORA-BI.
"""

import logging
from collections import Counter
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .models import ClassLabel, DataError, Dataset, RegionClassProfile, RegionOfCompetence

logger = logging.getLogger(__name__)


def knn_regions(
    queries: np.ndarray,
    validation: Dataset,
    k: int,
    query_ids: Optional[Sequence[str]] = None,
) -> List[RegionOfCompetence]:
    """
    Регионы для пачки запросов (одна матрица расстояний).

    Евклидово расстояние; при равных расстояниях выигрывает меньший индекс
    validation set (устойчивая сортировка).

    Raises:
        ValueError: k < 1 или k > V
        DataError: dimension mismatch
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if k < 1:
        raise ValueError(f"k должен быть >= 1, получено {k}")
    if k > validation.n_samples:
        raise ValueError(f"k={k} больше размера validation set ({validation.n_samples})")
    if queries.shape[1] != validation.n_features:
        raise DataError(
            f"dimension mismatch: запрос с {queries.shape[1]} признаками, "
            f"validation set с {validation.n_features}"
        )

    distances = cdist(queries, validation.features, metric="euclidean")
    nearest = np.argsort(distances, axis=1, kind="stable")[:, :k]
    labels = validation.labels

    regions = []
    for row, order in enumerate(nearest):
        regions.append(
            RegionOfCompetence(
                indices=tuple(int(i) for i in order),
                distances=tuple(float(d) for d in distances[row, order]),
                labels=tuple(str(label) for label in labels[order]),
                query_id=query_ids[row] if query_ids is not None else None,
            )
        )
    return regions


def knn_region(
    query: np.ndarray,
    validation: Dataset,
    k: int,
    query_id: Optional[str] = None,
) -> RegionOfCompetence:
    """Ψ <- K ближайших соседей x_query в D_SEL, от ближайшего к дальнему."""
    query = np.asarray(query, dtype=np.float64).reshape(1, -1)
    return knn_regions(query, validation, k, None if query_id is None else [query_id])[0]


def _check_against_validation(region: RegionOfCompetence, validation: Optional[Dataset]) -> None:
    if validation is None or region.is_empty():
        return
    if max(region.indices) >= validation.n_samples:
        raise ValueError("Индекс региона вне validation set")
    expected = tuple(str(v) for v in validation.labels[list(region.indices)])
    if expected != region.labels:
        raise ValueError("Метки региона не совпадают с validation set")


def region_class_profile(region: RegionOfCompetence) -> RegionClassProfile:
    counts = Counter(region.labels)
    return RegionClassProfile(class_set=frozenset(counts), counts=dict(counts))


def is_indecision_region(region: RegionOfCompetence, validation: Optional[Dataset] = None) -> bool:
    """Регион неопределённости: среди соседей не меньше двух классов."""
    if region.is_empty():
        raise ValueError("Регион пуст")
    _check_against_validation(region, validation)
    return len(region.class_set) >= 2


def remove_furthest(region: RegionOfCompetence) -> RegionOfCompetence:
    """Сокращение KNORA-E: убрать самого дальнего соседа независимо от класса."""
    if region.is_empty():
        return region
    return region.without(region.size - 1)


def _reduce(region: RegionOfCompetence, removable) -> RegionOfCompetence:
    # b идёт от S (самый дальний) к 1 (ближайший); Ψ_b - позиция b - 1
    counts = Counter(region.labels)
    for b in range(region.size, 0, -1):
        label = region.labels[b - 1]
        # Set(classes(Ψ / Ψ_b)) = Set(classes(Ψ)) <=> класс Ψ_b встречается ещё раз
        if removable(label, counts[label] > 1):
            logger.debug(f"Регион {region.query_id}: удалён сосед b={b} (индекс {region.indices[b - 1]})")
            return region.without(b - 1)
    # Ни одного допустимого удаления: Ψ <- ∅, сигнал для fallback
    return RegionOfCompetence.empty(region.query_id)


def reduce_region_b(
    query: Optional[np.ndarray],
    region: RegionOfCompetence,
    validation: Optional[Dataset] = None,
) -> RegionOfCompetence:
    """
    KNORA-B: удаляет самого дальнего соседа, без которого набор классов
    региона не меняется. Если такого нет, возвращает пустой регион.
    Результат всегда размера S - 1 или 0.
    """
    _check_against_validation(region, validation)
    return _reduce(region, lambda label, keeps_classes: keeps_classes)


def reduce_region_bi(
    query: Optional[np.ndarray],
    region: RegionOfCompetence,
    validation: Optional[Dataset],
    minority: ClassLabel,
) -> RegionOfCompetence:
    """
    KNORA-BI: удаляет самого дальнего соседа, который не из миноритарного
    класса или без которого набор классов не меняется. Защищён только
    последний представитель миноритарного класса.
    """
    _check_against_validation(region, validation)
    return _reduce(region, lambda label, keeps_classes: label != minority or keeps_classes)
