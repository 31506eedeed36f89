"""
Синтетические несбалансированные датасеты (гауссовы облака) для стенда:
приёмочный набор не требует внешних загрузок.
"""

import logging
from typing import List

import numpy as np
from sklearn.datasets import make_blobs

from .models import Dataset

logger = logging.getLogger(__name__)

MAJORITY_LABEL = "negative"
MINORITY_LABEL = "positive"


def make_imbalanced_blobs(
    n_samples: int = 400,
    ir: float = 9.0,
    overlap: float = 1.0,
    n_features: int = 2,
    seed: int = 0,
    name: str = "",
) -> Dataset:
    """
    Два гауссовых облака с заданным IR.

    Центры лежат на расстоянии 2 по первой оси, overlap - это cluster_std:
    чем больше, тем сильнее пересекаются классы.

    Args:
        n_samples: Общее число образцов
        ir: Отношение majority / minority (>= 1)
        overlap: Стандартное отклонение облаков
        n_features: Размерность
        seed: Seed генератора
        name: Имя датасета (по умолчанию строится из параметров)
    """
    if ir < 1.0:
        raise ValueError(f"ir должен быть >= 1, получено {ir}")
    if n_features < 1:
        raise ValueError("n_features должен быть >= 1")
    n_minority = max(1, int(round(n_samples / (1.0 + ir))))
    n_majority = n_samples - n_minority
    if n_majority < 1:
        raise ValueError(f"n_samples={n_samples} слишком мал для ir={ir}")

    centers = np.zeros((2, n_features))
    centers[1, 0] = 2.0
    features, y = make_blobs(
        n_samples=[n_majority, n_minority],
        n_features=n_features,
        centers=centers,
        cluster_std=overlap,
        random_state=seed,
    )
    labels = np.where(y == 1, MINORITY_LABEL, MAJORITY_LABEL)
    name = name or f"blobs_ir{ir:g}_d{n_features}_s{seed}"
    logger.debug(f"Сгенерирован {name}: {n_majority}/{n_minority}")
    return Dataset(
        features=features,
        labels=labels,
        name=name,
        metadata={"format": "synthetic", "ir": f"{ir:g}", "overlap": f"{overlap:g}", "seed": str(seed)},
    )


def synthetic_suite(
    count: int = 12,
    ir_min: float = 2.0,
    ir_max: float = 30.0,
    n_samples: int = 400,
    overlap: float = 1.0,
    n_features: int = 2,
    seed: int = 0,
) -> List[Dataset]:
    """Набор из count датасетов с IR, равномерно распределённым по [ir_min, ir_max]."""
    irs = np.linspace(ir_min, ir_max, count) if count > 1 else np.array([ir_min])
    return [
        make_imbalanced_blobs(
            n_samples=n_samples,
            ir=float(round(ir, 2)),
            overlap=overlap,
            n_features=n_features,
            seed=seed * 1000 + i,
            name=f"synthetic{i + 1:02d}_ir{ir:.1f}_s{seed}",
        )
        for i, ir in enumerate(irs)
    ]
