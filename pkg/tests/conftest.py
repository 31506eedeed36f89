"""Общие фикстуры тестов."""

from pathlib import Path

import numpy as np
import pytest

from src.models import ClassifierPool, Dataset, LinearClassifier, OracleMatrix, RegionOfCompetence
from src.synthetic import make_imbalanced_blobs

DATA_DIR = Path(__file__).parent / "data"

POS = "pos"
NEG = "neg"


def dummy_pool(size: int, n_features: int = 2, positive: str = POS, negative: str = NEG) -> ClassifierPool:
    """Пул нужного размера; для селекторов важен только размер."""
    classifiers = tuple(
        LinearClassifier(weights=np.zeros(n_features), bias=1.0, positive_label=positive, negative_label=negative)
        for _ in range(size)
    )
    return ClassifierPool(classifiers=classifiers, bag_seeds=tuple(range(size)))


def make_region(indices, labels, query_id=None) -> RegionOfCompetence:
    indices = tuple(int(i) for i in indices)
    return RegionOfCompetence(
        indices=indices,
        distances=tuple(float(d) for d in range(len(indices))),
        labels=tuple(labels),
        query_id=query_id,
    )


def random_instance(rng: np.random.Generator, max_m: int = 10, max_v: int = 30, max_k: int = 7):
    """Случайный экземпляр (pool, oracle, region, minority) для дифференциальных тестов."""
    m = int(rng.integers(1, max_m + 1))
    v = int(rng.integers(1, max_v + 1))
    k = int(rng.integers(1, min(max_k, v) + 1))
    density = rng.uniform(0.05, 0.95)
    oracle = OracleMatrix(rng.random((m, v)) < density)
    validation_labels = np.where(rng.random(v) < rng.uniform(0.1, 0.9), POS, NEG)
    indices = rng.choice(v, size=k, replace=False)
    region = make_region(indices, [str(validation_labels[j]) for j in indices])
    minority = POS if rng.random() < 0.5 else NEG
    return dummy_pool(m), oracle, region, minority


@pytest.fixture
def glass_path() -> Path:
    return DATA_DIR / "glass1_head.dat"


@pytest.fixture
def blobs() -> Dataset:
    return make_imbalanced_blobs(n_samples=200, ir=4.0, overlap=1.0, seed=3)


@pytest.fixture
def toy_train() -> Dataset:
    """Линейно разделимая выборка из двух классов."""
    features = np.array([[0.0, 0.0], [0.1, 0.2], [0.2, 0.1], [1.0, 1.0], [0.9, 0.8], [0.8, 0.9], [1.0, 0.7]])
    labels = np.array([POS, POS, POS, NEG, NEG, NEG, NEG])
    return Dataset(features=features, labels=labels, name="toy")
