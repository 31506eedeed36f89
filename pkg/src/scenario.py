"""
Встроенный сценарий расхождения KNORA-E и KNORA-B в регионе неопределённости.

Запрос класса "circle" в точке (0, 0), пять соседей A..E от ближайшего
к дальнему. c1 - линейный классификатор, граница которого проходит через
регион: верен только на A и C и верно классифицирует запрос. c2 - постоянный
классификатор класса "square".

KNORA-E удаляет E, D, затем C и выбирает c2 (запрос классифицирован неверно).
KNORA-B удаляет E, D, затем B (C - последний "circle") и выбирает c1.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .base_pool import build_oracle_matrix
from .knora import combine_votes, select_knora_b, select_knora_bi, select_knora_e
from .models import (
    ClassifierPool,
    Dataset,
    LinearClassifier,
    OracleMatrix,
    RegionOfCompetence,
    SelectedEnsemble,
    SelectionTrace,
)
from .region import knn_region

logger = logging.getLogger(__name__)

CIRCLE = "circle"
SQUARE = "square"
NEIGHBOR_NAMES = ("A", "B", "C", "D", "E")
CLASSIFIER_NAMES = ("c1", "c2")
SCENARIO_QUERY_ID = "scenario"


@dataclass(frozen=True)
class ScenarioFixture:
    query: np.ndarray
    query_label: str
    validation: Dataset
    pool: ClassifierPool
    oracle: OracleMatrix
    region: RegionOfCompetence


def scenario_fixture() -> ScenarioFixture:
    """Двумерный экземпляр: validation set из A..E, пул (c1, c2), Ψ из 5 соседей."""
    validation = Dataset(
        features=np.array([
            [0.1, 0.0],   # A
            [0.0, 0.2],   # B
            [-0.3, 0.0],  # C
            [0.4, 0.0],   # D
            [0.0, 0.5],   # E
        ]),
        labels=np.array([SQUARE, SQUARE, CIRCLE, CIRCLE, SQUARE]),
        name="scenario",
    )
    # c1: circle iff y - x >= 0
    c1 = LinearClassifier(weights=np.array([-1.0, 1.0]), bias=0.0, positive_label=CIRCLE, negative_label=SQUARE)
    # c2: всегда square
    c2 = LinearClassifier(weights=np.zeros(2), bias=-1.0, positive_label=CIRCLE, negative_label=SQUARE)
    pool = ClassifierPool(classifiers=(c1, c2), bag_seeds=(0, 1), degenerate=(False, True))
    query = np.array([0.0, 0.0])
    return ScenarioFixture(
        query=query,
        query_label=CIRCLE,
        validation=validation,
        pool=pool,
        oracle=build_oracle_matrix(pool, validation),
        region=knn_region(query, validation, k=len(NEIGHBOR_NAMES), query_id=SCENARIO_QUERY_ID),
    )


def borderline_scenario() -> Tuple[SelectionTrace, SelectionTrace]:
    """Трассы KNORA-E и KNORA-B на встроенном сценарии."""
    fixture = scenario_fixture()
    traces = []
    for technique, selector in (("KNORA-E", select_knora_e), ("KNORA-B", select_knora_b)):
        trace = SelectionTrace(technique=technique, query_id=SCENARIO_QUERY_ID)
        selector(fixture.query, fixture.pool, fixture.oracle, fixture.region, trace=trace)
        traces.append(trace)
    return traces[0], traces[1]


def scenario_traces() -> Dict[str, SelectionTrace]:
    """
    Все трассы сценария: KNORA-E, KNORA-B и KNORA-BI для обоих
    вариантов миноритарного класса.
    """
    fixture = scenario_fixture()
    knora_e, knora_b = borderline_scenario()
    traces = {"KNORA-E": knora_e, "KNORA-B": knora_b}
    for minority, key in ((CIRCLE, "KNORA-BI[minority=circle]"), (SQUARE, "KNORA-BI[minority=square]")):
        trace = SelectionTrace(technique=key, query_id=SCENARIO_QUERY_ID)
        select_knora_bi(fixture.query, fixture.pool, fixture.oracle, fixture.region, minority, trace=trace)
        traces[key] = trace
    return traces


def describe_trace(trace: SelectionTrace) -> str:
    """Краткое описание: удалённые соседи и выбранные классификаторы."""
    removed = ", ".join(NEIGHBOR_NAMES[j] for j in trace.removed_sequence()) or "-"
    selected = ", ".join(CLASSIFIER_NAMES[i] for i in trace.selected)
    return f"{trace.technique}: удалены [{removed}], выбраны [{selected}]"


def scenario_predictions() -> Dict[str, str]:
    """Предсказание каждого выбранного ансамбля на запросе сценария."""
    fixture = scenario_fixture()
    predictions = {}
    for name, trace in scenario_traces().items():
        label, _ = combine_votes(SelectedEnsemble.uniform(trace.selected), fixture.pool, fixture.query)
        predictions[name] = label
    return predictions
