"""
Техники динамического выбора ансамбля семейства K-Nearest Oracles:
KNORA-U, KNORA-DBU, KNORA-E, KNORA-B, KNORA-BI, fallback KNORA-E, голосование
и предварительный отбор DFP (варианты с префиксом F).

Все селекторы - чистые функции от (query, pool, oracle, region) и всегда
возвращают непустой ансамбль.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .models import (
    ClassifierPool,
    ClassLabel,
    OracleMatrix,
    RegionOfCompetence,
    SelectedEnsemble,
    SelectionTrace,
    TraceIteration,
)
from .region import is_indecision_region, reduce_region_b, reduce_region_bi, remove_furthest

logger = logging.getLogger(__name__)

# Плагин: (query, pool, oracle, region, minority, trace) -> SelectedEnsemble
SelectorFn = Callable[..., SelectedEnsemble]
Reducer = Callable[[RegionOfCompetence], RegionOfCompetence]

DFP_PREFIX = "F"

_SELECTORS: Dict[str, SelectorFn] = {}


def register_selector(name: str) -> Callable[[SelectorFn], SelectorFn]:
    """
    Регистрирует технику под именем name.

    Функция вызывается как fn(query, pool, oracle, region, minority=..., trace=...).
    """
    def decorator(fn: SelectorFn) -> SelectorFn:
        if name in _SELECTORS:
            raise ValueError(f"Техника {name} уже зарегистрирована")
        _SELECTORS[name] = fn
        return fn
    return decorator


def registered_selectors() -> List[str]:
    return list(_SELECTORS)


def parse_technique(name: str) -> Tuple[str, bool]:
    """'FKNORA-B' -> ('KNORA-B', True); 'KNORA-B' -> ('KNORA-B', False)."""
    if name in _SELECTORS:
        return name, False
    if name.startswith(DFP_PREFIX) and name[len(DFP_PREFIX):] in _SELECTORS:
        return name[len(DFP_PREFIX):], True
    raise KeyError(f"Неизвестная техника: {name}")


def is_known_technique(name: str) -> bool:
    try:
        parse_technique(name)
    except KeyError:
        return False
    return True


def get_selector(name: str) -> SelectorFn:
    base, _ = parse_technique(name)
    return _SELECTORS[base]


def _check_inputs(pool: ClassifierPool, oracle: OracleMatrix, region: RegionOfCompetence) -> None:
    if region.is_empty():
        raise ValueError("Region of competence пуст")
    if oracle.pool_size != len(pool):
        raise ValueError(
            f"OracleMatrix на {oracle.pool_size} классификаторов не соответствует пулу из {len(pool)}"
        )


def _record(
    trace: Optional[SelectionTrace],
    region: RegionOfCompetence,
    selected: int,
    removed: Optional[int] = None,
    stage: str = "main",
) -> None:
    if trace is not None:
        trace.record(
            TraceIteration(
                region=region.indices, classes=region.labels, selected=selected, removed=removed, stage=stage
            )
        )


def _finish(trace: Optional[SelectionTrace], ensemble: SelectedEnsemble) -> SelectedEnsemble:
    if trace is not None:
        trace.selected = tuple(ensemble.indices)
    return ensemble


def _eliminate(
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    reducer: Reducer,
    trace: Optional[SelectionTrace],
    stage: str,
) -> Optional[SelectedEnsemble]:
    """
    Цикл Empty(EoC) ∧ ¬Empty(Ψ): выбрать всех, кто верен на всём Ψ,
    иначе сократить Ψ. None - регион исчерпан, нужен fallback.
    """
    current = region
    while not current.is_empty():
        competent = np.flatnonzero(oracle.correct[:, list(current.indices)].all(axis=1))
        if competent.size:
            _record(trace, current, int(competent.size), stage=stage)
            return SelectedEnsemble.uniform(competent)
        reduced = reducer(current)
        removed = None
        if not reduced.is_empty():
            removed = next(i for i in current.indices if i not in reduced.indices)
        _record(trace, current, 0, removed=removed, stage=stage)
        current = reduced
    return None


def fallback_best_accuracy(
    pool: ClassifierPool,
    oracle: OracleMatrix,
    original_region: RegionOfCompetence,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """Все классификаторы с той же точностью на исходном Ψ, что и у лучшего."""
    _check_inputs(pool, oracle, original_region)
    accuracy = oracle.correct[:, list(original_region.indices)].sum(axis=1)
    best = np.flatnonzero(accuracy == accuracy.max())
    if trace is not None:
        trace.fallback_used = True
        _record(trace, original_region, int(best.size), stage="fallback")
    return SelectedEnsemble.uniform(best)


def _knora_e(
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    trace: Optional[SelectionTrace],
    stage: str,
) -> SelectedEnsemble:
    selected = _eliminate(oracle, region, remove_furthest, trace, stage)
    if selected is None:
        selected = fallback_best_accuracy(pool, oracle, region, trace)
    return selected


@register_selector("KNORA-E")
def select_knora_e(
    query: Optional[np.ndarray],
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    minority: Optional[ClassLabel] = None,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """
    KNORA-E: все классификаторы, верные на всех соседях Ψ; если таких нет -
    убрать самого дальнего соседа и повторить. Если Ψ исчерпан -
    fallback_best_accuracy на исходном Ψ.
    """
    _check_inputs(pool, oracle, region)
    return _finish(trace, _knora_e(pool, oracle, region, trace, "main"))


def _knora_borderline(
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    reducer: Reducer,
    trace: Optional[SelectionTrace],
) -> SelectedEnsemble:
    selected = _eliminate(oracle, region, reducer, trace, "main")
    if selected is None:
        # fallback_selection(C, Ψ_original, x_query, K) = процедура KNORA-E
        if trace is not None:
            trace.fallback_used = True
        selected = _knora_e(pool, oracle, region, trace, "fallback")
    return _finish(trace, selected)


@register_selector("KNORA-B")
def select_knora_b(
    query: Optional[np.ndarray],
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    minority: Optional[ClassLabel] = None,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """KNORA-B: как KNORA-E, но сокращение Ψ сохраняет набор классов исходного региона."""
    _check_inputs(pool, oracle, region)
    return _knora_borderline(pool, oracle, region, lambda r: reduce_region_b(query, r), trace)


@register_selector("KNORA-BI")
def select_knora_bi(
    query: Optional[np.ndarray],
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    minority: Optional[ClassLabel] = None,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """KNORA-BI: сокращение Ψ защищает только последний образец миноритарного класса."""
    _check_inputs(pool, oracle, region)
    if minority is None:
        minority = pool.positive_label
    return _knora_borderline(
        pool, oracle, region, lambda r: reduce_region_bi(query, r, None, minority), trace
    )


@register_selector("KNORA-U")
def select_knora_u(
    query: Optional[np.ndarray],
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    minority: Optional[ClassLabel] = None,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """
    KNORA-U: все классификаторы, верные хотя бы на одном соседе; вес голоса -
    число верно классифицированных соседей. Если верных нет - весь пул с весом 1.
    """
    _check_inputs(pool, oracle, region)
    hits = oracle.correct[:, list(region.indices)].sum(axis=1)
    members = np.flatnonzero(hits > 0)
    if members.size:
        ensemble = SelectedEnsemble(members=tuple((int(i), int(hits[i])) for i in members))
    else:
        if trace is not None:
            trace.fallback_used = True
        ensemble = SelectedEnsemble.uniform(range(len(pool)))
    _record(trace, region, len(ensemble.members))
    return _finish(trace, ensemble)


@register_selector("KNORA-DBU")
def select_knora_dbu(
    query: Optional[np.ndarray],
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    minority: Optional[ClassLabel] = None,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """
    KNORA-DBU: классификаторы, верные хотя бы на одном соседе каждого класса
    региона (постоянные классификаторы отсеиваются); вес - как в KNORA-U.
    Если таких нет - KNORA-U.
    """
    _check_inputs(pool, oracle, region)
    labels = np.asarray(region.labels)
    columns = oracle.correct[:, list(region.indices)]
    covers_every_class = np.ones(len(pool), dtype=bool)
    for label in sorted(region.class_set):
        covers_every_class &= columns[:, labels == label].any(axis=1)
    members = np.flatnonzero(covers_every_class)
    if members.size == 0:
        if trace is not None:
            trace.fallback_used = True
        return select_knora_u(query, pool, oracle, region, minority=minority, trace=trace)
    hits = columns.sum(axis=1)
    ensemble = SelectedEnsemble(members=tuple((int(i), int(hits[i])) for i in members))
    _record(trace, region, len(ensemble.members))
    return _finish(trace, ensemble)


def preselect_dfp(
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
) -> List[int]:
    """
    Упрощённый DFP: в регионе неопределённости оставляет классификаторы,
    верные хотя бы на паре соседей разных классов (граница проходит через
    регион). Для однородного региона или пустого результата - весь пул.
    """
    _check_inputs(pool, oracle, region)
    everyone = list(range(len(pool)))
    if not is_indecision_region(region):
        return everyone
    labels = np.asarray(region.labels)
    columns = oracle.correct[:, list(region.indices)]
    covered = np.zeros(len(pool), dtype=np.int64)
    for label in sorted(region.class_set):
        covered += columns[:, labels == label].any(axis=1)
    selected = np.flatnonzero(covered >= 2)
    if selected.size == 0:
        return everyone
    return [int(i) for i in selected]


def select_with_preselection(
    name: str,
    query: Optional[np.ndarray],
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    minority: Optional[ClassLabel] = None,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """
    F-вариант техники: селектор (вместе со своим fallback) работает только на
    классификаторах, прошедших preselect_dfp; индексы возвращаются в нумерации пула.
    """
    base, _ = parse_technique(name)
    selector = _SELECTORS[base]
    candidates = preselect_dfp(pool, oracle, region)
    if len(candidates) == len(pool):
        return selector(query, pool, oracle, region, minority=minority, trace=trace)
    restricted = selector(
        query, pool.subset(candidates), oracle.restrict(candidates), region, minority=minority, trace=trace
    )
    ensemble = SelectedEnsemble(members=tuple((candidates[i], w) for i, w in restricted.members))
    return _finish(trace, ensemble)


def run_technique(
    name: str,
    query: Optional[np.ndarray],
    pool: ClassifierPool,
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    minority: Optional[ClassLabel] = None,
    trace: Optional[SelectionTrace] = None,
) -> SelectedEnsemble:
    """Запуск техники по имени; префикс F включает DFP."""
    base, dfp = parse_technique(name)
    if dfp:
        return select_with_preselection(name, query, pool, oracle, region, minority, trace)
    return _SELECTORS[base](query, pool, oracle, region, minority=minority, trace=trace)


def vote_from_predictions(
    ensemble: SelectedEnsemble,
    predictions: Sequence[ClassLabel],
    negative: ClassLabel,
    minority: ClassLabel,
) -> Tuple[ClassLabel, float]:
    """
    Взвешенное голосование по готовым предсказаниям пула на одном запросе.

    Returns:
        (предсказанный класс, доля голосов за миноритарный класс);
        при равенстве голосов выигрывает миноритарный класс
    """
    if ensemble.is_empty():
        raise ValueError("Ансамбль пуст")
    predictions = np.asarray(predictions)
    indices = np.asarray(ensemble.indices, dtype=np.int64)
    weights = np.asarray(ensemble.weights, dtype=np.float64)
    minority_mass = float(weights[predictions[indices] == minority].sum())
    total = float(weights.sum())
    predicted = minority if minority_mass >= total - minority_mass else negative
    return predicted, minority_mass / total


def combine_votes(
    ensemble: SelectedEnsemble,
    pool: ClassifierPool,
    query: np.ndarray,
    minority: Optional[ClassLabel] = None,
) -> Tuple[ClassLabel, float]:
    """Каждый член ансамбля отдаёт weight голосов за своё предсказание на query."""
    minority = minority or pool.positive_label
    other = pool.negative_label if minority == pool.positive_label else pool.positive_label
    predictions = pool.predict_matrix(np.asarray(query, dtype=np.float64).reshape(1, -1))[:, 0]
    return vote_from_predictions(ensemble, predictions, other, minority)


def write_traces(traces: Iterable[SelectionTrace], path: Path) -> Path:
    """Трассы выбора в JSON lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for trace in traces:
            f.write(trace.to_jsonl())
    logger.info(f"Трассы выбора записаны: {path}")
    return path
