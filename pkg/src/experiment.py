"""
Экспериментальный стенд: датасеты -> 20 репликаций 5 x 4 -> пул -> oracle ->
выбор ансамбля каждой техникой на каждом тестовом образце -> AUC ->
средние, ранги, Wilcoxon и Sign test.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .base_pool import bagging_pool, build_oracle_matrix
from .config import ExperimentConfig, config
from .dataset import (
    MinMaxScaler,
    imbalance_summary,
    load_dataset,
    split_parts,
    stratified_nested_split,
)
from .eval_stats import (
    SIGN_TEST_ALPHAS,
    SIGN_TEST_Z,
    auc,
    average_ranks,
    sign_test,
    sign_test_critical,
    wilcoxon_signed_rank,
    win_tie_loss,
)
from .knora import run_technique, vote_from_predictions, write_traces
from .models import (
    DataError,
    Dataset,
    PairwiseVerdict,
    Replication,
    ScoredPredictions,
    SelectionTrace,
    Sign,
    WinTieLoss,
)
from .region import knn_regions
from .schemas import (
    DatasetRecord,
    DatasetTechniqueSummary,
    ExperimentReport,
    PairwiseRecord,
    RunRecord,
    TechniqueSummary,
)

logger = logging.getLogger(__name__)

# Пары строятся по средним AUC датасетов, если датасетов не меньше
MIN_DATASETS_FOR_DATASET_PAIRING = 5
REFERENCE_CANDIDATES = ("KNORA-B", "KNORA-BI")

DECISIONS: Dict[str, str] = {
    "vote_tie": "при равенстве голосов выигрывает миноритарный класс",
    "auc_score": "оценка для AUC - доля голосов ансамбля за миноритарный класс",
    "knora_u_fallback": "если ни один классификатор не верен ни на одном соседе, голосует весь пул с весом 1",
    "borderline_fallback": "KNORA-B/BI при исчерпании региона выполняют KNORA-E на исходном регионе",
    "dfp": "F-варианты: упрощённый DFP - классификатор верен на паре соседей разных классов",
    "wilcoxon": "односторонний (лучше ли reference); точное распределение при n <= EXACT_WILCOXON_MAX_N",
    "sign_test_z": ", ".join(f"{a:.2f}:{z}" for a, z in SIGN_TEST_Z.items()),
    "pool": "пул переобучается в каждой репликации на её train-части; positive = миноритарный класс датасета",
    "skip": "репликация пропускается, если в test-части нет одного из классов или validation-часть меньше K",
    "scaling": "min-max нормализация по train-части, validation и test используют её параметры",
    "neighbors": "евклидово расстояние, равные расстояния - меньший индекс validation set",
}


@dataclass
class ReplicationResult:
    """Итог одной репликации (или причина пропуска)."""
    dataset_index: int
    replication: int
    aucs: Dict[str, float] = field(default_factory=dict)
    skipped: bool = False
    reason: str = ""
    constant_classifiers: int = 0
    selections: int = 0
    traces: List[SelectionTrace] = field(default_factory=list)


def replication_seed(master_seed: int, dataset_index: int, replication: int) -> int:
    """Независимый seed пула для (датасет, репликация), не зависит от порядка выполнения."""
    sequence = np.random.SeedSequence([int(master_seed) % 2**32, dataset_index, replication])
    return int(sequence.generate_state(1)[0])


def load_datasets(paths: Sequence[Path], label_column: Optional[str] = None) -> List[Dataset]:
    """
    Загружает все датасеты эксперимента.

    Raises:
        DataError: файл не найден или не разобран (с именем файла)
    """
    datasets = []
    for path in paths:
        try:
            dataset = load_dataset(Path(path), label_column)
        except (FileNotFoundError, DataError) as e:
            raise DataError(f"Датасет не загружен: {path}: {e}") from e
        summary = imbalance_summary(dataset)
        logger.info(
            f"Загружен {dataset.name}: {dataset.n_samples} образцов, {dataset.n_features} признаков, "
            f"IR={summary.ir:.2f}"
        )
        datasets.append(dataset)
    return datasets


def evaluate_replication(
    dataset: Dataset,
    replication: Replication,
    cfg: ExperimentConfig,
    dataset_index: int = 0,
    number: int = 0,
) -> ReplicationResult:
    """
    Одна репликация: нормализация по train, пул, oracle на validation,
    выбор ансамбля и голосование для каждого тестового образца.
    """
    result = ReplicationResult(dataset_index=dataset_index, replication=number)
    train, validation, test = split_parts(dataset, replication)

    if len(test.classes) < 2:
        result.skipped = True
        result.reason = "в test-части один класс"
        logger.warning(f"{dataset.name} #{number}: {result.reason}, репликация пропущена")
        return result
    if validation.n_samples < cfg.k:
        result.skipped = True
        result.reason = f"validation set меньше k={cfg.k}"
        logger.warning(f"{dataset.name} #{number}: {result.reason}, репликация пропущена")
        return result

    scaler = MinMaxScaler.fit(train.features)
    train = train.with_features(scaler.transform(train.features))
    validation = validation.with_features(scaler.transform(validation.features))
    test = test.with_features(scaler.transform(test.features))

    summary = imbalance_summary(dataset)
    minority, majority = summary.minority, summary.majority
    pool = bagging_pool(
        train,
        pool_size=cfg.pool_size,
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        seed=replication_seed(cfg.seed, dataset_index, number),
        positive_label=minority,
        negative_label=majority,
    )
    result.constant_classifiers = sum(pool.degenerate)
    oracle = build_oracle_matrix(pool, validation)

    query_ids = [f"{dataset.name}/{number}/{t}" for t in range(test.n_samples)]
    regions = knn_regions(test.features, validation, cfg.k, query_ids=query_ids)
    predictions = pool.predict_matrix(test.features)

    for technique in cfg.techniques:
        scores = np.empty(test.n_samples)
        for t, region in enumerate(regions):
            trace = SelectionTrace(technique=technique, query_id=region.query_id) if cfg.trace else None
            ensemble = run_technique(
                technique, test.features[t], pool, oracle, region, minority=minority, trace=trace
            )
            _, scores[t] = vote_from_predictions(ensemble, predictions[:, t], majority, minority)
            if trace is not None:
                result.traces.append(trace)
        result.aucs[technique] = auc(ScoredPredictions(scores=scores, truth=test.labels, positive=minority))
        result.selections += test.n_samples

    logger.debug(
        f"{dataset.name} #{number}: "
        + ", ".join(f"{name}={value:.4f}" for name, value in result.aucs.items())
    )
    return result


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def reference_techniques(techniques: Sequence[str]) -> List[str]:
    """Техники-эталоны: KNORA-B и KNORA-BI, если они есть в запуске, иначе последняя."""
    references = [t for t in techniques if t in REFERENCE_CANDIDATES]
    return references or [techniques[-1]]


def _pairwise(
    reference: str,
    technique: str,
    a: np.ndarray,
    b: np.ndarray,
    alpha: float,
) -> PairwiseRecord:
    try:
        verdict = wilcoxon_signed_rank(a, b, alpha=alpha)
    except ValueError as e:
        logger.warning(f"Wilcoxon {reference} vs {technique} не выполнен: {e}")
        verdict = PairwiseVerdict(p_value=1.0, sign=Sign.EQUAL, alpha=alpha, method="insufficient")
    wtl = win_tie_loss(a, b)
    return PairwiseRecord(
        reference=reference,
        technique=technique,
        wilcoxon_p=verdict.p_value,
        wilcoxon_sign=verdict.sign.value,
        wilcoxon_method=verdict.method,
        wins=wtl.wins,
        ties=wtl.ties,
        losses=wtl.losses,
        n_exp=wtl.n_exp,
        sign_test_reject={
            f"{level:.2f}": sign_test(wtl, level).sign is Sign.BETTER for level in SIGN_TEST_ALPHAS
        } if wtl.n_exp else {},
        critical_values={
            f"{level:.2f}": round(sign_test_critical(wtl.n_exp, level), 6) for level in SIGN_TEST_ALPHAS
        } if wtl.n_exp else {},
    )


def build_report(
    cfg: ExperimentConfig,
    datasets: Sequence[Dataset],
    results: Dict[Tuple[int, int], ReplicationResult],
) -> ExperimentReport:
    """Сводит результаты репликаций в отчёт; порядок не зависит от порядка выполнения."""
    techniques = list(cfg.techniques)
    dataset_records: List[DatasetRecord] = []
    runs: List[RunRecord] = []
    dataset_summaries: List[DatasetTechniqueSummary] = []
    per_dataset_means: List[List[float]] = []
    per_run: Dict[str, List[float]] = {t: [] for t in techniques}

    for ds_index, dataset in enumerate(datasets):
        ds_results = [results[key] for key in sorted(results) if key[0] == ds_index]
        completed = [r for r in ds_results if not r.skipped]
        summary = imbalance_summary(dataset)
        dataset_records.append(
            DatasetRecord(
                name=dataset.name,
                n_samples=dataset.n_samples,
                n_features=dataset.n_features,
                ir=round(summary.ir, 6),
                minority=summary.minority,
                replications=len(completed),
                skipped=len(ds_results) - len(completed),
                constant_classifiers=sum(r.constant_classifiers for r in completed),
            )
        )
        for r in completed:
            for technique in techniques:
                runs.append(
                    RunRecord(dataset=dataset.name, technique=technique, replication=r.replication, auc=r.aucs[technique])
                )
                per_run[technique].append(r.aucs[technique])
        if not completed:
            logger.warning(f"{dataset.name}: все репликации пропущены, датасет не участвует в рангах")
            continue
        means = []
        for technique in techniques:
            mean, std = _mean_std([r.aucs[technique] for r in completed])
            dataset_summaries.append(
                DatasetTechniqueSummary(dataset=dataset.name, technique=technique, mean_auc=mean, std_auc=std)
            )
            means.append(mean)
        per_dataset_means.append(means)

    if not per_dataset_means:
        raise DataError("Ни одна репликация не выполнена: отчёт пуст")

    mean_table = np.asarray(per_dataset_means)
    ranks = average_ranks(mean_table)
    technique_summaries = []
    for column, technique in enumerate(techniques):
        mean, std = _mean_std(per_run[technique])
        technique_summaries.append(
            TechniqueSummary(technique=technique, mean_auc=mean, std_auc=std, average_rank=float(ranks[column]))
        )

    if mean_table.shape[0] >= MIN_DATASETS_FOR_DATASET_PAIRING:
        pairing = "dataset-mean"
        paired = {t: mean_table[:, c] for c, t in enumerate(techniques)}
    else:
        pairing = "replication"
        paired = {t: np.asarray(per_run[t]) for t in techniques}

    references = reference_techniques(techniques)
    pairwise = [
        _pairwise(reference, technique, paired[reference], paired[technique], cfg.alpha)
        for reference in references
        for technique in techniques
        if technique != reference
    ]

    return ExperimentReport(
        package_version=__version__,
        config=cfg.echo(),
        decisions=dict(DECISIONS),
        techniques=techniques,
        reference_techniques=references,
        pairing=pairing,
        alpha=cfg.alpha,
        datasets=dataset_records,
        runs=runs,
        dataset_summaries=dataset_summaries,
        technique_summaries=technique_summaries,
        pairwise=pairwise,
    )


def run_experiment(cfg: ExperimentConfig, datasets: Optional[Sequence[Dataset]] = None) -> ExperimentReport:
    """
    Полный протокол: для каждого датасета 5 x 4 репликаций, в каждой -
    все техники на всех тестовых образцах.

    Args:
        cfg: Конфигурация запуска
        datasets: Уже загруженные датасеты (по умолчанию читаются cfg.datasets)

    Returns:
        ExperimentReport, детерминированный при фиксированном cfg.seed

    Raises:
        DataError: датасет не загружен или слишком мал для разбиения
    """
    cfg.validate()
    if datasets is None:
        datasets = load_datasets(cfg.datasets, cfg.label_column)
    if not datasets:
        raise DataError("Не задано ни одного датасета")

    jobs = []
    for ds_index, dataset in enumerate(datasets):
        plan = stratified_nested_split(dataset, cfg.outer_folds, cfg.inner_folds, seed=cfg.seed)
        for number, replication in enumerate(plan.replications):
            jobs.append((ds_index, number, dataset, replication))
    logger.info(
        f"Эксперимент: {len(datasets)} датасетов, {len(jobs)} репликаций, "
        f"техники {', '.join(cfg.techniques)}"
    )

    started = time.perf_counter()
    results: Dict[Tuple[int, int], ReplicationResult] = {}
    with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
        futures = {
            (ds_index, number): executor.submit(evaluate_replication, dataset, replication, cfg, ds_index, number)
            for ds_index, number, dataset, replication in jobs
        }
        for key in sorted(futures):
            results[key] = futures[key].result()
    elapsed = time.perf_counter() - started

    selections = sum(r.selections for r in results.values())
    rate = selections / elapsed if elapsed > 0 else float("inf")
    logger.info(f"Выполнено {selections} выборов ансамбля за {elapsed:.1f} с ({rate:.0f} в секунду)")
    if rate < config.MIN_SELECTIONS_PER_SECOND:
        logger.warning(
            f"Пропускная способность {rate:.0f}/с ниже порога {config.MIN_SELECTIONS_PER_SECOND:.0f}/с"
        )

    if cfg.trace:
        traces = [trace for key in sorted(results) for trace in results[key].traces]
        write_traces(traces, Path(cfg.output_dir) / config.TRACE_FILENAME)

    return build_report(cfg, datasets, results)


def directional_check(
    report: ExperimentReport,
    better: str,
    worse: str,
    alpha: float = 0.10,
    per_dataset: bool = True,
) -> Tuple[WinTieLoss, PairwiseVerdict]:
    """
    Sign test техники better против worse.

    Args:
        per_dataset: True - пары из средних AUC датасетов, False - из каждой
            пары (датасет, репликация)

    Returns:
        (победы/ничьи/поражения better, вердикт sign test)
    """
    def by_run(technique: str) -> Dict[Tuple[str, int], float]:
        if per_dataset:
            return {
                (s.dataset, 0): s.mean_auc for s in report.dataset_summaries if s.technique == technique
            }
        return {(r.dataset, r.replication): r.auc for r in report.runs if r.technique == technique}

    a_runs, b_runs = by_run(better), by_run(worse)
    keys = sorted(set(a_runs) & set(b_runs))
    if not keys:
        raise ValueError(f"В отчёте нет общих прогонов {better} и {worse}")
    wtl = win_tie_loss([a_runs[k] for k in keys], [b_runs[k] for k in keys])
    verdict = sign_test(wtl, alpha)
    logger.info(
        f"{better} vs {worse}: {wtl.wins}/{wtl.ties}/{wtl.losses}, "
        f"n_c={sign_test_critical(wtl.n_exp, alpha):.2f}, знак {verdict.sign.value}"
    )
    return wtl, verdict
