"""
Схемы JSON-документов на диске (pydantic).

Используются для:
- кэша пула классификаторов (PoolDocument)
- отчёта эксперимента (ExperimentReport) и его обратного чтения
"""

from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field

POOL_FORMAT_VERSION = 1
REPORT_FORMAT_VERSION = 1


# ===== Пул классификаторов =====

class PoolClassifierRecord(BaseModel):
    """Один линейный классификатор пула."""
    model_config = ConfigDict(frozen=True)

    weights: List[float]
    bias: float
    seed: int = Field(description="Seed bootstrap-выборки (seed + i)")
    degenerate: bool = Field(default=False, description="Обучен на выборке из одного класса")


class PoolDocument(BaseModel):
    """Версионированный JSON пула: метки, гиперпараметры, классификаторы по порядку."""
    model_config = ConfigDict(frozen=True)

    format_version: int = POOL_FORMAT_VERSION
    positive_label: str
    negative_label: str
    epochs: int
    learning_rate: float
    classifiers: List[PoolClassifierRecord]


# ===== Отчёт эксперимента =====

class DatasetRecord(BaseModel):
    """Строка таблицы датасетов: #Feats., #Samples, IR и учёт репликаций."""
    name: str
    n_samples: int
    n_features: int
    ir: float
    minority: str
    replications: int
    skipped: int
    constant_classifiers: int = 0


class RunRecord(BaseModel):
    """AUC одной техники на одной репликации."""
    dataset: str
    technique: str
    replication: int
    auc: float


class DatasetTechniqueSummary(BaseModel):
    dataset: str
    technique: str
    mean_auc: float
    std_auc: float


class TechniqueSummary(BaseModel):
    """Итоговая строка по технике: средний AUC (std) и средний ранг."""
    technique: str
    mean_auc: float
    std_auc: float
    average_rank: float


class PairwiseRecord(BaseModel):
    """Сравнение reference-техники с другой: Wilcoxon и Sign test."""
    reference: str
    technique: str
    wilcoxon_p: float
    wilcoxon_sign: str
    wilcoxon_method: str = ""
    wins: int
    ties: int
    losses: int
    n_exp: int
    sign_test_reject: Dict[str, bool] = Field(default_factory=dict)
    critical_values: Dict[str, float] = Field(default_factory=dict)


class ExperimentReport(BaseModel):
    """Самоописывающий отчёт: конфигурация, решения, сырые AUC и статистика."""
    format_version: int = REPORT_FORMAT_VERSION
    package_version: str
    config: Dict[str, Any]
    decisions: Dict[str, str]
    techniques: List[str]
    reference_techniques: List[str]
    pairing: str
    alpha: float
    datasets: List[DatasetRecord]
    runs: List[RunRecord]
    dataset_summaries: List[DatasetTechniqueSummary]
    technique_summaries: List[TechniqueSummary]
    pairwise: List[PairwiseRecord]

    def aucs_for(self, technique: str) -> List[float]:
        return [r.auc for r in self.runs if r.technique == technique]

    def summary_for(self, technique: str) -> TechniqueSummary:
        for summary in self.technique_summaries:
            if summary.technique == technique:
                return summary
        raise KeyError(technique)
