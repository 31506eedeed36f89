"""
Наивная построчная реализация KNORA-U/DBU/E/B/BI на списках Python.

Без предвычислений и numpy-векторизации: используется в тестах как
независимый эталон для селекторов из knora.
"""

from typing import Dict, List, Optional

import numpy as np

from .models import ClassifierPool, ClassLabel, OracleMatrix, RegionOfCompetence, SelectedEnsemble


def _classes(psi: List[int], label_of: Dict[int, ClassLabel]) -> set:
    return set(label_of[j] for j in psi)


def _select_all_correct(correct: List[List[bool]], psi: List[int]) -> List[int]:
    eoc = []
    for i in range(len(correct)):
        ok = True
        for j in psi:
            if not correct[i][j]:
                ok = False
        if ok:
            eoc.append(i)
    return eoc


def _best_accuracy(correct: List[List[bool]], psi: List[int]) -> List[int]:
    accuracies = []
    for i in range(len(correct)):
        hits = 0
        for j in psi:
            if correct[i][j]:
                hits += 1
        accuracies.append(hits)
    best = max(accuracies)
    return [i for i in range(len(correct)) if accuracies[i] == best]


def _knora_e(correct: List[List[bool]], psi_original: List[int]) -> List[int]:
    psi = list(psi_original)
    eoc: List[int] = []
    while not eoc and psi:
        eoc = _select_all_correct(correct, psi)
        if not eoc:
            psi = psi[:-1]
    if not eoc:
        eoc = _best_accuracy(correct, psi_original)
    return eoc


def _reduce_b(psi: List[int], label_of: Dict[int, ClassLabel]) -> List[int]:
    for b in range(len(psi), 0, -1):
        candidate = psi[: b - 1] + psi[b:]
        if _classes(candidate, label_of) == _classes(psi, label_of):
            return candidate
    return []


def _reduce_bi(psi: List[int], label_of: Dict[int, ClassLabel], minority: ClassLabel) -> List[int]:
    for b in range(len(psi), 0, -1):
        candidate = psi[: b - 1] + psi[b:]
        if label_of[psi[b - 1]] != minority or _classes(candidate, label_of) == _classes(psi, label_of):
            return candidate
    return []


def _knora_borderline(correct, psi_original, reduce) -> List[int]:
    psi = list(psi_original)
    eoc: List[int] = []
    while not eoc and psi:
        eoc = _select_all_correct(correct, psi)
        if not eoc:
            psi = reduce(psi)
    if not eoc:
        eoc = _knora_e(correct, psi_original)
    return eoc


def _knora_u(correct: List[List[bool]], psi: List[int]) -> List[tuple]:
    members = []
    for i in range(len(correct)):
        votes = 0
        for j in psi:
            if correct[i][j]:
                votes += 1
        if votes > 0:
            members.append((i, votes))
    if not members:
        members = [(i, 1) for i in range(len(correct))]
    return members


def _knora_dbu(correct: List[List[bool]], psi: List[int], label_of: Dict[int, ClassLabel]) -> List[tuple]:
    members = []
    for i in range(len(correct)):
        covered = set()
        votes = 0
        for j in psi:
            if correct[i][j]:
                covered.add(label_of[j])
                votes += 1
        if covered == _classes(psi, label_of):
            members.append((i, votes))
    if not members:
        members = _knora_u(correct, psi)
    return members


def reference_oracle(
    query: Optional[np.ndarray],
    pool: Optional[ClassifierPool],
    oracle: OracleMatrix,
    region: RegionOfCompetence,
    technique: str,
    minority: Optional[ClassLabel] = None,
) -> SelectedEnsemble:
    """
    Выбор ансамбля техникой technique ("KNORA-U", "KNORA-DBU", "KNORA-E", "KNORA-B", "KNORA-BI").

    pool не используется (выбор зависит только от oracle и региона), minority
    обязателен для KNORA-BI.
    """
    correct = [[bool(v) for v in row] for row in oracle.correct.tolist()]
    psi = list(region.indices)
    label_of = {j: label for j, label in zip(region.indices, region.labels)}

    if technique == "KNORA-U":
        return SelectedEnsemble(members=tuple(_knora_u(correct, psi)))
    if technique == "KNORA-DBU":
        return SelectedEnsemble(members=tuple(_knora_dbu(correct, psi, label_of)))

    if technique == "KNORA-E":
        eoc = _knora_e(correct, psi)
    elif technique == "KNORA-B":
        eoc = _knora_borderline(correct, psi, lambda p: _reduce_b(p, label_of))
    elif technique == "KNORA-BI":
        if minority is None:
            raise ValueError("KNORA-BI требует minority")
        eoc = _knora_borderline(correct, psi, lambda p: _reduce_bi(p, label_of, minority))
    else:
        raise ValueError(f"Неизвестная техника: {technique}")
    return SelectedEnsemble(members=tuple((i, 1) for i in eoc))
