"""
AUC и статистическое сравнение техник: средние ранги, Wilcoxon signed-rank,
Sign test с критическим числом побед n_c.
"""

import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm, rankdata, wilcoxon
from sklearn.metrics import roc_auc_score

from .config import config
from .models import PairwiseVerdict, ScoredPredictions, Sign, WinTieLoss

logger = logging.getLogger(__name__)

# z_alpha для стандартных уровней значимости; 2.33 даёт n_c(40) = 27.37
SIGN_TEST_Z: Dict[float, float] = {0.10: 1.282, 0.05: 1.645, 0.01: 2.33}
SIGN_TEST_ALPHAS = (0.10, 0.05, 0.01)

MIN_WILCOXON_PAIRS = 5


def auc(p: ScoredPredictions) -> float:
    """
    Площадь под ROC-кривой: доля пар (pos, neg), где score_pos > score_neg,
    равные оценки дают 0.5.

    Raises:
        ValueError: в truth только один класс
    """
    positive = np.asarray(p.truth) == p.positive
    if positive.all() or not positive.any():
        raise ValueError("AUC не определён: в truth только один класс")
    return float(roc_auc_score(positive, np.asarray(p.scores, dtype=np.float64)))


def _doubled_ranks(ranks: Sequence[float]) -> np.ndarray:
    # Средние ранги кратны 0.5, удвоенные - целые
    return np.rint(2.0 * np.asarray(ranks, dtype=np.float64)).astype(np.int64)


def wilcoxon_exact_pvalue(w_plus: float, ranks: Sequence[float]) -> float:
    """
    P(W+ >= w_plus) при H0 по точному условному распределению:
    каждый ранг независимо входит в W+ с вероятностью 1/2.
    Ранги могут быть средними (связки), распределение считается динамикой по суммам.
    """
    doubled = _doubled_ranks(ranks)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    threshold = int(math.ceil(2.0 * w_plus - 1e-9))
    threshold = min(max(threshold, 0), total + 1)
    return float(counts[threshold:].sum() / 2.0 ** len(doubled))


def _normal_pvalues(diff: np.ndarray) -> Tuple[float, float]:
    # Нормальное приближение с поправкой на связки, без поправки на непрерывность
    better = wilcoxon(diff, alternative="greater", method="asymptotic", correction=False)
    worse = wilcoxon(diff, alternative="less", method="asymptotic", correction=False)
    return float(better.pvalue), float(worse.pvalue)


def wilcoxon_signed_rank(
    a: Sequence[float],
    b: Sequence[float],
    alpha: float = 0.05,
    exact_max_n: Optional[int] = None,
) -> PairwiseVerdict:
    """
    Односторонний Wilcoxon signed-rank: лучше ли a, чем b.

    Нулевые разности отбрасываются, модули разностей ранжируются средними
    рангами. При n <= exact_max_n p-value считается по точному распределению,
    иначе нормальным приближением с поправкой на связки.

    Returns:
        PairwiseVerdict: p_value = P(a не лучше b); sign "+" если a значимо лучше,
        "-" если значимо хуже (обратный односторонний тест), иначе "="

    Raises:
        ValueError: разная длина векторов или от 1 до 4 ненулевых разностей
    """
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if a_arr.shape != b_arr.shape or a_arr.ndim != 1:
        raise ValueError(f"Векторы должны быть одной длины: {a_arr.shape} и {b_arr.shape}")
    if exact_max_n is None:
        exact_max_n = config.EXACT_WILCOXON_MAX_N

    diff = a_arr - b_arr
    diff = diff[diff != 0.0]
    n = int(diff.size)
    if n == 0:
        return PairwiseVerdict(p_value=1.0, sign=Sign.EQUAL, alpha=alpha, statistic=0.0, method="all-zero")
    if n < MIN_WILCOXON_PAIRS:
        raise ValueError(f"Wilcoxon требует >= {MIN_WILCOXON_PAIRS} ненулевых разностей, получено {n}")

    ranks = rankdata(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    w_minus = float(ranks[diff < 0].sum())

    if n <= exact_max_n:
        p_better = wilcoxon_exact_pvalue(w_plus, ranks)
        p_worse = wilcoxon_exact_pvalue(w_minus, ranks)
        method = "exact"
    else:
        p_better, p_worse = _normal_pvalues(diff)
        method = "normal"

    if p_better < alpha:
        sign = Sign.BETTER
    elif p_worse < alpha:
        sign = Sign.WORSE
    else:
        sign = Sign.EQUAL
    logger.debug(f"Wilcoxon n={n}: W+={w_plus}, p={p_better:.6g} ({method}), знак {sign.value}")
    return PairwiseVerdict(p_value=min(p_better, 1.0), sign=sign, alpha=alpha, statistic=w_plus, method=method)


def _z_for(alpha: float) -> float:
    for level, z in SIGN_TEST_Z.items():
        if math.isclose(alpha, level, rel_tol=0.0, abs_tol=1e-12):
            return z
    return float(norm.ppf(1.0 - alpha))


def sign_test_critical(n_exp: int, alpha: float) -> float:
    """
    Критическое число побед: n_c = n_exp / 2 + z_alpha * sqrt(n_exp) / 2.

    Raises:
        ValueError: n_exp < 1 или alpha вне (0, 0.5)
    """
    if n_exp < 1:
        raise ValueError(f"n_exp должен быть >= 1, получено {n_exp}")
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha должен лежать в (0, 0.5), получено {alpha}")
    return n_exp / 2.0 + _z_for(alpha) * math.sqrt(n_exp) / 2.0


def sign_test(wtl: WinTieLoss, alpha: float = 0.05) -> PairwiseVerdict:
    """
    Sign test: H0 отвергается, если побед плюс половина ничьих >= n_c.

    sign "+" - отвергнута в пользу первой техники, "-" - в пользу второй
    (поражения плюс половина ничьих >= n_c), иначе "=".
    p_value - нормальное приближение биномиального хвоста для побед.
    """
    n_exp = wtl.n_exp
    if n_exp < 1:
        raise ValueError("Пустое сравнение: wins + ties + losses = 0")
    critical = sign_test_critical(n_exp, alpha)
    score = wtl.score
    if score >= critical:
        sign = Sign.BETTER
    elif wtl.losses + wtl.ties / 2.0 >= critical:
        sign = Sign.WORSE
    else:
        sign = Sign.EQUAL
    z = (score - n_exp / 2.0) / (math.sqrt(n_exp) / 2.0)
    return PairwiseVerdict(
        p_value=float(norm.sf(z)), sign=sign, alpha=alpha, statistic=score, method="sign"
    )


def win_tie_loss(a: Sequence[float], b: Sequence[float], tolerance: float = 0.0) -> WinTieLoss:
    """Победы / ничьи / поражения a против b по парам (|a - b| <= tolerance - ничья)."""
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if a_arr.shape != b_arr.shape:
        raise ValueError(f"Векторы должны быть одной длины: {a_arr.shape} и {b_arr.shape}")
    diff = a_arr - b_arr
    ties = np.abs(diff) <= tolerance
    return WinTieLoss(
        wins=int(((diff > 0) & ~ties).sum()),
        ties=int(ties.sum()),
        losses=int(((diff < 0) & ~ties).sum()),
    )


def average_ranks(auc_table: np.ndarray) -> np.ndarray:
    """
    Средний ранг техник: в каждой строке (датасет) ранг 1 у наибольшего AUC,
    связки получают средний ранг.

    Args:
        auc_table: Матрица datasets x techniques

    Raises:
        ValueError: NaN в таблице или пустая таблица
    """
    table = np.asarray(auc_table, dtype=np.float64)
    if table.ndim != 2 or table.size == 0:
        raise ValueError(f"Ожидается непустая матрица datasets x techniques, получено {table.shape}")
    if np.isnan(table).any():
        raise ValueError("Таблица AUC содержит NaN")
    ranks = rankdata(-table, axis=1)
    return ranks.mean(axis=0)
