import itertools

import numpy as np
import pytest
from scipy.stats import norm, rankdata

from src.eval_stats import (
    auc,
    average_ranks,
    sign_test,
    sign_test_critical,
    wilcoxon_exact_pvalue,
    wilcoxon_signed_rank,
    win_tie_loss,
)
from src.models import ScoredPredictions, Sign, WinTieLoss


def _auc(scores, truth, positive="+"):
    return auc(ScoredPredictions(scores=np.asarray(scores, dtype=float), truth=np.asarray(truth), positive=positive))


def _pairwise_auc(scores, truth, positive):
    pos = [s for s, t in zip(scores, truth) if t == positive]
    neg = [s for s, t in zip(scores, truth) if t != positive]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


# ===== AUC =====

def test_auc_perfect_separation():
    assert _auc([0.9, 0.8, 0.2, 0.1], ["+", "+", "-", "-"]) == 1.0


def test_auc_identical_scores():
    assert _auc([0.5] * 6, ["+", "-", "+", "-", "-", "-"]) == 0.5


def test_auc_worked_example():
    assert _auc([0.9, 0.8, 0.7, 0.6], ["+", "-", "+", "-"]) == pytest.approx(0.75)


def test_auc_single_class():
    with pytest.raises(ValueError):
        _auc([0.1, 0.2], ["+", "+"])


def test_auc_matches_pairwise_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        # округление даёт связки
        scores = np.round(rng.random(n), int(rng.integers(1, 4)))
        truth = np.where(rng.random(n) < 0.4, "+", "-")
        truth[0], truth[1] = "+", "-"
        assert abs(_auc(scores, truth) - _pairwise_auc(scores, truth, "+")) <= 1e-12


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(1)
    scores = rng.random(50)
    truth = np.where(rng.random(50) < 0.3, "+", "-")
    truth[0], truth[1] = "+", "-"
    assert _auc(scores, truth) == pytest.approx(_auc(np.exp(3 * scores) - 7, truth), abs=1e-12)


def test_auc_label_flip_sums_to_one():
    rng = np.random.default_rng(2)
    scores = np.round(rng.random(30), 1)
    truth = np.where(rng.random(30) < 0.5, "+", "-")
    truth[0], truth[1] = "+", "-"
    assert _auc(scores, truth, "+") + _auc(scores, truth, "-") == pytest.approx(1.0, abs=1e-12)


# ===== Wilcoxon =====

def _enumerated_pvalue(diff):
    """P(W+ >= наблюдаемого) перебором всех 2^n знаков."""
    diff = np.asarray(diff, dtype=float)
    diff = diff[diff != 0]
    ranks = rankdata(np.abs(diff))
    observed = ranks[diff > 0].sum()
    hits = 0
    for signs in itertools.product((0, 1), repeat=len(ranks)):
        if (ranks * np.array(signs)).sum() >= observed - 1e-9:
            hits += 1
    return hits / 2 ** len(ranks)


def test_wilcoxon_equal_vectors():
    a = [0.7, 0.8, 0.9, 0.6, 0.5]
    verdict = wilcoxon_signed_rank(a, a)
    assert verdict.p_value == 1.0
    assert verdict.sign is Sign.EQUAL


def test_wilcoxon_uniform_improvement():
    rng = np.random.default_rng(3)
    b = rng.random(40)
    verdict = wilcoxon_signed_rank(b + 0.01, b)
    assert verdict.p_value < 0.001
    assert verdict.sign is Sign.BETTER
    assert verdict.method == "normal"


def test_wilcoxon_ten_pairs_matches_enumeration():
    a = np.array([125, 115, 130, 140, 140, 115, 140, 125, 140, 135], dtype=float)
    b = np.array([110, 122, 125, 120, 140, 124, 123, 137, 135, 145], dtype=float)
    verdict = wilcoxon_signed_rank(a, b)
    assert verdict.method == "exact"
    assert verdict.p_value == pytest.approx(_enumerated_pvalue(a - b), abs=1e-3)


def test_wilcoxon_exact_matches_enumeration_for_small_n():
    rng = np.random.default_rng(4)
    for _ in range(40):
        n = int(rng.integers(5, 13))
        # округление даёт связки модулей
        diff = np.round(rng.normal(0.2, 1.0, n), 1)
        if np.count_nonzero(diff) < 5:
            continue
        verdict = wilcoxon_signed_rank(diff, np.zeros(n))
        assert verdict.p_value == pytest.approx(_enumerated_pvalue(diff), abs=1e-3)


def test_wilcoxon_normal_branch_uses_tie_corrected_variance():
    rng = np.random.default_rng(8)
    diff = np.round(rng.normal(0.3, 1.0, 40), 1)
    diff = diff[diff != 0.0]
    n = diff.size
    assert n > 15
    ranks = rankdata(np.abs(diff))
    w_plus = ranks[diff > 0].sum()
    _, tie_counts = np.unique(np.abs(diff), return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
    expected = norm.sf((w_plus - n * (n + 1) / 4.0) / np.sqrt(variance))

    verdict = wilcoxon_signed_rank(diff, np.zeros(n))
    assert verdict.method == "normal"
    assert verdict.statistic == w_plus
    assert verdict.p_value == pytest.approx(expected, abs=1e-12)


def test_wilcoxon_exact_pvalue_extremes():
    ranks = [1.0, 2.0, 3.0, 4.0, 5.0]
    assert wilcoxon_exact_pvalue(15.0, ranks) == pytest.approx(1 / 32)
    assert wilcoxon_exact_pvalue(0.0, ranks) == 1.0


def test_wilcoxon_direction_is_antisymmetric():
    rng = np.random.default_rng(5)
    for _ in range(30):
        a = rng.random(20)
        b = a + rng.normal(0.05, 0.05, 20)
        forward = wilcoxon_signed_rank(a, b).sign
        backward = wilcoxon_signed_rank(b, a).sign
        assert backward is forward.flipped()


def test_wilcoxon_rejects_too_few_pairs():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])


def test_wilcoxon_rejects_length_mismatch():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([1.0, 2.0], [1.0])


# ===== Sign test =====

@pytest.mark.parametrize("alpha, expected", [(0.10, 24.05), (0.05, 25.20), (0.01, 27.37)])
def test_sign_test_critical_constants(alpha, expected):
    assert sign_test_critical(40, alpha) == pytest.approx(expected, abs=0.01)


def test_sign_test_critical_other_alpha_uses_normal_quantile():
    assert sign_test_critical(40, 0.025) == pytest.approx(20 + 1.959964 * np.sqrt(40) / 2, abs=1e-4)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.7, -0.1])
def test_sign_test_critical_rejects_alpha(alpha):
    with pytest.raises(ValueError):
        sign_test_critical(40, alpha)


def test_sign_test_reject_at_005():
    assert sign_test(WinTieLoss(wins=26, ties=0, losses=14), 0.05).sign is Sign.BETTER


def test_sign_test_twenty_wins_never_rejects():
    for alpha in (0.10, 0.05, 0.01):
        assert sign_test(WinTieLoss(wins=20, ties=0, losses=20), alpha).sign is Sign.EQUAL


def test_sign_test_ties_count_half():
    wtl = WinTieLoss(wins=24, ties=3, losses=13)
    assert wtl.score == 25.5
    assert sign_test(wtl, 0.05).sign is Sign.BETTER
    assert sign_test(wtl, 0.01).sign is Sign.EQUAL


def test_sign_test_losses_give_minus():
    assert sign_test(WinTieLoss(wins=5, ties=0, losses=35), 0.05).sign is Sign.WORSE


def test_win_tie_loss_counts():
    wtl = win_tie_loss([0.9, 0.5, 0.3, 0.7], [0.8, 0.5, 0.4, 0.1])
    assert (wtl.wins, wtl.ties, wtl.losses, wtl.n_exp) == (2, 1, 1, 4)


# ===== ранги =====

def test_average_ranks_dominant_technique():
    table = np.array([[0.9, 0.8], [0.7, 0.6], [0.95, 0.5]])
    np.testing.assert_allclose(average_ranks(table), [1.0, 2.0])


def test_average_ranks_ties():
    np.testing.assert_allclose(average_ranks(np.array([[0.7, 0.7], [0.5, 0.5]])), [1.5, 1.5])


def test_average_ranks_hand_enumerated():
    table = np.array([
        [0.9, 0.8, 0.7],
        [0.6, 0.8, 0.8],
        [0.5, 0.9, 0.4],
    ])
    # строки: (1, 2, 3), (3, 1.5, 1.5), (2, 1, 3)
    np.testing.assert_allclose(average_ranks(table), [2.0, 4.5 / 3, 7.5 / 3])


def test_average_ranks_row_sums():
    rng = np.random.default_rng(6)
    table = np.round(rng.random((12, 5)), 1)
    ranks = rankdata(-table, axis=1)
    np.testing.assert_allclose(ranks.sum(axis=1), 5 * 6 / 2)
    assert average_ranks(table).sum() == pytest.approx(15.0)


def test_average_ranks_rejects_nan():
    with pytest.raises(ValueError):
        average_ranks(np.array([[0.5, np.nan]]))
