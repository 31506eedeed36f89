"""Сравнение селекторов с наивной построчной реализацией."""

import numpy as np

from conftest import NEG, POS, dummy_pool, make_region, random_instance
from src.knora import run_technique
from src.models import OracleMatrix
from src.reference_oracle import reference_oracle
from src.scenario import CIRCLE, SQUARE, scenario_fixture

TECHNIQUES = ("KNORA-U", "KNORA-DBU", "KNORA-E", "KNORA-B", "KNORA-BI")


def _disagreements(pool, oracle, region, minority):
    found = []
    for technique in TECHNIQUES:
        expected = reference_oracle(None, pool, oracle, region, technique, minority)
        actual = run_technique(technique, None, pool, oracle, region, minority=minority)
        if expected != actual:
            found.append((technique, expected, actual))
    return found


def test_reference_agrees_on_scenario_fixture():
    fixture = scenario_fixture()
    for minority in (CIRCLE, SQUARE):
        assert _disagreements(fixture.pool, fixture.oracle, fixture.region, minority) == []


def test_reference_agrees_on_random_instances():
    rng = np.random.default_rng(2024)
    failures = []
    for case in range(10_000):
        pool, oracle, region, minority = random_instance(rng, max_m=10, max_v=30, max_k=7)
        found = _disagreements(pool, oracle, region, minority)
        if found:
            failures.append((case, found))
    assert failures == []


def test_reference_agrees_on_sampled_tiny_sweep():
    # M=3, V=6, K=4: 2^18 oracle-матриц, выборка из 50 000 без повторов
    m, v, k = 3, 6, 4
    rng = np.random.default_rng(7)
    codes = rng.choice(2 ** (m * v), size=50_000, replace=False)
    shifts = np.arange(m * v)
    pool = dummy_pool(m)
    failures = []
    for code in codes:
        bits = ((int(code) >> shifts) & 1).astype(bool)
        oracle = OracleMatrix(bits.reshape(m, v))
        indices = rng.choice(v, size=k, replace=False)
        labels = [POS if bit else NEG for bit in rng.random(k) < 0.5]
        region = make_region(indices, labels)
        minority = POS if rng.random() < 0.5 else NEG
        found = _disagreements(pool, oracle, region, minority)
        if found:
            failures.append((int(code), found))
    assert failures == []
