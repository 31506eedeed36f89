from pathlib import Path

import numpy as np
import pytest

from src.dataset import (
    MinMaxScaler,
    imbalance_summary,
    load_csv,
    load_dataset,
    load_keel,
    minmax_normalize,
    split_parts,
    stratified_nested_split,
    write_csv,
    write_keel,
)
from src.models import DataError, Dataset
from src.synthetic import make_imbalanced_blobs

KEEL_HEADER = """@relation toy
@attribute a real [0.0, 1.0]
@attribute b real [0.0, 1.0]
@attribute cls {yes, no}
@inputs a, b
@outputs cls
@data
"""


def _write(tmp_path: Path, name: str, text: str) -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ===== KEEL =====

def test_glass_fixture_shape(glass_path):
    dataset = load_keel(glass_path)
    assert dataset.n_samples == 10
    assert dataset.n_features == 9
    assert dataset.classes == ["negative", "positive"]
    assert dataset.metadata["relation"] == "glass1"
    summary = imbalance_summary(dataset)
    assert summary.minority == "positive"
    assert summary.majority == "negative"
    assert summary.ir == pytest.approx(6 / 4)


def test_keel_keywords_are_case_insensitive_and_comments_skipped(tmp_path):
    text = (
        "% комментарий\n"
        "@RELATION toy\n"
        "@Attribute a REAL [0.0, 1.0]\n"
        "@ATTRIBUTE cls {yes, no}\n"
        "@DATA\n"
        "% ещё комментарий\n"
        "0.5, yes\n"
        "0.25, no\n"
    )
    dataset = load_keel(_write(tmp_path, "toy.dat", text))
    assert dataset.n_features == 1
    np.testing.assert_array_equal(dataset.features[:, 0], [0.5, 0.25])
    assert list(dataset.labels) == ["yes", "no"]


def test_keel_malformed_header(tmp_path):
    path = _write(tmp_path, "bad.dat", "@relation x\n@attribute a strange\n@data\n1, yes\n")
    with pytest.raises(DataError, match="malformed header"):
        load_keel(path)


def test_keel_missing_data_section(tmp_path):
    path = _write(tmp_path, "bad.dat", "@relation x\n@attribute a real\n@attribute c {y, n}\n")
    with pytest.raises(DataError, match="malformed header"):
        load_keel(path)


def test_keel_empty_data_section(tmp_path):
    with pytest.raises(DataError, match="empty data section"):
        load_keel(_write(tmp_path, "empty.dat", KEEL_HEADER))


def test_keel_non_numeric_cell(tmp_path):
    path = _write(tmp_path, "bad.dat", KEEL_HEADER + "0.1, abc, yes\n0.2, 0.3, no\n")
    with pytest.raises(DataError, match="non-numeric"):
        load_keel(path)


def test_keel_non_binary(tmp_path):
    path = _write(tmp_path, "three.dat", KEEL_HEADER + "0.1, 0.2, yes\n0.2, 0.3, no\n0.3, 0.4, maybe\n")
    with pytest.raises(DataError, match="non-binary"):
        load_keel(path)


def test_keel_single_class_is_non_binary(tmp_path):
    path = _write(tmp_path, "one.dat", KEEL_HEADER + "0.1, 0.2, yes\n0.2, 0.3, yes\n")
    with pytest.raises(DataError, match="non-binary"):
        load_keel(path)


def test_keel_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_keel(tmp_path / "nope.dat")


# ===== CSV =====

def test_csv_default_label_is_last_column(tmp_path):
    path = _write(tmp_path, "toy.csv", "a,b,label\n0.1,0.2,yes\n0.3,0.4,no\n")
    dataset = load_csv(path)
    assert dataset.n_features == 2
    assert list(dataset.labels) == ["yes", "no"]


def test_csv_label_column_by_name(tmp_path):
    path = _write(tmp_path, "toy.csv", "label,a\nyes,0.1\nno,0.3\n")
    dataset = load_csv(path, label_column="label")
    np.testing.assert_array_equal(dataset.features[:, 0], [0.1, 0.3])


def test_csv_missing_column(tmp_path):
    path = _write(tmp_path, "toy.csv", "a,label\n0.1,yes\n0.3,no\n")
    with pytest.raises(DataError, match="missing column"):
        load_csv(path, label_column="target")


@pytest.mark.parametrize("bad", ["nan", "inf"])
def test_csv_non_finite_feature(tmp_path, bad):
    path = _write(tmp_path, "toy.csv", f"a,label\n{bad},yes\n0.3,no\n")
    with pytest.raises(DataError, match="non-finite feature"):
        load_csv(path)


def test_keel_and_csv_parse_identical_values(tmp_path):
    rows = [("0.1", "1e-3", "yes"), ("3.14159265358979", "-2.5", "no"), ("0.30000000000000004", "7", "yes")]
    keel = _write(tmp_path, "same.dat", KEEL_HEADER + "".join(f"{a}, {b}, {c}\n" for a, b, c in rows))
    csv = _write(tmp_path, "same.csv", "a,b,cls\n" + "".join(f"{a},{b},{c}\n" for a, b, c in rows))
    from_keel = load_keel(keel)
    from_csv = load_csv(csv)
    assert from_keel.features.tobytes() == from_csv.features.tobytes()
    np.testing.assert_array_equal(from_keel.labels, from_csv.labels)


def test_load_dataset_dispatches_on_extension(tmp_path, glass_path):
    assert load_dataset(glass_path).n_features == 9
    csv = _write(tmp_path, "toy.csv", "a,label\n0.1,yes\n0.3,no\n")
    assert load_dataset(csv).n_features == 1


def test_writers_load_back_equal(tmp_path, blobs):
    keel_path = write_keel(blobs, tmp_path / f"{blobs.name}.dat")
    csv_path = write_csv(blobs, tmp_path / f"{blobs.name}.csv")
    assert load_keel(keel_path) == blobs
    assert load_csv(csv_path) == blobs


# ===== Dataset и сводка =====

def test_dataset_rejects_label_count_mismatch():
    with pytest.raises(DataError, match="dimension mismatch"):
        Dataset(features=np.zeros((3, 2)), labels=np.array(["a", "b"]))


def test_imbalance_summary_tie_picks_smaller_label():
    dataset = Dataset(features=np.zeros((4, 1)), labels=np.array(["b", "a", "b", "a"]))
    summary = imbalance_summary(dataset)
    assert summary.minority == "a"
    assert summary.majority == "b"
    assert summary.ir == 1.0


# ===== Нормализация =====

def test_minmax_maps_train_to_unit_interval():
    features = np.array([[1.0, 5.0, 2.0], [3.0, 5.0, 4.0], [2.0, 5.0, 3.0]])
    dataset = Dataset(features=features, labels=np.array(["a", "b", "a"]))
    normalized = minmax_normalize(dataset)
    assert normalized.features.min() == 0.0
    assert normalized.features.max() == 1.0
    # постоянный столбец -> 0
    np.testing.assert_array_equal(normalized.features[:, 1], [0.0, 0.0, 0.0])


def test_minmax_does_not_clip_held_out_data():
    scaler = MinMaxScaler.fit(np.array([[0.0], [10.0]]))
    np.testing.assert_allclose(scaler.transform(np.array([[-5.0], [20.0]]))[:, 0], [-0.5, 2.0])


def test_minmax_dimension_mismatch():
    scaler = MinMaxScaler.fit(np.zeros((2, 2)))
    with pytest.raises(DataError, match="dimension mismatch"):
        scaler.transform(np.zeros((2, 3)))


def test_minmax_constant_train_column_maps_held_out_data_to_zero():
    scaler = MinMaxScaler.fit(np.array([[1.0, 5.0], [3.0, 5.0]]))
    np.testing.assert_allclose(scaler.transform(np.array([[2.0, 9.0], [4.0, -1.0]])), [[0.5, 0.0], [1.5, 0.0]])


def test_minmax_random_matrix_unit_interval_and_order():
    rng = np.random.default_rng(12)
    features = rng.normal(3.0, 10.0, size=(10, 3))
    normalized = minmax_normalize(Dataset(features=features, labels=np.array(["a", "b"] * 5))).features
    assert normalized.min() >= 0.0
    assert normalized.max() <= 1.0 + 1e-12
    np.testing.assert_allclose(normalized.min(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(normalized.max(axis=0), 1.0, atol=1e-12)
    for column in range(3):
        np.testing.assert_array_equal(np.argsort(normalized[:, column]), np.argsort(features[:, column]))
        expected = (features[:, column] - features[:, column].min()) / np.ptp(features[:, column])
        np.testing.assert_allclose(normalized[:, column], expected, atol=1e-12)


def test_minmax_is_idempotent():
    rng = np.random.default_rng(13)
    dataset = Dataset(features=rng.random((10, 3)) * 50 - 7, labels=np.array(["a", "b"] * 5))
    once = minmax_normalize(dataset)
    twice = minmax_normalize(once)
    np.testing.assert_allclose(twice.features, once.features, atol=1e-12)


# ===== Разбиение =====

def test_nested_split_has_twenty_disjoint_replications(blobs):
    plan = stratified_nested_split(blobs, seed=7)
    assert len(plan) == 20
    everything = np.arange(blobs.n_samples)
    for replication in plan.replications:
        parts = np.concatenate([replication.train, replication.validation, replication.test])
        np.testing.assert_array_equal(np.sort(parts), everything)


def test_nested_split_outer_test_folds_partition_dataset(blobs):
    plan = stratified_nested_split(blobs, seed=7)
    tests = {tuple(r.test) for r in plan.replications}
    assert len(tests) == 5
    covered = np.sort(np.concatenate([np.asarray(t) for t in tests]))
    np.testing.assert_array_equal(covered, np.arange(blobs.n_samples))


def test_nested_split_is_stratified(blobs):
    plan = stratified_nested_split(blobs, seed=11)
    totals = blobs.class_counts()
    for replication in plan.replications:
        train, validation, test = split_parts(blobs, replication)
        for label, total in totals.items():
            assert abs(test.class_counts().get(label, 0) - total / 5) <= 1
            assert abs(validation.class_counts().get(label, 0) - total / 5) <= 1
            assert abs(train.class_counts().get(label, 0) - total * 3 / 5) <= 2


def test_nested_split_is_deterministic(blobs):
    assert stratified_nested_split(blobs, seed=5).replications == stratified_nested_split(blobs, seed=5).replications
    assert stratified_nested_split(blobs, seed=5).replications != stratified_nested_split(blobs, seed=6).replications


@pytest.mark.parametrize("n_samples, ir, seed", [(200, 4.0, 0), (157, 2.5, 1), (333, 9.0, 2), (101, 1.0, 3)])
def test_nested_split_proportions_within_one_over_part_size(n_samples, ir, seed):
    dataset = make_imbalanced_blobs(n_samples=n_samples, ir=ir, seed=seed)
    totals = dataset.class_counts()
    full = {label: count / dataset.n_samples for label, count in totals.items()}
    for replication in stratified_nested_split(dataset, seed=seed).replications:
        train, validation, test = split_parts(dataset, replication)
        for label in totals:
            for part in (validation, test):
                proportion = part.class_counts().get(label, 0) / part.n_samples
                assert abs(proportion - full[label]) <= 1.0 / part.n_samples
            # train собирает остатки округления обоих уровней
            proportion = train.class_counts().get(label, 0) / train.n_samples
            assert abs(proportion - full[label]) <= 2.0 / train.n_samples


def test_nested_split_seeds_give_distinct_plans(blobs):
    signatures = set()
    for seed in range(100):
        plan = stratified_nested_split(blobs, seed=seed)
        signatures.add(tuple(tuple(r.validation.tolist()) + tuple(r.test.tolist()) for r in plan.replications))
    assert len(signatures) >= 99


def test_nested_split_iris_sized_keeps_two_to_one():
    # 150 образцов, IR 2.00
    labels = np.array(["negative"] * 100 + ["positive"] * 50)
    features = np.random.default_rng(0).random((150, 4))
    dataset = Dataset(features=features, labels=labels, name="iris0")
    assert imbalance_summary(dataset).ir == 2.0
    plan = stratified_nested_split(dataset, seed=0)
    assert len(plan) == 20
    for replication in plan.replications:
        counts = dataset.subset(replication.test).class_counts()
        assert sum(counts.values()) == 30
        assert abs(counts["negative"] - 2 * counts["positive"]) <= 1


def test_nested_split_insufficient_minority():
    labels = np.array(["a"] * 20 + ["b"] * 4)
    dataset = Dataset(features=np.arange(24, dtype=float), labels=labels)
    with pytest.raises(DataError, match="insufficient minority samples"):
        stratified_nested_split(dataset)
