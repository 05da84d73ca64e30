import json

import numpy as np
import pytest

from dmnrlab.io.report import report_table, report_to_dict, write_csv, write_report
from dmnrlab.kernel.benchmarks import BENCHMARK_ROWS, f1_annotations, find_row
from dmnrlab.kernel.errors import EmptyDatasetError, FrameError, LengthMismatchError, MissingLabelsError
from dmnrlab.kernel.evaluator import Frame, FrameResult, aggregate, evaluate_dataset
from dmnrlab.math.statistics import Confusion, confusion, harmonic_f1, precision_recall_f1
from dmnrlab.math.structs import Partition, PointCloud

NOISE = (110,)


def cloud_with(labels):
    n = len(labels)
    return PointCloud(np.zeros((n, 3)), np.zeros(n), labels=labels)


def fixed_filter(kept):
    def run(cloud):
        return Partition(np.asarray(kept, dtype=bool))
    return run


def by_label_filter(cloud):
    """Removes every point labelled 110 except the first one."""
    removed = cloud.labels == 110
    removed[np.argmax(removed)] = False
    return Partition(~removed)


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

def test_confusion_perfect_and_null_filters():
    labels = np.full(8, 110)
    assert confusion(Partition(np.zeros(8, bool)), labels, NOISE) == Confusion(8, 0, 0, 0)
    assert confusion(Partition(np.ones(8, bool)), labels, NOISE) == Confusion(0, 0, 8, 0)


def test_confusion_six_points():
    labels = np.array([110, 110, 40, 40, 111, 50])
    kept = np.array([False, True, False, True, False, True])
    # 110 removed / kept, 40 removed / kept, 111 removed, 50 kept
    assert confusion(Partition(kept), labels, NOISE) == Confusion(tp=1, fp=2, fn=1, tn=2)
    assert confusion(Partition(kept), labels, (110, 111)) == Confusion(tp=2, fp=1, fn=1, tn=2)


def test_confusion_errors():
    with pytest.raises(MissingLabelsError):
        confusion(Partition(np.ones(3, bool)), None, NOISE)
    with pytest.raises(LengthMismatchError):
        confusion(Partition(np.ones(3, bool)), np.zeros(4), NOISE)


def test_published_f1_values():
    assert 100 * harmonic_f1(0.9182, 0.9069) == pytest.approx(91.25, abs=0.01)
    assert 100 * harmonic_f1(0.9286, 0.8988) == pytest.approx(91.35, abs=0.01)
    assert find_row("wads-snow", "DMNR").is_consistent()
    assert find_row("wads-snow", "DMNR-H").is_consistent()


def test_fog_rows_flagged():
    fog = find_row("dense-fog", "DMNR")
    assert fog.harmonic_f1 == pytest.approx(82.81, abs=0.01)
    assert not fog.is_consistent()
    notes = f1_annotations()
    assert any(n.startswith("dense-fog/DMNR:") for n in notes)
    assert any(n.startswith("dense-fog/DMNR-H:") for n in notes)
    assert not any(n.startswith("wads-snow/DMNR") for n in notes)
    assert len(BENCHMARK_ROWS) == 12


def test_zero_over_zero_is_zero():
    assert precision_recall_f1(Confusion()) == (0.0, 0.0, 0.0)
    assert precision_recall_f1(Confusion(tn=9)) == (0.0, 0.0, 0.0)
    assert precision_recall_f1(Confusion(fp=3)) == (0.0, 0.0, 0.0)


def test_confusion_addition():
    assert Confusion(1, 0, 1, 5) + Confusion(3, 2, 0, 1) == Confusion(4, 2, 1, 6)
    with pytest.raises(ValueError):
        Confusion(tp=-1)


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

def test_single_frame_aggregate_equals_frame():
    labels = np.array([110, 110, 40, 40])
    report = evaluate_dataset([(cloud_with(labels), labels)], fixed_filter([0, 1, 0, 1]), NOISE)
    (frame,) = report.per_frame
    assert report.aggregate == frame.confusion
    assert (report.precision, report.recall, report.f1) == (frame.precision, frame.recall, frame.f1)


def test_micro_aggregate_hand_sum():
    results = [
        FrameResult("a", Confusion(1, 0, 1, 0), *precision_recall_f1(Confusion(1, 0, 1, 0))),
        FrameResult("b", Confusion(3, 2, 0, 0), *precision_recall_f1(Confusion(3, 2, 0, 0))),
    ]
    report = aggregate(results, NOISE)
    assert report.aggregate == Confusion(4, 2, 1, 0)
    assert report.precision == pytest.approx(4 / 6)
    assert report.recall == pytest.approx(4 / 5)


def test_micro_average_equals_concatenated_frame():
    rng = np.random.default_rng(6)
    for case in range(100):
        frames, all_labels, all_kept = [], [], []
        for n in range(int(rng.integers(1, 7))):
            size = int(rng.integers(1, 80))
            labels = rng.choice([40, 50, 110], size=size)
            kept = rng.uniform(size=size) < rng.uniform()
            frames.append(Frame(f"f{n}", cloud_with(labels), None))
            all_labels.append(labels)
            all_kept.append(kept)
        lookup = {id(f.cloud): k for f, k in zip(frames, all_kept)}
        report = evaluate_dataset(frames, lambda c: Partition(lookup[id(c)]), NOISE, workers=1 + case % 3)

        whole = confusion(Partition(np.concatenate(all_kept)), np.concatenate(all_labels), NOISE)
        assert report.aggregate == whole
        assert (report.precision, report.recall, report.f1) == precision_recall_f1(whole)


def test_frame_order_does_not_matter():
    rng = np.random.default_rng(3)
    frames = []
    for n in range(6):
        labels = rng.choice([40, 110], size=30)
        frames.append(Frame(f"{n:03d}", cloud_with(labels)))
    a = evaluate_dataset(frames, by_label_filter, NOISE)
    b = evaluate_dataset(frames[::-1], by_label_filter, NOISE, workers=3)
    assert a.aggregate == b.aggregate
    assert [r.frame_id for r in b.per_frame] == [f"{n:03d}" for n in range(6)]


def test_empty_dataset():
    with pytest.raises(EmptyDatasetError):
        evaluate_dataset([], by_label_filter, NOISE)


def test_frame_failure_names_frame():
    good = Frame("000", cloud_with(np.array([40, 110])))
    bad = Frame("001", PointCloud(np.zeros((2, 3)), np.zeros(2)))
    with pytest.raises(FrameError) as err:
        evaluate_dataset([good, bad], by_label_filter, NOISE)
    assert err.value.frame_id == "001"
    assert isinstance(err.value.cause, MissingLabelsError)


def test_runtime_recorded():
    labels = np.array([110, 40, 40])
    report = evaluate_dataset([("x", cloud_with(labels), labels)], by_label_filter, NOISE)
    assert report.per_frame[0].runtime_s >= 0.0
    assert report.per_frame[0].n_points == 3
    assert report.mean_runtime_s == report.total_runtime_s


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def small_report():
    frames = [
        Frame("b", cloud_with(np.array([110, 110, 40, 40]))),
        Frame("a", cloud_with(np.array([110, 40, 40, 110]))),
    ]
    return evaluate_dataset(frames, by_label_filter, NOISE, metadata={"algorithm": "test"})


def test_report_document(tmp_path):
    report = small_report()
    doc = report_to_dict(report, {"K": 10})
    assert doc["metadata"]["aggregation"] == "micro"
    assert doc["metadata"]["algorithm"] == "test"
    assert doc["metadata"]["noise_class_ids"] == [110]
    assert [f["frame"] for f in doc["frames"]] == ["a", "b"]
    assert doc["aggregate"]["tp"] == 2 and doc["aggregate"]["fn"] == 2
    assert doc["params"] == {"K": 10}
    assert doc["annotations"] == f1_annotations()

    path = tmp_path / "r.json"
    write_report(report, path, {"K": 10}, runtime_fields=False)
    loaded = json.loads(path.read_text())
    assert "runtime_s" not in loaded["frames"][0]
    assert "total_runtime_s" not in loaded["aggregate"]


def test_report_table(tmp_path):
    table = report_table(small_report())
    assert list(table["frame"]) == ["a", "b", "ALL"]
    assert list(table["recall"]) == [50.0, 50.0, 50.0]

    path = tmp_path / "r.csv"
    write_csv(small_report(), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "frame,tp,fp,fn,tn,precision,recall,f1"
    assert lines[-1] == "ALL,2,0,2,4,100.00,50.00,66.67"
