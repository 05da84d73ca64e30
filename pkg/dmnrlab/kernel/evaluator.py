"""
dmnrlab.kernel.evaluator

Runs a filter over a labelled dataset and scores every frame.

Aggregation is a micro-average: confusion counts are summed over frames and
the metrics are computed once from the sums.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from dmnrlab.kernel.errors import EmptyDatasetError, FrameError, MissingLabelsError
from dmnrlab.math.statistics import Confusion, confusion, precision_recall_f1
from dmnrlab.math.structs import Partition, PointCloud

logger = logging.getLogger(__name__)

FilterFn = Callable[[PointCloud], Partition]


class Frame(NamedTuple):
    frame_id: str
    cloud: PointCloud
    labels: Optional[np.ndarray] = None

    def load(self) -> Tuple[PointCloud, Optional[np.ndarray]]:
        labels = self.labels if self.labels is not None else self.cloud.labels
        return self.cloud, labels


@dataclass(frozen=True)
class FrameResult:
    frame_id: str
    confusion: Confusion
    precision: float
    recall: float
    f1: float
    n_points: int = 0
    runtime_s: float = 0.0


@dataclass(frozen=True)
class EvalReport:
    per_frame: Tuple[FrameResult, ...]
    aggregate: Confusion
    precision: float
    recall: float
    f1: float
    noise_class_ids: Tuple[int, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def n_frames(self) -> int:
        return len(self.per_frame)

    @property
    def total_runtime_s(self) -> float:
        return float(sum(r.runtime_s for r in self.per_frame))

    @property
    def mean_runtime_s(self) -> float:
        return self.total_runtime_s / self.n_frames if self.n_frames else 0.0


def _as_frame(i: int, item: Any):
    if hasattr(item, "load") and hasattr(item, "frame_id"):
        return item
    if isinstance(item, tuple) and len(item) == 3:
        return Frame(str(item[0]), item[1], item[2])
    if isinstance(item, tuple) and len(item) == 2:
        return Frame(f"{i:06d}", item[0], item[1])
    raise TypeError(f"cannot evaluate frame item of type {type(item).__name__}")


def evaluate_frame(frame, filter_fn: FilterFn, noise_ids: Sequence[int]) -> FrameResult:
    """Filter and score one frame; failures come back as FrameError."""
    try:
        cloud, labels = frame.load()
        if labels is None:
            raise MissingLabelsError("frame has no ground-truth labels")
        t0 = time.perf_counter()
        part = filter_fn(cloud)
        runtime = time.perf_counter() - t0
        c = confusion(part, labels, noise_ids)
    except FrameError:
        raise
    except Exception as e:
        raise FrameError(frame.frame_id, e) from e
    p, r, f1 = precision_recall_f1(c)
    logger.info(
        "frame %s: N=%d tp=%d fp=%d fn=%d P=%.4f R=%.4f F1=%.4f (%.3fs)",
        frame.frame_id, len(cloud), c.tp, c.fp, c.fn, p, r, f1, runtime,
    )
    return FrameResult(frame.frame_id, c, p, r, f1, len(cloud), runtime)


def aggregate(results: Iterable[FrameResult], noise_ids: Sequence[int], metadata: Optional[dict] = None) -> EvalReport:
    ordered = tuple(sorted(results, key=lambda r: r.frame_id))
    if not ordered:
        raise EmptyDatasetError("no frames to aggregate")
    total = Confusion()
    for r in ordered:
        total = total + r.confusion
    p, r, f1 = precision_recall_f1(total)
    return EvalReport(
        per_frame=ordered,
        aggregate=total,
        precision=p,
        recall=r,
        f1=f1,
        noise_class_ids=tuple(sorted({int(i) for i in noise_ids})),
        metadata=dict(metadata or {}),
    )


def evaluate_dataset(
    frames: Iterable[Any],
    filter_fn: FilterFn,
    noise_ids: Sequence[int],
    workers: int = 1,
    metadata: Optional[dict] = None,
) -> EvalReport:
    """
    report = evaluate_dataset(frames, filter_fn, noise_ids)

    frames : Frame objects, (cloud, labels) pairs, (id, cloud, labels)
             triples, or anything with ``frame_id`` and ``load()``
    The first failing frame (in frame-id order) aborts the run.
    """
    items: List[Any] = [_as_frame(i, f) for i, f in enumerate(frames)]
    if not items:
        raise EmptyDatasetError("evaluate_dataset needs at least one frame")
    items.sort(key=lambda f: f.frame_id)

    if workers <= 1 or len(items) == 1:
        results = [evaluate_frame(f, filter_fn, noise_ids) for f in items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(evaluate_frame, f, filter_fn, noise_ids) for f in items]
            results = [fut.result() for fut in futures]

    report = aggregate(results, noise_ids, metadata)
    logger.info(
        "dataset: %d frames P=%.4f R=%.4f F1=%.4f",
        report.n_frames, report.precision, report.recall, report.f1,
    )
    return report
