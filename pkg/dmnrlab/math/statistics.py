# dmnrlab/math/statistics.py
"""
Point-wise scoring of a filter against ground-truth noise labels.

A positive is a point the filter REMOVED. So:
    tp = removed noise      fp = removed clean
    fn = kept noise         tn = kept clean
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from dmnrlab.kernel.errors import LengthMismatchError, MissingLabelsError
from dmnrlab.math.structs import Partition


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(
            self.tp + other.tp, self.fp + other.fp,
            self.fn + other.fn, self.tn + other.tn,
        )

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def noise_mask(labels, noise_ids: Iterable[int]) -> np.ndarray:
    """Boolean mask of points whose class id is in ``noise_ids``."""
    return np.isin(np.asarray(labels, dtype=np.int64), sorted({int(i) for i in noise_ids}))


def confusion(partition: Partition, labels: Optional[np.ndarray], noise_ids: Iterable[int]) -> Confusion:
    """
    c = confusion(partition, labels, noise_ids)
    Count removed/kept points against the noise classes.
    """
    if labels is None:
        raise MissingLabelsError("confusion needs ground-truth labels")
    labels = np.asarray(labels)
    if labels.shape[0] != len(partition):
        raise LengthMismatchError(
            f"{labels.shape[0]} labels for a partition of {len(partition)} points"
        )
    noise = noise_mask(labels, noise_ids)
    removed = partition.outlier
    return Confusion(
        tp=int(np.count_nonzero(removed & noise)),
        fp=int(np.count_nonzero(removed & ~noise)),
        fn=int(np.count_nonzero(~removed & noise)),
        tn=int(np.count_nonzero(~removed & ~noise)),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def harmonic_f1(precision: float, recall: float) -> float:
    """F1 = 2 / (1/recall + 1/precision); 0 if either side is 0."""
    if precision <= 0 or recall <= 0:
        return 0.0
    return 2.0 / (1.0 / recall + 1.0 / precision)


def precision_recall_f1(c: Confusion) -> Tuple[float, float, float]:
    """
    p, r, f1 = precision_recall_f1(c)
    Any 0/0 ratio is reported as 0.
    """
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    return precision, recall, harmonic_f1(precision, recall)
