"""
Published de-noising figures for DMNR, DMNR-H and the classical filters,
plus a consistency check of each row's F1 against its precision/recall.

All values are percentages.
"""

from dataclasses import dataclass
from typing import List, Tuple

from dmnrlab.math.statistics import harmonic_f1

F1_TOLERANCE = 0.01


@dataclass(frozen=True)
class BenchmarkRow:
    dataset: str
    method: str
    precision: float
    recall: float
    f1: float

    @property
    def harmonic_f1(self) -> float:
        return 100.0 * harmonic_f1(self.precision / 100.0, self.recall / 100.0)

    @property
    def f1_gap(self) -> float:
        return self.f1 - self.harmonic_f1

    def is_consistent(self, tol: float = F1_TOLERANCE) -> bool:
        return abs(self.f1_gap) <= tol + 1e-9


BENCHMARK_ROWS: Tuple[BenchmarkRow, ...] = (
    BenchmarkRow("wads-snow", "DSOR", 65.07, 95.60, 77.43),
    BenchmarkRow("wads-snow", "DDIOR", 69.87, 95.23, 80.60),
    BenchmarkRow("wads-snow", "DMNR", 91.82, 90.69, 91.25),
    BenchmarkRow("wads-snow", "DMNR-H", 92.86, 89.88, 91.35),
    BenchmarkRow("dense-snow", "DSOR", 5.60, 98.37, 10.60),
    BenchmarkRow("dense-snow", "DDIOR", 18.38, 91.47, 30.60),
    BenchmarkRow("dense-snow", "DMNR", 80.25, 61.61, 69.71),
    BenchmarkRow("dense-snow", "DMNR-H", 83.52, 60.03, 69.86),
    BenchmarkRow("dense-fog", "DSOR", 23.74, 99.99, 38.37),
    BenchmarkRow("dense-fog", "DDIOR", 26.47, 99.88, 41.85),
    BenchmarkRow("dense-fog", "DMNR", 82.36, 83.26, 81.73),
    BenchmarkRow("dense-fog", "DMNR-H", 83.49, 82.36, 81.77),
)


def find_row(dataset: str, method: str) -> BenchmarkRow:
    for row in BENCHMARK_ROWS:
        if row.dataset == dataset and row.method == method:
            return row
    raise KeyError(f"no published row for {method} on {dataset}")


def f1_annotations(tol: float = F1_TOLERANCE) -> List[str]:
    """One note per published row whose F1 is not the harmonic mean of its P/R."""
    notes = []
    for row in BENCHMARK_ROWS:
        if not row.is_consistent(tol):
            notes.append(
                f"{row.dataset}/{row.method}: published F1 {row.f1:.2f} but "
                f"P={row.precision:.2f} R={row.recall:.2f} give {row.harmonic_f1:.2f}"
            )
    return notes
