"""
Partition files: one uint8 per point.

bit 0     : 1 = kept, 0 = outlier
bits 1..3 : Stage code (0 untagged, 1 height retained, 2 density retained,
            3 density rejected, 4 rescued)
"""

from pathlib import Path

import numpy as np

from dmnrlab.kernel.errors import LengthMismatchError
from dmnrlab.math.structs import Partition, Verdict


def encode_partition(part: Partition) -> np.ndarray:
    codes = part.verdicts
    if part.stages is not None:
        codes |= (part.stages.astype(np.uint8) & 0x7) << 1
    return codes


def decode_partition(codes) -> Partition:
    codes = np.asarray(codes, dtype=np.uint8)
    kept = (codes & 1) == Verdict.KEPT
    stages = (codes >> 1) & 0x7
    return Partition(kept, stages.astype(np.int8) if stages.any() else None)


def write_mask(part: Partition, path) -> None:
    Path(path).write_bytes(encode_partition(part).tobytes())


def read_mask(path, n=None) -> Partition:
    codes = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    if n is not None and codes.shape[0] != n:
        raise LengthMismatchError(f"{path}: {codes.shape[0]} verdicts for {n} points")
    return decode_partition(codes)
