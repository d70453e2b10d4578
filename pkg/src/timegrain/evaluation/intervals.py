"""Interval-set IoU, mIoU and Recall@IoU for temporal grounding."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..kernels import intersection_length

DEFAULT_THRESHOLDS = (0.5, 0.7, 0.9)
# IoU values within this distance below a threshold still count as hits
RECALL_EPS = 1e-12


class IntervalSet:
    """Sorted, pairwise-disjoint union of closed time intervals.

    Overlapping and touching inputs are merged on construction, so
    ``IntervalSet([(0, 1), (1, 2)])`` holds the single interval ``(0, 2)``.
    Zero-length intervals contribute nothing and are dropped.
    """

    __slots__ = ("starts", "ends")

    def __init__(self, intervals: Iterable[Sequence[float]] = ()):
        pairs = sorted((float(s), float(e)) for s, e in intervals)
        starts: list[float] = []
        ends: list[float] = []
        for s, e in pairs:
            if e < s:
                raise ValueError(f"interval end before start: ({s}, {e})")
            if e == s:
                continue
            if ends and s <= ends[-1]:
                if e > ends[-1]:
                    ends[-1] = e
            else:
                starts.append(s)
                ends.append(e)
        self.starts = np.array(starts, dtype=np.float64)
        self.ends = np.array(ends, dtype=np.float64)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.starts.tolist(), self.ends.tolist()))

    def length(self) -> float:
        return float((self.ends - self.starts).sum())

    def intersection_length(self, other: "IntervalSet") -> float:
        return intersection_length(self.starts, self.ends, other.starts, other.ends)

    def __len__(self) -> int:
        return self.starts.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.intervals == other.intervals

    def __repr__(self) -> str:
        return f"IntervalSet({self.intervals})"


def _as_set(x) -> IntervalSet:
    return x if isinstance(x, IntervalSet) else IntervalSet(x)


def iou(a, b) -> float:
    """Intersection over union of two interval sets; 0 when both are empty."""
    a, b = _as_set(a), _as_set(b)
    inter = a.intersection_length(b)
    union = a.length() + b.length() - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def miou(pairs: Sequence[tuple]) -> float:
    if len(pairs) == 0:
        raise ValueError("miou of an empty batch is undefined")
    return sum(iou(p, r) for p, r in pairs) / len(pairs)


def recall_from_ious(ious: Sequence[float], thresholds=DEFAULT_THRESHOLDS) -> dict[float, float]:
    if len(ious) == 0:
        raise ValueError("recall of an empty batch is undefined")
    return {t: sum(1 for v in ious if v + RECALL_EPS >= t) / len(ious) for t in thresholds}


def recall_at(pairs: Sequence[tuple], thresholds=DEFAULT_THRESHOLDS) -> dict[float, float]:
    """Fraction of (prediction, reference) pairs with IoU at or above each threshold."""
    if len(pairs) == 0:
        raise ValueError("recall of an empty batch is undefined")
    return recall_from_ious([iou(p, r) for p, r in pairs], thresholds)
