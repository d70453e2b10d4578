"""Event-based F1 with onset/offset collars and clip-level macro F1."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from ..errors import ConfigError, InputError
from ..grammar import SampleRecord

OTHER = "other"


@dataclass(frozen=True)
class MatchConfig:
    onset_collar: float = 0.2
    offset_tolerance_fraction: float = 0.2

    def __post_init__(self):
        if self.onset_collar < 0 or self.offset_tolerance_fraction < 0:
            raise ValueError("collars must be non-negative")


@dataclass(frozen=True)
class Event:
    onset: float
    offset: float
    label: str


class LabelMap:
    """Ordered ``regex -> category`` table; the first matching pattern wins.

    Patterns are matched case-insensitively anywhere in the caption. Captions
    that match nothing fall into ``"other"``.
    """

    def __init__(self, patterns: Iterable[tuple[str, str]] = ()):
        self.patterns = [(p, c) for p, c in patterns]
        try:
            self._compiled = [(re.compile(p, re.IGNORECASE), c) for p, c in self.patterns]
        except re.error as exc:
            raise ConfigError(f"bad label pattern: {exc}") from None

    def categorize(self, caption: str) -> str:
        for rx, cat in self._compiled:
            if rx.search(caption):
                return cat
        return OTHER

    __call__ = categorize

    @classmethod
    def from_json(cls, obj) -> "LabelMap":
        items = obj.get("patterns", obj) if isinstance(obj, dict) else obj
        if isinstance(items, dict):
            items = list(items.items())
        try:
            return cls((str(p), str(c)) for p, c in items)
        except (TypeError, ValueError):
            raise ConfigError("label map must be a list of [pattern, category] pairs") from None

    @classmethod
    def load(cls, path: str | Path | None = None) -> "LabelMap":
        if path is None:
            text = resources.files("timegrain").joinpath("data/label_map.json").read_text("utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        try:
            return cls.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path or 'default label map'}: {exc}") from None


def event_category(ev, categorize: Callable[[str], str] | None) -> str:
    if ev.label:
        return ev.label
    return categorize(ev.caption) if categorize is not None else OTHER


def record_events(rec: SampleRecord, categorize: Callable[[str], str] | None = None) -> list[Event]:
    """Flatten a record into one labelled event per interval."""
    out = []
    for ev in rec.events:
        label = event_category(ev, categorize)
        for s, e in ev.intervals:
            out.append(Event(float(s), float(e), label))
    return out


def events_match(pred: Event, ref: Event, cfg: MatchConfig) -> bool:
    if pred.label != ref.label:
        return False
    if abs(pred.onset - ref.onset) > cfg.onset_collar:
        return False
    tol = max(cfg.onset_collar, cfg.offset_tolerance_fraction * (ref.offset - ref.onset))
    return abs(pred.offset - ref.offset) <= tol


def match_events(preds: Sequence[Event], refs: Sequence[Event], cfg: MatchConfig) -> list[tuple[int, int]]:
    """Maximum one-to-one matching between predicted and reference events.

    Both lists are visited in onset order and augmenting paths are tried
    greedily, so the result is a maximum-cardinality matching that does not
    depend on input order. Returns ``(pred_index, ref_index)`` pairs.
    """
    p_order = sorted(range(len(preds)), key=lambda i: (preds[i].onset, preds[i].offset, preds[i].label))
    r_order = sorted(range(len(refs)), key=lambda j: (refs[j].onset, refs[j].offset, refs[j].label))
    adj = {j: [i for i in p_order if events_match(preds[i], refs[j], cfg)] for j in r_order}
    owner: dict[int, int] = {}

    def augment(j: int, seen: set[int]) -> bool:
        for i in adj[j]:
            if i in seen:
                continue
            seen.add(i)
            if i not in owner or augment(owner[i], seen):
                owner[i] = j
                return True
        return False

    for j in r_order:
        augment(j, set())
    return sorted(owner.items(), key=lambda pr: pr[1])


def _prf(tp: int, n_pred: int, n_ref: int) -> tuple[float, float, float]:
    if n_pred == 0 and n_ref == 0:
        return 1.0, 1.0, 1.0
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_ref if n_ref else 0.0
    f = 2 * tp / (n_pred + n_ref)
    return p, r, f


def _index(records: Sequence[SampleRecord], what: str) -> dict[str, SampleRecord]:
    out: dict[str, SampleRecord] = {}
    dupes = []
    for rec in records:
        if rec.id in out:
            dupes.append(rec.id)
        out[rec.id] = rec
    if dupes:
        raise InputError(f"duplicate {what} ids: {sorted(set(dupes))}", sorted(set(dupes)))
    return out


def event_counts(pred: SampleRecord | None, ref: SampleRecord, cfg: MatchConfig,
                 categorize: Callable[[str], str] | None = None) -> tuple[int, int, int]:
    """(matches, n_pred, n_ref) for one clip."""
    pe = record_events(pred, categorize) if pred is not None else []
    re_ = record_events(ref, categorize)
    return len(match_events(pe, re_, cfg)), len(pe), len(re_)


def event_based_f1(preds: Sequence[SampleRecord], refs: Sequence[SampleRecord],
                   cfg: MatchConfig = MatchConfig(),
                   categorize: Callable[[str], str] | None = None) -> tuple[float, float, float]:
    """Micro-averaged event-based (precision, recall, F1) over all clips."""
    p_by_id = _index(preds, "prediction")
    r_by_id = _index(refs, "reference")
    extra = sorted(set(p_by_id) - set(r_by_id))
    if extra:
        raise InputError(f"predictions without references: {extra}", extra)
    tp = n_pred = n_ref = 0
    for rid, ref in r_by_id.items():
        m, npred, nref = event_counts(p_by_id.get(rid), ref, cfg, categorize)
        tp += m
        n_pred += npred
        n_ref += nref
    return _prf(tp, n_pred, n_ref)


def clip_categories(rec: SampleRecord | None, categorize: Callable[[str], str] | None) -> set[str]:
    if rec is None:
        return set()
    return {event_category(ev, categorize) for ev in rec.events if ev.intervals}


def clip_macro_f1(preds: Sequence[SampleRecord], refs: Sequence[SampleRecord],
                  label_map: Mapping[str, str] | LabelMap | Callable[[str], str] | None = None) -> float:
    """Macro F1 over categories of clip-level presence/absence tagging."""
    if isinstance(label_map, Mapping):
        label_map = LabelMap(label_map.items())
    p_by_id = _index(preds, "prediction")
    r_by_id = _index(refs, "reference")
    per_clip = [
        (clip_categories(p_by_id.get(rid), label_map), clip_categories(ref, label_map))
        for rid, ref in r_by_id.items()
    ]
    categories = sorted(set().union(*(p | r for p, r in per_clip))) if per_clip else []
    if not categories:
        return 1.0
    scores = []
    for cat in categories:
        tp = sum(1 for p, r in per_clip if cat in p and cat in r)
        fp = sum(1 for p, r in per_clip if cat in p and cat not in r)
        fn = sum(1 for p, r in per_clip if cat not in p and cat in r)
        scores.append(2 * tp / (2 * tp + fp + fn))
    return sum(scores) / len(scores)
