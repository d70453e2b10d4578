from .events import (
    Event,
    LabelMap,
    MatchConfig,
    clip_macro_f1,
    event_based_f1,
    events_match,
    match_events,
    record_events,
)
from .intervals import IntervalSet, iou, miou, recall_at
from .report import EvalReport, evaluate_records, evaluate_task
from .rouge import rouge1, rougeL, tokenize

__all__ = [
    "EvalReport",
    "Event",
    "IntervalSet",
    "LabelMap",
    "MatchConfig",
    "clip_macro_f1",
    "evaluate_records",
    "evaluate_task",
    "event_based_f1",
    "events_match",
    "iou",
    "match_events",
    "miou",
    "recall_at",
    "record_events",
    "rouge1",
    "rougeL",
    "tokenize",
]
