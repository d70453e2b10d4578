"""Per-task metric bundles and their JSON / text renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..errors import InputError
from ..grammar import PredictionRecord, SampleRecord, Task, iter_jsonl, parse_prediction
from .events import LabelMap, MatchConfig, clip_macro_f1, event_counts, _prf
from .intervals import DEFAULT_THRESHOLDS, IntervalSet, iou, recall_from_ious
from .rouge import rouge1, rougeL

DIGITS = 10


def _round(x: float) -> float:
    return round(float(x), DIGITS) + 0.0


@dataclass
class EvalReport:
    task: Task
    n_samples: int
    metrics: dict[str, float]
    per_sample: list[dict] | None = None
    notes: list[str] = field(default_factory=list)
    missing_predictions: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "task": self.task.value,
            "n_samples": self.n_samples,
            "metrics": {k: _round(v) for k, v in self.metrics.items()},
            "config": self.config,
            "notes": list(self.notes),
            "missing_predictions": list(self.missing_predictions),
        }
        if self.per_sample is not None:
            out["per_sample"] = [
                {k: (_round(v) if isinstance(v, float) else v) for k, v in row.items()}
                for row in self.per_sample
            ]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def table(self) -> str:
        names = list(self.metrics)
        width = max([len(n) for n in names] + [6])
        lines = [f"task: {self.task.value}   samples: {self.n_samples}", "-" * (width + 12)]
        for n in names:
            lines.append(f"{n:<{width}}  {100 * self.metrics[n]:>8.2f}")
        return "\n".join(lines) + "\n"


def _text(rec: SampleRecord | None) -> str:
    if rec is None:
        return ""
    return " ".join(ev.caption for ev in rec.events if ev.caption)


def _union(rec: SampleRecord | None) -> IntervalSet:
    if rec is None:
        return IntervalSet()
    return IntervalSet(iv for ev in rec.events for iv in ev.intervals)


def _check_inputs(preds: Sequence[SampleRecord], refs: Sequence[SampleRecord], task: Task):
    if not refs:
        raise InputError("no reference records to evaluate")
    r_by_id: dict[str, SampleRecord] = {}
    p_by_id: dict[str, SampleRecord] = {}
    for what, recs, index in (("reference", refs, r_by_id), ("prediction", preds, p_by_id)):
        dupes = sorted({r.id for i, r in enumerate(recs) if r.id in {x.id for x in recs[:i]}})
        if dupes:
            raise InputError(f"duplicate {what} ids: {dupes}", dupes)
        wrong = sorted(r.id for r in recs if r.task is not task)
        if wrong:
            raise InputError(f"{what} records with a task other than {task.value}: {wrong}", wrong)
        index.update((r.id, r) for r in recs)
    extra = sorted(set(p_by_id) - set(r_by_id))
    if extra:
        raise InputError(f"prediction ids missing from references: {extra}", extra)
    missing = sorted(set(r_by_id) - set(p_by_id))
    return p_by_id, r_by_id, missing


def evaluate_records(
    preds: Sequence[SampleRecord],
    refs: Sequence[SampleRecord],
    task: Task | str,
    cfg: MatchConfig = MatchConfig(),
    label_map: LabelMap | None = None,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> EvalReport:
    """Score predictions against references for one task.

    References without a prediction are scored as empty predictions and
    listed in ``missing_predictions``; predictions without a reference are
    an :class:`InputError`.
    """
    task = Task.parse(task)
    p_by_id, r_by_id, missing = _check_inputs(preds, refs, task)
    ids = [r.id for r in refs]
    rows: list[dict] = []
    metrics: dict[str, float] = {}
    notes: list[str] = []
    config: dict = {}

    if task is Task.DENSE_CAPTION:
        label_map = label_map if label_map is not None else LabelMap.load()
        tp = n_pred = n_ref = 0
        for rid in ids:
            m, npred, nref = event_counts(p_by_id.get(rid), r_by_id[rid], cfg, label_map)
            tp, n_pred, n_ref = tp + m, n_pred + npred, n_ref + nref
            rows.append({"id": rid, "matched": m, "n_pred": npred, "n_ref": nref,
                         "eb_f1": _prf(m, npred, nref)[2]})
        p, r, f = _prf(tp, n_pred, n_ref)
        metrics = {"eb_precision": p, "eb_recall": r, "eb_f1": f,
                   "at_f1": clip_macro_f1([p_by_id[i] for i in ids if i in p_by_id], refs, label_map)}
        config = {"onset_collar": cfg.onset_collar,
                  "offset_tolerance_fraction": cfg.offset_tolerance_fraction}
        notes = [
            f"event matching collars are defaults: onset {cfg.onset_collar} s, offset "
            f"max({cfg.onset_collar} s, {cfg.offset_tolerance_fraction} x reference length)",
            "captions without a label are mapped to categories by pattern table",
            "METEOR is not computed",
        ]
    elif task is Task.GROUNDING:
        ious = []
        for rid in ids:
            v = iou(_union(p_by_id.get(rid)), _union(r_by_id[rid]))
            ious.append(v)
            rows.append({"id": rid, "iou": v})
        metrics = {"miou": sum(ious) / len(ious)}
        for t, v in recall_from_ious(ious, thresholds).items():
            metrics[f"r@{t}"] = v
        notes = ["recall is per query, over the union of all ground-truth spans"]
    elif task in (Task.SUMMARIZATION, Task.TQA):
        r1s, rls, ious = [], [], []
        for rid in ids:
            pred, ref = p_by_id.get(rid), r_by_id[rid]
            row = {"id": rid, "rouge1": rouge1(_text(pred), _text(ref)),
                   "rougeL": rougeL(_text(pred), _text(ref))}
            r1s.append(row["rouge1"])
            rls.append(row["rougeL"])
            if task is Task.SUMMARIZATION:
                row["iou"] = iou(_union(pred), _union(ref))
                ious.append(row["iou"])
            rows.append(row)
        metrics = {"rouge1": sum(r1s) / len(r1s), "rougeL": sum(rls) / len(rls)}
        if task is Task.SUMMARIZATION:
            metrics["miou"] = sum(ious) / len(ious)
            notes = ["timeline mIoU compares the union of predicted and reference segments per sample"]
    return EvalReport(task, len(ids), metrics, rows, notes, missing, config)


def load_predictions(path: str | Path, task: Task) -> list[PredictionRecord]:
    """Read prediction JSONL; lines carrying only ``raw_text`` are parsed here."""
    out = []
    for _, obj in iter_jsonl(path):
        if "events" not in obj and "raw_text" in obj:
            out.append(parse_prediction(obj["raw_text"], obj.get("task", task), id=str(obj["id"]),
                                        duration=obj.get("duration")))
        else:
            out.append(PredictionRecord.from_json(obj))
    return out


def evaluate_task(
    preds_path: str | Path,
    refs_path: str | Path,
    task: Task | str,
    cfg: MatchConfig = MatchConfig(),
    label_map: LabelMap | None = None,
) -> EvalReport:
    task = Task.parse(task)
    refs = [SampleRecord.from_json(obj) for _, obj in iter_jsonl(refs_path)]
    preds = load_predictions(preds_path, task)
    return evaluate_records(preds, refs, task, cfg, label_map)
