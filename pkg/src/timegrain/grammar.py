"""Task records, their canonical text forms, and a tolerant parser.

Canonical dialect (numeric style)::

    dense caption   1.4 - 3.7, 4.3 - 5.1 seconds, A baby cries. 0.3 - 10.0 seconds, Talking.
    grounding       The given query happens in 0.2 - 2.7, 3.3 - 5.7 seconds.
    summary         0.0 - 16.4, First point. 16.4 - 84.5, Second point.

Marker style swaps every timestamp for its anchor/offset tokens and drops the
``seconds`` unit word. All timestamps render with exactly one decimal.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import codec
from .errors import RecordValidationError, TokenParseError

DURATION_SLACK = 0.05
DEFAULT_AUDIO_PLACEHOLDER = "F_audio"
GROUNDING_PREFIX = "The given query happens in "


class Task(str, enum.Enum):
    DENSE_CAPTION = "dense_caption"
    GROUNDING = "grounding"
    SUMMARIZATION = "summarization"
    TQA = "tqa"

    @classmethod
    def parse(cls, value: "str | Task") -> "Task":
        if isinstance(value, Task):
            return value
        key = value.strip().lower().replace("-", "_")
        aliases = {"dense": "dense_caption", "caption": "dense_caption", "summary": "summarization"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(
                f"unknown task {value!r}; expected one of {[t.value for t in cls]}"
            ) from None


class Style(str, enum.Enum):
    NUMERIC = "numeric"
    MARKER = "marker"

    @classmethod
    def parse(cls, value: "str | Style") -> "Style":
        if isinstance(value, Style):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown style {value!r}; expected numeric or marker") from None


@dataclass
class EventAnnotation:
    intervals: list[tuple[float, float]]
    caption: str = ""
    label: str | None = None

    def to_json(self) -> dict:
        out: dict = {"intervals": [[s, e] for s, e in self.intervals], "caption": self.caption}
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "EventAnnotation":
        intervals = [(float(s), float(e)) for s, e in obj.get("intervals", [])]
        return cls(intervals, str(obj.get("caption", "")), obj.get("label"))


@dataclass
class SampleRecord:
    id: str
    duration: float
    task: Task
    events: list[EventAnnotation] = field(default_factory=list)
    query: str | None = None

    def validate(self) -> None:
        if not self.id:
            raise RecordValidationError("record id must be non-empty")
        for k, ev in enumerate(self.events):
            prev = None
            for s, e in ev.intervals:
                if not 0 <= s <= e:
                    raise RecordValidationError(f"{self.id}: event {k} has bad interval ({s}, {e})")
                if e > self.duration + DURATION_SLACK:
                    raise RecordValidationError(
                        f"{self.id}: event {k} ends at {e} past duration {self.duration}"
                    )
                if prev is not None and s < prev:
                    raise RecordValidationError(f"{self.id}: event {k} intervals are not sorted by start")
                prev = s

    def to_json(self) -> dict:
        out: dict = {"id": self.id, "duration": self.duration, "task": self.task.value}
        if self.query is not None:
            out["query"] = self.query
        out["events"] = [ev.to_json() for ev in self.events]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SampleRecord":
        try:
            return cls(
                id=str(obj["id"]),
                duration=float(obj.get("duration", 0.0)),
                task=Task.parse(obj["task"]),
                events=[EventAnnotation.from_json(e) for e in obj.get("events", [])],
                query=obj.get("query"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordValidationError(f"malformed record {obj.get('id', '?')!r}: {exc}") from None


@dataclass
class PredictionRecord(SampleRecord):
    raw_text: str = ""
    parse_warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = super().to_json()
        out["raw_text"] = self.raw_text
        out["parse_warnings"] = list(self.parse_warnings)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PredictionRecord":
        base = SampleRecord.from_json(obj)
        return cls(
            base.id, base.duration, base.task, base.events, base.query,
            raw_text=str(obj.get("raw_text", "")),
            parse_warnings=list(obj.get("parse_warnings", [])),
        )


# ---------------------------------------------------------------- formatting


def render_time(t: float, style: Style = Style.NUMERIC) -> str:
    tenths = codec.quantize(t)
    if style is Style.MARKER:
        return codec.tokens_to_text(codec.encode_tenths(tenths))
    return codec.format_tenths(tenths)


def render_intervals(intervals: Sequence[tuple[float, float]], style: Style) -> str:
    return ", ".join(f"{render_time(s, style)} - {render_time(e, style)}" for s, e in intervals)


def _unit(style: Style) -> str:
    return " seconds" if style is Style.NUMERIC else ""


def _check_intervals(intervals: Sequence[tuple[float, float]], where: str) -> None:
    prev = None
    for s, e in intervals:
        if not 0 <= s <= e:
            raise RecordValidationError(f"{where}: invalid interval ({s}, {e})")
        if prev is not None and s < prev:
            raise RecordValidationError(f"{where}: intervals are not sorted by start")
        prev = s


def _require(rec: SampleRecord, task: Task) -> None:
    if rec.task is not task:
        raise RecordValidationError(f"{rec.id}: expected a {task.value} record, got {rec.task.value}")


def format_dense_caption(rec: SampleRecord, style: Style | str = Style.NUMERIC, sep: str = " ") -> str:
    style = Style.parse(style)
    _require(rec, Task.DENSE_CAPTION)
    parts = []
    for k, ev in enumerate(rec.events):
        if not ev.intervals:
            raise RecordValidationError(f"{rec.id}: event {k} has no intervals")
        _check_intervals(ev.intervals, f"{rec.id} event {k}")
        parts.append(f"{render_intervals(ev.intervals, style)}{_unit(style)}, {ev.caption}")
    return sep.join(parts)


def format_grounding_answer(intervals: Sequence[tuple[float, float]], style: Style | str = Style.NUMERIC) -> str:
    style = Style.parse(style)
    if not intervals:
        raise RecordValidationError("grounding answer needs at least one interval")
    _check_intervals(intervals, "grounding answer")
    return f"{GROUNDING_PREFIX}{render_intervals(intervals, style)}{_unit(style)}."


def format_summary(rec: SampleRecord, style: Style | str = Style.NUMERIC, sep: str = " ") -> str:
    style = Style.parse(style)
    _require(rec, Task.SUMMARIZATION)
    parts = []
    last_end = None
    for k, ev in enumerate(rec.events):
        if len(ev.intervals) != 1:
            raise RecordValidationError(f"{rec.id}: summary segment {k} must have exactly one interval")
        s, e = ev.intervals[0]
        _check_intervals(ev.intervals, f"{rec.id} segment {k}")
        if last_end is not None and codec.quantize(s) < codec.quantize(last_end):
            raise RecordValidationError(f"{rec.id}: summary segment {k} overlaps the previous one")
        last_end = e
        parts.append(f"{render_intervals(ev.intervals, style)}, {ev.caption}")
    return sep.join(parts)


def grounding_intervals(rec: SampleRecord) -> list[tuple[float, float]]:
    return sorted(iv for ev in rec.events for iv in ev.intervals)


def format_target(rec: SampleRecord, style: Style | str = Style.NUMERIC, sep: str = " ") -> str:
    """Canonical answer text for any task."""
    style = Style.parse(style)
    if rec.task is Task.DENSE_CAPTION:
        return format_dense_caption(rec, style, sep)
    if rec.task is Task.SUMMARIZATION:
        return format_summary(rec, style, sep)
    if rec.task is Task.GROUNDING:
        intervals = grounding_intervals(rec)
        return format_grounding_answer(intervals, style) if intervals else ""
    return " ".join(ev.caption for ev in rec.events)


def build_instruction_record(
    sample: SampleRecord,
    instruction: str = "",
    style: Style | str = Style.MARKER,
    placeholder: str = DEFAULT_AUDIO_PLACEHOLDER,
) -> str:
    """Training sequence ``<s><audio>…</audio>`` + instruction + target + ``</s>``.

    Inside records, multi-event answers put one event per line.
    """
    sample.validate()
    target = format_target(sample, style, sep="\n")
    head = f"<s><audio>{placeholder}</audio>\n"
    if instruction:
        head += instruction + "\n"
    return f"{head}{target}</s>"


# ----------------------------------------------------------- marker <-> numeric

_TOKEN_RUN_RE = re.compile(r"(?:<[af][0-9]>)+")
_CANON_NUM_RE = re.compile(r"(?<![\d.])(?:0|[1-9]\d*)\.\d(?!\d)")


def _convert_token_run(run: str, base: int) -> str:
    tokens = codec.text_to_tokens(run)
    out = []
    group: list[codec.TemporalToken] = []
    pos = base
    for tok in tokens:
        if tok.kind is codec.TokenKind.OFFSET and not group:
            raise TokenParseError(f"dangling offset token {tok} at character {pos}", "anchor-first", pos)
        group.append(tok)
        if tok.kind is codec.TokenKind.OFFSET:
            out.append(codec.format_tenths(codec.decode_to_tenths(group)))
            group = []
        pos += len(str(tok))
    if group:
        raise TokenParseError(
            f"anchor tokens without an offset ending at character {pos}", "missing-offset", pos
        )
    return " ".join(out)


def marker_to_numeric(text: str) -> str:
    """Replace every anchor/offset token group with its one-decimal number."""
    out = []
    last = 0
    for m in _TOKEN_RUN_RE.finditer(text):
        out.append(text[last:m.start()])
        out.append(_convert_token_run(m.group(0), m.start()))
        last = m.end()
    out.append(text[last:])
    return "".join(out)


def numeric_to_marker(text: str) -> str:
    """Replace every canonical one-decimal number with anchor/offset tokens."""
    return _CANON_NUM_RE.sub(
        lambda m: codec.tokens_to_text(codec.encode_tenths(codec.quantize(Decimal(m.group(0))))), text
    )


def _salvage_markers(text: str, warnings: list[str]) -> str:
    out = []
    last = 0
    for m in _TOKEN_RUN_RE.finditer(text):
        out.append(text[last:m.start()])
        try:
            out.append(_convert_token_run(m.group(0), m.start()))
        except TokenParseError as exc:
            warnings.append(f"skipped malformed temporal tokens {m.group(0)!r}: {exc}")
            out.append(" ")
        last = m.end()
    out.append(text[last:])
    return "".join(out)


# ------------------------------------------------------------------- parsing

_NUM = r"\d+(?:\.\d+)?"
_INTERVAL_RE = re.compile(rf"({_NUM})\s*-\s*({_NUM})")
_RUN_RE = re.compile(rf"{_NUM}\s*-\s*{_NUM}(?:\s*,\s*{_NUM}\s*-\s*{_NUM})*(?:\s*seconds?\b)?")
# digit-led word running into a hyphen: a timestamp that failed to parse
_FRAGMENT_RE = re.compile(r"\d[\w.]*\s*-|-\s*\d")
_TERMINATORS = ".!?"


def _parse_run(run: str, warnings: list[str]) -> list[tuple[float, float]]:
    intervals = []
    for m in _INTERVAL_RE.finditer(run):
        s = codec.quantize(Decimal(m.group(1)))
        e = codec.quantize(Decimal(m.group(2)))
        if s > e:
            warnings.append(f"skipped reversed interval {m.group(0)!r}")
            continue
        intervals.append((s / 10, e / 10))
    return intervals


def _clean_caption(span: str, warnings: list[str]) -> str:
    body = span.lstrip()
    if body.startswith(","):
        body = body[1:]
    body = body.strip()
    frag = _FRAGMENT_RE.search(body)
    if frag is None:
        return body
    # keep whole sentences before the broken timestamp, drop the rest
    cut = max(body.rfind(c, 0, frag.start()) for c in _TERMINATORS)
    keep = cut + 1 if cut >= 0 else frag.start()
    warnings.append(f"skipped malformed span {body[keep:].strip()!r}")
    return body[:keep].strip()


def parse_prediction(text: str, task: Task | str, id: str = "", duration: float | None = None,
                     query: str | None = None) -> PredictionRecord:
    """Extract timestamped events from free-form model output.

    Never raises on content. Every piece of text that could not be used is
    reported in ``parse_warnings``.
    """
    task = Task.parse(task)
    warnings: list[str] = []
    raw = text if isinstance(text, str) else str(text)
    body = _salvage_markers(raw, warnings)
    events: list[EventAnnotation] = []

    if task is Task.TQA:
        answer = body.strip()
        if answer:
            events.append(EventAnnotation([], answer))
        else:
            warnings.append("empty answer text")
    else:
        runs = list(_RUN_RE.finditer(body))
        if not runs:
            warnings.append(f"no timestamped events found in {body.strip()[:60]!r}")
        elif task is Task.GROUNDING:
            intervals: list[tuple[float, float]] = []
            for m in runs:
                intervals.extend(_parse_run(m.group(0), warnings))
            if intervals:
                events.append(EventAnnotation(sorted(intervals)))
        else:
            prefix = body[:runs[0].start()].strip()
            if prefix:
                warnings.append(f"skipped unparsed prefix {prefix!r}")
            for k, m in enumerate(runs):
                end = runs[k + 1].start() if k + 1 < len(runs) else len(body)
                caption = _clean_caption(body[m.end():end], warnings)
                intervals = _parse_run(m.group(0), warnings)
                if not intervals:
                    warnings.append(f"dropped event with no valid intervals at {m.group(0)!r}")
                    continue
                if not caption:
                    warnings.append(f"event at {m.group(0)!r} has an empty caption")
                events.append(EventAnnotation(intervals, caption))

    if duration is None:
        duration = max((e for ev in events for _, e in ev.intervals), default=0.0)
    return PredictionRecord(id, float(duration), task, events, query, raw_text=raw,
                            parse_warnings=warnings)


# --------------------------------------------------------------------- JSONL


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_number, object)`` for each non-blank line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                yield lineno, json.loads(line)


def read_records(path: str | Path, cls=SampleRecord) -> list:
    records = []
    for lineno, obj in iter_jsonl(path):
        try:
            records.append(cls.from_json(obj))
        except RecordValidationError as exc:
            raise RecordValidationError(f"{path}:{lineno}: {exc}") from None
    return records


def write_jsonl(path: str | Path, objs: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(dumps_line(obj))


def dumps_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=False) + "\n"
