"""``timegrain`` command line: codec, format, parse, evaluate, merge-demo, config-dump."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import codec
from .config import ToolConfig
from .errors import TimegrainError
from .evaluation import LabelMap, MatchConfig, evaluate_task
from .grammar import (
    SampleRecord,
    Style,
    Task,
    build_instruction_record,
    dumps_line,
    parse_prediction,
)
from .merging import AttentionSim, MergeConfig, merge_segment
from .time_encoding import (
    AudioClip,
    SyntheticExtractor,
    TimeEmbeddingTable,
    apply_time_encoding,
    extract_features,
    segment_clip,
)

log = logging.getLogger("timegrain")

SWEEP_RATIOS = (0.10, 0.15, 0.20, 0.25, 0.30)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _read_lines(path: str):
    fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    try:
        return [(n, line) for n, line in enumerate(fh, start=1) if line.strip()]
    finally:
        if fh is not sys.stdin:
            fh.close()


def cmd_codec(args) -> int:
    status = 0
    if args.encode is not None:
        for v in args.encode:
            try:
                print(codec.tokens_to_text(codec.encode_timestamp(float(v))))
            except ValueError as exc:
                print(f"error: cannot encode {v!r}: {exc}", file=sys.stderr)
                status = 1
    else:
        for text in args.decode:
            try:
                print(codec.format_tenths(codec.decode_to_tenths(codec.text_to_tokens(text))))
            except ValueError as exc:
                print(f"error: cannot decode {text!r}: {exc}", file=sys.stderr)
                status = 1
    return status


def cmd_format(args, cfg: ToolConfig) -> int:
    task = Task.parse(args.task) if args.task else None
    style = Style.parse(args.style)
    errors = []
    records = []
    for lineno, line in _read_lines(args.input):
        try:
            rec = SampleRecord.from_json(json.loads(line))
            if task is not None and rec.task is not task:
                raise TimegrainError(f"task {rec.task.value} does not match --task {task.value}")
            records.append(rec)
        except (ValueError, TimegrainError) as exc:
            errors.append(f"line {lineno}: {exc}")

    def render(rec):
        try:
            text = build_instruction_record(rec, args.instruction, style, args.placeholder)
            return {"id": rec.id, "task": rec.task.value, "style": style.value, "text": text}, None
        except (ValueError, TimegrainError) as exc:
            return None, f"{rec.id}: {exc}"

    results = _map(render, records, args.workers or cfg.workers)
    errors += [err for _, err in results if err]
    if errors:
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        print(f"error: {len(errors)} invalid record(s); no output written", file=sys.stderr)
        return 1
    out = _open_out(args.output)
    try:
        for obj, _ in results:
            out.write(dumps_line(obj))
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_parse(args, cfg: ToolConfig) -> int:
    task = Task.parse(args.task)
    items = []
    skipped = 0
    for lineno, line in _read_lines(args.input):
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict) or "id" not in obj or "raw_text" not in obj:
                raise ValueError("line needs 'id' and 'raw_text'")
            items.append(obj)
        except ValueError as exc:
            log.warning("line %d skipped: %s", lineno, exc)
            skipped += 1

    def parse(obj):
        return parse_prediction(str(obj["raw_text"]), task, id=str(obj["id"]),
                                duration=obj.get("duration"), query=obj.get("query"))

    preds = _map(parse, items, args.workers or cfg.workers)
    out = _open_out(args.output)
    try:
        for p in preds:
            out.write(dumps_line(p.to_json()))
    finally:
        if out is not sys.stdout:
            out.close()
    if skipped:
        print(f"skipped {skipped} malformed line(s)", file=sys.stderr)
    n_warn = sum(1 for p in preds if p.parse_warnings)
    if n_warn:
        print(f"{n_warn} record(s) parsed with warnings", file=sys.stderr)
    return 0


def cmd_evaluate(args, cfg: ToolConfig) -> int:
    match = MatchConfig(cfg.onset_collar, cfg.offset_tolerance_fraction)
    label_map = LabelMap.load(cfg.label_map_path or None)
    report = evaluate_task(args.predictions, args.references, args.task, match, label_map)
    text = report.dumps()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    sys.stdout.write(report.table())
    if report.missing_predictions:
        print(f"note: {len(report.missing_predictions)} reference(s) had no prediction and "
              f"were scored as empty: {report.missing_predictions}", file=sys.stderr)
    return 0


def _synthetic_clip(seed: int, seconds: float, sample_rate: int = 16000) -> AudioClip:
    rng = np.random.default_rng(seed)
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    tone = 0.3 * np.sin(2 * np.pi * 220.0 * t) * (np.sin(2 * np.pi * 0.2 * t) > 0)
    return AudioClip(tone + 0.05 * rng.standard_normal(t.size), sample_rate)


def _merge_stats(tokens: np.ndarray, result) -> tuple[float, float]:
    """(attention mass held by attentive tokens, reconstruction MSE)."""
    mass = float(result.scores[result.attentive_indices].sum() / result.scores.sum())
    recon = np.zeros_like(tokens)
    for row, i in enumerate(result.attentive_indices):
        recon[i] = result.output_tokens[row]
    base = len(result.attentive_indices)
    ctx_row = {t: base + k for k, t in enumerate(result.target_indices)}
    for t, row in ctx_row.items():
        recon[t] = result.output_tokens[row]
    for c, t in result.assignment.items():
        recon[c] = result.output_tokens[ctx_row[t]]
    return mass, float(((tokens - recon) ** 2).mean())


def run_merge_demo(cfg: ToolConfig, n_tokens: int, seconds: float = 40.0):
    """Synthetic audio through segmentation, features, time encoding and merging."""
    clip = _synthetic_clip(cfg.seed, seconds)
    extractor = SyntheticExtractor(seed=cfg.seed)
    table = TimeEmbeddingTable.zeros(extractor.width, cfg.positions)
    sim = AttentionSim(n_tokens, cfg.d, cfg.heads, seed=cfg.seed, feature_dim=extractor.width)
    merge_cfg = MergeConfig(cfg.n_attentive, cfg.n_contextual)
    seg = segment_clip(clip, cfg.window_seconds, cfg.max_segments, cfg.max_duration)
    segments = []
    for s in seg.segments:
        feats = apply_time_encoding(extract_features(s, extractor), table, s.start_time)
        tokens = sim.project(feats)
        segments.append((s, tokens, merge_segment(tokens, sim, merge_cfg)))
    return seg, segments


def cmd_merge_demo(args, cfg: ToolConfig) -> int:
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    n_tokens = args.n_tokens or cfg.n_queries
    if cfg.n_attentive + cfg.n_contextual > n_tokens:
        print(f"error: n_attentive + n_contextual exceeds --n-tokens {n_tokens}", file=sys.stderr)
        return 1
    start = time.perf_counter()
    seg, segments = run_merge_demo(cfg, n_tokens, args.seconds)
    wall = time.perf_counter() - start
    payload = {
        "seed": cfg.seed,
        "n_tokens": n_tokens,
        "n_attentive": cfg.n_attentive,
        "n_contextual": cfg.n_contextual,
        "truncated": seg.truncated,
        "segments": [
            {"index": s.index, "start": s.start_time, **res.to_json()} for s, _, res in segments
        ],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    ratio = segments[0][2].retained_ratio if segments else 0.0
    print(f"segments={len(segments)} retained_ratio={ratio:.2f} wall_time={wall:.4f}s")

    if args.sweep:
        print(f"{'ratio':>6} {'kept':>5} {'attn':>5} {'ctx':>4} {'attn_mass':>10} {'recon_mse':>10}")
        for r in SWEEP_RATIOS:
            kept = int(round(r * n_tokens))
            n_ctx = max(1, int(round(kept * cfg.n_contextual / max(1, cfg.n_attentive + cfg.n_contextual))))
            sweep_cfg = cfg.replace(n_attentive=kept - n_ctx, n_contextual=n_ctx, n_queries=n_tokens)
            _, segs = run_merge_demo(sweep_cfg, n_tokens, args.seconds)
            stats = [_merge_stats(tok, res) for _, tok, res in segs]
            mass = sum(m for m, _ in stats) / len(stats)
            mse = sum(e for _, e in stats) / len(stats)
            print(f"{kept / n_tokens:>6.2f} {kept:>5d} {kept - n_ctx:>5d} {n_ctx:>4d} {mass:>10.4f} {mse:>10.6f}")
    return 0


def cmd_config_dump(args, cfg: ToolConfig) -> int:
    sys.stdout.write(cfg.dumps())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="timegrain", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("codec", help="encode seconds to temporal tokens or decode them back")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--encode", nargs="+", metavar="SECONDS")
    g.add_argument("--decode", nargs="+", metavar="TOKENS")

    def common(sp, task_required=True):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--task", required=task_required, choices=[t.value for t in Task])
        sp.add_argument("-o", "--output", help="output file (default stdout)")

    f = sub.add_parser("format", help="render annotation JSONL as instruction records")
    f.add_argument("input", help="SampleRecord JSONL ('-' for stdin)")
    common(f, task_required=False)
    f.add_argument("--style", default="marker", choices=[s.value for s in Style])
    f.add_argument("--instruction", default="")
    f.add_argument("--placeholder", default="F_audio")
    f.add_argument("--workers", type=int, default=0)

    pa = sub.add_parser("parse", help="parse raw model outputs into prediction records")
    pa.add_argument("input", help="JSONL lines with id and raw_text ('-' for stdin)")
    common(pa)
    pa.add_argument("--workers", type=int, default=0)

    e = sub.add_parser("evaluate", help="score predictions against references")
    e.add_argument("predictions")
    e.add_argument("references")
    common(e)

    m = sub.add_parser("merge-demo", help="run synthetic audio through token merging")
    m.add_argument("--config")
    m.add_argument("--n-tokens", type=int, default=0)
    m.add_argument("--seed", type=int)
    m.add_argument("--seconds", type=float, default=40.0)
    m.add_argument("--sweep", action="store_true", help="also print a retained-ratio sweep")
    m.add_argument("-o", "--output", help="write merge result JSON here")

    d = sub.add_parser("config-dump", help="print the effective configuration")
    d.add_argument("--config")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "codec":
            return cmd_codec(args)
        cfg = ToolConfig.load(getattr(args, "config", None))
        handler = {
            "format": cmd_format,
            "parse": cmd_parse,
            "evaluate": cmd_evaluate,
            "merge-demo": cmd_merge_demo,
            "config-dump": cmd_config_dump,
        }[args.command]
        return handler(args, cfg)
    except TimegrainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
