"""Golden reports: byte-stable CLI output, cross-checked with exact oracles."""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from timegrain.cli import main

import oracles

GOLDEN = Path(__file__).parent / "data" / "golden"
TASKS = ["dense_caption", "grounding", "summarization"]
CATEGORY = {
    "A dog barks twice.": "dog", "Music plays softly.": "music", "A man is speaking.": "speech",
    "Rain falls on a roof.": "water", "A car engine starts.": "vehicle", "A baby cries.": "crying",
}


def load(task, kind):
    return [json.loads(l) for l in (GOLDEN / f"{task}_{kind}.jsonl").read_text().splitlines()]


@pytest.mark.parametrize("task", TASKS)
def test_report_is_byte_stable(task, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["evaluate", str(GOLDEN / f"{task}_preds.jsonl"), str(GOLDEN / f"{task}_refs.jsonl"),
                 "--task", task, "-o", str(out)])
    capsys.readouterr()
    assert code == 0
    assert out.read_bytes() == (GOLDEN / f"{task}_report.json").read_bytes()


def parsed_preds(task):
    """Predictions as the CLI parser reads them, keyed by id."""
    from timegrain.evaluation.report import load_predictions
    return {p.id: p for p in load_predictions(GOLDEN / f"{task}_preds.jsonl", task)}


def committed(task):
    return json.loads((GOLDEN / f"{task}_report.json").read_text())["metrics"]


def test_grounding_metrics_match_exact_oracle():
    refs = load("grounding", "refs")
    preds = parsed_preds("grounding")
    ious = []
    for r in refs:
        p = preds.get(r["id"])
        pred_ivs = [iv for ev in p.events for iv in ev.intervals] if p else []
        ious.append(oracles.exact_iou(pred_ivs, [iv for ev in r["events"] for iv in ev["intervals"]]))
    m = committed("grounding")
    assert m["miou"] == pytest.approx(float(sum(ious) / len(ious)), abs=1e-10)
    for t in (0.5, 0.7, 0.9):
        assert m[f"r@{t}"] == float(Fraction(sum(1 for v in ious if v >= Fraction(str(t))), len(ious)))


def test_dense_metrics_match_exhaustive_oracle():
    refs = load("dense_caption", "refs")
    preds = parsed_preds("dense_caption")
    tp = n_pred = n_ref = 0
    clip_sets = []
    for r in refs:
        rev = [(s, e, CATEGORY[ev["caption"]]) for ev in r["events"] for s, e in ev["intervals"]]
        p = preds.get(r["id"])
        pev = [(s, e, CATEGORY[ev.caption]) for ev in (p.events if p else []) for s, e in ev.intervals]
        tp += oracles.exhaustive_max_matching(pev, rev, oracles.oracle_event_match)
        n_pred += len(pev)
        n_ref += len(rev)
        clip_sets.append(({x[2] for x in pev}, {x[2] for x in rev}))
    m = committed("dense_caption")
    assert m["eb_precision"] == round(tp / n_pred, 10)
    assert m["eb_recall"] == round(tp / n_ref, 10)
    assert m["eb_f1"] == round(float(Fraction(2 * tp, n_pred + n_ref)), 10)
    cats = sorted(set().union(*(p | r for p, r in clip_sets)))
    f1s = []
    for c in cats:
        tpc = sum(c in p and c in r for p, r in clip_sets)
        fp = sum(c in p and c not in r for p, r in clip_sets)
        fn = sum(c not in p and c in r for p, r in clip_sets)
        f1s.append(Fraction(2 * tpc, 2 * tpc + fp + fn))
    assert m["at_f1"] == pytest.approx(float(sum(f1s) / len(f1s)), abs=1e-10)


def test_summary_metrics_match_oracles():
    refs = load("summarization", "refs")
    preds = parsed_preds("summarization")
    r1 = rl = 0.0
    ious = Fraction(0)
    for r in refs:
        p = preds.get(r["id"])
        ptxt = " ".join(ev.caption for ev in p.events) if p else ""
        rtxt = " ".join(ev["caption"] for ev in r["events"])
        tc, tr = oracles.oracle_tokenize(ptxt), oracles.oracle_tokenize(rtxt)
        r1 += oracles.rouge_f(oracles.clipped_unigram_hits(tc, tr), len(tc), len(tr))
        rl += oracles.rouge_f(oracles.brute_lcs(tc, tr), len(tc), len(tr))
        pivs = [iv for ev in p.events for iv in ev.intervals] if p else []
        ious += oracles.exact_iou(pivs, [iv for ev in r["events"] for iv in ev["intervals"]])
    m = committed("summarization")
    assert m["rouge1"] == pytest.approx(r1 / len(refs), abs=1e-10)
    assert m["rougeL"] == pytest.approx(rl / len(refs), abs=1e-10)
    assert m["miou"] == pytest.approx(float(ious / len(refs)), abs=1e-10)


def test_report_layout():
    rep = json.loads((GOLDEN / "dense_caption_report.json").read_text())
    assert list(rep) == ["task", "n_samples", "metrics", "config", "notes", "missing_predictions", "per_sample"]
    assert rep["n_samples"] == 10 and rep["missing_predictions"] == ["dense_caption-09"]
