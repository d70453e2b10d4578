"""ROUGE-1 and ROUGE-L F-measures (equal precision/recall weight)."""

from __future__ import annotations

import re
from collections import Counter

import numpy as np

from ..kernels import lcs_length

_PUNCT_RE = re.compile(r"[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase, delete punctuation, split on whitespace."""
    return _PUNCT_RE.sub("", text.lower()).split()


def _f_measure(hits: int, n_cand: int, n_ref: int) -> float:
    # 2PR/(P+R) with P = hits/n_cand, R = hits/n_ref, in one exact division
    if hits == 0:
        return 0.0
    return 2 * hits / (n_cand + n_ref)


def rouge1(candidate: str, reference: str) -> float:
    c, r = Counter(tokenize(candidate)), Counter(tokenize(reference))
    hits = sum((c & r).values())
    return _f_measure(hits, sum(c.values()), sum(r.values()))


def rougeL(candidate: str, reference: str) -> float:
    c, r = tokenize(candidate), tokenize(reference)
    if not c or not r:
        return 0.0
    vocab: dict[str, int] = {}
    a = np.array([vocab.setdefault(w, len(vocab)) for w in c], dtype=np.int64)
    b = np.array([vocab.setdefault(w, len(vocab)) for w in r], dtype=np.int64)
    return _f_measure(lcs_length(a, b), len(c), len(r))
