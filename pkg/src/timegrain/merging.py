"""Segment-level token merging.

Per segment: score every query token by the attention it receives (head
average, then column mean), keep the top ``n_attentive`` in temporal order,
split the rest by uniform stride into targets and candidates, assign each
candidate to the target with the largest key dot product, and fuse each
group by its arithmetic mean into one contextual token.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .numerics import matmul, matrix_to_json, mean_over_stack, softmax_rows


@dataclass(frozen=True)
class MergeConfig:
    n_attentive: int = 22
    n_contextual: int = 4

    def __post_init__(self):
        if self.n_attentive < 0 or self.n_contextual < 0:
            raise ValueError("token counts must be non-negative")

    @property
    def n_output(self) -> int:
        return self.n_attentive + self.n_contextual


@dataclass
class AttentionSim:
    """Seeded single-round query attention standing in for a window Q-former.

    ``project`` turns a segment's frame features into ``n_queries`` tokens of
    width ``d`` by cross-attending learnable queries to the frames. ``qk``
    gives per-head queries and keys over those tokens, concatenated along
    columns (``heads * d`` wide).
    """

    n_queries: int
    d: int
    heads: int = 1
    seed: int = 0
    feature_dim: int | None = None
    _wq: np.ndarray = field(init=False, repr=False)
    _wk: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.heads < 1 or self.d < 1 or self.n_queries < 1:
            raise ValueError("n_queries, d and heads must be >= 1")
        rng = np.random.default_rng(self.seed)
        scale = 1.0 / math.sqrt(self.d)
        self._wq = rng.standard_normal((self.d, self.heads * self.d)) * scale
        self._wk = rng.standard_normal((self.d, self.heads * self.d)) * scale
        if self.feature_dim is not None:
            self._queries = rng.standard_normal((self.n_queries, self.d))
            self._wfk = rng.standard_normal((self.feature_dim, self.d)) / math.sqrt(self.feature_dim)
            self._wfv = rng.standard_normal((self.feature_dim, self.d)) / math.sqrt(self.feature_dim)

    def project(self, features: np.ndarray) -> np.ndarray:
        if self.feature_dim is None:
            raise ValueError("AttentionSim was built without feature_dim; cannot project")
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.feature_dim:
            raise ShapeError(f"features {features.shape} do not have width {self.feature_dim}")
        keys = matmul(features, self._wfk)
        values = matmul(features, self._wfv)
        attn = softmax_rows(matmul(self._queries, keys.T) / math.sqrt(self.d))
        return self._queries + matmul(attn, values)

    def qk(self, tokens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        tokens = np.asarray(tokens, dtype=np.float64)
        if tokens.ndim != 2 or tokens.shape[1] != self.d:
            raise ShapeError(f"tokens {tokens.shape} do not have width {self.d}")
        return matmul(tokens, self._wq), matmul(tokens, self._wk)


def compute_attention(q: np.ndarray, k: np.ndarray, d: int, heads: int) -> list[np.ndarray]:
    """Per-head ``softmax(Q_h K_h^T / sqrt(d))``.

    ``q`` and ``k`` hold the heads side by side: ``(n, heads * dh)``.
    """
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if heads < 1:
        raise ValueError("heads must be >= 1")
    if q.ndim != 2 or k.ndim != 2 or q.shape[1] != k.shape[1]:
        raise ShapeError(f"incompatible q {q.shape} and k {k.shape}")
    if q.shape[1] % heads:
        raise ShapeError(f"{q.shape[1]} columns do not split into {heads} heads")
    dh = q.shape[1] // heads
    scale = math.sqrt(d)
    return [
        softmax_rows(matmul(q[:, h * dh:(h + 1) * dh], k[:, h * dh:(h + 1) * dh].T) / scale)
        for h in range(heads)
    ]


def token_importance(per_head: Sequence[np.ndarray]) -> np.ndarray:
    """Mean attention each token receives, after averaging over heads."""
    if len(per_head) == 0:
        raise ValueError("need at least one attention matrix")
    avg = mean_over_stack(per_head)
    if avg.ndim != 2 or avg.shape[0] != avg.shape[1]:
        raise ShapeError(f"attention must be square, got {avg.shape}")
    return avg.mean(axis=0)


def select_attentive(scores, k: int) -> list[int]:
    scores = np.asarray(scores, dtype=np.float64)
    if k < 0 or k > scores.size:
        raise ValueError(f"cannot select {k} of {scores.size} tokens")
    # lexsort: last key is primary; ties fall back to the lower index
    order = np.lexsort((np.arange(scores.size), -scores))
    return sorted(int(i) for i in order[:k])


def split_targets_candidates(remaining: Sequence[int], n_contextual: int) -> tuple[list[int], list[int]]:
    n = len(remaining)
    if n_contextual < 0 or n_contextual > n:
        raise ValueError(f"cannot pick {n_contextual} targets from {n} tokens")
    positions = {i * n // n_contextual for i in range(n_contextual)} if n_contextual else set()
    targets = [remaining[p] for p in sorted(positions)]
    candidates = [r for p, r in enumerate(remaining) if p not in positions]
    return targets, candidates


def assign_candidates(keys: np.ndarray, targets: Sequence[int], candidates: Sequence[int]) -> dict[int, int]:
    """Map each candidate index to its most key-similar target (first target wins ties)."""
    if candidates and not targets:
        raise ValueError("candidates present but no targets to merge into")
    if not candidates:
        return {}
    keys = np.asarray(keys, dtype=np.float64)
    sims = matmul(keys[list(candidates)], keys[list(targets)].T)
    best = np.argmax(sims, axis=1)
    return {int(c): int(targets[b]) for c, b in zip(candidates, best)}


def merge_candidates(tokens: np.ndarray, keys: np.ndarray, targets: Sequence[int],
                     candidates: Sequence[int]) -> np.ndarray:
    tokens = np.asarray(tokens, dtype=np.float64)
    return _fuse(tokens, targets, assign_candidates(keys, targets, candidates))


def _fuse(tokens: np.ndarray, targets: Sequence[int], assignment: dict[int, int]) -> np.ndarray:
    out = np.empty((len(targets), tokens.shape[1]), dtype=np.float64)
    groups: dict[int, list[int]] = {t: [t] for t in targets}
    for c, t in assignment.items():
        groups[t].append(c)
    for row, t in enumerate(targets):
        members = groups[t]
        out[row] = tokens[t] if len(members) == 1 else tokens[members].mean(axis=0)
    return out


@dataclass
class MergeResult:
    attentive_indices: list[int]
    target_indices: list[int]
    candidate_indices: list[int]
    assignment: dict[int, int]
    output_tokens: np.ndarray
    scores: np.ndarray

    @property
    def retained_ratio(self) -> float:
        return self.output_tokens.shape[0] / self.scores.size

    def to_json(self) -> dict:
        return {
            "n_input": int(self.scores.size),
            "attentive_indices": self.attentive_indices,
            "target_indices": self.target_indices,
            "candidate_indices": self.candidate_indices,
            "assignment": {str(c): t for c, t in sorted(self.assignment.items())},
            "retained_ratio": self.retained_ratio,
            "output": matrix_to_json(self.output_tokens),
        }


def merge_segment(tokens: np.ndarray, sim: AttentionSim, cfg: MergeConfig) -> MergeResult:
    tokens = np.asarray(tokens, dtype=np.float64)
    if tokens.ndim != 2 or tokens.shape[0] != sim.n_queries:
        raise ShapeError(f"expected {sim.n_queries} tokens, got shape {tokens.shape}")
    if cfg.n_output > tokens.shape[0]:
        raise ValueError(
            f"config keeps {cfg.n_output} tokens but the segment has only {tokens.shape[0]}"
        )
    q, k = sim.qk(tokens)
    scores = token_importance(compute_attention(q, k, sim.d, sim.heads))
    attentive = select_attentive(scores, cfg.n_attentive)
    chosen = set(attentive)
    remaining = [i for i in range(tokens.shape[0]) if i not in chosen]
    targets, candidates = split_targets_candidates(remaining, cfg.n_contextual)
    # n_contextual == 0 is plain pruning: candidates are discarded
    assignment = assign_candidates(k, targets, candidates) if targets else {}
    contextual = _fuse(tokens, targets, assignment)
    output = np.concatenate([tokens[attentive], contextual], axis=0)
    return MergeResult(attentive, targets, candidates, assignment, output, scores)
