"""Segmenting long audio and adding absolute time embeddings.

Audio is cut into fixed windows (30 s by default), each window is turned into
a frame-level feature matrix by a pluggable extractor, and every frame of
segment ``i`` gets the same additive row ``W_t[j_i]`` where ``j_i`` is the
segment start time rounded to whole seconds.
"""

from __future__ import annotations

import json
import logging
import math
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import ExtractorError, ShapeError
from .kernels import frame_stats
from .numerics import matrix_from_json, matrix_to_json

log = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATE = 16000
DEFAULT_WINDOW_SECONDS = 30.0
DEFAULT_MAX_SEGMENTS = 5
DEFAULT_POSITIONS = 768


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64).ravel())

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @classmethod
    def from_wav(cls, path: str | Path) -> "AudioClip":
        """Read a 16-bit PCM mono WAV file; samples are scaled to [-1, 1)."""
        with wave.open(str(path), "rb") as fh:
            if fh.getnchannels() != 1:
                raise ValueError(f"{path}: expected mono audio, got {fh.getnchannels()} channels")
            if fh.getsampwidth() != 2:
                raise ValueError(f"{path}: expected 16-bit PCM, got {8 * fh.getsampwidth()}-bit")
            rate = fh.getframerate()
            raw = fh.readframes(fh.getnframes())
        if rate != DEFAULT_SAMPLE_RATE:
            log.warning("%s: sample rate %d Hz differs from %d Hz", path, rate, DEFAULT_SAMPLE_RATE)
        pcm = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
        return cls(pcm, rate)

    def to_wav(self, path: str | Path) -> None:
        pcm = np.clip(np.round(self.samples * 32768.0), -32768, 32767).astype("<i2")
        with wave.open(str(path), "wb") as fh:
            fh.setnchannels(1)
            fh.setsampwidth(2)
            fh.setframerate(self.sample_rate)
            fh.writeframes(pcm.tobytes())


@dataclass(frozen=True)
class AudioSegment:
    """Raw audio of one window, before feature extraction."""

    index: int
    start_time: float
    samples: np.ndarray
    sample_rate: int

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class Segment:
    index: int
    start_time: float
    features: np.ndarray


@dataclass(frozen=True)
class Segmentation:
    segments: list[AudioSegment]
    truncated: bool = False
    dropped_seconds: float = 0.0


def segment_clip(
    clip: AudioClip,
    window: float = DEFAULT_WINDOW_SECONDS,
    max_segments: int = DEFAULT_MAX_SEGMENTS,
    max_duration: float | None = None,
) -> Segmentation:
    """Split ``clip`` into consecutive non-overlapping windows.

    The final partial window is kept. Anything past ``max_segments`` windows
    (or past ``max_duration`` seconds, when given) is dropped and reported
    through ``truncated`` / ``dropped_seconds`` instead of vanishing silently.
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if max_segments < 1:
        raise ValueError(f"max_segments must be >= 1, got {max_segments}")
    if max_duration is not None and max_duration <= 0:
        raise ValueError(f"max_duration must be positive, got {max_duration}")

    sr = clip.sample_rate
    n = clip.samples.size
    limit = n
    if max_duration is not None:
        limit = min(limit, int(round(max_duration * sr)))
    win = int(round(window * sr))
    if win <= 0:
        raise ValueError(f"window of {window} s is shorter than one sample")
    limit = min(limit, win * max_segments)

    segments = []
    for i, lo in enumerate(range(0, limit, win)):
        hi = min(lo + win, limit)
        segments.append(AudioSegment(i, i * window, clip.samples[lo:hi], sr))
    dropped = n - limit
    if dropped > 0:
        log.warning("dropped %.3f s of audio beyond the segment limit", dropped / sr)
    return Segmentation(segments, truncated=dropped > 0, dropped_seconds=dropped / sr)


class FeatureExtractor(Protocol):
    def streams(self, samples: np.ndarray, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
        """Return frame-aligned (speech-like, acoustic-like) feature matrices."""
        ...


@dataclass
class SyntheticExtractor:
    """Deterministic stand-in for a pair of pretrained audio encoders.

    Each 20 ms frame is summarised by ``[rms, mean |x|, peak, zero-crossing
    rate]`` and projected through two fixed seeded matrices (no bias), giving
    a speech-like stream of width 8 and an acoustic-like stream of width 4.
    Silence maps to all-zero features.
    """

    seed: int = 0
    hop_seconds: float = 0.02
    speech_width: int = 8
    acoustic_width: int = 4
    _speech_proj: np.ndarray = field(init=False, repr=False)
    _acoustic_proj: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        self._speech_proj = rng.standard_normal((4, self.speech_width))
        self._acoustic_proj = rng.standard_normal((4, self.acoustic_width))

    @property
    def width(self) -> int:
        return self.speech_width + self.acoustic_width

    def streams(self, samples, sample_rate):
        hop = max(1, int(round(self.hop_seconds * sample_rate)))
        stats = frame_stats(samples, hop)
        return stats @ self._speech_proj, stats @ self._acoustic_proj


def extract_features(segment: AudioSegment | np.ndarray, extractor: FeatureExtractor,
                     sample_rate: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    if isinstance(segment, AudioSegment):
        samples, sample_rate = segment.samples, segment.sample_rate
    else:
        samples = np.asarray(segment, dtype=np.float64)
    speech, acoustic = extractor.streams(samples, sample_rate)
    speech = np.asarray(speech, dtype=np.float64)
    acoustic = np.asarray(acoustic, dtype=np.float64)
    if speech.ndim != 2 or acoustic.ndim != 2:
        raise ExtractorError("extractor streams must be 2-D (frames x width)")
    if speech.shape[0] != acoustic.shape[0]:
        raise ExtractorError(
            f"stream frame counts differ: {speech.shape[0]} vs {acoustic.shape[0]}"
        )
    return np.concatenate([speech, acoustic], axis=1)


@dataclass
class TimeEmbeddingTable:
    table: np.ndarray

    @classmethod
    def zeros(cls, dim: int, positions: int = DEFAULT_POSITIONS) -> "TimeEmbeddingTable":
        if positions <= 0 or dim <= 0:
            raise ValueError("positions and dim must be positive")
        return cls(np.zeros((positions, dim), dtype=np.float64))

    @property
    def positions(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    def to_json(self) -> dict:
        return matrix_to_json(self.table)

    @classmethod
    def from_json(cls, obj: dict) -> "TimeEmbeddingTable":
        return cls(matrix_from_json(obj))


def time_index(t: float, positions: int = DEFAULT_POSITIONS) -> int:
    """Whole-second index of ``t``, half-up rounded and clamped to the table."""
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"time must be finite and non-negative, got {t!r}")
    if positions <= 0:
        raise ValueError(f"positions must be positive, got {positions}")
    return min(int(math.floor(t + 0.5)), positions - 1)


def apply_time_encoding(w: np.ndarray, table: TimeEmbeddingTable, t: float) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] != table.dim:
        raise ShapeError(f"features of shape {w.shape} do not match table width {table.dim}")
    return w + table.table[time_index(t, table.positions)]


def encode_clip(
    clip: AudioClip,
    extractor: FeatureExtractor,
    table: TimeEmbeddingTable,
    window: float = DEFAULT_WINDOW_SECONDS,
    max_segments: int = DEFAULT_MAX_SEGMENTS,
    max_duration: float | None = None,
) -> tuple[list[Segment], bool]:
    """Segment, extract and time-encode a clip; returns (segments, truncated)."""
    seg = segment_clip(clip, window, max_segments, max_duration)
    out = []
    for s in seg.segments:
        feats = extract_features(s, extractor)
        out.append(Segment(s.index, s.start_time, apply_time_encoding(feats, table, s.start_time)))
    return out, seg.truncated


@dataclass
class FeatureClip:
    """A clip given directly as per-segment features (no audio)."""

    id: str
    duration: float
    segments: list[Segment]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "duration": self.duration,
            "segments": [
                {"start": s.start_time, "features": matrix_to_json(s.features)}
                for s in self.segments
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureClip":
        segments = [
            Segment(i, float(s["start"]), matrix_from_json(s["features"]))
            for i, s in enumerate(obj["segments"])
        ]
        return cls(str(obj["id"]), float(obj["duration"]), segments)


def read_feature_records(path: str | Path) -> list[FeatureClip]:
    clips = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                clips.append(FeatureClip.from_json(json.loads(line)))
    return clips


def encode_feature_clip(clip: FeatureClip, table: TimeEmbeddingTable) -> FeatureClip:
    segments = [
        Segment(s.index, s.start_time, apply_time_encoding(s.features, table, s.start_time))
        for s in clip.segments
    ]
    return FeatureClip(clip.id, clip.duration, segments)
