import json

import numpy as np
import pytest

from timegrain.errors import ExtractorError, ShapeError
from timegrain.time_encoding import (
    AudioClip,
    FeatureClip,
    Segment,
    SyntheticExtractor,
    TimeEmbeddingTable,
    apply_time_encoding,
    encode_clip,
    encode_feature_clip,
    extract_features,
    read_feature_records,
    segment_clip,
    time_index,
)

SR = 1000  # small rate keeps the tests fast; logic is rate-independent


def clip(seconds, sr=SR, seed=0):
    return AudioClip(np.random.default_rng(seed).standard_normal(int(seconds * sr)), sr)


def test_clip_duration():
    assert clip(12.5).duration == 12.5
    with pytest.raises(ValueError):
        AudioClip(np.zeros(3), 0)


def test_segment_exact_division():
    seg = segment_clip(clip(90))
    assert [s.start_time for s in seg.segments] == [0, 30, 60]
    assert all(s.duration == 30 for s in seg.segments)
    assert not seg.truncated


def test_segment_single_partial_window():
    seg = segment_clip(clip(10))
    assert len(seg.segments) == 1 and seg.segments[0].duration == 10


def test_segment_truncates_with_flag():
    seg = segment_clip(clip(170), max_segments=5)
    assert len(seg.segments) == 5
    assert seg.truncated and seg.dropped_seconds == pytest.approx(20)


def test_segment_max_duration_limit():
    seg = segment_clip(clip(130), max_duration=120)
    assert seg.truncated
    assert sum(s.duration for s in seg.segments) == pytest.approx(120)


def test_segment_empty_clip():
    seg = segment_clip(AudioClip(np.zeros(0), SR))
    assert seg.segments == [] and not seg.truncated


def test_segment_argument_errors():
    with pytest.raises(ValueError):
        segment_clip(clip(1), window=0)
    with pytest.raises(ValueError):
        segment_clip(clip(1), max_segments=0)


@pytest.mark.parametrize("seconds, window", [(0.5, 30), (61.3, 30), (100, 7), (149.999, 30), (31, 2.5)])
def test_segments_partition_the_clip(seconds, window):
    c = clip(seconds)
    seg = segment_clip(c, window=window, max_segments=1000)
    joined = np.concatenate([s.samples for s in seg.segments])
    assert np.array_equal(joined, c.samples)
    for s in seg.segments:
        assert s.start_time == s.index * window


def test_extractor_widths_and_determinism():
    ex = SyntheticExtractor(seed=3)
    seg = segment_clip(clip(10)).segments[0]
    a = extract_features(seg, ex)
    assert a.shape == (500, 12)  # 20 ms hop at 1 kHz
    assert extract_features(seg, SyntheticExtractor(seed=3)).tobytes() == a.tobytes()


def test_extractor_zero_audio_gives_zero_features():
    out = extract_features(np.zeros(4000), SyntheticExtractor(), sample_rate=16000)
    assert out.shape == (13, 12) and not out.any()  # 4000 samples, 320-sample hop


def test_extractor_contract_mismatch():
    class Bad:
        def streams(self, samples, sr):
            return np.zeros((3, 8)), np.zeros((4, 4))

    with pytest.raises(ExtractorError):
        extract_features(np.zeros(10), Bad())


def test_custom_extractor_concatenates():
    class Two:
        def streams(self, samples, sr):
            return np.ones((5, 8)), np.full((5, 4), 2.0)

    out = extract_features(np.zeros(10), Two())
    assert out.shape == (5, 12)
    assert np.array_equal(out[:, 8:], np.full((5, 4), 2.0))


@pytest.mark.parametrize("t, j", [(0, 0), (30, 30), (0.49, 0), (0.5, 1), (10_000, 767), (767.4, 767)])
def test_time_index(t, j):
    assert time_index(t) == j


def test_time_index_monotone_and_bounded():
    ts = np.sort(np.random.default_rng(0).uniform(0, 2000, 5000))
    idx = [time_index(float(t), 768) for t in ts]
    assert all(a <= b for a, b in zip(idx, idx[1:]))
    assert max(idx) <= 767
    with pytest.raises(ValueError):
        time_index(-1)


def test_zero_table_is_identity():
    table = TimeEmbeddingTable.zeros(12)
    assert table.positions == 768
    w = np.random.default_rng(0).standard_normal((40, 12))
    assert apply_time_encoding(w, table, 60).tobytes() == w.tobytes()


def test_constant_row_shifts_every_frame():
    table = TimeEmbeddingTable.zeros(3)
    table.table[30] = [1.0, -2.0, 0.5]
    w = np.random.default_rng(1).standard_normal((6, 3))
    out = apply_time_encoding(w, table, 30.0)
    assert np.allclose(out - w, np.tile([1.0, -2.0, 0.5], (6, 1)))


def test_distinct_segments_get_distinct_offsets():
    rng = np.random.default_rng(2)
    table = TimeEmbeddingTable(rng.standard_normal((768, 4)))
    w = np.zeros((3, 4))
    a = apply_time_encoding(w, table, 0)
    b = apply_time_encoding(w, table, 30)
    assert np.array_equal(a[0], table.table[0]) and np.array_equal(b[0], table.table[30])
    assert not np.array_equal(a, b)


def test_encoding_preserves_frame_differences():
    rng = np.random.default_rng(3)
    table = TimeEmbeddingTable(rng.standard_normal((768, 5)))
    w = rng.integers(-50, 50, (8, 5)).astype(float)
    out = apply_time_encoding(w, table, 90)
    for f in range(8):
        for g in range(8):
            assert np.allclose(out[f] - out[g], w[f] - w[g], atol=1e-12)


def test_encoding_is_additive():
    rng = np.random.default_rng(4)
    table = TimeEmbeddingTable(rng.standard_normal((768, 5)))
    w = rng.standard_normal((8, 5))
    c = rng.standard_normal((8, 5))
    assert np.allclose(apply_time_encoding(w + c, table, 12), apply_time_encoding(w, table, 12) + c)


def test_width_mismatch():
    with pytest.raises(ShapeError):
        apply_time_encoding(np.zeros((2, 3)), TimeEmbeddingTable.zeros(4), 0)


def test_encode_clip_pipeline():
    segs, truncated = encode_clip(clip(70), SyntheticExtractor(), TimeEmbeddingTable.zeros(12))
    assert [s.start_time for s in segs] == [0, 30, 60] and not truncated
    assert all(s.features.shape[1] == 12 for s in segs)


def test_wav_round_trip(tmp_path):
    c = AudioClip(np.sin(np.linspace(0, 100, 16000)) * 0.5, 16000)
    path = tmp_path / "a.wav"
    c.to_wav(path)
    back = AudioClip.from_wav(path)
    assert back.sample_rate == 16000 and back.samples.size == 16000
    assert np.allclose(back.samples, c.samples, atol=1 / 32768)


def test_feature_record_jsonl(tmp_path):
    rng = np.random.default_rng(5)
    fc = FeatureClip("x1", 45.0, [Segment(0, 0.0, rng.standard_normal((3, 4))),
                                  Segment(1, 30.0, rng.standard_normal((2, 4)))])
    path = tmp_path / "f.jsonl"
    path.write_text(json.dumps(fc.to_json()) + "\n")
    [back] = read_feature_records(path)
    assert back.id == "x1" and [s.start_time for s in back.segments] == [0.0, 30.0]
    assert back.segments[1].features.tobytes() == fc.segments[1].features.tobytes()
    table = TimeEmbeddingTable.zeros(4)
    table.table[30] = 1.0
    enc = encode_feature_clip(back, table)
    assert np.array_equal(enc.segments[0].features, back.segments[0].features)
    assert np.allclose(enc.segments[1].features, back.segments[1].features + 1.0)
