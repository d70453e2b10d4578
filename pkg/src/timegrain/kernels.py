"""Hot inner loops with a numba path and a pure-numpy path.

Each kernel exists in two flavours:

* ``*_loop`` -- explicit loops, compiled by numba when it is available;
* ``*_numpy`` -- vectorised numpy, used when numba is missing or disabled.

The public names (``lcs_length``, ``intersection_length``, ``frame_stats``)
dispatch on :data:`timegrain._accel.USE_NUMBA`. Both paths return identical
results for integer kernels; float kernels agree to rounding.
"""

import numpy as np

from ._accel import USE_NUMBA, jit


def _lcs_length_loop(a, b):
    n = a.shape[0]
    m = b.shape[0]
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    curr = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        ai = a[i]
        for j in range(m):
            if ai == b[j]:
                curr[j + 1] = prev[j] + 1
            elif prev[j + 1] >= curr[j]:
                curr[j + 1] = prev[j + 1]
            else:
                curr[j + 1] = curr[j]
        for j in range(m + 1):
            prev[j] = curr[j]
    return prev[m]


def lcs_length_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Length of the longest common subsequence of two integer sequences.

    Row recurrence ``new[j] = max(prev[j], new[j-1], prev[j-1] + 1 if match)``
    is a running maximum, so each row is one ``maximum.accumulate``.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        return 0
    prev = np.zeros(b.size + 1, dtype=np.int64)
    for token in a:
        cand = np.where(b == token, prev[:-1] + 1, 0)
        row = np.empty_like(prev)
        row[0] = 0
        row[1:] = np.maximum.accumulate(np.maximum(prev[1:], cand))
        prev = row
    return int(prev[-1])


def _intersection_length_loop(a_start, a_end, b_start, b_end):
    # both inputs sorted and internally disjoint
    i = 0
    j = 0
    total = 0.0
    while i < a_start.shape[0] and j < b_start.shape[0]:
        lo = max(a_start[i], b_start[j])
        hi = min(a_end[i], b_end[j])
        if hi > lo:
            total += hi - lo
        if a_end[i] < b_end[j]:
            i += 1
        else:
            j += 1
    return total


def intersection_length_numpy(a_start, a_end, b_start, b_end) -> float:
    """Total overlap between two normalised interval sets.

    For each interval of ``a`` the overlapping run of ``b`` is found by
    binary search, so only the at most ``len(a) + len(b)`` overlapping
    pairs are materialised.
    """
    a_start = np.asarray(a_start, dtype=np.float64)
    a_end = np.asarray(a_end, dtype=np.float64)
    b_start = np.asarray(b_start, dtype=np.float64)
    b_end = np.asarray(b_end, dtype=np.float64)
    if a_start.size == 0 or b_start.size == 0:
        return 0.0
    first = np.searchsorted(b_end, a_start, side="right")
    stop = np.searchsorted(b_start, a_end, side="left")
    counts = np.maximum(stop - first, 0)
    total = int(counts.sum())
    if total == 0:
        return 0.0
    ai = np.repeat(np.arange(a_start.size), counts)
    bj = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts) + np.repeat(first, counts)
    hi = np.minimum(a_end[ai], b_end[bj])
    lo = np.maximum(a_start[ai], b_start[bj])
    return float(np.clip(hi - lo, 0.0, None).sum())


def _frame_stats_loop(samples, hop):
    n = samples.shape[0]
    n_frames = (n + hop - 1) // hop
    out = np.zeros((n_frames, 4), dtype=np.float64)
    for f in range(n_frames):
        lo = f * hop
        hi = min(lo + hop, n)
        sq = 0.0
        ab = 0.0
        peak = 0.0
        crossings = 0
        for k in range(lo, hi):
            x = samples[k]
            sq += x * x
            ax = abs(x)
            ab += ax
            if ax > peak:
                peak = ax
            if k > lo and (x > 0.0) != (samples[k - 1] > 0.0) and x != samples[k - 1]:
                crossings += 1
        width = hi - lo
        out[f, 0] = np.sqrt(sq / width)
        out[f, 1] = ab / width
        out[f, 2] = peak
        out[f, 3] = crossings / width
    return out


def frame_stats_numpy(samples: np.ndarray, hop: int) -> np.ndarray:
    """Per-frame ``[rms, mean |x|, peak |x|, zero-crossing rate]``.

    Frames are consecutive, non-overlapping and ``hop`` samples wide; the last
    frame may be shorter. A zero-crossing is a sign change between adjacent
    samples inside one frame.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.size
    n_frames = -(-n // hop)
    out = np.zeros((n_frames, 4), dtype=np.float64)
    if n_frames == 0:
        return out
    padded = np.zeros(n_frames * hop, dtype=np.float64)
    padded[:n] = samples
    frames = padded.reshape(n_frames, hop)
    widths = np.full(n_frames, hop, dtype=np.float64)
    widths[-1] = n - (n_frames - 1) * hop
    valid = np.arange(hop)[None, :] < widths[:, None]
    out[:, 0] = np.sqrt((frames * frames).sum(axis=1) / widths)
    out[:, 1] = np.abs(frames).sum(axis=1) / widths
    out[:, 2] = np.abs(frames).max(axis=1)
    pos = frames > 0.0
    flips = (pos[:, 1:] != pos[:, :-1]) & (frames[:, 1:] != frames[:, :-1])
    flips &= valid[:, 1:]
    out[:, 3] = flips.sum(axis=1) / widths
    return out


lcs_length_jit = jit(_lcs_length_loop)
intersection_length_jit = jit(_intersection_length_loop)
frame_stats_jit = jit(_frame_stats_loop)


def lcs_length(a, b) -> int:
    if USE_NUMBA:
        return int(
            lcs_length_jit(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        )
    return lcs_length_numpy(a, b)


def intersection_length(a_start, a_end, b_start, b_end) -> float:
    if USE_NUMBA:
        return float(
            intersection_length_jit(
                np.ascontiguousarray(a_start, dtype=np.float64),
                np.ascontiguousarray(a_end, dtype=np.float64),
                np.ascontiguousarray(b_start, dtype=np.float64),
                np.ascontiguousarray(b_end, dtype=np.float64),
            )
        )
    return intersection_length_numpy(a_start, a_end, b_start, b_end)


def frame_stats(samples, hop: int) -> np.ndarray:
    if hop <= 0:
        raise ValueError(f"hop must be positive, got {hop}")
    if USE_NUMBA:
        return frame_stats_jit(np.ascontiguousarray(samples, dtype=np.float64), int(hop))
    return frame_stats_numpy(samples, hop)
