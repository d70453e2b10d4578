"""Temporal markers, time-aware encoding, token merging and temporal metrics
for audio-language model tooling."""

from .codec import (
    TemporalToken,
    TemporalVocabulary,
    decode_tokens,
    encode_timestamp,
    extend_vocabulary,
    init_prediction_head,
    init_temporal_embeddings,
    quantize,
)
from .config import ToolConfig
from .grammar import EventAnnotation, PredictionRecord, SampleRecord, Style, Task
from .merging import AttentionSim, MergeConfig, MergeResult, merge_segment

__version__ = "0.1.0"
