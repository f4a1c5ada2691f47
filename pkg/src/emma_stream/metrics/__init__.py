"""Evaluation metrics: lagging, speech offsets, corpus BLEU."""

from .bleu import QualityReport, corpus_bleu, tokenize_13a
from .latency import (InstanceLatency, LatencyReport, average_lagging,
                      build_latency_report, length_adaptive_average_lagging,
                      offsets)

__all__ = [
    "QualityReport",
    "corpus_bleu",
    "tokenize_13a",
    "InstanceLatency",
    "LatencyReport",
    "average_lagging",
    "build_latency_report",
    "length_adaptive_average_lagging",
    "offsets",
]
