"""Deterministic scripted models for driving and testing the runtime."""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from .types import EOS_TOKEN, SourceChunk

__all__ = ["scripted_waitk_model", "scripted_probability_model"]


class _WaitK:
    """Copies source payloads after a fixed head start of k chunks.

    The head probability is 1 exactly when consumed >= k + written (and a
    fresh payload exists to copy), else 0; thresholds in (0,1) are
    irrelevant. Emits EOS once every consumed payload has been copied.
    """

    def __init__(self, k: int, vocab_map: Mapping[int, int] | None):
        self.k = k
        self.vocab_map = vocab_map

    def encode_prefix(self, chunks: Sequence[SourceChunk]):
        return tuple(c.payload for c in chunks)

    def head_probabilities(self, states, prefix: Sequence[int]) -> list[float]:
        ready = len(states) >= self.k + len(prefix) and len(states) > len(prefix)
        return [1.0 if ready else 0.0]

    def next_token(self, states, prefix: Sequence[int]) -> int:
        if len(prefix) >= len(states):
            return EOS_TOKEN
        payload = states[len(prefix)]
        if self.vocab_map is None:
            return payload
        return self.vocab_map[payload]


def scripted_waitk_model(k: int, vocab_map: Mapping[int, int] | None = None) -> _WaitK:
    """Wait-k copy policy; ``vocab_map`` of None copies payloads verbatim."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return _WaitK(k, vocab_map)


class _ScriptedProbability:
    """Head probabilities from a pure function of (written, consumed).

    Useful for threshold-dominance properties: the probability surface is
    fixed, so raising the threshold can only postpone writes. Output tokens
    copy source payloads like the wait-k model.
    """

    def __init__(self, prob_fn: Callable[[int, int], Sequence[float]]):
        self.prob_fn = prob_fn

    def encode_prefix(self, chunks: Sequence[SourceChunk]):
        return tuple(c.payload for c in chunks)

    def head_probabilities(self, states, prefix: Sequence[int]) -> list[float]:
        if len(prefix) >= len(states):
            return [0.0]  # nothing new to copy; force reads until drain
        return list(self.prob_fn(len(prefix), len(states)))

    def next_token(self, states, prefix: Sequence[int]) -> int:
        if len(prefix) >= len(states):
            return EOS_TOKEN
        return states[len(prefix)]


def scripted_probability_model(prob_fn: Callable[[int, int], Sequence[float]]):
    """Model whose write probabilities are ``prob_fn(written, consumed)``."""
    return _ScriptedProbability(prob_fn)
