"""Model factories for corpus evaluation.

Three kinds: the wait-k copier (threshold-insensitive), a hash-seeded
stochastic policy (threshold-sensitive but fully deterministic, so sweeps
are reproducible across runs and worker counts), and a policy trained by
the toy objective driving hash-embedded states.
"""

from __future__ import annotations

import hashlib
import math
from typing import Callable, Sequence

import numpy as np

from ..emma.params import PolicyHeadParams
from ..runtime.models import scripted_waitk_model
from ..runtime.types import EOS_TOKEN, IncrementalModel, SourceChunk, StreamInstance

__all__ = ["ScriptedStochasticModel", "ToyPolicyModel", "model_factory"]


def _hash_rng(*parts) -> np.random.Generator:
    """Generator seeded from a stable digest of the parts.

    hashlib, not hash(): the latter is salted per process and would break
    determinism across runs and worker counts.
    """
    material = "|".join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class ScriptedStochasticModel:
    """Head probabilities sigmoid(g / temperature) with g drawn once from a
    seeded Gaussian per (head, written, consumed).

    The surface depends only on (written, consumed), which yields the
    pointwise delay dominance that threshold sweeps rely on. Tokens copy
    source payloads so references line up with outputs.
    """

    def __init__(self, seed: int, instance_id: str, n_heads: int = 2,
                 temperature: float = 1.0):
        if n_heads < 1:
            raise ValueError("need at least one head")
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        self.seed = seed
        self.instance_id = instance_id
        self.n_heads = n_heads
        self.temperature = temperature
        self._cache: dict[tuple[int, int, int], float] = {}

    def _gaussian(self, head: int, written: int, consumed: int) -> float:
        key = (head, written, consumed)
        if key not in self._cache:
            rng = _hash_rng(self.seed, self.instance_id, head, written, consumed)
            self._cache[key] = float(rng.standard_normal())
        return self._cache[key]

    def encode_prefix(self, chunks: Sequence[SourceChunk]):
        return tuple(c.payload for c in chunks)

    def head_probabilities(self, states, prefix: Sequence[int]) -> list[float]:
        written, consumed = len(prefix), len(states)
        if written >= consumed:
            return [0.0] * self.n_heads  # nothing unseen to translate
        return [_sigmoid(self._gaussian(h, written, consumed) / self.temperature)
                for h in range(self.n_heads)]

    def next_token(self, states, prefix: Sequence[int]) -> int:
        if len(prefix) >= len(states):
            return EOS_TOKEN
        return states[len(prefix)]


class ToyPolicyModel:
    """Streams with trained policy heads over hash-embedded states.

    Source payloads embed to shared d-dimensional Gaussian rows (the same
    token embeds identically in every instance); the decoder state embeds
    from (position, last committed token). The stepwise probability of each
    head is evaluated against the latest encoder row.
    """

    def __init__(self, heads: list[PolicyHeadParams], d: int, seed: int):
        if not heads:
            raise ValueError("need at least one trained head")
        self.heads = list(heads)
        self.d = d
        self.seed = seed
        self._src_cache: dict[int, np.ndarray] = {}
        self._dec_cache: dict[tuple[int, int], np.ndarray] = {}

    def _embed_source(self, payload: int) -> np.ndarray:
        if payload not in self._src_cache:
            rng = _hash_rng(self.seed, "src", payload)
            self._src_cache[payload] = rng.standard_normal(self.d)
        return self._src_cache[payload]

    def _embed_decoder(self, prefix: Sequence[int]) -> np.ndarray:
        key = (len(prefix), prefix[-1] if prefix else EOS_TOKEN)
        if key not in self._dec_cache:
            rng = _hash_rng(self.seed, "dec", *key)
            self._dec_cache[key] = rng.standard_normal((1, self.d))
        return self._dec_cache[key]

    def encode_prefix(self, chunks: Sequence[SourceChunk]):
        payloads = tuple(c.payload for c in chunks)
        h = np.vstack([self._embed_source(p) for p in payloads])
        return (payloads, h)

    def head_probabilities(self, states, prefix: Sequence[int]) -> list[float]:
        payloads, h = states
        if len(prefix) >= len(payloads):
            return [0.0] * len(self.heads)
        s_row = self._embed_decoder(prefix)
        h_last = h[-1:, :]
        ps = []
        for head in self.heads:
            energy = (head.ffn_s.apply(s_row) @ head.ffn_h.apply(h_last).T).item()
            ps.append(_sigmoid((energy + head.bias) / head.temperature))
        return ps

    def next_token(self, states, prefix: Sequence[int]) -> int:
        payloads, _ = states
        if len(prefix) >= len(payloads):
            return EOS_TOKEN
        return payloads[len(prefix)]


def model_factory(kind: str, parameters: dict, seed: int) -> Callable[[StreamInstance], IncrementalModel]:
    """Per-instance model constructor for a manifest's model block."""
    if kind == "scripted_waitk":
        k = int(parameters.get("k", 2))
        vocab_map = parameters.get("vocab_map")
        if vocab_map is not None:
            vocab_map = {int(a): int(b) for a, b in vocab_map.items()}
        return lambda inst: scripted_waitk_model(k, vocab_map)
    if kind == "scripted_stochastic":
        n_heads = int(parameters.get("heads", 2))
        temperature = float(parameters.get("temperature", 1.0))
        return lambda inst: ScriptedStochasticModel(seed, inst.id, n_heads,
                                                    temperature)
    if kind == "toy_trained":
        from .training import trained_heads_for_model
        heads, d = trained_heads_for_model(parameters, seed)
        return lambda inst: ToyPolicyModel(heads, d, seed)
    raise ValueError(f"unknown model kind {kind!r}")
