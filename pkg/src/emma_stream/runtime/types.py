"""Domain types for the streaming decoder state machine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

# End-of-sequence marker; never recorded as an output token.
EOS_TOKEN = -1

__all__ = [
    "EOS_TOKEN",
    "SourceChunk",
    "StreamInstance",
    "RuntimeConfig",
    "IncrementalModel",
    "TraceEvent",
    "Emission",
    "DecisionTrace",
]


@dataclass(frozen=True)
class SourceChunk:
    duration_s: float
    payload: int

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError(f"chunk duration must be positive, got {self.duration_s}")


@dataclass(frozen=True)
class StreamInstance:
    id: str
    source_chunks: tuple[SourceChunk, ...]
    reference: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "source_chunks", tuple(self.source_chunks))
        object.__setattr__(self, "reference", tuple(int(t) for t in self.reference))

    @property
    def source_duration_s(self) -> float:
        return sum(c.duration_s for c in self.source_chunks)


@dataclass(frozen=True)
class RuntimeConfig:
    """Knobs of the streaming loop.

    ``threshold`` is the write-decision cut t applied to the minimum head
    probability; ``min_unit_chunk`` is the smallest unit count worth
    emitting before the stream ends; each committed token synthesizes
    ``units_per_token`` units of ``unit_duration_s`` seconds playback.
    """

    threshold: float = 0.5
    min_unit_chunk: int = 1
    units_per_token: int = 1
    unit_duration_s: float = 0.020
    max_target_len: int = 256

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie strictly in (0,1), got {self.threshold}")
        if self.min_unit_chunk < 1:
            raise ValueError("min_unit_chunk must be at least 1")
        if self.units_per_token < 1:
            raise ValueError("units_per_token must be at least 1")
        if not self.unit_duration_s > 0:
            raise ValueError("unit_duration_s must be positive")
        if self.max_target_len < 1:
            raise ValueError("max_target_len must be at least 1")


@runtime_checkable
class IncrementalModel(Protocol):
    """Behavioral contract the streaming loop drives.

    Implementations must be deterministic given identical call history, and
    ``encode_prefix`` of j chunks must equal one-shot encoding of that same
    prefix (the loop re-encodes from scratch after every read).
    """

    def encode_prefix(self, chunks: Sequence[SourceChunk]):
        """Encoder states for the consumed prefix."""

    def head_probabilities(self, states, prefix: Sequence[int]) -> list[float]:
        """Per-head write probabilities for the next target position."""

    def next_token(self, states, prefix: Sequence[int]) -> int:
        """Next target token id, or EOS_TOKEN."""


@dataclass(frozen=True)
class TraceEvent:
    sim_time_s: float
    kind: str  # READ | WRITE | EMIT | FINISH
    token: int | None = None
    units: int | None = None


@dataclass(frozen=True)
class Emission:
    """One synthesized output chunk: emission time and playback length."""

    emit_time_s: float
    playback_duration_s: float
    tokens: tuple[int, ...]


@dataclass
class DecisionTrace:
    """Everything a run produced: events, committed tokens, their delays
    (seconds of source consumed at commit time), and emitted chunks."""

    instance_id: str
    source_duration_s: float
    events: list[TraceEvent] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    delays: list[float] = field(default_factory=list)
    emissions: list[Emission] = field(default_factory=list)
    truncated: bool = False
