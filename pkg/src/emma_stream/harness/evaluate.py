"""Corpus evaluation and threshold sweeps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from ..errors import (CorpusError, DomainError, EmptyOutputError,
                      ProtocolError)
from ..metrics.bleu import QualityReport, corpus_bleu
from ..metrics.latency import (InstanceLatency, LatencyReport,
                               average_lagging, build_latency_report,
                               length_adaptive_average_lagging, offsets)
from ..runtime.machine import run_stream
from ..runtime.trace import write_trace_jsonl
from ..runtime.types import StreamInstance
from .manifest import Manifest, load_instances
from .models import model_factory

__all__ = ["CorpusResult", "SweepRow", "SweepReport", "evaluate_corpus",
           "threshold_sweep"]


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    bleu: float
    al: float
    laal: float
    start_offset: float
    end_offset: float
    n_instances: int
    n_failures: int


@dataclass(frozen=True)
class CorpusResult:
    threshold: float
    latency: LatencyReport
    quality: QualityReport
    n_instances: int
    failures: tuple[tuple[str, str], ...]

    def to_row(self) -> SweepRow:
        return SweepRow(
            threshold=self.threshold,
            bleu=self.quality.bleu,
            al=self.latency.al,
            laal=self.latency.laal,
            start_offset=self.latency.start_offset_s,
            end_offset=self.latency.end_offset_s,
            n_instances=self.n_instances,
            n_failures=len(self.failures),
        )


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]


@dataclass(frozen=True)
class _Scored:
    instance_id: str
    latency: InstanceLatency
    hypothesis: tuple[int, ...]
    reference: tuple[int, ...]


def _score_instance(instance: StreamInstance, factory, config, trace_dir):
    model = factory(instance)
    trace = run_stream(model, instance, config)
    if trace_dir is not None:
        write_trace_jsonl(trace, trace_dir)
    duration = instance.source_duration_s
    al = average_lagging(trace.delays, duration, len(instance.reference))
    laal = length_adaptive_average_lagging(
        trace.delays, duration, len(instance.reference), len(trace.delays))
    offs = offsets(trace)
    row = InstanceLatency(instance_id=instance.id, al=al, laal=laal,
                          start_offset_s=offs["start_offset_s"],
                          end_offset_s=offs["end_offset_s"])
    return _Scored(instance.id, row, tuple(trace.outputs),
                   instance.reference)


def evaluate_corpus(manifest: Manifest, *, threshold: float | None = None,
                    workers: int = 1, trace_dir=None) -> CorpusResult:
    """Stream every instance, score it, aggregate in instance-id order.

    Per-instance failures are recorded, not fatal; a corpus where every
    instance failed raises CorpusError. The reduction sorts by instance id,
    so the result does not depend on worker scheduling.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    instances = load_instances(manifest.instances)
    if not instances:
        raise CorpusError(f"no instances in {manifest.instances}")
    config = manifest.runtime
    if threshold is not None:
        config = replace(config, threshold=float(threshold))
    factory = model_factory(manifest.model_kind, manifest.model_parameters,
                            manifest.seed)

    def score(instance):
        try:
            return _score_instance(instance, factory, config, trace_dir)
        except (EmptyOutputError, DomainError, ProtocolError, ValueError) as exc:
            return (instance.id, f"{type(exc).__name__}: {exc}")

    if workers == 1:
        outcomes = [score(inst) for inst in instances]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(score, instances))

    scored = sorted((o for o in outcomes if isinstance(o, _Scored)),
                    key=lambda s: s.instance_id)
    failures = tuple(sorted(o for o in outcomes if not isinstance(o, _Scored)))
    if not scored:
        raise CorpusError(
            f"all {len(instances)} instances failed; first: {failures[0][1]}")

    quality = corpus_bleu([s.hypothesis for s in scored],
                          [s.reference for s in scored])
    latency = build_latency_report(s.latency for s in scored)
    return CorpusResult(threshold=config.threshold, latency=latency,
                        quality=quality, n_instances=len(scored),
                        failures=failures)


def threshold_sweep(manifest: Manifest, *, workers: int = 1,
                    trace_dir=None) -> SweepReport:
    """One evaluate_corpus per sweep threshold, rows sorted by threshold."""
    thresholds = sorted(manifest.sweep)
    if len(thresholds) < 2:
        raise ValueError("a sweep needs at least two thresholds")
    rows = tuple(
        evaluate_corpus(manifest, threshold=t, workers=workers,
                        trace_dir=trace_dir).to_row()
        for t in thresholds)
    return SweepReport(rows=rows)
