"""Corpus-level aggregation: per-song metric tables, histogram KL divergence
between a generated corpus and a reference corpus, and checkpoint ranking.

The divergence direction is KL(reference || generated) in natural-log units,
with the reference corpus as ground truth. Histograms use shared equal-width
edges over the pooled value range (32 bins by default) and additive epsilon
smoothing so empty bins never produce infinities. Undefined per-song metrics
are excluded from aggregation rather than coerced to zero.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CorpusError
from .metrics import MetricId, MetricVector, compute_all

DEFAULT_BINS = 32
DEFAULT_EPSILON = 1e-10


def worker_count() -> int:
    """Internal parallelism cap, from RIFFGAUGE_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("RIFFGAUGE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CorpusTable:
    corpus_id: str
    rows: dict[str, MetricVector]  # song id -> metrics

    def defined_values(self, metric: MetricId) -> list[float]:
        """Defined values of one metric, in sorted song-id order."""
        out = []
        for song_id in sorted(self.rows):
            value = self.rows[song_id].value(metric)
            if value is not None:
                out.append(float(value))
        return out


def corpus_metrics(songs, corpus_id: str = "corpus", step_ticks: int = 40) -> CorpusTable:
    """One MetricVector per (song_id, Score) pair; order-independent result."""
    songs = list(songs)
    if not songs:
        raise CorpusError("E050", "empty corpus")
    ids = [song_id for song_id, _ in songs]
    if len(set(ids)) != len(ids):
        raise CorpusError("E050", "duplicate song ids in corpus")
    threads = worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vectors = list(pool.map(lambda s: compute_all(s, step_ticks), (sc for _, sc in songs)))
    else:
        vectors = [compute_all(score, step_ticks) for _, score in songs]
    rows = dict(sorted(zip(ids, vectors)))
    return CorpusTable(corpus_id=corpus_id, rows=rows)


@dataclass(frozen=True)
class Edges:
    """Shared histogram bin edges; degenerate when the pooled range is a point."""

    values: tuple[float, ...]
    degenerate: bool = False


@dataclass(frozen=True)
class Histogram:
    edges: Edges
    masses: tuple[float, ...]  # nonnegative, sums to 1


def shared_edges(ref_values, gen_values, bins: int = DEFAULT_BINS) -> Edges:
    """Equal-width edges spanning the pooled [min, max] of both value sets."""
    ref_values = list(ref_values)
    gen_values = list(gen_values)
    if not ref_values or not gen_values:
        raise CorpusError("E051", "no defined values on one side")
    lo = min(min(ref_values), min(gen_values))
    hi = max(max(ref_values), max(gen_values))
    if lo == hi:
        return Edges((float(lo), float(hi)), degenerate=True)
    return Edges(tuple(np.linspace(lo, hi, bins + 1).tolist()))


def build_histogram(values, edges: Edges) -> Histogram:
    """Normalized counts of values over the edges (right-closed last bin)."""
    values = list(values)
    if not values:
        raise CorpusError("E051", "cannot histogram an empty value list")
    if edges.degenerate:
        return Histogram(edges, (1.0,))
    counts, _ = np.histogram(values, bins=np.asarray(edges.values))
    masses = counts / counts.sum()
    return Histogram(edges, tuple(masses.tolist()))


def kld(p: Histogram, q: Histogram, epsilon: float = DEFAULT_EPSILON) -> float:
    """KL(p || q) in nats after additive-epsilon smoothing and renormalization."""
    if p.edges != q.edges:
        raise CorpusError("E052", "histograms do not share edges")
    if p.edges.degenerate:
        return 0.0
    pm = (np.asarray(p.masses) + epsilon)
    qm = (np.asarray(q.masses) + epsilon)
    pm /= pm.sum()
    qm /= qm.sum()
    return float(np.sum(pm * np.log(pm / qm)))


@dataclass(frozen=True)
class KldReport:
    checkpoint_id: str
    divergences: dict[MetricId, float | None]
    song_counts: dict[MetricId, tuple[int, int]]  # (reference, generated) defined counts

    def defined(self) -> dict[MetricId, float]:
        return {m: d for m, d in self.divergences.items() if d is not None}

    def mean_divergence(self) -> float | None:
        defined = self.defined()
        if not defined:
            return None
        return sum(defined.values()) / len(defined)


def compare(ref: CorpusTable, gen: CorpusTable, bins: int = DEFAULT_BINS,
            epsilon: float = DEFAULT_EPSILON) -> KldReport:
    """Per-metric KL(ref || gen) over shared-edge histograms of per-song values."""
    if not ref.rows or not gen.rows:
        raise CorpusError("E050", "empty corpus table")
    divergences: dict[MetricId, float | None] = {}
    song_counts: dict[MetricId, tuple[int, int]] = {}
    for metric in MetricId:
        ref_values = ref.defined_values(metric)
        gen_values = gen.defined_values(metric)
        song_counts[metric] = (len(ref_values), len(gen_values))
        if not ref_values or not gen_values:
            divergences[metric] = None
            continue
        edges = shared_edges(ref_values, gen_values, bins)
        p = build_histogram(ref_values, edges)
        q = build_histogram(gen_values, edges)
        divergences[metric] = kld(p, q, epsilon)
    return KldReport(checkpoint_id=gen.corpus_id, divergences=divergences, song_counts=song_counts)


@dataclass(frozen=True)
class RankReport:
    per_metric_winner: dict[MetricId, str | None]
    overall_winner: str
    overall_means: dict[str, float | None]


def rank_checkpoints(reports) -> RankReport:
    """Argmin checkpoint per metric and overall (mean over defined metrics).

    Ties break toward the lexicographically smallest checkpoint id.
    """
    reports = list(reports)
    if len(reports) < 2:
        raise CorpusError("E053", f"ranking needs at least 2 reports, got {len(reports)}")
    ids = [r.checkpoint_id for r in reports]
    if len(set(ids)) != len(ids):
        raise CorpusError("E053", "duplicate checkpoint ids")

    per_metric: dict[MetricId, str | None] = {}
    for metric in MetricId:
        candidates = [
            (r.divergences.get(metric), r.checkpoint_id)
            for r in reports
            if r.divergences.get(metric) is not None
        ]
        per_metric[metric] = min(candidates)[1] if candidates else None

    means = {r.checkpoint_id: r.mean_divergence() for r in reports}
    scored = [(mean, cid) for cid, mean in means.items() if mean is not None]
    if not scored:
        raise CorpusError("E053", "no report has any defined divergence")
    overall = min(scored)[1]
    return RankReport(per_metric_winner=per_metric, overall_winner=overall, overall_means=means)


def box_stats(values) -> tuple[float, float, float, float, float]:
    """Five-number summary (min, Q1, median, Q3, max), linear-interpolated quartiles."""
    values = list(values)
    if not values:
        raise CorpusError("E054", "empty value sequence")
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return (float(arr.min()), float(q1), float(med), float(q3), float(arr.max()))


def finite_divergences(report: KldReport) -> bool:
    """True when every defined divergence in the report is finite."""
    return all(math.isfinite(d) for d in report.defined().values())
