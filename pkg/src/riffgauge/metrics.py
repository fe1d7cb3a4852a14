"""Per-song symbolic metrics over a Score.

All pitch-based metrics pool every pitched (non-drum) track and count each
note event once, duration-unweighted; polyphony and polyphony rate are the
exception and read the sounding-pitch timeline. Entropies use base-2
logarithms. A metric whose precondition fails (no pitched notes, no drum
onsets, no sounding steps) reports the explicit undefined marker None rather
than a coerced zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .score import Score, active_pitch_timeline

#: Eighth-note grid for duple meter, triplet-eighth grid for triple meter,
#: both in ticks at 960 per quarter.
DRUM_GRIDS = {"duple": 480, "triple": 320}

_MAJOR = frozenset({0, 2, 4, 5, 7, 9, 11})
_NATURAL_MINOR = frozenset({0, 2, 3, 5, 7, 8, 10})
SCALES = tuple(
    frozenset((degree + root) % 12 for degree in family)
    for family in (_MAJOR, _NATURAL_MINOR)
    for root in range(12)
)


class MetricId(Enum):
    PCE = "pce"
    PE = "pe"
    NPC = "npc"
    NP = "np"
    PR = "pr"
    SC = "sc"
    POL = "pol"
    POLR = "polr"
    DPC = "dpc"


@dataclass(frozen=True)
class MetricVector:
    """The nine metric values (None = undefined) plus the counts they used."""

    pce: float | None
    pe: float | None
    npc: int | None
    np: int | None
    pr: int | None
    sc: float | None
    pol: float | None
    polr: float | None
    dpc: float | None
    n_pitched_notes: int
    n_drum_onsets: int

    def value(self, metric: MetricId) -> float | None:
        return getattr(self, metric.value)

    def as_dict(self) -> dict[str, float | None]:
        return {m.value: self.value(m) for m in MetricId}


def _pitches(score: Score) -> list[int]:
    return [event.pitch for event in score.pitched_events()]


def _entropy_bits(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def pitch_class_histogram(score: Score) -> np.ndarray:
    """Counts of pitch mod 12 over pitched events; sums to the pitched-note count."""
    return np.bincount([p % 12 for p in _pitches(score)], minlength=12)


def pitch_class_entropy(score: Score) -> float | None:
    """Shannon entropy (bits) of the normalized 12-bin pitch-class histogram."""
    hist = pitch_class_histogram(score)
    if hist.sum() == 0:
        return None
    return _entropy_bits(hist)


def pitch_entropy(score: Score) -> float | None:
    """Shannon entropy (bits) of the normalized 128-bin pitch histogram."""
    pitches = _pitches(score)
    if not pitches:
        return None
    return _entropy_bits(np.bincount(pitches, minlength=128))


def n_pitch_classes(score: Score) -> int | None:
    pitches = _pitches(score)
    return len({p % 12 for p in pitches}) if pitches else None


def n_pitches(score: Score) -> int | None:
    pitches = _pitches(score)
    return len(set(pitches)) if pitches else None


def pitch_range(score: Score) -> int | None:
    pitches = _pitches(score)
    return max(pitches) - min(pitches) if pitches else None


def scale_consistency(score: Score) -> float | None:
    """Best fraction of pitched notes captured by one major or natural-minor scale.

    The natural-minor sets are rotations of the major sets, so the family has
    12 distinct pitch-class sets and the result is never below 7/12.
    """
    pitches = _pitches(score)
    if not pitches:
        return None
    classes = [p % 12 for p in pitches]
    return max(sum(c in scale for c in classes) for scale in SCALES) / len(classes)


def polyphony(score: Score, step_ticks: int = 40) -> float | None:
    """Mean sounding-pitch count over timeline steps with at least one pitched note."""
    counts = [len(s) for s in active_pitch_timeline(score, step_ticks) if s]
    return sum(counts) / len(counts) if counts else None


def polyphony_rate(score: Score, step_ticks: int = 40) -> float | None:
    """Fraction of sounding timeline steps holding two or more pitches."""
    counts = [len(s) for s in active_pitch_timeline(score, step_ticks) if s]
    if not counts:
        return None
    return sum(c >= 2 for c in counts) / len(counts)


def drum_in_pattern_rate(score: Score, meter: str) -> float | None:
    """Fraction of drum onsets landing on the duple or triple grid."""
    grid = DRUM_GRIDS[meter]
    onsets = [event.onset for event in score.drum_events()]
    if not onsets:
        return None
    return sum(t % grid == 0 for t in onsets) / len(onsets)


def drum_pattern_consistency(score: Score) -> float | None:
    """max(duple rate, triple rate), undefined without drum onsets."""
    duple = drum_in_pattern_rate(score, "duple")
    if duple is None:
        return None
    return max(duple, drum_in_pattern_rate(score, "triple"))


def compute_all(score: Score, step_ticks: int = 40) -> MetricVector:
    """All nine metrics with undefined markers where preconditions fail."""
    pitches = _pitches(score)
    counts = [len(s) for s in active_pitch_timeline(score, step_ticks) if s]
    pol = sum(counts) / len(counts) if counts else None
    polr = sum(c >= 2 for c in counts) / len(counts) if counts else None
    return MetricVector(
        pce=pitch_class_entropy(score),
        pe=pitch_entropy(score),
        npc=n_pitch_classes(score),
        np=n_pitches(score),
        pr=pitch_range(score),
        sc=scale_consistency(score),
        pol=pol,
        polr=polr,
        dpc=drum_pattern_consistency(score),
        n_pitched_notes=len(pitches),
        n_drum_onsets=len(score.drum_events()),
    )
