"""Timed multi-instrument score model built from token streams.

Time starts at tick 0 and advances only on wait tokens, so all notes between
two consecutive waits form one chord slice at the same onset. A note sustains
until the next onset on the same string (for drums: the same midi key) or the
end of its measure, whichever comes first — the format carries no explicit
note-offs, and a physical string is monophonic.

Measures span [start_tick, end_tick) where boundaries are the ticks at which
new_measure tokens occur; events are assigned to measures by onset tick, so a
note written just before a barline with no wait in between belongs to the
following measure. Duplicate notes on the same string at the same onset
collapse into a single event (their effect names merge). A note left at the
very end of the song with no wait after it has zero playable duration and is
dropped (validate reports W002 for these).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, replace

from .errors import BuildError, InvalidStreamError
from .tokens import (
    TICKS_PER_QUARTER,
    Artist,
    Downtune,
    DrumNote,
    Effect,
    EndOfSong,
    Instrument,
    NewMeasure,
    Note,
    Rest,
    Severity,
    Start,
    Tempo,
    TimeSignature,
    Token,
    TokenStream,
    Wait,
    diagnose,
    measure_duration,
    stream_from_tokens,
)

MAX_TICK = 2**63 - 1

#: Open-string MIDI pitches, course 1 first (highest string).
GUITAR6 = (64, 59, 55, 50, 45, 40)
GUITAR7 = (64, 59, 55, 50, 45, 40, 35)
BASS4 = (43, 38, 33, 28)
BASS5 = (43, 38, 33, 28, 23)


@dataclass(frozen=True)
class Tuning:
    open_pitches: tuple[int, ...]
    downtune: int = 0  # semitone offset <= 0

    @property
    def courses(self) -> int:
        return len(self.open_pitches)


DEFAULT_TUNINGS = {
    inst: Tuning(BASS4 if inst is Instrument.BASS else GUITAR6)
    for inst in Instrument
    if inst is not Instrument.DRUMS
}


def resolve_pitch(tuning: Tuning, course: int, fret: int) -> int:
    """MIDI pitch of (course, fret) under a tuning: open pitch + downtune + fret."""
    if not 1 <= course <= tuning.courses:
        raise BuildError("E013", f"course {course} out of range for {tuning.courses}-string tuning")
    return tuning.open_pitches[course - 1] + tuning.downtune + fret


@dataclass(frozen=True)
class NoteEvent:
    instrument: Instrument
    onset: int
    duration: int  # > 0
    pitch: int  # MIDI number; percussion key for drums
    course: int | None = None
    fret: int | None = None
    effects: tuple[str, ...] = ()


@dataclass(frozen=True)
class Measure:
    index: int
    start_tick: int
    end_tick: int
    time_signature: tuple[int, int]


@dataclass(frozen=True)
class Score:
    tempo_bpm: int
    measures: tuple[Measure, ...]
    events: dict[Instrument, tuple[NoteEvent, ...]]
    source_instruments: frozenset[Instrument]
    ticks_per_quarter: int = TICKS_PER_QUARTER
    source: TokenStream | None = None  # stream this score was built from

    @property
    def end_tick(self) -> int:
        return self.measures[-1].end_tick if self.measures else 0

    def pitched_events(self):
        for inst, events in self.events.items():
            if inst is not Instrument.DRUMS:
                yield from events

    def drum_events(self) -> tuple[NoteEvent, ...]:
        return self.events.get(Instrument.DRUMS, ())


def _require_clean(stream: TokenStream, course_counts) -> None:
    errors = [d for d in diagnose(stream, course_counts) if d.severity is Severity.ERROR]
    if errors:
        raise InvalidStreamError(errors)


def build_score(stream: TokenStream, tunings=None) -> Score:
    """Construct the timed score for a stream that validates with zero errors.

    ``tunings`` maps pitched instruments to Tuning (defaults to 6-string
    guitars and 4-string bass in standard tuning). A downtune token in the
    stream shifts every supplied tuning by its offset.
    """
    if tunings is None:
        tunings = DEFAULT_TUNINGS
    course_counts = {inst: t.courses for inst, t in tunings.items()}
    _require_clean(stream, course_counts)

    stream_downtune = 0
    for token in stream.tokens:
        if isinstance(token, Downtune):
            stream_downtune = token.semitones
            break
    effective = {inst: replace(t, downtune=t.downtune + stream_downtune) for inst, t in tunings.items()}

    tempo_bpm = next(t.bpm for t in stream.tokens if isinstance(t, Tempo))
    tick = 0
    measure_starts: list[int] = []
    measure_sigs: list[tuple[int, int]] = []
    current_sig = (4, 4)
    raw: list[dict] = []  # onset-ordered by construction
    present: set[Instrument] = set()

    for token, pos in zip(stream.tokens, stream.positions):
        match token:
            case NewMeasure():
                measure_starts.append(tick)
                measure_sigs.append(current_sig)
            case TimeSignature(numerator=num, denominator=den):
                current_sig = (num, den)
                measure_sigs[-1] = current_sig
            case Wait(ticks=ticks):
                if tick + ticks > MAX_TICK:
                    raise BuildError("E021", f"wait at {pos[0]}:{pos[1]} overflows the 64-bit tick counter")
                tick += ticks
            case Note(instrument=inst, course=course, fret=fret):
                pitch = resolve_pitch(effective[inst], course, fret)
                if not 0 <= pitch <= 127:
                    raise BuildError("E020", f"note at {pos[0]}:{pos[1]} resolves to pitch {pitch} outside [0, 127]")
                raw.append(
                    {"inst": inst, "key": course, "pitch": pitch, "onset": tick,
                     "course": course, "fret": fret, "effects": []}
                )
                present.add(inst)
            case DrumNote(midi_key=key):
                raw.append(
                    {"inst": Instrument.DRUMS, "key": key, "pitch": key, "onset": tick,
                     "course": None, "fret": None, "effects": []}
                )
                present.add(Instrument.DRUMS)
            case Rest(instrument=inst):
                present.add(inst)
            case Effect(instrument=inst, name=name):
                for entry in reversed(raw):
                    if entry["inst"] is inst:
                        if name not in entry["effects"]:
                            entry["effects"].append(name)
                        break
                present.add(inst)
            case EndOfSong():
                break
            case Artist() | Tempo() | Start() | Downtune():
                pass

    end_tick = tick
    measures = tuple(
        Measure(i, start, measure_starts[i + 1] if i + 1 < len(measure_starts) else end_tick, sig)
        for i, (start, sig) in enumerate(zip(measure_starts, measure_sigs))
    )

    # collapse duplicate (instrument, string, onset) strikes
    merged: dict[tuple, dict] = {}
    for entry in raw:
        slot = merged.setdefault((entry["inst"], entry["key"], entry["onset"]), entry)
        if slot is not entry:
            for name in entry["effects"]:
                if name not in slot["effects"]:
                    slot["effects"].append(name)

    starts = [m.start_tick for m in measures]
    by_string: dict[tuple, list[dict]] = {}
    for entry in merged.values():
        by_string.setdefault((entry["inst"], entry["key"]), []).append(entry)

    events: dict[Instrument, list[NoteEvent]] = {}
    for group in by_string.values():
        group.sort(key=lambda e: e["onset"])
        for i, entry in enumerate(group):
            onset = entry["onset"]
            idx = bisect_right(starts, onset) - 1
            if idx < 0 or onset >= measures[idx].end_tick:
                continue  # zero remaining duration at song end; W002 warned
            cutoff = measures[idx].end_tick
            if i + 1 < len(group):
                cutoff = min(cutoff, group[i + 1]["onset"])
            duration = cutoff - onset
            if duration <= 0:
                continue
            events.setdefault(entry["inst"], []).append(
                NoteEvent(
                    instrument=entry["inst"],
                    onset=onset,
                    duration=duration,
                    pitch=entry["pitch"],
                    course=entry["course"],
                    fret=entry["fret"],
                    effects=tuple(entry["effects"]),
                )
            )

    return Score(
        tempo_bpm=tempo_bpm,
        measures=measures,
        events={inst: tuple(sorted(evs, key=lambda e: (e.onset, e.pitch, e.course or 0)))
                for inst, evs in sorted(events.items(), key=lambda kv: kv[0].value)},
        source_instruments=frozenset(present),
        source=stream,
    )


def active_pitch_timeline(score: Score, step_ticks: int = 40) -> tuple[frozenset[int], ...]:
    """Set of sounding pitched (non-drum) pitches at each step t = 0, step, ... < song end."""
    if step_ticks <= 0 or TICKS_PER_QUARTER % step_ticks != 0:
        raise ValueError(f"step_ticks must divide {TICKS_PER_QUARTER}, got {step_ticks}")
    end = score.end_tick
    n_steps = (end + step_ticks - 1) // step_ticks
    sounding: list[set[int]] = [set() for _ in range(n_steps)]
    for event in score.pitched_events():
        first = (event.onset + step_ticks - 1) // step_ticks
        last = min((event.onset + event.duration - 1) // step_ticks, n_steps - 1)
        for j in range(first, last + 1):
            sounding[j].add(event.pitch)
    return tuple(frozenset(s) for s in sounding)


def extract_prompt(score: Score, n_measures: int) -> TokenStream:
    """First n_measures measure blocks of the source stream, behind its header."""
    if score.source is None:
        raise ValueError("score was not built from a token stream")
    if not 1 <= n_measures <= len(score.measures):
        raise BuildError("E030", f"requested {n_measures} measures, song has {len(score.measures)}")
    kept: list[Token] = []
    seen_measures = 0
    for token in score.source.tokens:
        if isinstance(token, NewMeasure):
            seen_measures += 1
            if seen_measures > n_measures:
                break
        if isinstance(token, EndOfSong):
            break
        kept.append(token)
    return stream_from_tokens(kept)


def canonical_prompt(tempo_bpm: int = 120, cymbal_key: int = 49) -> TokenStream:
    """One 4/4 measure: low E on guitar and bass, kick plus cymbal on drums."""
    return stream_from_tokens(
        [
            Tempo(tempo_bpm),
            Start(),
            NewMeasure(),
            TimeSignature(4, 4),
            Note(Instrument.DISTORTED0, 6, 0),
            Note(Instrument.BASS, 4, 0),
            DrumNote(36),
            DrumNote(cymbal_key),
            Wait(measure_duration(4, 4)),
        ]
    )


def time_signature_profile(score: Score) -> dict[tuple[int, int], int]:
    """Measure count per time signature; counts sum to the measure count."""
    profile: dict[tuple[int, int], int] = {}
    for measure in score.measures:
        profile[measure.time_signature] = profile.get(measure.time_signature, 0) + 1
    return profile
