"""Textual token format for multi-instrument tablature: lexing, validation, serialization.

Grammar (one token per line in canonical form; the lexer accepts any
whitespace separation):

    artist:<text-without-whitespace>
    downtune:<int <= 0>
    tempo:<int 30..300>
    start
    new_measure
    time_signature:<num 1..32>:<den in 1,2,4,8,16,32>
    <inst>:note:s<course>:f<fret 0..30>     pitched instruments only
    drums:note:<midi-key 27..87>
    <inst>:rest                             any instrument, drums included
    wait:<ticks > 0>                        960 ticks per quarter note
    nfx:<inst>:<name>                       expressive technique, open name
    end

where <inst> for notes is one of distorted0, distorted1, distorted2, clean0,
clean1, leads0, bass. Files use extension ``.tokens.txt``, UTF-8, LF line
endings in canonical form.

A structurally valid stream is: optional artist, optional downtune, exactly
one tempo, exactly one start, then one or more measure blocks each opened by
new_measure (with an optional time_signature immediately after), and an
optional trailing end.

Diagnostic codes:

    E001  unknown lexeme shape
    E002  out-of-range numeric field (fret, bpm, midi key, ...)
    E003  non-integer numeric field
    E010  missing or duplicated tempo/start
    E011  new_measure before start
    E012  effect token not following a same-instrument note
    E013  note course exceeds the instrument's string count
    E014  zero measures
    E015  token out of structural position (header token in the body,
          time_signature not after new_measure, content after end, ...)
    W001  measure wait-tick sum disagrees with its time signature (warning)
    W002  note at the very end of the stream with no wait after it, so it
          has zero playable duration (warning)

Warnings never make a stream unusable for score construction; errors do.
All operations here are pure functions of their inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

TICKS_PER_QUARTER = 960


class Instrument(str, Enum):
    DISTORTED0 = "distorted0"
    DISTORTED1 = "distorted1"
    DISTORTED2 = "distorted2"
    CLEAN0 = "clean0"
    CLEAN1 = "clean1"
    LEADS0 = "leads0"
    BASS = "bass"
    DRUMS = "drums"

    def __str__(self) -> str:  # canonical token spelling
        return self.value


PITCHED_INSTRUMENTS = frozenset(i for i in Instrument if i is not Instrument.DRUMS)

#: Course counts assumed when no explicit tunings are supplied (6-string
#: guitars, 4-string bass). riffgauge.score ships matching tuning presets.
DEFAULT_COURSE_COUNTS = {
    inst: (4 if inst is Instrument.BASS else 6) for inst in PITCHED_INSTRUMENTS
}

TEMPO_RANGE = (30, 300)
FRET_RANGE = (0, 30)
DRUM_KEY_RANGE = (27, 87)
TIMESIG_NUM_RANGE = (1, 32)
TIMESIG_DENOMS = frozenset({1, 2, 4, 8, 16, 32})


# ---------------------------------------------------------------------------
# token variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    """Base class for all token variants; text() is the canonical spelling."""

    def text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Artist(Token):
    name: str

    def text(self) -> str:
        return f"artist:{self.name}"


@dataclass(frozen=True)
class Downtune(Token):
    semitones: int  # <= 0

    def text(self) -> str:
        return f"downtune:{self.semitones}"


@dataclass(frozen=True)
class Tempo(Token):
    bpm: int

    def text(self) -> str:
        return f"tempo:{self.bpm}"


@dataclass(frozen=True)
class Start(Token):
    def text(self) -> str:
        return "start"


@dataclass(frozen=True)
class NewMeasure(Token):
    def text(self) -> str:
        return "new_measure"


@dataclass(frozen=True)
class TimeSignature(Token):
    numerator: int
    denominator: int

    def text(self) -> str:
        return f"time_signature:{self.numerator}:{self.denominator}"


@dataclass(frozen=True)
class Note(Token):
    instrument: Instrument
    course: int  # 1 = highest-pitched string
    fret: int

    def text(self) -> str:
        return f"{self.instrument.value}:note:s{self.course}:f{self.fret}"


@dataclass(frozen=True)
class DrumNote(Token):
    midi_key: int

    def text(self) -> str:
        return f"drums:note:{self.midi_key}"


@dataclass(frozen=True)
class Rest(Token):
    instrument: Instrument

    def text(self) -> str:
        return f"{self.instrument.value}:rest"


@dataclass(frozen=True)
class Wait(Token):
    ticks: int  # > 0, at 960 per quarter note

    def text(self) -> str:
        return f"wait:{self.ticks}"


@dataclass(frozen=True)
class Effect(Token):
    instrument: Instrument
    name: str

    def text(self) -> str:
        return f"nfx:{self.instrument.value}:{self.name}"


@dataclass(frozen=True)
class EndOfSong(Token):
    def text(self) -> str:
        return "end"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column} [{self.code}] {self.message}"


def _error(code: str, line: int, column: int, message: str) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, line, column, message)


def _warning(code: str, line: int, column: int, message: str) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, line, column, message)


@dataclass(frozen=True)
class TokenStream:
    """Ordered tokens with per-token (line, column) source positions.

    ``diagnostics`` holds lexical problems found while tokenizing; structural
    problems are reported separately by validate().
    """

    tokens: tuple[Token, ...]
    positions: tuple[tuple[int, int], ...]
    diagnostics: tuple[Diagnostic, ...] = field(default=())

    def has_errors(self) -> bool:
        return any(d.severity is Severity.ERROR for d in self.diagnostics)


# ---------------------------------------------------------------------------
# lexing
# ---------------------------------------------------------------------------

_INT_RE = re.compile(r"-?[0-9]+\Z")
_INSTRUMENT_BY_NAME = {i.value: i for i in Instrument}


def _parse_int(text: str) -> int | None:
    if _INT_RE.match(text):
        return int(text)
    return None


class _LexError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message


def _int_field(raw: str, what: str) -> int:
    value = _parse_int(raw)
    if value is None:
        raise _LexError("E003", f"{what} must be an integer, got {raw!r}")
    return value


def _check_range(value: int, lo: int, hi: int, what: str) -> int:
    if not lo <= value <= hi:
        raise _LexError("E002", f"{what} {value} out of range [{lo}, {hi}]")
    return value


def _classify(lexeme: str) -> Token:
    """Map one whitespace-delimited lexeme to a Token or raise _LexError."""
    if lexeme == "start":
        return Start()
    if lexeme == "new_measure":
        return NewMeasure()
    if lexeme == "end":
        return EndOfSong()
    if lexeme.startswith("artist:"):
        name = lexeme[len("artist:"):]
        if not name:
            raise _LexError("E001", "artist token with empty name")
        return Artist(name)
    if lexeme.startswith("nfx:"):
        parts = lexeme.split(":", 2)
        if len(parts) != 3 or not parts[2]:
            raise _LexError("E001", f"malformed effect token {lexeme!r}")
        inst = _INSTRUMENT_BY_NAME.get(parts[1])
        if inst is None:
            raise _LexError("E001", f"unknown instrument {parts[1]!r} in effect token")
        return Effect(inst, parts[2])

    parts = lexeme.split(":")
    head = parts[0]
    if head == "downtune" and len(parts) == 2:
        semis = _int_field(parts[1], "downtune")
        if semis > 0:
            raise _LexError("E002", f"downtune must be <= 0, got {semis}")
        return Downtune(semis)
    if head == "tempo" and len(parts) == 2:
        bpm = _int_field(parts[1], "tempo")
        return Tempo(_check_range(bpm, *TEMPO_RANGE, "tempo"))
    if head == "time_signature" and len(parts) == 3:
        num = _int_field(parts[1], "time signature numerator")
        den = _int_field(parts[2], "time signature denominator")
        _check_range(num, *TIMESIG_NUM_RANGE, "time signature numerator")
        if den not in TIMESIG_DENOMS:
            raise _LexError("E002", f"time signature denominator {den} not in {sorted(TIMESIG_DENOMS)}")
        return TimeSignature(num, den)
    if head == "wait" and len(parts) == 2:
        ticks = _int_field(parts[1], "wait")
        if ticks <= 0:
            raise _LexError("E002", f"wait must be > 0, got {ticks}")
        return Wait(ticks)
    if head == "drums" and len(parts) >= 2 and parts[1] == "note":
        if len(parts) != 3:
            raise _LexError("E001", f"malformed drum note {lexeme!r}")
        key = _int_field(parts[2], "drum midi key")
        return DrumNote(_check_range(key, *DRUM_KEY_RANGE, "drum midi key"))

    inst = _INSTRUMENT_BY_NAME.get(head)
    if inst is not None and len(parts) >= 2:
        if parts[1] == "rest" and len(parts) == 2:
            return Rest(inst)
        if parts[1] == "note" and inst in PITCHED_INSTRUMENTS:
            if len(parts) != 4 or not parts[2].startswith("s") or not parts[3].startswith("f"):
                raise _LexError("E001", f"malformed note {lexeme!r} (expected <inst>:note:s<course>:f<fret>)")
            course = _int_field(parts[2][1:], "course")
            fret = _int_field(parts[3][1:], "fret")
            if course < 1:
                raise _LexError("E002", f"course must be >= 1, got {course}")
            _check_range(fret, *FRET_RANGE, "fret")
            return Note(inst, course, fret)

    raise _LexError("E001", f"unknown token {lexeme!r}")


def tokenize(text: str) -> TokenStream:
    """Lex a document into a TokenStream.

    Total: never raises on arbitrary input; unclassifiable lexemes become
    error diagnostics carrying the lexeme's (line, column) position and the
    remaining tokens are kept in order.
    """
    tokens: list[Token] = []
    positions: list[tuple[int, int]] = []
    diagnostics: list[Diagnostic] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        i, n = 0, len(line)
        while i < n:
            if line[i].isspace():
                i += 1
                continue
            start = i
            while i < n and not line[i].isspace():
                i += 1
            lexeme = line[start:i]
            try:
                token = _classify(lexeme)
            except _LexError as exc:
                diagnostics.append(_error(exc.code, line_no, start + 1, exc.message))
            else:
                tokens.append(token)
                positions.append((line_no, start + 1))
    return TokenStream(tuple(tokens), tuple(positions), tuple(diagnostics))


def serialize(stream: TokenStream) -> str:
    """Render the canonical form: one token per line, LF endings.

    tokenize(serialize(s)) reproduces s token for token. Requires a stream
    without error diagnostics.
    """
    if stream.has_errors():
        raise ValueError("cannot serialize a stream with error diagnostics")
    if not stream.tokens:
        return ""
    return "\n".join(token.text() for token in stream.tokens) + "\n"


def stream_from_tokens(tokens) -> TokenStream:
    """Build a TokenStream with canonical positions (token i at line i+1, column 1)."""
    toks = tuple(tokens)
    return TokenStream(toks, tuple((i + 1, 1) for i in range(len(toks))))


def measure_duration(num: int, den: int) -> int:
    """Nominal tick length of a num/den measure (den divides 3840 by construction)."""
    return num * (4 * TICKS_PER_QUARTER) // den


# ---------------------------------------------------------------------------
# structural validation
# ---------------------------------------------------------------------------


def validate(stream: TokenStream, course_counts=None) -> tuple[Diagnostic, ...]:
    """Report all structural violations of a lexed stream.

    course_counts maps pitched instruments to their string counts for the
    E013 check (defaults to DEFAULT_COURSE_COUNTS). Violations are reported
    as diagnostics, never raised.
    """
    if course_counts is None:
        course_counts = DEFAULT_COURSE_COUNTS
    diags: list[Diagnostic] = []
    tempo_seen: tuple[int, int] | None = None
    start_seen: tuple[int, int] | None = None
    artist_seen = False
    downtune_seen = False
    ended = False
    measure_count = 0
    # per open measure: position of its new_measure, wait sum, (num, den)
    measure_pos: tuple[int, int] | None = None
    wait_sum = 0
    current_sig = (4, 4)
    prev: Token | None = None
    # notes emitted since the last wait; non-empty at stream end means the
    # trailing chord slice has no time left to sound (W002)
    pending_since_wait: list[tuple[int, int]] = []

    def misplaced(pos, what: str) -> None:
        diags.append(_error("E015", pos[0], pos[1], what))

    def close_measure() -> None:
        if measure_pos is None:
            return
        nominal = measure_duration(*current_sig)
        if wait_sum != nominal:
            diags.append(
                _warning(
                    "W001",
                    measure_pos[0],
                    measure_pos[1],
                    f"measure {measure_count - 1} waits sum to {wait_sum} ticks, "
                    f"{current_sig[0]}/{current_sig[1]} expects {nominal}",
                )
            )

    for token, pos in zip(stream.tokens, stream.positions):
        if ended:
            misplaced(pos, f"token {token.text()!r} after end")
            prev = token
            continue
        in_header = start_seen is None
        match token:
            case Artist():
                if not in_header or artist_seen or downtune_seen or tempo_seen:
                    misplaced(pos, "artist token must come first")
                artist_seen = True
            case Downtune():
                if not in_header or downtune_seen or tempo_seen:
                    misplaced(pos, "downtune token must precede tempo")
                downtune_seen = True
            case Tempo():
                if tempo_seen is not None:
                    diags.append(_error("E010", pos[0], pos[1], "duplicate tempo token"))
                elif not in_header:
                    misplaced(pos, "tempo token after start")
                    tempo_seen = pos
                else:
                    tempo_seen = pos
            case Start():
                if start_seen is not None:
                    diags.append(_error("E010", pos[0], pos[1], "duplicate start token"))
                else:
                    start_seen = pos
            case NewMeasure():
                if in_header:
                    diags.append(_error("E011", pos[0], pos[1], "new_measure before start"))
                close_measure()
                measure_pos = pos
                measure_count += 1
                wait_sum = 0
            case TimeSignature(numerator=num, denominator=den):
                if not isinstance(prev, NewMeasure):
                    misplaced(pos, "time_signature must immediately follow new_measure")
                else:
                    current_sig = (num, den)
            case EndOfSong():
                ended = True
            case Wait(ticks=ticks):
                if in_header or measure_pos is None:
                    misplaced(pos, "wait token outside a measure block")
                wait_sum += ticks
                pending_since_wait = []
            case Note(instrument=inst, course=course):
                if in_header or measure_pos is None:
                    misplaced(pos, "note token outside a measure block")
                limit = course_counts.get(inst)
                if limit is not None and course > limit:
                    diags.append(
                        _error("E013", pos[0], pos[1], f"course {course} exceeds {inst.value}'s {limit} strings")
                    )
                pending_since_wait.append(pos)
            case DrumNote():
                if in_header or measure_pos is None:
                    misplaced(pos, "note token outside a measure block")
                pending_since_wait.append(pos)
            case Rest():
                if in_header or measure_pos is None:
                    misplaced(pos, "rest token outside a measure block")
            case Effect(instrument=inst):
                ok = isinstance(prev, (Note, Effect)) and prev.instrument is inst
                ok = ok or (isinstance(prev, DrumNote) and inst is Instrument.DRUMS)
                if not ok:
                    diags.append(
                        _error("E012", pos[0], pos[1], f"effect does not follow a {inst.value} note")
                    )
        prev = token

    close_measure()
    if tempo_seen is None:
        diags.append(_error("E010", 1, 1, "missing tempo token"))
    if start_seen is None:
        diags.append(_error("E010", 1, 1, "missing start token"))
    if measure_count == 0:
        diags.append(_error("E014", 1, 1, "stream contains no measures"))
    for pos in pending_since_wait:
        diags.append(
            _warning("W002", pos[0], pos[1], "note at end of stream has no wait after it (zero duration)")
        )
    return tuple(diags)


def diagnose(stream: TokenStream, course_counts=None) -> tuple[Diagnostic, ...]:
    """Lexical plus structural diagnostics, in source order where possible."""
    return stream.diagnostics + validate(stream, course_counts)
