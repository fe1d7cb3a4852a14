"""Standard MIDI File (format 1) export.

Byte layout is part of the contract and pinned by golden-file tests: division
960, track 0 carries the single tempo meta event, then one track per exported
instrument in a fixed canonical order. Drums go to channel 10 (0-indexed 9);
pitched instruments take channels 0, 1, ... in canonical instrument order.
Every event is written with an explicit status byte (no running status) and
velocity 96; note-offs use status 0x80 with velocity 0. At equal ticks,
note-offs sort before note-ons, then by pitch.
"""

from __future__ import annotations

from .errors import BuildError
from .score import Score
from .tokens import Instrument

NOTE_VELOCITY = 96
_CANONICAL_ORDER = {inst: i for i, inst in enumerate(Instrument)}


def encode_vlq(value: int) -> bytes:
    """Variable-length-quantity encoding (7 bits per byte, high bit = continue)."""
    if value < 0:
        raise ValueError("vlq values are unsigned")
    out = bytearray([value & 0x7F])
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    out.reverse()
    return bytes(out)


def tempo_meta_event(bpm: int) -> bytes:
    """FF 51 03 + microseconds per quarter note as a 24-bit value."""
    usec_per_quarter = round(60_000_000 / bpm)
    return bytes([0xFF, 0x51, 0x03]) + usec_per_quarter.to_bytes(3, "big")


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return tag + len(payload).to_bytes(4, "big") + payload


def _track(event_list) -> bytes:
    """event_list: iterable of (tick, kind, data) with kind 0=off, 1=on/meta."""
    out = bytearray()
    cursor = 0
    for tick, _, data in event_list:
        out += encode_vlq(tick - cursor)
        out += data
        cursor = tick
    out += encode_vlq(0) + bytes([0xFF, 0x2F, 0x00])
    return _chunk(b"MTrk", bytes(out))


def export_midi(score: Score, instruments=None) -> bytes:
    """Serialize the requested instruments of a score as an SMF format-1 file.

    When instruments is None every instrument present in the score is written.
    """
    requested = set(score.source_instruments if instruments is None else instruments)
    if not requested:
        raise BuildError("E040", "empty instrument selection")
    missing = requested - score.source_instruments
    if missing:
        names = ", ".join(sorted(i.value for i in missing))
        raise ValueError(f"instrument(s) not present in score: {names}")

    ordered = sorted(requested, key=lambda i: _CANONICAL_ORDER[i])
    channels: dict[Instrument, int] = {}
    next_channel = 0
    for inst in ordered:
        if inst is Instrument.DRUMS:
            channels[inst] = 9
        else:
            channels[inst] = next_channel
            next_channel += 1

    tracks = [_track([(0, 1, tempo_meta_event(score.tempo_bpm))])]
    for inst in ordered:
        channel = channels[inst]
        pending: list[tuple[int, int, bytes]] = []
        for event in score.events.get(inst, ()):
            pending.append((event.onset, 1, bytes([0x90 | channel, event.pitch, NOTE_VELOCITY])))
            pending.append((event.onset + event.duration, 0, bytes([0x80 | channel, event.pitch, 0])))
        pending.sort(key=lambda e: (e[0], e[1], e[2][1]))
        tracks.append(_track(pending))

    header = (1).to_bytes(2, "big") + len(tracks).to_bytes(2, "big") + score.ticks_per_quarter.to_bytes(2, "big")
    return _chunk(b"MThd", header) + b"".join(tracks)
