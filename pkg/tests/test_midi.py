import pytest

from riffgauge import build_score, canonical_prompt, export_midi, tokenize
from riffgauge.errors import BuildError
from riffgauge.midi import encode_vlq, tempo_meta_event
from riffgauge.tokens import Instrument


def hexes(data: bytes) -> str:
    return data.hex()


@pytest.mark.parametrize(
    "value,expected",
    [
        (0, "00"),
        (1, "01"),
        (127, "7f"),
        (128, "8100"),
        (960, "8740"),
        (3840, "9e00"),
        (16383, "ff7f"),
        (16384, "818000"),
        (0x0FFFFFFF, "ffffff7f"),
    ],
)
def test_encode_vlq(value, expected):
    assert hexes(encode_vlq(value)) == expected


def test_encode_vlq_rejects_negative():
    with pytest.raises(ValueError):
        encode_vlq(-1)


@pytest.mark.parametrize(
    "bpm,expected",
    [(120, "ff510307a120"), (60, "ff51030f4240"), (200, "ff51030493e0")],
)
def test_tempo_meta_event(bpm, expected):
    assert hexes(tempo_meta_event(bpm)) == expected


ONE_NOTE = (
    "tempo:120\nstart\nnew_measure\ntime_signature:1:4\n"
    "distorted0:note:s6:f0\nwait:960\n"
)

# Format-1 file: header, tempo track, one note track.  The note is low E
# (pitch 40 = 0x28) struck at tick 0 with velocity 96 and released at the
# measure boundary 960.
ONE_NOTE_GOLDEN = (
    "4d546864" "00000006" "0001" "0002" "03c0"
    "4d54726b" "0000000b" "00" "ff510307a120" "00" "ff2f00"
    "4d54726b" "0000000d" "00" "902860" "8740" "802800" "00" "ff2f00"
)

# Canonical one-measure prompt, bass and drums only.  Bass open E (28 = 0x1c)
# rings the full measure on channel 0; kick 36 = 0x24 and cymbal 49 = 0x31
# share tick 0 on channel 9.
PROMPT_BASS_DRUMS_GOLDEN = (
    "4d546864" "00000006" "0001" "0003" "03c0"
    "4d54726b" "0000000b" "00" "ff510307a120" "00" "ff2f00"
    "4d54726b" "0000000d" "00" "901c60" "9e00" "801c00" "00" "ff2f00"
    "4d54726b" "00000015"
    "00" "992460" "00" "993160" "9e00" "892400" "00" "893100" "00" "ff2f00"
)


class TestGoldenFiles:
    def test_one_note_bytes(self):
        score = build_score(tokenize(ONE_NOTE))
        assert hexes(export_midi(score)) == ONE_NOTE_GOLDEN

    def test_prompt_bass_drums_bytes(self):
        score = build_score(canonical_prompt())
        data = export_midi(score, instruments=[Instrument.BASS, Instrument.DRUMS])
        assert hexes(data) == PROMPT_BASS_DRUMS_GOLDEN

    def test_determinism(self):
        score = build_score(canonical_prompt())
        assert export_midi(score) == export_midi(score)


class TestStructure:
    def test_header_fields(self):
        score = build_score(canonical_prompt())
        data = export_midi(score)
        assert data[:4] == b"MThd"
        assert int.from_bytes(data[4:8], "big") == 6
        assert int.from_bytes(data[8:10], "big") == 1      # format 1
        assert int.from_bytes(data[10:12], "big") == 4     # tempo + 3 instruments
        assert int.from_bytes(data[12:14], "big") == 960   # ticks per quarter

    def test_track_count_follows_selection(self):
        score = build_score(canonical_prompt())
        data = export_midi(score, instruments=[Instrument.BASS])
        assert data.count(b"MTrk") == 2

    def test_pitched_channels_in_canonical_order(self):
        score = build_score(canonical_prompt())
        data = export_midi(score)
        tracks = data.split(b"MTrk")[1:]
        # distorted0 before bass regardless of request order, drums on channel 9
        assert tracks[1][4 + 1 : 4 + 2] == b"\x90"
        assert tracks[2][4 + 1 : 4 + 2] == b"\x91"
        assert tracks[3][4 + 1 : 4 + 2] == b"\x99"
        reordered = export_midi(score, instruments=[Instrument.BASS, Instrument.DISTORTED0])
        assert reordered == export_midi(score, instruments=[Instrument.DISTORTED0, Instrument.BASS])

    def test_simultaneous_offs_precede_ons(self):
        # two quarter notes back to back: the off for the first must be
        # written before the on for the second at tick 960
        score = build_score(
            tokenize(
                "tempo:120\nstart\nnew_measure\ntime_signature:2:4\n"
                "bass:note:s4:f0\nwait:960\nbass:note:s4:f2\nwait:960\n"
            )
        )
        data = export_midi(score)
        track = data.split(b"MTrk")[2]
        body = track[4:]
        off_first = body.index(bytes([0x80, 28, 0]))
        on_second = body.index(bytes([0x90, 30, 96]))
        assert off_first < on_second

    def test_empty_selection_is_e040(self):
        score = build_score(canonical_prompt())
        with pytest.raises(BuildError) as exc:
            export_midi(score, instruments=[])
        assert exc.value.code == "E040"

    def test_scoreless_export_is_e040(self):
        score = build_score(tokenize("tempo:120\nstart\nnew_measure\nwait:3840\n"))
        with pytest.raises(BuildError) as exc:
            export_midi(score)
        assert exc.value.code == "E040"

    def test_instrument_not_in_score_is_rejected(self):
        score = build_score(tokenize(ONE_NOTE))
        with pytest.raises(ValueError):
            export_midi(score, instruments=[Instrument.BASS])
