"""Shared fixtures: paths, a seeded random-song builder, brute-force oracles,
and the acceptance-line registry printed in the terminal summary.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from riffgauge import build_score, tokenize

PKG_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = PKG_ROOT / "fixtures"
SONGS_DIR = FIXTURES / "songs"
VARIANT_DIR = FIXTURES / "variant"
TABLE1_CSV = FIXTURES / "table1_kld.csv"

# acceptance-criterion results, echoed after the test summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, failures: list[str]) -> None:
    status = "PASS" if not failures else "FAIL"
    line = f"criterion {number} [{status}] {name}"
    if failures:
        line += " :: " + "; ".join(failures)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# synthetic song generation (seeded, always structurally valid, exact waits)
# ---------------------------------------------------------------------------

PITCHED_POOL = ("distorted0", "distorted1", "clean0", "leads0", "bass")
COURSES = {"distorted0": 6, "distorted1": 6, "clean0": 6, "leads0": 6, "bass": 4}
DRUM_KEYS = (36, 38, 42, 46, 49, 57)
EFFECT_NAMES = ("palm_mute", "vibrato", "bend", "slide", "harmonic")
SIGNATURES = ((4, 4), (3, 4), (5, 4), (6, 8), (7, 8), (2, 2), (12, 8))


def _wait_pattern(rng, nominal: int) -> list[int]:
    """Random composition of the measure length from grid-aligned chunks."""
    unit = next(u for u in (480, 320, 240, 120) if nominal % u == 0 and rng.random() < 0.85 or u == 120)
    parts = []
    remaining = nominal
    while remaining:
        take = unit * rng.randrange(1, min(8, remaining // unit) + 1)
        parts.append(take)
        remaining -= take
    return parts


def random_song_lines(rng, max_fret: int = 20, force_notes: bool = False) -> list[str]:
    """Token lines of a random song that validates with zero diagnostics.

    Wait sums match each measure's signature exactly; courses and frets stay
    inside the default tunings; effects only ever follow their own note.
    """
    lines = []
    if rng.random() < 0.3:
        lines.append(f"artist:gen-{rng.randrange(1000)}")
    if rng.random() < 0.3:
        lines.append(f"downtune:-{rng.randrange(0, 3)}")
    lines.append(f"tempo:{rng.randrange(60, 221)}")
    lines.append("start")
    pitched = rng.sample(PITCHED_POOL, k=rng.randrange(0, 4))
    use_drums = rng.random() < 0.7
    if force_notes and not pitched:
        pitched = [rng.choice(PITCHED_POOL)]
    signature = (4, 4)
    for index in range(rng.randrange(2, 5)):
        lines.append("new_measure")
        if index == 0 or rng.random() < 0.25:
            signature = rng.choice(SIGNATURES)
            lines.append(f"time_signature:{signature[0]}:{signature[1]}")
        nominal = signature[0] * 3840 // signature[1]
        for wait in _wait_pattern(rng, nominal):
            if rng.random() < 0.8:
                for inst in pitched:
                    if rng.random() < 0.6:
                        course = rng.randrange(1, COURSES[inst] + 1)
                        lines.append(f"{inst}:note:s{course}:f{rng.randrange(0, max_fret + 1)}")
                        if rng.random() < 0.15:
                            lines.append(f"nfx:{inst}:{rng.choice(EFFECT_NAMES)}")
                if use_drums and rng.random() < 0.7:
                    lines.append(f"drums:note:{rng.choice(DRUM_KEYS)}")
                if pitched and rng.random() < 0.05:
                    lines.append(f"{rng.choice(pitched)}:rest")
            lines.append(f"wait:{wait}")
    if force_notes and not any(":note:s" in line for line in lines):
        last_wait = max(i for i, line in enumerate(lines) if line.startswith("wait:"))
        lines.insert(last_wait, f"{rng.choice(pitched)}:note:s1:f0")
    if rng.random() < 0.7:
        lines.append("end")
    return lines


def transpose_lines(lines: list[str], semitones: int) -> list[str]:
    """Shift every pitched note's fret; leaves drums and structure untouched."""
    out = []
    for line in lines:
        if ":note:s" in line and not line.startswith("drums"):
            head, fret = line.rsplit(":f", 1)
            out.append(f"{head}:f{int(fret) + semitones}")
        else:
            out.append(line)
    return out


def random_score(rng, max_fret: int = 20, force_notes: bool = False):
    return build_score(tokenize("\n".join(random_song_lines(rng, max_fret, force_notes)) + "\n"))


def brute_force_timeline(score, step_ticks: int = 40):
    """Per-step membership scan; the oracle active_pitch_timeline must match."""
    out = []
    t = 0
    while t < score.end_tick:
        out.append(
            frozenset(
                e.pitch for e in score.pitched_events() if e.onset <= t < e.onset + e.duration
            )
        )
        t += step_ticks
    return tuple(out)


@pytest.fixture
def fixture_scores():
    scores = []
    for path in sorted(SONGS_DIR.glob("*.tokens.txt")):
        song_id = path.name.removesuffix(".tokens.txt")
        scores.append((song_id, build_score(tokenize(path.read_text(encoding="utf-8")))))
    return scores
