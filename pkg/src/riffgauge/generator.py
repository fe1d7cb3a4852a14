"""Order-k count model over token sequences: training, prompt continuation,
and a checkpoint-sweep harness.

Sampling backs off stupid-backoff style from the longest matching context to
the unigram table and draws with probability proportional to count^(1/T);
temperature 0 is argmax with ties broken by canonical token-text order.
Candidate tables are filtered before sampling so the continuation can never
introduce a structural error: header tokens (artist, downtune, tempo, start)
are excluded outright, time_signature is offered only directly after
new_measure, and nfx only directly after a same-instrument note. With
instrument closure on (the default) note/rest/nfx candidates are further
restricted to the prompt's instruments. A final wait is appended when needed
so the last measure closes; the result always validates with zero errors.

Models persist to a versioned JSON document so a trained model can be reused
across command invocations.
"""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from hashlib import sha256

from .errors import GeneratorError, InvalidStreamError
from .tokens import (
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
    tokenize,
)

MODEL_FORMAT = "riffgauge-ngram"
MODEL_VERSION = 1


@dataclass(frozen=True)
class NGramModel:
    """Count tables keyed by context (tuple of canonical token texts, length 0..order)."""

    order: int
    counts: dict[tuple[str, ...], Counter]
    vocabulary: frozenset[str]


@dataclass(frozen=True)
class GeneratorConfig:
    temperature: float = 1.0
    seed: int = 0
    max_tokens: int = 512
    instrument_closure: bool = True


@dataclass(frozen=True)
class CheckpointSpec:
    checkpoint_id: str
    order: int
    temperature: float
    songs_to_generate: int


def _require_clean(stream: TokenStream) -> None:
    errors = [d for d in diagnose(stream) if d.severity is Severity.ERROR]
    if errors:
        raise InvalidStreamError(errors)


def train_texts(sequences, order: int) -> NGramModel:
    """Count (context, successor) pairs over sequences of token texts.

    Contexts run from length 0 (the unigram table) up to ``order`` and never
    cross a sequence boundary.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    sequences = [list(seq) for seq in sequences]
    if not sequences:
        raise GeneratorError("E060", "empty training corpus")
    counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    vocabulary: set[str] = set()
    for seq in sequences:
        vocabulary.update(seq)
        for i, successor in enumerate(seq):
            for length in range(min(order, i) + 1):
                counts[tuple(seq[i - length:i])][successor] += 1
    return NGramModel(order, dict(counts), frozenset(vocabulary))


def train(corpus, order: int) -> NGramModel:
    """Train on token streams; every stream must validate with zero errors."""
    streams = list(corpus)
    if not streams:
        raise GeneratorError("E060", "empty training corpus")
    for stream in streams:
        _require_clean(stream)
    return train_texts([[t.text() for t in s.tokens] for s in streams], order)


def sample_from_counts(counts, temperature: float, rng: random.Random) -> str:
    """Draw one key with probability proportional to count^(1/temperature).

    Candidates are visited in sorted key order so a given rng state always
    yields the same draw. Temperature 0 returns the highest-count key and
    consumes no randomness; count ties break toward the smaller key.
    """
    if not counts:
        raise ValueError("cannot sample from an empty count table")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    items = sorted(counts.items())
    if temperature == 0:
        best_text, best_count = items[0]
        for text, count in items[1:]:
            if count > best_count:
                best_text, best_count = text, count
        return best_text
    weights = [count ** (1.0 / temperature) for _, count in items]
    target = rng.random() * sum(weights)
    acc = 0.0
    for (text, _), weight in zip(items, weights):
        acc += weight
        if target < acc:
            return text
    return items[-1][0]


def apply_instrument_closure(candidates, allowed) -> dict[str, int]:
    """Drop note/rest/effect candidates whose instrument is not allowed.

    Structural candidates (wait, new_measure, time_signature, end) always
    survive, so the table cannot become empty while any of those exist.
    """
    allowed = frozenset(allowed)
    if not allowed:
        raise ValueError("allowed instrument set must be nonempty")
    out = {}
    for text, count in candidates.items():
        inst = _instrument_of(_token_of(text))
        if inst is None or inst in allowed:
            out[text] = count
    return out


_TOKEN_CACHE: dict[str, Token | None] = {}


def _token_of(text: str) -> Token | None:
    token = _TOKEN_CACHE.get(text, False)
    if token is False:
        stream = tokenize(text)
        token = stream.tokens[0] if len(stream.tokens) == 1 and not stream.diagnostics else None
        _TOKEN_CACHE[text] = token
    return token


def _instrument_of(token: Token | None) -> Instrument | None:
    if isinstance(token, (Note, Rest, Effect)):
        return token.instrument
    if isinstance(token, DrumNote):
        return Instrument.DRUMS
    return None


def prompt_instruments(prompt: TokenStream) -> frozenset[Instrument]:
    return frozenset(
        inst for inst in (_instrument_of(t) for t in prompt.tokens) if inst is not None
    )


def _legal_candidates(table, prev: Token | None, allowed) -> dict[str, int]:
    """Candidates that keep the stream error-free when emitted after prev."""
    out = {}
    for text, count in table.items():
        token = _token_of(text)
        if token is None or isinstance(token, (Artist, Downtune, Tempo, Start)):
            continue
        if isinstance(token, TimeSignature) and not isinstance(prev, NewMeasure):
            continue
        if isinstance(token, Effect):
            ok = isinstance(prev, (Note, Effect)) and prev.instrument is token.instrument
            ok = ok or (isinstance(prev, DrumNote) and token.instrument is Instrument.DRUMS)
            if not ok:
                continue
        out[text] = count
    if allowed is not None and out:
        out = apply_instrument_closure(out, allowed)
    return out


def _closing_wait(tokens) -> Wait | None:
    """Wait needed after the given tokens so the last measure closes.

    Returns None when the final measure's waits already reach its nominal
    length and no note is left dangling after the last wait. A dangling note
    past a full measure gets a whole extra measure length so it still sounds.
    """
    sig = (4, 4)
    wait_sum = 0
    pending = False
    prev: Token | None = None
    for token in tokens:
        match token:
            case NewMeasure():
                wait_sum = 0
                pending = False
            case TimeSignature(numerator=num, denominator=den):
                if isinstance(prev, NewMeasure):
                    sig = (num, den)
            case Wait(ticks=ticks):
                wait_sum += ticks
                pending = False
            case Note() | DrumNote():
                pending = True
        prev = token
    nominal = measure_duration(*sig)
    if wait_sum < nominal:
        return Wait(nominal - wait_sum)
    if pending:
        return Wait(nominal)
    return None


def tempo_inheritance(prompt: TokenStream, generated: TokenStream) -> TokenStream:
    """Check that generated carries exactly the prompt's tempo, before start."""
    prompt_tempo = next((t.bpm for t in prompt.tokens if isinstance(t, Tempo)), None)
    tempos = [t.bpm for t in generated.tokens if isinstance(t, Tempo)]
    if len(tempos) != 1 or tempos[0] != prompt_tempo:
        raise GeneratorError(
            "E062", f"generated stream tempo tokens {tempos} do not inherit prompt tempo {prompt_tempo}"
        )
    started = False
    for token in generated.tokens:
        if isinstance(token, Start):
            started = True
        elif isinstance(token, Tempo) and started:
            raise GeneratorError("E062", "tempo token after start in generated stream")
    return generated


def continue_sequence(model: NGramModel, prompt: TokenStream, config: GeneratorConfig) -> TokenStream:
    """Continue the prompt by up to max_tokens sampled tokens, then repair.

    The serialized output starts with the serialized prompt; generation stops
    at the end token or the token budget; the result validates with zero
    errors. Identical (model, prompt, config) gives identical output.
    """
    _require_clean(prompt)
    if any(isinstance(t, EndOfSong) for t in prompt.tokens):
        raise ValueError("prompt already contains the end token")
    if config.max_tokens <= 0:
        raise ValueError(f"max_tokens must be > 0, got {config.max_tokens}")

    allowed = prompt_instruments(prompt) if config.instrument_closure else None
    if allowed is not None and not allowed:
        allowed = None  # a prompt with no instrument tokens constrains nothing
    history = [t.text() for t in prompt.tokens]
    prev = prompt.tokens[-1]
    rng = random.Random(config.seed)

    generated: list[Token] = []
    for _ in range(config.max_tokens):
        table = None
        for length in range(min(model.order, len(history)), -1, -1):
            context = tuple(history[-length:]) if length else ()
            raw = model.counts.get(context)
            if not raw:
                continue
            legal = _legal_candidates(raw, prev, allowed)
            if legal:
                table = legal
                break
        if table is None:
            raise GeneratorError("E061", "no continuation distribution exists after backoff")
        text = sample_from_counts(table, config.temperature, rng)
        token = _token_of(text)
        generated.append(token)
        history.append(text)
        prev = token
        if isinstance(token, EndOfSong):
            break

    body = list(prompt.tokens) + generated
    trailer: list[Token] = []
    if body and isinstance(body[-1], EndOfSong):
        trailer = [body.pop()]
    repair = _closing_wait(body)
    if repair is not None:
        body.append(repair)
    out = tokenize("\n".join(t.text() for t in body + trailer) + "\n")

    tempo_inheritance(prompt, out)
    _require_clean(out)
    return out


def derive_seed(master: int, checkpoint_id: str, index: int) -> int:
    """Per-song 64-bit seed mixed from (master seed, checkpoint id, song index)."""
    digest = sha256(f"{master}\x1f{checkpoint_id}\x1f{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sweep(corpus, specs, prompt: TokenStream, defaults: GeneratorConfig | None = None):
    """Generate songs_to_generate songs per checkpoint spec; fully reproducible.

    Models are trained once per distinct order; each song runs under a seed
    derived from (defaults.seed, checkpoint_id, song index). Returns a mapping
    checkpoint_id -> list of generated token streams.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("sweep needs at least one checkpoint spec")
    ids = [s.checkpoint_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValueError("checkpoint ids must be unique within a sweep")
    if defaults is None:
        defaults = GeneratorConfig()
    streams = list(corpus)
    models: dict[int, NGramModel] = {}
    out: dict[str, list[TokenStream]] = {}
    for spec in specs:
        if spec.order not in models:
            models[spec.order] = train(streams, spec.order)
        model = models[spec.order]
        songs = []
        for i in range(spec.songs_to_generate):
            config = replace(
                defaults,
                temperature=spec.temperature,
                seed=derive_seed(defaults.seed, spec.checkpoint_id, i),
            )
            songs.append(continue_sequence(model, prompt, config))
        out[spec.checkpoint_id] = songs
    return out


def save_model(model: NGramModel, path) -> None:
    """Write the model as versioned JSON with deterministic key order."""
    contexts = {
        " ".join(context): dict(sorted(table.items()))
        for context, table in model.counts.items()
    }
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "order": model.order,
        "contexts": contexts,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> NGramModel:
    with open(path, encoding="utf-8") as fh:
        document = json.load(fh)
    if document.get("format") != MODEL_FORMAT or document.get("version") != MODEL_VERSION:
        raise GeneratorError("E060", f"unrecognized model document in {path}")
    counts: dict[tuple[str, ...], Counter] = {}
    vocabulary: set[str] = set()
    for key, table in document["contexts"].items():
        context = tuple(key.split(" ")) if key else ()
        counts[context] = Counter({text: int(count) for text, count in table.items()})
        vocabulary.update(context)
        vocabulary.update(table)
    return NGramModel(int(document["order"]), counts, frozenset(vocabulary))
