"""Command-line surface: validate, metrics, compare, rank, generate, prompt,
export-midi, plot.

Exit codes: 0 success, 1 input files carry error diagnostics, 2 usage error,
3 unreadable or unwritable path. Machine output (CSV, JSON, SVG, SMF, token
files) goes to --out / --out-dir; human-readable summaries go to stdout. All
machine outputs are byte-deterministic for fixed inputs and flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .corpus import (
    DEFAULT_BINS,
    DEFAULT_EPSILON,
    CorpusTable,
    KldReport,
    box_stats,
    compare,
    corpus_metrics,
    rank_checkpoints,
)
from .errors import BuildError, CorpusError, GeneratorError, InvalidStreamError
from .generator import (
    GeneratorConfig,
    continue_sequence,
    derive_seed,
    load_model,
    save_model,
    train,
)
from .metrics import MetricId
from .midi import export_midi
from .plotting import render_box_plot
from .score import build_score, canonical_prompt
from .tokens import Instrument, Severity, diagnose, serialize, tokenize

CSV_HEADER = ["song_id"] + [m.value for m in MetricId]


class _Fail(Exception):
    """Terminate the command with a message and a specific exit code."""

    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(3, f"cannot read {path}: {exc}") from exc


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Fail(3, f"cannot write {path}: {exc}") from exc


def _write_bytes(path: Path, blob: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(blob)
    except OSError as exc:
        raise _Fail(3, f"cannot write {path}: {exc}") from exc


def _token_files(path: Path) -> list[Path]:
    """A .tokens.txt file itself, or every one under a directory (sorted)."""
    if path.is_file():
        return [path]
    if path.is_dir():
        files = sorted(path.rglob("*.tokens.txt"))
        if not files:
            raise _Fail(2, f"no .tokens.txt files under {path}")
        return files
    raise _Fail(3, f"no such path: {path}")


def _song_id(path: Path) -> str:
    return path.name.removesuffix(".tokens.txt")


def _load_streams(path: Path) -> list[tuple[str, object]]:
    return [(_song_id(f), tokenize(_read_text(f))) for f in _token_files(path)]


def _load_scores(path: Path):
    songs = []
    for song_id, stream in _load_streams(path):
        try:
            songs.append((song_id, build_score(stream)))
        except InvalidStreamError as exc:
            raise _Fail(1, f"{path}: song {song_id}: {exc}") from exc
    return songs


def _load_table(path: Path, corpus_id: str | None, step_ticks: int) -> CorpusTable:
    return corpus_metrics(_load_scores(path), corpus_id or path.name, step_ticks)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    n_errors = n_warnings = 0
    files = []
    for raw in args.paths:
        files.extend(_token_files(Path(raw)))
    for path in files:
        stream = tokenize(_read_text(path))
        for diag in diagnose(stream):
            print(f"{path}:{diag}")
            if diag.severity is Severity.ERROR:
                n_errors += 1
            else:
                n_warnings += 1
    print(f"{len(files)} file(s), {n_errors} error(s), {n_warnings} warning(s)")
    return 1 if n_errors else 0


def _metric_cell(value) -> str:
    return "" if value is None else str(value)


def _cmd_metrics(args) -> int:
    table = _load_table(Path(args.corpus), None, args.step_ticks)
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for song_id in sorted(table.rows):
                vector = table.rows[song_id]
                writer.writerow([song_id] + [_metric_cell(vector.value(m)) for m in MetricId])
    except OSError as exc:
        raise _Fail(3, f"cannot write {out}: {exc}") from exc
    print(f"wrote {len(table.rows)} song row(s) to {out}")
    return 0


def _report_document(report: KldReport) -> dict:
    return {
        "checkpoint_id": report.checkpoint_id,
        "kld": {m.value: report.divergences.get(m) for m in MetricId},
        "song_counts": {m.value: list(report.song_counts[m]) for m in report.song_counts},
    }


def _cmd_compare(args) -> int:
    ref = _load_table(Path(args.reference), None, args.step_ticks)
    gen = _load_table(Path(args.generated), None, args.step_ticks)
    report = compare(ref, gen, bins=args.bins, epsilon=args.epsilon)
    _write_text(Path(args.out), json.dumps(_report_document(report), indent=2) + "\n")
    for metric in MetricId:
        value = report.divergences.get(metric)
        print(f"{metric.value}: {'undefined' if value is None else format(value, '.6f')}")
    mean = report.mean_divergence()
    if mean is not None:
        print(f"mean over defined metrics: {mean:.6f}")
    print(f"wrote report for {report.checkpoint_id!r} to {args.out}")
    return 0


def _report_from_json(path: Path) -> KldReport:
    try:
        document = json.loads(_read_text(path))
        divergences = {MetricId(k): v for k, v in document["kld"].items()}
        song_counts = {
            MetricId(k): (int(v[0]), int(v[1]))
            for k, v in document.get("song_counts", {}).items()
        }
        return KldReport(str(document["checkpoint_id"]), divergences, song_counts)
    except (KeyError, ValueError) as exc:
        raise _Fail(2, f"{path} is not a comparison report: {exc}") from exc


def _reports_from_csv(path: Path) -> list[KldReport]:
    reports = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "checkpoint_id" not in reader.fieldnames:
            raise _Fail(2, f"{path} has no checkpoint_id column")
        known = {m.value: m for m in MetricId}
        for row in reader:
            divergences = {
                metric: (float(row[name]) if row[name] not in (None, "") else None)
                for name, metric in known.items()
                if name in row
            }
            reports.append(KldReport(row["checkpoint_id"], divergences, {}))
    return reports


def _cmd_rank(args) -> int:
    paths = [Path(p) for p in args.reports]
    for path in paths:
        if not path.is_file():
            raise _Fail(3, f"no such file: {path}")
    if len(paths) == 1 and paths[0].suffix == ".csv":
        reports = _reports_from_csv(paths[0])
    else:
        reports = [_report_from_json(p) for p in paths]
    try:
        ranking = rank_checkpoints(reports)
    except CorpusError as exc:
        raise _Fail(2, str(exc)) from exc
    document = {
        "per_metric_winner": {m.value: ranking.per_metric_winner[m] for m in MetricId},
        "overall_winner": ranking.overall_winner,
        "overall_means": {cid: ranking.overall_means[cid] for cid in sorted(ranking.overall_means)},
    }
    _write_text(Path(args.out), json.dumps(document, indent=2) + "\n")
    for metric in MetricId:
        print(f"{metric.value}: {ranking.per_metric_winner[metric]}")
    print(f"overall winner: {ranking.overall_winner}")
    print(f"wrote ranking over {len(reports)} checkpoint(s) to {args.out}")
    return 0


def _prompt_stream(args):
    if args.canonical:
        return canonical_prompt(args.tempo, args.cymbal_key)
    stream = tokenize(_read_text(Path(args.prompt)))
    errors = [d for d in diagnose(stream) if d.severity is Severity.ERROR]
    if errors:
        raise _Fail(1, f"{args.prompt}: " + "; ".join(str(d) for d in errors))
    return stream


def _cmd_generate(args) -> int:
    if args.model:
        model = load_model(Path(args.model))
    else:
        streams = [stream for _, stream in _load_streams(Path(args.corpus))]
        model = train(streams, args.order)
    if args.save_model:
        save_model(model, Path(args.save_model))
    prompt = _prompt_stream(args)
    out_dir = Path(args.out_dir)
    for i in range(args.songs):
        config = GeneratorConfig(
            temperature=args.temperature,
            seed=derive_seed(args.seed, args.checkpoint_id, i),
            max_tokens=args.max_tokens,
            instrument_closure=not args.no_instrument_closure,
        )
        stream = continue_sequence(model, prompt, config)
        _write_text(out_dir / f"gen_{args.checkpoint_id}_{i:03d}.tokens.txt", serialize(stream))
    print(f"wrote {args.songs} song(s) to {out_dir}")
    return 0


def _cmd_prompt(args) -> int:
    stream = canonical_prompt(args.tempo, args.cymbal_key)
    _write_text(Path(args.out), serialize(stream))
    print(f"wrote {len(stream.tokens)}-token prompt to {args.out}")
    return 0


def _cmd_export_midi(args) -> int:
    stream = tokenize(_read_text(Path(args.song)))
    score = build_score(stream)
    by_name = {i.value: i for i in Instrument}
    if args.instruments:
        names = [n.strip() for n in args.instruments.split(",") if n.strip()]
        unknown = [n for n in names if n not in by_name]
        if unknown:
            raise _Fail(2, f"unknown instrument(s): {', '.join(unknown)}")
        selection = [by_name[n] for n in names]
    else:
        selection = sorted(score.source_instruments, key=lambda i: i.value)
    try:
        blob = export_midi(score, selection)
    except ValueError as exc:
        raise _Fail(2, str(exc)) from exc
    _write_bytes(Path(args.out), blob)
    print(f"wrote {len(selection) + 1}-track midi file to {args.out}")
    return 0


def _cmd_plot(args) -> int:
    summaries = []
    for raw in args.csvs:
        path = Path(raw)
        values = []
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or args.metric not in reader.fieldnames:
                raise _Fail(2, f"{path} has no {args.metric!r} column")
            for row in reader:
                cell = row[args.metric]
                if cell not in (None, ""):
                    values.append(float(cell))
        if not values:
            raise _Fail(2, f"{path} has no defined {args.metric!r} values")
        summaries.append((path.name.removesuffix(".csv"), box_stats(values)))
    _write_text(Path(args.out), render_box_plot(summaries, args.metric))
    print(f"wrote box plot of {args.metric!r} over {len(summaries)} corpus(es) to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riffgauge",
        description="Tablature-token toolkit: validation, metrics, corpus comparison, generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report diagnostics for token files")
    p.add_argument("paths", nargs="+", help=".tokens.txt files or directories of them")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("metrics", help="per-song metric table as CSV")
    p.add_argument("corpus", help="directory of .tokens.txt files")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--step-ticks", type=int, default=40, help="polyphony timeline step (default 40)")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("compare", help="per-metric divergence of generated vs reference corpus")
    p.add_argument("reference", help="reference corpus directory")
    p.add_argument("generated", help="generated corpus directory")
    p.add_argument("--out", required=True, help="output JSON report path")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, help="histogram bin count (default 32)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="smoothing mass (default 1e-10)")
    p.add_argument("--step-ticks", type=int, default=40, help="polyphony timeline step (default 40)")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("rank", help="pick winners from comparison reports")
    p.add_argument("reports", nargs="+", help="two or more report JSON files, or one divergence CSV")
    p.add_argument("--out", required=True, help="output JSON ranking path")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("generate", help="continue a prompt with a trained count model")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--corpus", help="training corpus directory")
    source.add_argument("--model", help="previously saved model JSON")
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--prompt", help="prompt .tokens.txt file")
    where.add_argument("--canonical", action="store_true", help="use the built-in one-measure prompt")
    p.add_argument("--tempo", type=int, default=120, help="canonical prompt tempo (default 120)")
    p.add_argument("--cymbal-key", type=int, default=49, help="canonical prompt cymbal key (default 49)")
    p.add_argument("-n", "--songs", type=int, default=1, help="songs to generate (default 1)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--order", type=int, default=3, help="context length when training (default 3)")
    p.add_argument("--temperature", type=float, default=1.0, help="sampling temperature (default 1.0)")
    p.add_argument("--max-tokens", type=int, default=512, help="token budget per song (default 512)")
    p.add_argument("--checkpoint-id", default="checkpoint", help="id used in seeds and file names")
    p.add_argument("--no-instrument-closure", action="store_true",
                   help="allow instruments absent from the prompt")
    p.add_argument("--save-model", help="also write the trained model JSON here")
    p.add_argument("--out-dir", required=True, help="directory for gen_<id>_<index>.tokens.txt files")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("prompt", help="write the built-in one-measure prompt")
    p.add_argument("--tempo", type=int, default=120, help="prompt tempo (default 120)")
    p.add_argument("--cymbal-key", type=int, default=49, help="cymbal midi key (default 49)")
    p.add_argument("--out", required=True, help="output .tokens.txt path")
    p.set_defaults(func=_cmd_prompt)

    p = sub.add_parser("export-midi", help="write selected instruments as a format-1 midi file")
    p.add_argument("song", help="song .tokens.txt file")
    p.add_argument("--instruments", help="comma-separated names (default: all in the song)")
    p.add_argument("--out", required=True, help="output .mid path")
    p.set_defaults(func=_cmd_export_midi)

    p = sub.add_parser("plot", help="box plot of one metric across corpus CSVs")
    p.add_argument("csvs", nargs="+", help="metric CSV files, one box per file")
    p.add_argument("--metric", required=True, choices=[m.value for m in MetricId])
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"riffgauge: {exc}", file=sys.stderr)
        return exc.exit_code
    except InvalidStreamError as exc:
        print(f"riffgauge: {exc}", file=sys.stderr)
        return 1
    except (BuildError, CorpusError, GeneratorError, ValueError) as exc:
        print(f"riffgauge: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"riffgauge: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
