"""Command line front end.

Subcommands: train-langid, train-lm, gen-synth, train-accept,
align-score, score, select, eval-pr, stats. Exit codes: 0 success,
1 usage, 2 data, 3 protocol. Every subcommand that writes an output
also writes ``<output>.manifest.json`` beside it.

The only environment variable consulted is BITEXT_SIEVE_THREADS; it
sizes worker pools and never changes output bytes.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .acceptability import (
    AcceptTrainConfig,
    acceptability_score,
    external_model,
    load_accept,
    save_accept,
    train_builtin,
)
from .align import AlignmentParams, pair_alignment_score, read_dictionary
from .core import (
    WHITESPACE,
    format_score,
    pair_to_line,
    read_bitext,
    read_scored,
    scored_line,
    tokenize,
)
from .domain import DEFAULT_CLIP, DEFAULT_CUTOFF, DomainConfig, lm_scorer
from .errors import SieveError, ConfigError, DataError
from .evaluate import corpus_stats, parse_grid, pr_curve
from .langid import LangIdConfig, load_langid, save_langid, train_langid
from .manifest import write_manifest
from .ngram_lm import SMOOTHINGS, load_arpa, save_arpa, train_lm
from .pipeline import (
    STATS_SUFFIX,
    ScoringConfig,
    run_scoring,
    select_by_budget,
    select_top_percent,
)
from .synth import CorruptionPolicy, build_training_set, read_labeled, write_labeled

logger = logging.getLogger(__name__)

ENV_THREADS = "BITEXT_SIEVE_THREADS"


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for data."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _workers() -> int:
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ConfigError(f"{ENV_THREADS} must be >= 1, got {workers}")
    return workers


def _add_scheme_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--src-scheme", default=WHITESPACE, choices=("whitespace", "character"))
    p.add_argument("--tgt-scheme", default=WHITESPACE, choices=("whitespace", "character"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bitext-sieve", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("train-langid", parents=[], help="fit the language identifier")
    p.add_argument("--in", dest="in_path", required=True, help="TSV of text<TAB>language")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--nmax", type=int, default=4, help="max char n-gram order")
    p.add_argument("--buckets", type=int, default=1 << 20)
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("train-lm", help="estimate a backoff n-gram model")
    p.add_argument("--in", dest="in_path", required=True, help="one sentence per line")
    p.add_argument("--out", required=True, help="ARPA output path")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--smoothing", default="kn", choices=SMOOTHINGS)
    p.add_argument("--k", type=float, default=0.01, help="add-k pseudo count")
    p.add_argument("--discount", type=float, default=0.75)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--scheme", default=WHITESPACE, choices=("whitespace", "character"))

    p = sub.add_parser("gen-synth", help="corrupt positives into labeled training data")
    p.add_argument("--pos", required=True, help="bitext TSV of positive pairs")
    p.add_argument("--out", required=True, help="labeled TSV output")
    p.add_argument("--k", type=int, default=2, help="adjacent-target window size")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scheme", default=WHITESPACE, choices=("whitespace", "character"))

    p = sub.add_parser("train-accept", help="fit the built-in acceptability classifier")
    p.add_argument("--labeled", required=True, help="gen-synth output TSV")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--em-iterations", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    _add_scheme_args(p)

    p = sub.add_parser("align-score", help="append a length/dictionary alignment score")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dict", dest="dict_path", help="TSV src_token<TAB>tgt_token")
    p.add_argument("--coverage-weight", type=float, default=1.0)
    p.add_argument("--scheme", default=WHITESPACE, choices=("whitespace", "character"))

    p = sub.add_parser("score", help="score a bitext corpus with the configured filters")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True, help="scored TSV; stats sidecar lands beside it")
    p.add_argument("--langid", help="language-id model JSON")
    p.add_argument("--src-lang")
    p.add_argument("--tgt-lang")
    p.add_argument("--accept", help="built-in acceptability model JSON")
    p.add_argument("--accept-proto", help="external parallelism scorer command")
    p.add_argument("--lm-in", help="in-domain ARPA model")
    p.add_argument("--lm-in-proto", help="external in-domain perplexity scorer command")
    p.add_argument("--lm-non", help="non-domain ARPA model")
    p.add_argument("--clip", type=float, default=DEFAULT_CLIP)
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    _add_scheme_args(p)

    p = sub.add_parser("select", help="pick a subset of a scored corpus")
    p.add_argument("--in", dest="in_path", required=True, help="scored TSV")
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--budget-words", type=int)
    group.add_argument("--top-percent", type=float)
    p.add_argument("--side", default="target", choices=("source", "target"))
    p.add_argument("--scheme", default=WHITESPACE, choices=("whitespace", "character"))

    p = sub.add_parser("eval-pr", help="precision/recall against gold labels")
    p.add_argument("--scored", required=True, help="scored TSV")
    p.add_argument("--labels", required=True, help="TSV id<TAB>{0|1}")
    p.add_argument("--grid", default="0:1:0.05", help="thresholds start:stop:step")
    p.add_argument("--out", required=True, help="curve TSV; figure lands beside it")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("stats", help="score histograms and word counts")
    p.add_argument("--in", dest="in_path", required=True, help="scored TSV")
    p.add_argument("--out", required=True, help="report JSON; figure lands beside it")
    p.add_argument("--no-figures", action="store_true")
    _add_scheme_args(p)

    return parser


def _cmd_train_langid(args, argv) -> None:
    samples = []
    path = Path(args.in_path)
    if not path.is_file():
        raise DataError(f"training file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            line = raw.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise DataError(f"{path}:{lineno + 1}: expected text<TAB>language")
            samples.append((cols[0], cols[1]))
    config = LangIdConfig(
        n_max=args.nmax, buckets=args.buckets, epochs=args.epochs,
        learning_rate=args.lr, seed=args.seed,
    )
    model = train_langid(samples, config)
    save_langid(model, args.out)
    write_manifest(args.out, "train-langid", argv, [path], [args.out], seed=args.seed)


def _cmd_train_lm(args, argv) -> None:
    path = Path(args.in_path)
    if not path.is_file():
        raise DataError(f"corpus not found: {path}")
    with open(path, encoding="utf-8") as fh:
        corpus = [tokenize(line.rstrip("\n"), args.scheme).tokens for line in fh]
    corpus = [toks for toks in corpus if toks]
    lm = train_lm(
        corpus, args.order, args.smoothing,
        k=args.k, discount=args.discount, min_count=args.min_count,
    )
    save_arpa(lm, args.out)
    write_manifest(args.out, "train-lm", argv, [path], [args.out])


def _cmd_gen_synth(args, argv) -> None:
    positives = list(read_bitext(args.pos))
    policy = CorruptionPolicy(window=args.k, seed=args.seed, scheme=args.scheme)
    labeled = build_training_set(positives, policy, workers=_workers())
    write_labeled(labeled, args.out)
    write_manifest(args.out, "gen-synth", argv, [args.pos], [args.out], seed=args.seed)


def _cmd_train_accept(args, argv) -> None:
    labeled = read_labeled(args.labeled)
    config = AcceptTrainConfig(
        epochs=args.epochs, learning_rate=args.lr, seed=args.seed,
        em_iterations=args.em_iterations,
        source_scheme=args.src_scheme, target_scheme=args.tgt_scheme,
    )
    model = train_builtin(labeled, config)
    save_accept(model, args.out)
    write_manifest(args.out, "train-accept", argv, [args.labeled], [args.out], seed=args.seed)


def _cmd_align_score(args, argv) -> None:
    dictionary = read_dictionary(args.dict_path) if args.dict_path else None
    params = AlignmentParams(dictionary=dictionary, coverage_weight=args.coverage_weight)
    inputs = [args.in_path] + ([args.dict_path] if args.dict_path else [])
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        for pair in read_bitext(args.in_path):
            score = pair_alignment_score(pair, params, args.scheme)
            fh.write(pair_to_line(pair)[:-1] + f"\t{format_score(score)}\n")
    write_manifest(args.out, "align-score", argv, inputs, [args.out])


def _external_placeholder(tokens) -> float:
    # the pipeline routes in-domain perplexity to the external command instead
    raise ConfigError("in-domain perplexity is served by the external scorer")


def _cmd_score(args, argv) -> None:
    inputs = [args.in_path]
    langid_model = None
    if args.langid:
        if not (args.src_lang and args.tgt_lang):
            raise ConfigError("--langid needs --src-lang and --tgt-lang")
        langid_model = load_langid(args.langid)
        inputs.append(args.langid)

    accept_model = None
    if args.accept and args.accept_proto:
        raise ConfigError("pass either --accept or --accept-proto, not both")
    if args.accept:
        accept_model = load_accept(args.accept)
        inputs.append(args.accept)
    elif args.accept_proto:
        accept_model = external_model(args.accept_proto)

    domain = None
    domain_command = None
    if args.lm_in and args.lm_in_proto:
        raise ConfigError("pass either --lm-in or --lm-in-proto, not both")
    if args.lm_in or args.lm_in_proto:
        if not args.lm_non:
            raise ConfigError("the domain filter needs --lm-non as well")
        non_lm = load_arpa(args.lm_non)
        inputs.append(args.lm_non)
        if args.lm_in:
            in_scorer = lm_scorer(load_arpa(args.lm_in))
            inputs.append(args.lm_in)
        else:
            domain_command = args.lm_in_proto
            in_scorer = _external_placeholder
        domain = DomainConfig(
            in_domain=in_scorer, non_domain=lm_scorer(non_lm),
            clip=args.clip, cutoff=args.cutoff,
        )
    elif args.lm_non:
        raise ConfigError("the domain filter needs --lm-in or --lm-in-proto as well")

    config = ScoringConfig(
        langid_model=langid_model,
        source_language=args.src_lang,
        target_language=args.tgt_lang,
        accept_model=accept_model,
        domain=domain,
        domain_command=domain_command,
        source_scheme=args.src_scheme,
        target_scheme=args.tgt_scheme,
        workers=_workers(),
    )
    try:
        run_scoring(args.in_path, args.out, config)
    finally:
        if accept_model is not None:
            accept_model.close()
    outputs = [args.out, args.out + STATS_SUFFIX]
    write_manifest(args.out, "score", argv, inputs, outputs)


def _cmd_select(args, argv) -> None:
    rows = [(pair, scores.final) for pair, scores in read_scored(args.in_path)]
    if not rows:
        raise DataError(f"{args.in_path}: no scored rows")
    if args.budget_words is not None:
        picked = select_by_budget(rows, args.budget_words, args.side, args.scheme)
    else:
        picked = select_top_percent(rows, args.top_percent)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        for pair, score in picked:
            fh.write(pair_to_line(pair)[:-1] + f"\t{format_score(score)}\n")
    write_manifest(args.out, "select", argv, [args.in_path], [args.out])


def _read_labels(path: str, expected: int) -> list[int]:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"labels file not found: {p}")
    labels = {}
    with open(p, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            line = raw.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2 or cols[1] not in ("0", "1"):
                raise DataError(f"{p}:{lineno + 1}: expected id<TAB>0|1")
            labels[int(cols[0])] = int(cols[1])
    missing = [i for i in range(expected) if i not in labels]
    if missing:
        raise DataError(f"{p}: missing labels for {len(missing)} ids (first: {missing[0]})")
    return [labels[i] for i in range(expected)]


def _cmd_eval_pr(args, argv) -> None:
    scores = [vec.final for _, vec in read_scored(args.scored)]
    if not scores:
        raise DataError(f"{args.scored}: no scored rows")
    labels = _read_labels(args.labels, len(scores))
    points = pr_curve(scores, labels, parse_grid(args.grid))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("threshold\tprecision\trecall\tpredicted\ttrue_positives\n")
        for pt in points:
            fh.write(
                f"{format_score(pt.threshold)}\t{format_score(pt.precision)}"
                f"\t{format_score(pt.recall)}\t{pt.predicted}\t{pt.true_positives}\n"
            )
    outputs = [args.out]
    if not args.no_figures:
        from .report import render_pr_curve

        figure = Path(args.out).with_suffix(".png")
        render_pr_curve(points, figure)
        outputs.append(figure)
    write_manifest(args.out, "eval-pr", argv, [args.scored, args.labels], outputs)


def _cmd_stats(args, argv) -> None:
    import json

    report = corpus_stats(read_scored(args.in_path), args.src_scheme, args.tgt_scheme)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        json.dump(report.to_doc(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    outputs = [args.out]
    if not args.no_figures:
        from .report import render_score_histograms

        figure = Path(args.out).with_suffix(".png")
        render_score_histograms(report, figure)
        outputs.append(figure)
    write_manifest(args.out, "stats", argv, [args.in_path], outputs)


_COMMANDS = {
    "train-langid": _cmd_train_langid,
    "train-lm": _cmd_train_lm,
    "gen-synth": _cmd_gen_synth,
    "train-accept": _cmd_train_accept,
    "align-score": _cmd_align_score,
    "score": _cmd_score,
    "select": _cmd_select,
    "eval-pr": _cmd_eval_pr,
    "stats": _cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.subcommand](args, list(argv))
    except SieveError as exc:
        print(f"bitext-sieve: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
