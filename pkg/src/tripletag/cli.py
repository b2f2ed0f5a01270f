"""Command-line entry point: ``tripletag <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation (including a failing self-check).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

from . import checks
from .corpus import CorpusRecord, load_corpus, resolve_path, stats, write_jsonl
from .encoder import read_embeddings
from .errors import DataError, TripletagError
from .evaluation import FACETS, MatchMode, breakdown_csv, ensemble_merge, length_breakdown, report_lines, score
from .tagging import Scheme, SelfOverlapWarning, TagSequence, decode, encode
from .training import TrainConfig, build_vocab, load_checkpoint, save_checkpoint, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    """One override flag per TrainConfig field, e.g. ``--max-offset 4``."""
    for f in dataclasses.fields(TrainConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "seed":
            p.add_argument(flag, type=int, default=None, help="random seed")
            continue
        default = f.default
        kind = _bool if isinstance(default, bool) else type(default) if default is not None else str
        if f.name == "clip_norm":
            kind = float
        p.add_argument(flag, dest=f.name, type=kind, default=None, metavar=f.name.upper())


def _write_records(records, out):
    if out in (None, "-"):
        write_jsonl(records, fh=sys.stdout)
    else:
        write_jsonl(records, out)


def _aligned(gold, pred, what="prediction"):
    if len(gold) != len(pred):
        raise DataError(f"{what} file has {len(pred)} sentences, expected {len(gold)}")
    for q, (g, p) in enumerate(zip(gold, pred), 1):
        if g.tokens != p.tokens:
            raise DataError(f"sentence {q}: tokens differ between the two files")


# -- commands ----------------------------------------------------------------

def cmd_train(args) -> int:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise DataError("config file must hold a JSON object")
    for f in dataclasses.fields(TrainConfig):
        value = getattr(args, f.name)
        if value is not None:
            data[f.name] = value
    config = TrainConfig.from_dict(data)
    train_set = load_corpus(args.train)
    dev_set = load_corpus(args.dev) if args.dev else []
    vocab = build_vocab(train_set, dev_set)
    pretrained = None
    if config.embeddings:
        pretrained, dim = read_embeddings(resolve_path(config.embeddings), vocab)
        if dim != config.embed_dim:
            raise DataError(f"embedding file has dimension {dim}, config says {config.embed_dim}")
    ckpt = train(config, train_set, dev_set, vocab=vocab, pretrained=pretrained)
    save_checkpoint(ckpt, args.out)
    print(f"saved {args.out} (epoch {ckpt.epoch}, dev F1 {ckpt.dev_f1:.4f})")
    return EXIT_OK


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    records = load_corpus(args.input)
    out = [CorpusRecord(r.tokens, sorted(ckpt.predict(r.tokens))) for r in records]
    _write_records(out, args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    gold = load_corpus(args.gold)
    pred = load_corpus(args.pred)
    _aligned(gold, pred)
    g = [r.triplets for r in gold]
    p = [r.triplets for r in pred]
    mode = MatchMode.parse(args.mode)
    print(report_lines(score(g, p, mode), mode))
    if args.by_length:
        table = breakdown_csv(length_breakdown(g, p, args.by_length, mode), args.by_length)
        if args.csv:
            Path(args.csv).write_text(table, encoding="utf-8")
        else:
            sys.stdout.write(table)
    return EXIT_OK


def cmd_encode(args) -> int:
    scheme = Scheme.parse(args.scheme)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SelfOverlapWarning)
        for rec in load_corpus(args.input):
            print(encode(rec.tokens, rec.triplets, scheme, args.max_offset))
    return EXIT_OK


def cmd_decode(args) -> int:
    scheme = Scheme.parse(args.scheme)
    fh = sys.stdin if args.input in (None, "-") else open(resolve_path(args.input), encoding="utf-8")
    with fh:
        for line in fh:
            if not line.strip():
                continue
            seq = TagSequence.parse(line, scheme, args.max_offset)
            triplets = sorted(decode(seq))
            print(json.dumps({"triplets": [
                {"target": list(t.target), "opinion": list(t.opinion), "sentiment": t.sentiment.code}
                for t in triplets
            ]}))
    return EXIT_OK


def cmd_merge(args) -> int:
    base = load_corpus(args.base)
    donor = load_corpus(args.donor)
    _aligned(base, donor, "donor")
    merged = ensemble_merge([r.triplets for r in base], [r.triplets for r in donor])
    _write_records([CorpusRecord(r.tokens, sorted(m)) for r, m in zip(base, merged)], args.output)
    return EXIT_OK


def cmd_stats(args) -> int:
    for path in args.corpus:
        print(stats(load_corpus(path)).report(Path(path).stem))
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    results = checks.run_all(args.scale, seed=args.seed or 0)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("selfcheck:", "all suites passed" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tripletag", description="Position-aware tagging for aspect sentiment triplets.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model and write a checkpoint directory")
    p.add_argument("--config", help="JSON file with training settings; flags override it")
    p.add_argument("--train", required=True, help="training corpus (JSONL or ASTE text)")
    p.add_argument("--dev", help="development corpus for model selection")
    p.add_argument("--out", required=True, help="checkpoint directory to write")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="tag a corpus with a trained checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="output JSONL (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against gold triplets")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--mode", default="exact", choices=[m.value for m in MatchMode])
    p.add_argument("--by-length", choices=FACETS, help="also break results down by span length")
    p.add_argument("--csv", help="write the breakdown CSV here instead of stdout")
    p.set_defaults(func=cmd_eval)

    for name, helptext in (("encode", "print the tag sequence of each record"),
                           ("decode", "read tag sequences, one per line, and print their triplets")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", nargs="?" if name == "decode" else None,
                       help="corpus file" if name == "encode" else "tag file (default stdin)")
        p.add_argument("--scheme", default="t", choices=["t", "o"])
        p.add_argument("--max-offset", type=int, default=6)
        p.set_defaults(func=cmd_encode if name == "encode" else cmd_decode)

    p = sub.add_parser("merge", help="add non-overlapping donor triplets to base predictions")
    p.add_argument("base")
    p.add_argument("donor")
    p.add_argument("-o", "--output", help="output JSONL (default stdout)")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("corpus", nargs="+")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("selfcheck", help="run the verification suites at reduced scale")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", choices=["quick", "full"], default="quick")
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DataError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"tripletag: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TripletagError, AssertionError) as exc:
        print(f"tripletag: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
