"""Corpus formats and dataset statistics.

The canonical interchange format is JSONL, one sentence per line::

    {"tokens": ["food", "was", ...],
     "triplets": [{"target": [0, 0], "opinion": [2, 3], "sentiment": "NEU"}]}

with 0-based inclusive spans.  The released ASTE-Data text layout
(``sentence####[([0], [2, 3], 'NEU')]``) is supported as an import format.
"""
from __future__ import annotations

import ast
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import NonContiguousSpan, ParseError, SpanOutOfBounds
from .tagging import Sentiment, Span, Triplet

DATA_DIR_ENV = "TRIPLETAG_DATA_DIR"


@dataclass
class CorpusRecord:
    tokens: list[str]
    triplets: list[Triplet] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "triplets": [triplet_to_json(t) for t in self.triplets],
        }


def triplet_to_json(t: Triplet) -> dict:
    return {"target": list(t.target), "opinion": list(t.opinion), "sentiment": t.sentiment.code}


def resolve_path(path: str | Path) -> Path:
    """Relative paths that do not exist are looked up under $TRIPLETAG_DATA_DIR."""
    p = Path(path)
    if not p.exists() and not p.is_absolute() and os.environ.get(DATA_DIR_ENV):
        alt = Path(os.environ[DATA_DIR_ENV]) / p
        if alt.exists():
            return alt
    return p


def _span(value, n, line) -> Span:
    if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise ParseError(f"span must be a pair of integers, got {value!r}", line)
    s, e = value
    if not 0 <= s <= e < n:
        raise SpanOutOfBounds(f"span [{s},{e}] invalid for {n} tokens", line)
    return Span(s, e)


def parse_record(obj, line=None) -> CorpusRecord:
    if not isinstance(obj, dict) or "tokens" not in obj:
        raise ParseError("record must be an object with a 'tokens' field", line)
    tokens = obj["tokens"]
    if not isinstance(tokens, list) or not tokens or not all(isinstance(t, str) for t in tokens):
        raise ParseError("'tokens' must be a non-empty list of strings", line)
    triplets = []
    for raw in obj.get("triplets") or []:
        try:
            target, opinion, sentiment = raw["target"], raw["opinion"], raw["sentiment"]
        except (KeyError, TypeError):
            raise ParseError(f"triplet needs target, opinion and sentiment: {raw!r}", line) from None
        try:
            sent = Sentiment.from_code(sentiment)
        except (ValueError, AttributeError):
            raise ParseError(f"unknown sentiment {sentiment!r}", line) from None
        n = len(tokens)
        triplets.append(Triplet(_span(target, n, line), _span(opinion, n, line), sent))
    return CorpusRecord(tokens, triplets)


def load_jsonl(path: str | Path) -> list[CorpusRecord]:
    records = []
    with open(resolve_path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno) from None
            records.append(parse_record(obj, lineno))
    return records


def write_jsonl(records: Iterable[CorpusRecord], path: str | Path | None = None, fh=None) -> None:
    lines = (json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records)
    if fh is not None:
        fh.writelines(lines)
        return
    with open(path, "w", encoding="utf-8") as out:
        out.writelines(lines)


def _indices_to_span(indices, n, line) -> Span:
    if not indices or not all(isinstance(i, int) for i in indices):
        raise ParseError(f"bad index list {indices!r}", line)
    idx = sorted(indices)
    if idx != list(range(idx[0], idx[-1] + 1)):
        raise NonContiguousSpan(f"indices {indices} are not contiguous", line)
    if idx[0] < 0 or idx[-1] >= n:
        raise SpanOutOfBounds(f"indices {indices} invalid for {n} tokens", line)
    return Span(idx[0], idx[-1])


def parse_aste_line(line: str, lineno=None) -> CorpusRecord:
    if "####" not in line:
        raise ParseError("missing '####' separator", lineno)
    sentence, _, rest = line.rstrip("\n").partition("####")
    tokens = sentence.split()
    if not tokens:
        raise ParseError("empty sentence", lineno)
    try:
        raw = ast.literal_eval(rest.strip()) if rest.strip() else []
    except (ValueError, SyntaxError):
        raise ParseError("triplet list is not a literal list of tuples", lineno) from None
    if not isinstance(raw, list):
        raise ParseError("triplet list must be a list", lineno)
    triplets = []
    for item in raw:
        if not (isinstance(item, (tuple, list)) and len(item) == 3):
            raise ParseError(f"triplet must have three fields: {item!r}", lineno)
        tgt, opn, sent = item
        try:
            polarity = Sentiment.from_code(sent)
        except (ValueError, AttributeError):
            raise ParseError(f"unknown sentiment {sent!r}", lineno) from None
        triplets.append(
            Triplet(_indices_to_span(tgt, len(tokens), lineno), _indices_to_span(opn, len(tokens), lineno), polarity)
        )
    return CorpusRecord(tokens, triplets)


def load_aste_txt(path: str | Path) -> list[CorpusRecord]:
    with open(resolve_path(path), encoding="utf-8") as fh:
        return [parse_aste_line(line, n) for n, line in enumerate(fh, 1) if line.strip()]


def load_corpus(path: str | Path) -> list[CorpusRecord]:
    """Dispatch on content: lines holding '####' are ASTE-Data text, otherwise JSONL."""
    p = resolve_path(path)
    with open(p, encoding="utf-8") as fh:
        first = next((line for line in fh if line.strip()), "")
    if "####" in first and not first.lstrip().startswith("{"):
        return load_aste_txt(p)
    return load_jsonl(p)


@dataclass
class DatasetStats:
    sentences: int = 0
    positive: int = 0
    neutral: int = 0
    negative: int = 0
    targets_one_opinion: int = 0
    targets_multi_opinion: int = 0
    opinions_one_target: int = 0
    opinions_multi_target: int = 0

    @property
    def triplets(self) -> int:
        return self.positive + self.neutral + self.negative

    def __add__(self, other: "DatasetStats") -> "DatasetStats":
        return DatasetStats(*(a + b for a, b in zip(self._values(), other._values())))

    def _values(self):
        return (self.sentences, self.positive, self.neutral, self.negative,
                self.targets_one_opinion, self.targets_multi_opinion,
                self.opinions_one_target, self.opinions_multi_target)

    def report(self, name: str = "corpus") -> str:
        head = f"{'dataset':<12}{'#S':>7}{'#+':>7}{'#0':>7}{'#-':>7}{'#T':>7}"
        row = f"{name:<12}{self.sentences:>7}{self.positive:>7}{self.neutral:>7}{self.negative:>7}{self.triplets:>7}"
        extra = (
            f"target with one opinion span: {self.targets_one_opinion}\n"
            f"target with multiple opinion spans: {self.targets_multi_opinion}\n"
            f"opinion span with one target: {self.opinions_one_target}\n"
            f"opinion span with multiple targets: {self.opinions_multi_target}"
        )
        return f"{head}\n{row}\n{extra}"


def stats(corpus: Sequence[CorpusRecord]) -> DatasetStats:
    out = DatasetStats()
    for rec in corpus:
        out.sentences += 1
        by_target: dict[Span, set[Span]] = {}
        by_opinion: dict[Span, set[Span]] = {}
        for t in rec.triplets:
            if t.sentiment is Sentiment.POSITIVE:
                out.positive += 1
            elif t.sentiment is Sentiment.NEUTRAL:
                out.neutral += 1
            else:
                out.negative += 1
            by_target.setdefault(t.target, set()).add(t.opinion)
            by_opinion.setdefault(t.opinion, set()).add(t.target)
        for partners in by_target.values():
            if len(partners) == 1:
                out.targets_one_opinion += 1
            else:
                out.targets_multi_opinion += 1
        for partners in by_opinion.values():
            if len(partners) == 1:
                out.opinions_one_target += 1
            else:
                out.opinions_multi_target += 1
    return out
