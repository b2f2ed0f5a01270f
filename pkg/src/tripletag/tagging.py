"""Position-aware tags and the lossless codec between tag sequences and triplets.

A B or S tag marks the start of a *primary* span (the target under the
target-first scheme, the opinion span under the opinion-first scheme) and
carries the sentiment plus two offsets ``j <= k`` that locate the *secondary*
span relative to the primary span's first token: the secondary span covers
``[i + j, i + k]``.  All indices are 0-based and inclusive.
"""
from __future__ import annotations

import enum
import re
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    MalformedSequence,
    MultipleSecondarySpans,
    OffsetExceedsM,
    OverlappingPrimarySpans,
    SpanOutOfBounds,
    WindowOutOfBounds,
)

# sub-tag ids; f_t columns and transition rows/cols use this order
B, I, O, E, S = 0, 1, 2, 3, 4
START, STOP = 5, 6
SUBTAG_NAMES = ("B", "I", "O", "E", "S", "START", "STOP")
NUM_SUBTAGS = 5

# canonical order of kinds inside a tag set: I, E, O, then B, then S
KIND_RANK = {I: 0, E: 1, O: 2, B: 3, S: 4}


class Sentiment(enum.IntEnum):
    POSITIVE = 0
    NEUTRAL = 1
    NEGATIVE = 2

    @property
    def symbol(self) -> str:
        return "+0-"[self.value]

    @property
    def code(self) -> str:
        return ("POS", "NEU", "NEG")[self.value]

    @classmethod
    def from_symbol(cls, text: str) -> "Sentiment":
        return cls("+0-".index(text))

    @classmethod
    def from_code(cls, text: str) -> "Sentiment":
        try:
            return cls(("POS", "NEU", "NEG").index(text.upper()))
        except ValueError:
            raise ValueError(f"unknown sentiment {text!r}") from None


class Span(NamedTuple):
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def check(self, n: int | None = None) -> None:
        if not 0 <= self.start <= self.end:
            raise SpanOutOfBounds(f"invalid span [{self.start},{self.end}]")
        if n is not None and self.end >= n:
            raise SpanOutOfBounds(f"span [{self.start},{self.end}] exceeds sentence length {n}")


class Triplet(NamedTuple):
    target: Span
    opinion: Span
    sentiment: Sentiment

    @classmethod
    def make(cls, target, opinion, sentiment) -> "Triplet":
        if isinstance(sentiment, str):
            sentiment = Sentiment.from_code(sentiment)
        return cls(Span(*target), Span(*opinion), Sentiment(sentiment))


class Scheme(enum.Enum):
    TARGET_FIRST = "t"
    OPINION_FIRST = "o"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        value = str(value).lower()
        if value in ("t", "target", "target_first"):
            return cls.TARGET_FIRST
        if value in ("o", "opinion", "opinion_first"):
            return cls.OPINION_FIRST
        raise ValueError(f"unknown scheme {value!r}")


@dataclass(frozen=True, order=False)
class Tag:
    sub: int
    sentiment: Sentiment | None = None
    j: int | None = None
    k: int | None = None

    @property
    def carries_triplet(self) -> bool:
        return self.sub in (B, S)

    def sort_key(self):
        if self.carries_triplet:
            return (KIND_RANK[self.sub], int(self.sentiment), self.j, self.k)
        return (KIND_RANK[self.sub], 0, 0, 0)

    def __str__(self):
        name = SUBTAG_NAMES[self.sub]
        if not self.carries_triplet:
            return name
        return f"{name}^{self.sentiment.symbol}_{{{self.j},{self.k}}}"

    __repr__ = __str__


TAG_I = Tag(I)
TAG_E = Tag(E)
TAG_O = Tag(O)

_TAG_RE = re.compile(r"^([BS])\^([+0-])_\{(-?\d+),(-?\d+)\}$")


def parse_tag(text: str) -> Tag:
    text = text.strip()
    if text in ("I", "E", "O"):
        return Tag(SUBTAG_NAMES.index(text))
    m = _TAG_RE.match(text)
    if m is None:
        raise MalformedSequence(f"cannot parse tag {text!r}")
    kind, eps, j, k = m.groups()
    return Tag(B if kind == "B" else S, Sentiment.from_symbol(eps), int(j), int(k))


@dataclass(frozen=True)
class TagSequence:
    tags: tuple[Tag, ...]
    scheme: Scheme
    max_offset: int

    def __len__(self):
        return len(self.tags)

    def __str__(self):
        return " ".join(str(t) for t in self.tags)

    @property
    def subtags(self) -> tuple[int, ...]:
        return tuple(t.sub for t in self.tags)

    @classmethod
    def parse(cls, text: str, scheme, max_offset: int) -> "TagSequence":
        return cls(tuple(parse_tag(t) for t in text.split()), Scheme.parse(scheme), max_offset)


class SelfOverlapWarning(UserWarning):
    """A triplet's opinion span overlaps its own target."""


def _split(triplet: Triplet, scheme: Scheme) -> tuple[Span, Span]:
    if scheme is Scheme.TARGET_FIRST:
        return triplet.target, triplet.opinion
    return triplet.opinion, triplet.target


def _join(primary: Span, secondary: Span, sentiment: Sentiment, scheme: Scheme) -> Triplet:
    if scheme is Scheme.TARGET_FIRST:
        return Triplet(primary, secondary, sentiment)
    return Triplet(secondary, primary, sentiment)


def check_triplets(n: int, triplets: Iterable[Triplet], scheme, M: int | None) -> list[Triplet]:
    """Raise the appropriate EncodingError if ``triplets`` cannot be encoded.

    Returns the deduplicated triplets sorted by primary span.  ``M=None``
    disables the offset bound.
    """
    scheme = Scheme.parse(scheme)
    by_primary: dict[Span, Triplet] = {}
    for t in set(triplets):
        t.target.check(n)
        t.opinion.check(n)
        primary, secondary = _split(t, scheme)
        if primary in by_primary:
            raise MultipleSecondarySpans(
                f"primary span [{primary.start},{primary.end}] has more than one partner"
                f" under scheme {scheme.value}"
            )
        by_primary[primary] = t
        if M is not None:
            j, k = secondary.start - primary.start, secondary.end - primary.start
            if max(abs(j), abs(k)) > M:
                raise OffsetExceedsM(f"offsets ({j},{k}) exceed M={M}")
    ordered = [by_primary[p] for p in sorted(by_primary)]
    for a, b in zip(ordered, ordered[1:]):
        pa, pb = _split(a, scheme)[0], _split(b, scheme)[0]
        if pb.start <= pa.end:
            raise OverlappingPrimarySpans(
                f"primary spans [{pa.start},{pa.end}] and [{pb.start},{pb.end}] overlap"
            )
    return ordered


def encode(tokens: Sequence[str] | int, triplets: Iterable[Triplet], scheme, M: int) -> TagSequence:
    """Build the unique tag sequence for ``triplets`` over ``tokens``.

    ``tokens`` may also be the sentence length.
    """
    n = tokens if isinstance(tokens, int) else len(tokens)
    scheme = Scheme.parse(scheme)
    ordered = check_triplets(n, triplets, scheme, M)
    tags = [TAG_O] * n
    for t in ordered:
        if t.target.start <= t.opinion.end and t.opinion.start <= t.target.end:
            warnings.warn(f"triplet {t} overlaps its own target", SelfOverlapWarning, stacklevel=2)
        primary, secondary = _split(t, scheme)
        i = primary.start
        j, k = secondary.start - i, secondary.end - i
        head = S if primary.start == primary.end else B
        tags[i] = Tag(head, t.sentiment, j, k)
        if head == B:
            for p in range(primary.start + 1, primary.end):
                tags[p] = TAG_I
            tags[primary.end] = TAG_E
    return TagSequence(tuple(tags), scheme, M)


# legal successors in the BIOES automaton; START and STOP included
ALLOWED = {
    START: (B, S, O),
    B: (I, E),
    I: (I, E),
    E: (B, S, O, STOP),
    S: (B, S, O, STOP),
    O: (B, S, O, STOP),
}


def bioes_ok(subtags: Sequence[int]) -> bool:
    prev = START
    for s in subtags:
        if s not in ALLOWED[prev]:
            return False
        prev = s
    return STOP in ALLOWED[prev]


def validate(seq: TagSequence, n: int | None = None) -> None:
    """Raise if ``seq`` violates any TagSequence invariant."""
    n = len(seq.tags) if n is None else n
    if len(seq.tags) != n:
        raise MalformedSequence(f"sequence has {len(seq.tags)} tags for {n} tokens")
    prev = START
    for i, tag in enumerate(seq.tags):
        if tag.sub not in ALLOWED[prev]:
            raise MalformedSequence(
                f"illegal transition {SUBTAG_NAMES[prev]} -> {SUBTAG_NAMES[tag.sub]} at position {i}"
            )
        if tag.carries_triplet:
            if tag.j > tag.k or max(abs(tag.j), abs(tag.k)) > seq.max_offset:
                raise MalformedSequence(f"offsets of {tag} at position {i} violate M={seq.max_offset}")
            if i + tag.j < 0 or i + tag.k > n - 1:
                raise WindowOutOfBounds(f"window of {tag} at position {i} leaves the sentence")
        prev = tag.sub
    if STOP not in ALLOWED[prev]:
        raise MalformedSequence(f"sequence ends with {SUBTAG_NAMES[prev]}")


def decode(seq: TagSequence, strict: bool = True) -> set[Triplet]:
    """Recover the triplet set.

    With ``strict=False`` malformed pieces are skipped instead of raising;
    only needed for output of a model decoded without the structural mask.
    """
    if strict:
        validate(seq)
    out = set()
    n = len(seq.tags)
    i = 0
    while i < n:
        tag = seq.tags[i]
        if not tag.carries_triplet:
            i += 1
            continue
        end = i
        if tag.sub == B:
            end += 1
            while end < n and seq.tags[end].sub == I:
                end += 1
            if end == n or seq.tags[end].sub != E:
                i = end
                continue
        a, b = i + tag.j, i + tag.k
        if 0 <= a <= b < n:
            out.add(_join(Span(i, end), Span(a, b), tag.sentiment, seq.scheme))
        i = end + 1
    return out


def offset_pairs(n: int, i: int, M: int) -> list[tuple[int, int]]:
    return [
        (j, k)
        for j in range(max(-M, -i), M + 1)
        for k in range(j, min(M, n - 1 - i) + 1)
    ]


@lru_cache(maxsize=4096)
def _tagset(n: int, i: int, M: int) -> tuple[Tag, ...]:
    pairs = offset_pairs(n, i, M)
    tags = [TAG_I, TAG_E, TAG_O]
    for head in (B, S):
        for eps in Sentiment:
            tags.extend(Tag(head, eps, j, k) for j, k in pairs)
    return tuple(tags)


def enumerate_tagset(n: int, i: int, M: int) -> list[Tag]:
    """All tags admissible at position ``i`` of a length-``n`` sentence, canonical order."""
    if not 0 <= i < n:
        raise IndexError(f"position {i} outside sentence of length {n}")
    return list(_tagset(n, i, M))
