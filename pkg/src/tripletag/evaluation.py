"""Triplet-level precision/recall/F1, length breakdowns and the two-model merge."""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import SentenceCountMismatch
from .tagging import Span, Triplet


class MatchMode(enum.Enum):
    EXACT = "exact"
    PARTIAL_TARGET = "partial-target"
    PARTIAL_OPINION = "partial-opinion"

    @classmethod
    def parse(cls, value) -> "MatchMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower().replace("_", "-"))


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    matched: int
    predicted: int
    gold: int

    @classmethod
    def from_counts(cls, matched: int, predicted: int, gold: int) -> "PRF":
        p = matched / predicted if predicted else 0.0
        r = matched / gold if gold else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f, matched, predicted, gold)

    def as_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "matched": self.matched,
            "predicted": self.predicted,
            "gold": self.gold,
        }


def spans_overlap(a: Span, b: Span) -> bool:
    return max(a.start, b.start) <= min(a.end, b.end)


def triplets_overlap(a: Triplet, b: Triplet) -> bool:
    return spans_overlap(a.target, b.target) and spans_overlap(a.opinion, b.opinion)


def triplets_match(gold: Triplet, pred: Triplet, mode: MatchMode) -> bool:
    if gold.sentiment != pred.sentiment:
        return False
    if mode is MatchMode.EXACT:
        return gold.target == pred.target and gold.opinion == pred.opinion
    if mode is MatchMode.PARTIAL_TARGET:
        return gold.opinion == pred.opinion and spans_overlap(gold.target, pred.target)
    return gold.target == pred.target and spans_overlap(gold.opinion, pred.opinion)


def match_sentence(gold: Iterable[Triplet], pred: Iterable[Triplet], mode) -> list[tuple[Triplet, Triplet]]:
    """Greedy one-to-one matching; predictions are deduplicated and both sides
    are visited in canonical (sorted) order."""
    mode = MatchMode.parse(mode)
    golds = sorted(gold)
    used = [False] * len(golds)
    pairs = []
    for p in sorted(set(pred)):
        for q, g in enumerate(golds):
            if not used[q] and triplets_match(g, p, mode):
                used[q] = True
                pairs.append((g, p))
                break
    return pairs


def _check_aligned(gold, pred):
    if len(gold) != len(pred):
        raise SentenceCountMismatch(f"{len(gold)} gold sentences vs {len(pred)} predicted")


def score(gold: Sequence[Iterable[Triplet]], pred: Sequence[Iterable[Triplet]], mode=MatchMode.EXACT) -> PRF:
    _check_aligned(gold, pred)
    matched = predicted = total = 0
    for g, p in zip(gold, pred):
        g, p = list(g), set(p)
        matched += len(match_sentence(g, p, mode))
        predicted += len(p)
        total += len(g)
    return PRF.from_counts(matched, predicted, total)


FACETS = ("target_len", "opinion_len", "offset_len")


def facet_length(t: Triplet, facet: str) -> int:
    if facet == "target_len":
        return t.target.length
    if facet == "opinion_len":
        return t.opinion.length
    if facet == "offset_len":
        return abs(t.opinion.start - t.target.start)
    raise ValueError(f"unknown facet {facet!r}; expected one of {FACETS}")


def length_breakdown(gold, pred, facet: str, mode=MatchMode.EXACT) -> dict[int, PRF]:
    """PRF per facet length.

    Gold and predicted triplets are bucketed by their own lengths; a matched
    pair counts in bucket ``L`` when both members have length ``L`` (always
    the case for exact matching).  Empty buckets are omitted.
    """
    _check_aligned(gold, pred)
    if facet not in FACETS:
        raise ValueError(f"unknown facet {facet!r}; expected one of {FACETS}")
    n_gold: dict[int, int] = {}
    n_pred: dict[int, int] = {}
    n_match: dict[int, int] = {}
    for g, p in zip(gold, pred):
        g, p = list(g), set(p)
        for t in g:
            L = facet_length(t, facet)
            n_gold[L] = n_gold.get(L, 0) + 1
        for t in p:
            L = facet_length(t, facet)
            n_pred[L] = n_pred.get(L, 0) + 1
        for gt, pt in match_sentence(g, p, mode):
            L = facet_length(gt, facet)
            if facet_length(pt, facet) == L:
                n_match[L] = n_match.get(L, 0) + 1
    out = {}
    for L in sorted(set(n_gold) | set(n_pred)):
        out[L] = PRF.from_counts(n_match.get(L, 0), n_pred.get(L, 0), n_gold.get(L, 0))
    return out


def ensemble_merge(base: Sequence[Iterable[Triplet]], donor: Sequence[Iterable[Triplet]]) -> list[set[Triplet]]:
    """Add every donor triplet that overlaps no triplet of the original base set."""
    _check_aligned(base, donor)
    merged = []
    for b, d in zip(base, donor):
        b = set(b)
        extra = {t for t in sorted(set(d)) if not any(triplets_overlap(t, x) for x in b)}
        merged.append(b | extra)
    return merged


def report_lines(prf: PRF, mode) -> str:
    mode = MatchMode.parse(mode)
    kv = " ".join(f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}" for k, v in prf.as_dict().items())
    table = (
        f"{'mode':<16}{'P':>8}{'R':>8}{'F1':>8}{'match':>8}{'pred':>8}{'gold':>8}\n"
        f"{mode.value:<16}{prf.precision:>8.3f}{prf.recall:>8.3f}{prf.f1:>8.3f}"
        f"{prf.matched:>8d}{prf.predicted:>8d}{prf.gold:>8d}"
    )
    return f"mode={mode.value} {kv}\n{table}"


def breakdown_csv(rows: dict[int, PRF], facet: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["facet", "length", "precision", "recall", "f1", "matched", "predicted", "gold"])
    for L, prf in rows.items():
        w.writerow([facet, L, f"{prf.precision:.6f}", f"{prf.recall:.6f}", f"{prf.f1:.6f}",
                    prf.matched, prf.predicted, prf.gold])
    return buf.getvalue()
