"""A tiny synthetic corpus with unambiguous lexical cues.

Every target is immediately followed by a single opinion word whose
polarity is fixed by the word itself, so a correct model exists and is easy
to find.  Used by the trainability checks and the CLI self-check.
"""
from __future__ import annotations

import numpy as np

from .corpus import CorpusRecord
from .tagging import Sentiment, Span, Triplet

TARGETS = [
    ("pasta",), ("service",), ("staff",), ("pizza",), ("wine", "list"), ("battery", "life"),
]
OPINIONS = {
    Sentiment.POSITIVE: ["great", "tasty"],
    Sentiment.NEUTRAL: ["okay"],
    Sentiment.NEGATIVE: ["awful", "rude"],
}
FILLERS = ["the", "we", "and", "really", "but", "also", "i", "think", "today", "here"]


def generate(count: int, seed: int = 0, max_aspects: int = 2) -> list[CorpusRecord]:
    rng = np.random.default_rng(seed)
    polarities = list(OPINIONS)
    records = []
    for _ in range(count):
        tokens: list[str] = []
        triplets = []
        k = int(rng.integers(1, max_aspects + 1))
        chosen = rng.choice(len(TARGETS), size=k, replace=False)
        for t in chosen:
            tokens.extend(str(w) for w in rng.choice(FILLERS, size=int(rng.integers(1, 3))))
            start = len(tokens)
            tokens.extend(TARGETS[t])
            target = Span(start, len(tokens) - 1)
            polarity = polarities[int(rng.integers(len(polarities)))]
            words = OPINIONS[polarity]
            tokens.append(words[int(rng.integers(len(words)))])
            triplets.append(Triplet(target, Span(len(tokens) - 1, len(tokens) - 1), polarity))
        tokens.extend(str(w) for w in rng.choice(FILLERS, size=int(rng.integers(0, 2))))
        records.append(CorpusRecord(tokens, triplets))
    return records
