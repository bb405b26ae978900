"""Duplicate-sentence detection and train/eval leakage removal.

Sentences are keyed by their ordered token texts alone: the same sentence
annotated differently in two datasets is still a duplicate. Keys are
case-sensitive exact sequences; no normalization.
"""

from __future__ import annotations

import json
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

from .corpus import Corpus, Sentence
from .errors import EmptyTrainAfterDedup

SentenceKey = tuple[str, ...]


def sentence_key(sentence: Sentence) -> SentenceKey:
    return sentence.texts


@dataclass(frozen=True, slots=True)
class Occurrence:
    dataset: str
    split: str
    sentence_index: int
    text: str


@dataclass(frozen=True)
class DuplicateReport:
    """Groups of sentence occurrences sharing a key, each of size >= 2.

    Groups partition the duplicated keys: they are disjoint and exhaustive,
    ordered by first occurrence.
    """

    groups: tuple[tuple[Occurrence, ...], ...]

    def __len__(self) -> int:
        return len(self.groups)

    def to_json(self) -> str:
        payload = [
            [
                {
                    "dataset": occ.dataset,
                    "split": occ.split,
                    "sentence_index": occ.sentence_index,
                    "text": occ.text,
                }
                for occ in group
            ]
            for group in self.groups
        ]
        return json.dumps({"groups": payload}, ensure_ascii=False, indent=2) + "\n"


def _group_occurrences(corpora: Sequence[Corpus]) -> dict[SentenceKey, list[Occurrence]]:
    by_key: dict[SentenceKey, list[Occurrence]] = {}
    for corpus in corpora:
        for index, sentence in enumerate(corpus):
            occ = Occurrence(corpus.name, corpus.split, index, " ".join(sentence.texts))
            by_key.setdefault(sentence_key(sentence), []).append(occ)
    return by_key


def find_duplicates_within(corpus_splits: Sequence[Corpus]) -> DuplicateReport:
    """Duplicate groups across the splits of one dataset (and inside each split)."""
    names = {c.name for c in corpus_splits}
    if len(names) > 1:
        raise ValueError(f"splits belong to different datasets: {sorted(names)}")
    groups = [
        tuple(occs) for occs in _group_occurrences(corpus_splits).values() if len(occs) >= 2
    ]
    return DuplicateReport(tuple(groups))


def find_duplicates_across(a: Corpus, b: Corpus) -> DuplicateReport:
    """Duplicate groups whose key occurs in both corpora.

    Each group lists every occurrence in either corpus; keys duplicated
    only inside one corpus are not reported here.
    """
    keys_a = {sentence_key(s) for s in a}
    keys_b = {sentence_key(s) for s in b}
    shared = keys_a & keys_b
    groups = [
        tuple(occs)
        for key, occs in _group_occurrences([a, b]).items()
        if key in shared
    ]
    return DuplicateReport(tuple(groups))


def remove_overlap(train: Corpus, eval_corpus: Corpus) -> Corpus:
    """Drop every train sentence whose key occurs in the eval corpus.

    The eval corpus is untouched and train order is preserved. Leaving the
    training split empty is a warning, not an error.
    """
    eval_keys = {sentence_key(s) for s in eval_corpus}
    kept = tuple(s for s in train if sentence_key(s) not in eval_keys)
    if not kept and len(train) > 0:
        warnings.warn(
            f"overlap removal left {train.name}/{train.split} empty",
            EmptyTrainAfterDedup,
            stacklevel=2,
        )
    return train.with_sentences(kept)
