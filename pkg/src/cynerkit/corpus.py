"""Core data model: annotated corpora, BIO2 validation/repair, span decoding.

Everything here is an immutable value; all operations are pure functions,
safe to call concurrently. Tag-level inner loops are delegated to
:mod:`cynerkit._kernels`.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from . import _kernels
from .distributions import CategoricalDistribution
from .errors import EmptyDistribution, InvalidTagSequence, MissingAnnotation, SchemaViolation

SPLITS = ("train", "dev", "test")


@dataclass(frozen=True, slots=True)
class Token:
    """One annotated token: surface text, BIO2 tag, optional POS tag.

    The tag must be well-formed at construction ("O", "B-<label>" or
    "I-<label>"); raw malformed tags are handled during ingestion, before
    tokens exist.
    """

    text: str
    tag: str
    pos: str | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError(f"token text contains a newline: {self.text!r}")
        if not _kernels.is_wellformed(self.tag):
            raise ValueError(f"malformed BIO2 tag: {self.tag!r}")

    @property
    def label(self) -> str | None:
        """Label part of the tag, or None for O."""
        return _kernels.tag_label(self.tag)


@dataclass(frozen=True, slots=True)
class Sentence:
    """An ordered, non-empty sequence of tokens.

    BIO2 validity is not enforced here; it is required (and checked) by
    span decoding.
    """

    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)

    @property
    def tags(self) -> list[str]:
        return [t.tag for t in self.tokens]

    def with_tags(self, tags: Sequence[str]) -> "Sentence":
        """Copy of this sentence with tags replaced position-for-position."""
        if len(tags) != len(self.tokens):
            raise ValueError("tag count does not match token count")
        return Sentence(tuple(Token(t.text, tag, t.pos) for t, tag in zip(self.tokens, tags)))


@dataclass(frozen=True)
class Corpus:
    """A named, split-scoped list of sentences with a label schema.

    Every non-O tag's label part must belong to ``schema``; violations are
    rejected at construction so the schema stays the single source of truth.
    Sentence order is preserved from the source files.
    """

    name: str
    split: str
    schema: frozenset[str]
    sentences: tuple[Sentence, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "schema", frozenset(self.schema))
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")
        for s_idx, sentence in enumerate(self.sentences):
            for t_idx, token in enumerate(sentence):
                label = token.label
                if label is not None and label not in self.schema:
                    raise SchemaViolation(
                        f"label {label!r} (sentence {s_idx}, token {t_idx}) "
                        f"not in schema of {self.name}/{self.split}"
                    )

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def n_entity_tokens(self) -> int:
        """Number of tokens carrying a non-O tag."""
        return sum(1 for s in self.sentences for t in s if t.tag != "O")

    def with_sentences(self, sentences: Iterable[Sentence]) -> "Corpus":
        return Corpus(self.name, self.split, self.schema, tuple(sentences))


@dataclass(frozen=True, slots=True, order=True)
class EntitySpan:
    """Half-open token range [start, end) carrying one entity label."""

    start: int
    end: int
    label: str

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"degenerate span ({self.start}, {self.end})")

    def overlaps(self, other: "EntitySpan") -> bool:
        return self.start < other.end and other.start < self.end


class ViolationKind(enum.Enum):
    Malformed = _kernels.MALFORMED
    OrphanInside = _kernels.ORPHAN_INSIDE
    LabelMismatch = _kernels.LABEL_MISMATCH


class Violation(NamedTuple):
    position: int
    kind: ViolationKind


TagsLike = Union[Sentence, Sequence[str]]


def _tags_of(x: TagsLike) -> list[str]:
    if isinstance(x, Sentence):
        return x.tags
    return list(x)


def validate_bio2(sentence: TagsLike) -> list[Violation]:
    """Every position where the tag sequence breaks BIO2.

    Accepts a Sentence or a raw tag-string sequence; raw sequences may
    contain malformed tags, which are reported as Malformed violations
    rather than raised. Empty result iff the sequence is valid.
    """
    return [Violation(pos, ViolationKind(kind)) for pos, kind in _kernels.bio2_violations(_tags_of(sentence))]


def repair_bio2(sentence: Sentence) -> Sentence:
    """Rewrite orphan and mismatched I-X tags to B-X.

    Idempotent; the result always passes validate_bio2 with zero
    violations. Also accepts a raw tag sequence, returning a tag list.
    """
    if isinstance(sentence, Sentence):
        return sentence.with_tags(_kernels.bio2_repair(sentence.tags))
    return _kernels.bio2_repair(list(sentence))


def repair_corpus(corpus: Corpus) -> Corpus:
    """repair_bio2 applied to every sentence."""
    return corpus.with_sentences(repair_bio2(s) for s in corpus)


def extract_spans(sentence: TagsLike) -> list[EntitySpan]:
    """Decode maximal B-X (I-X)* runs into spans, sorted by start.

    The sentence must be BIO2-valid; otherwise InvalidTagSequence is
    raised and the caller should repair first.
    """
    try:
        raw = _kernels.decode_spans(_tags_of(sentence))
    except ValueError as exc:
        position = exc.args[1] if len(exc.args) > 1 else -1
        raise InvalidTagSequence(position, str(exc.args[0])) from None
    return [EntitySpan(start, end, label) for start, end, label in raw]


def encode_spans(length: int, spans: Iterable[EntitySpan | tuple[int, int, str]]) -> list[str]:
    """Rebuild the BIO2 tag sequence for sorted, non-overlapping spans."""
    triples = [(s.start, s.end, s.label) if isinstance(s, EntitySpan) else tuple(s) for s in spans]
    return _kernels.encode_spans(length, triples)


def iter_spans(corpus: Corpus) -> Iterator[EntitySpan]:
    for sentence in corpus:
        yield from extract_spans(sentence)


def span_length_distribution(corpus: Corpus) -> CategoricalDistribution:
    """Relative frequencies of entity span lengths (integer categories)."""
    counts: dict[int, int] = {}
    for span in iter_spans(corpus):
        length = span.end - span.start
        counts[length] = counts.get(length, 0) + 1
    if not counts:
        raise EmptyDistribution(f"{corpus.name}/{corpus.split} contains no entity spans")
    return CategoricalDistribution.from_counts(counts)


def token_distribution(corpus: Corpus) -> CategoricalDistribution:
    """Relative frequencies of token surface strings."""
    counts: dict[str, int] = {}
    for sentence in corpus:
        for token in sentence:
            counts[token.text] = counts.get(token.text, 0) + 1
    if not counts:
        raise EmptyDistribution(f"{corpus.name}/{corpus.split} contains no tokens")
    return CategoricalDistribution.from_counts(counts)


def pos_distribution(corpus: Corpus) -> CategoricalDistribution:
    """Relative frequencies of POS tags; every token must carry one."""
    counts: dict[str, int] = {}
    for s_idx, sentence in enumerate(corpus):
        for t_idx, token in enumerate(sentence):
            if token.pos is None:
                raise MissingAnnotation(
                    f"{corpus.name}/{corpus.split} lacks a POS tag at sentence {s_idx}, token {t_idx}"
                )
            counts[token.pos] = counts.get(token.pos, 0) + 1
    if not counts:
        raise EmptyDistribution(f"{corpus.name}/{corpus.split} contains no tokens")
    return CategoricalDistribution.from_counts(counts)


def entity_label_distribution(corpus: Corpus) -> CategoricalDistribution:
    """Relative frequencies of span labels, one count per decoded span."""
    counts: dict[str, int] = {}
    for span in iter_spans(corpus):
        counts[span.label] = counts.get(span.label, 0) + 1
    if not counts:
        raise EmptyDistribution(f"{corpus.name}/{corpus.split} contains no entity spans")
    return CategoricalDistribution.from_counts(counts)
