"""Span-level scoring of prediction files against gold corpora.

The prediction file is the contract between trainers and this scorer:
"token<TAB>gold<TAB>pred" per line, blank line between sentences, UTF-8.
Gold tags ride along redundantly so drift between trainer-side and
scorer-side corpora is detected instead of silently mis-scored.

Matching is one-to-one in all modes. Loose matching is resolved greedily
in gold-span order, each gold span consuming the overlapping same-label
predicted span with the earliest start (then earliest end); the rule is
deterministic and oracle-checkable.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from . import _kernels
from .corpus import Corpus, EntitySpan, extract_spans
from .errors import AlignmentError, EmptyDenominator, ParseError


class MatchMode(enum.Enum):
    """How predicted spans may match gold spans.

    Strict: boundaries and label equal. Unlabelled: boundaries equal, label
    ignored. Loose: label equal and spans overlap by at least one token.
    """

    STRICT = "strict"
    UNLABELLED = "unlabelled"
    LOOSE = "loose"


@dataclass(frozen=True, slots=True)
class PredictionSentence:
    tokens: tuple[str, ...]
    gold: tuple[str, ...]
    pred: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "gold", tuple(self.gold))
        object.__setattr__(self, "pred", tuple(self.pred))
        if not (len(self.tokens) == len(self.gold) == len(self.pred)):
            raise ValueError("tokens, gold and pred must have equal length")
        if not self.tokens:
            raise ValueError("empty prediction sentence")


@dataclass(frozen=True)
class PredictionFile:
    sentences: tuple[PredictionSentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class MetricReport:
    """Micro-averaged precision/recall/F1 plus a per-label breakdown."""

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    per_label: dict[str, Scores] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "per_label": {
                label: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "tp": s.tp,
                    "fp": s.fp,
                    "fn": s.fn,
                }
                for label, s in sorted(self.per_label.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """P/R/F1 from counts.

    With nothing predicted and nothing to find, precision and recall are
    vacuously 1.0; F1 with P+R = 0 is defined as 0 to avoid NaN propagation.
    """
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 1.0 if fn == 0 else 0.0
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 1.0 if fp == 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def parse_prediction_file(text: str, source: str = "<memory>") -> PredictionFile:
    sentences: list[PredictionSentence] = []
    tokens: list[str] = []
    gold: list[str] = []
    pred: list[str] = []

    def flush():
        if tokens:
            sentences.append(PredictionSentence(tuple(tokens), tuple(gold), tuple(pred)))
            tokens.clear()
            gold.clear()
            pred.clear()

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            flush()
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(
                f"{source}: expected 3 tab-separated fields, got {len(parts)}",
                line_number=number,
            )
        token, gold_tag, pred_tag = parts
        if not token:
            raise ParseError(f"{source}: empty token", line_number=number)
        for tag in (gold_tag, pred_tag):
            if not _kernels.is_wellformed(tag):
                raise ParseError(f"{source}: malformed tag {tag!r}", line_number=number)
        tokens.append(token)
        gold.append(gold_tag)
        pred.append(pred_tag)
    flush()
    return PredictionFile(tuple(sentences))


def read_prediction_file(path: str | Path) -> PredictionFile:
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: invalid UTF-8 ({exc.reason})", offset=exc.start) from None
    return parse_prediction_file(text, source=str(path))


def write_prediction_file(pf: PredictionFile) -> str:
    blocks = [
        "\n".join(f"{t}\t{g}\t{p}" for t, g, p in zip(s.tokens, s.gold, s.pred))
        for s in pf.sentences
    ]
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def build_prediction_file(gold: Corpus, pred_tags: Sequence[Sequence[str]]) -> PredictionFile:
    """Pair a gold corpus with per-sentence predicted tags."""
    if len(pred_tags) != len(gold):
        raise ValueError("predicted tag lists do not match corpus sentence count")
    return PredictionFile(
        tuple(
            PredictionSentence(s.texts, tuple(s.tags), tuple(tags))
            for s, tags in zip(gold, pred_tags)
        )
    )


def check_alignment(gold: Corpus, pred: PredictionFile) -> None:
    """Raise AlignmentError unless pred aligns with gold token-for-token.

    Both token texts and the redundant gold-tag column must match.
    """
    if len(gold) != len(pred):
        raise AlignmentError(
            min(len(gold), len(pred)),
            None,
            f"sentence count mismatch: gold {len(gold)}, predictions {len(pred)}",
        )
    for index, (gold_sentence, pred_sentence) in enumerate(zip(gold, pred.sentences)):
        if len(gold_sentence) != len(pred_sentence.tokens):
            raise AlignmentError(index, None, "token count mismatch")
        for position, (token, text) in enumerate(zip(gold_sentence, pred_sentence.tokens)):
            if token.text != text:
                raise AlignmentError(
                    index, position, f"token mismatch: gold {token.text!r} vs {text!r}"
                )
            if token.tag != pred_sentence.gold[position]:
                raise AlignmentError(
                    index,
                    position,
                    f"gold-tag drift: corpus {token.tag!r} vs file {pred_sentence.gold[position]!r}",
                )


def decode_pred_spans(tags: Sequence[str]) -> list[EntitySpan]:
    """Lenient decoding for predicted tags: repair, then decode."""
    repaired = _kernels.bio2_repair(list(tags))
    return [EntitySpan(*t) for t in _kernels.decode_spans(repaired)]


def match_spans(
    gold_spans: Sequence[EntitySpan],
    pred_spans: Sequence[EntitySpan],
    mode: MatchMode,
) -> list[tuple[EntitySpan, EntitySpan]]:
    """One-to-one (gold, pred) match pairs for one sentence under a mode."""
    if mode is MatchMode.STRICT:
        by_triple = {(s.start, s.end, s.label): s for s in pred_spans}
        pairs = []
        for g in gold_spans:
            p = by_triple.get((g.start, g.end, g.label))
            if p is not None:
                pairs.append((g, p))
        return pairs
    if mode is MatchMode.UNLABELLED:
        by_bounds = {(s.start, s.end): s for s in pred_spans}
        pairs = []
        for g in gold_spans:
            p = by_bounds.get((g.start, g.end))
            if p is not None:
                pairs.append((g, p))
        return pairs
    # Loose: greedy in gold-span order, earliest-start predicted span wins ties.
    pairs = []
    taken = [False] * len(pred_spans)
    for g in sorted(gold_spans):
        best = None
        for i, p in enumerate(pred_spans):
            if taken[i] or p.label != g.label or not p.overlaps(g):
                continue
            if best is None or (p.start, p.end) < (pred_spans[best].start, pred_spans[best].end):
                best = i
        if best is not None:
            taken[best] = True
            pairs.append((g, pred_spans[best]))
    return pairs


def _accumulate(
    counts: dict[str, list[int]],
    gold_spans: Sequence[EntitySpan],
    pred_spans: Sequence[EntitySpan],
    pairs: Sequence[tuple[EntitySpan, EntitySpan]],
) -> None:
    # Spans within one sentence never share (start, end, label), so triples
    # are safe match keys.
    matched_gold = {(g.start, g.end, g.label) for g, _ in pairs}
    matched_pred = {(p.start, p.end, p.label) for _, p in pairs}
    for g, _ in pairs:
        counts.setdefault(g.label, [0, 0, 0])[0] += 1
    for p in pred_spans:
        if (p.start, p.end, p.label) not in matched_pred:
            counts.setdefault(p.label, [0, 0, 0])[1] += 1
    for g in gold_spans:
        if (g.start, g.end, g.label) not in matched_gold:
            counts.setdefault(g.label, [0, 0, 0])[2] += 1


def span_prf(gold: Corpus, pred: PredictionFile, mode: MatchMode) -> MetricReport:
    """Micro-averaged span precision/recall/F1 under a match mode.

    Gold sentences must be BIO2-valid; predicted tags are repaired before
    decoding (trainer noise is expected, gold noise is a data error).
    Matched TPs are attributed to the gold span's label, unmatched
    predictions to theirs, so per-label counts always sum to the totals.
    """
    check_alignment(gold, pred)
    per_label: dict[str, list[int]] = {}
    for gold_sentence, pred_sentence in zip(gold, pred.sentences):
        gold_spans = extract_spans(gold_sentence)
        pred_spans = decode_pred_spans(pred_sentence.pred)
        pairs = match_spans(gold_spans, pred_spans, mode)
        _accumulate(per_label, gold_spans, pred_spans, pairs)
    tp = sum(v[0] for v in per_label.values())
    fp = sum(v[1] for v in per_label.values())
    fn = sum(v[2] for v in per_label.values())
    precision, recall, f1 = prf(tp, fp, fn)
    label_scores = {
        label: Scores(*prf(v[0], v[1], v[2]), v[0], v[1], v[2])
        for label, v in sorted(per_label.items())
    }
    return MetricReport(precision, recall, f1, tp, fp, fn, label_scores)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Token-level gold-vs-predicted label counts; labels include O (last)."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # rows: gold label, columns: predicted

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def cell(self, gold_label: str, pred_label: str) -> int:
        return self.counts[self.labels.index(gold_label)][self.labels.index(pred_label)]

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "counts": [list(row) for row in self.counts]}

    def to_csv(self) -> str:
        header = "gold\\pred," + ",".join(self.labels)
        rows = [
            f"{label}," + ",".join(str(c) for c in row)
            for label, row in zip(self.labels, self.counts)
        ]
        return "\n".join([header, *rows]) + "\n"


def token_confusion(gold: Corpus, pred: PredictionFile) -> ConfusionMatrix:
    """Count tokens by (gold label part, predicted label part); row sums equal gold counts."""
    check_alignment(gold, pred)
    label_set: set[str] = set()
    cells: dict[tuple[str, str], int] = {}
    for gold_sentence, pred_sentence in zip(gold, pred.sentences):
        for token, pred_tag in zip(gold_sentence, pred_sentence.pred):
            g = token.label or "O"
            p = _kernels.tag_label(pred_tag) or "O"
            label_set.update((g, p))
            cells[(g, p)] = cells.get((g, p), 0) + 1
    labels = tuple(sorted(label_set - {"O"}) + ["O"])
    matrix = tuple(
        tuple(cells.get((g, p), 0) for p in labels)
        for g in labels
    )
    return ConfusionMatrix(labels, matrix)


def fn_rate(gold: Corpus, pred: PredictionFile, relevant_labels: set[str]) -> float:
    """Among gold tokens whose label is relevant, the fraction predicted as O."""
    if not relevant_labels:
        raise EmptyDenominator("relevant_labels is empty")
    check_alignment(gold, pred)
    relevant = 0
    missed = 0
    for gold_sentence, pred_sentence in zip(gold, pred.sentences):
        for token, pred_tag in zip(gold_sentence, pred_sentence.pred):
            if token.label in relevant_labels:
                relevant += 1
                if pred_tag == "O":
                    missed += 1
    if relevant == 0:
        raise EmptyDenominator("no gold tokens carry a relevant label")
    return missed / relevant


@dataclass(frozen=True, slots=True)
class Disagreement:
    sentence_index: int
    position: int
    token: str
    label_a: str
    label_b: str


@dataclass(frozen=True)
class DisagreementReport:
    items: tuple[Disagreement, ...]
    # per token text: counts of (label_a, label_b) pairs
    histogram: dict[str, dict[tuple[str, str], int]]

    def to_dict(self) -> dict:
        return {
            "disagreements": [
                {
                    "sentence_index": d.sentence_index,
                    "position": d.position,
                    "token": d.token,
                    "label_a": d.label_a,
                    "label_b": d.label_b,
                }
                for d in self.items
            ],
            "histogram": {
                token: [
                    {"label_a": a, "label_b": b, "count": count}
                    for (a, b), count in sorted(pairs.items())
                ]
                for token, pairs in sorted(self.histogram.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"


def disagreement_report(pred_a: PredictionFile, pred_b: PredictionFile) -> DisagreementReport:
    """Every token position where two models' predicted label parts differ.

    Both files must align to the same eval corpus (same tokens, same gold
    tags), which is what makes their predictions comparable.
    """
    if len(pred_a) != len(pred_b):
        raise AlignmentError(
            min(len(pred_a), len(pred_b)),
            None,
            f"sentence count mismatch: {len(pred_a)} vs {len(pred_b)}",
        )
    items: list[Disagreement] = []
    histogram: dict[str, dict[tuple[str, str], int]] = {}
    for index, (sa, sb) in enumerate(zip(pred_a.sentences, pred_b.sentences)):
        if sa.tokens != sb.tokens:
            raise AlignmentError(index, None, "token mismatch between prediction files")
        if sa.gold != sb.gold:
            raise AlignmentError(index, None, "gold-tag mismatch between prediction files")
        for position, token in enumerate(sa.tokens):
            label_a = _kernels.tag_label(sa.pred[position]) or "O"
            label_b = _kernels.tag_label(sb.pred[position]) or "O"
            if label_a != label_b:
                items.append(Disagreement(index, position, token, label_a, label_b))
                histogram.setdefault(token, {})
                pair = (label_a, label_b)
                histogram[token][pair] = histogram[token].get(pair, 0) + 1
    return DisagreementReport(tuple(items), histogram)
