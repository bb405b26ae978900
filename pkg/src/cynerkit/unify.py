"""Coarse-grained label unification with drop-to-O semantics.

Source labels map onto the four unified types Organization, System,
Vulnerability and Malware; anything unmapped becomes O. Mapping acts on the
label part only, carrying B/I prefixes over and repairing afterwards, so a
span whose head maps to O never leaves an orphan I- behind.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from ._kernels import tag_label
from .corpus import Corpus, Sentence, Token, repair_bio2
from .errors import ParseError, SchemaMismatch

UNIFIED_LABELS = ("Organization", "System", "Vulnerability", "Malware")

# Accepts both -ization and -isation spellings on input; emits the canonical form.
_CANONICAL = {label.lower(): label for label in UNIFIED_LABELS}
_CANONICAL["organisation"] = "Organization"


def canonical_unified_label(raw: str) -> str | None:
    """Canonical spelling of a unified label, or None if it is not one."""
    return _CANONICAL.get(raw.strip().lower())


@dataclass(frozen=True)
class UnificationMap:
    """Partial mapping from one dataset's label inventory to the unified types.

    Source labels are matched case-sensitively; any label absent from
    ``entries`` implicitly maps to O.
    """

    dataset: str
    entries: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        for source, unified in self.entries.items():
            if unified not in UNIFIED_LABELS:
                raise ValueError(f"{source!r} maps to {unified!r}, not a unified label")

    def target(self, source_label: str) -> str | None:
        """Unified label for a source label, or None for drop-to-O."""
        return self.entries.get(source_label)


def builtin_maps() -> list[UnificationMap]:
    """The four built-in dataset maps.

    CYNER keeps its four unified-type labels as-is and drops Indicator
    (extractable with regular expressions, so excluded from learning).
    """
    return [
        UnificationMap(
            "APTNER",
            {
                "APT": "Organization",
                "SECTEAM": "Organization",
                "OS": "System",
                "VULNAME": "Vulnerability",
                "MAL": "Malware",
            },
        ),
        UnificationMap(
            "DNRTI",
            {
                "HackOrg": "Organization",
                "SecTeam": "Organization",
                "org": "Organization",
                "Tool": "System",
                "Way": "Vulnerability",
                "exp": "Vulnerability",
                "SamFile": "Malware",
            },
        ),
        UnificationMap(
            "ATTACKER",
            {
                "THREAT_ACTOR": "Organization",
                "GENERAL_IDENTITY": "Organization",
                "INFRASTRUCTURE": "System",
                "GENERAL_TOOL": "System",
                "ATTACK_TOOL": "System",
                "VULNERABILITY": "Vulnerability",
                "MALWARE": "Malware",
            },
        ),
        UnificationMap(
            "CYNER",
            {
                "Organization": "Organization",
                "System": "System",
                "Vulnerability": "Vulnerability",
                "Malware": "Malware",
            },
        ),
    ]


def builtin_map(dataset: str) -> UnificationMap:
    for m in builtin_maps():
        if m.dataset == dataset:
            return m
    raise KeyError(f"no built-in unification map for {dataset!r}")


def _unify_sentence(sentence: Sentence, mapping: UnificationMap) -> Sentence:
    tokens = []
    for token in sentence:
        label = tag_label(token.tag)
        if label is None:
            tokens.append(token)
            continue
        unified = mapping.target(label)
        if unified is None:
            tokens.append(Token(token.text, "O", token.pos))
        else:
            tokens.append(Token(token.text, token.tag[:2] + unified, token.pos))
    return repair_bio2(Sentence(tuple(tokens)))


def unify_corpus(corpus: Corpus, mapping: UnificationMap) -> Corpus:
    """Apply a unification map to every sentence, then repair BIO2.

    Token texts are untouched; the output schema is exactly the subset of
    the four unified labels that actually occurs.
    """
    if corpus.name != mapping.dataset:
        raise SchemaMismatch(f"map is for {mapping.dataset!r}, corpus is {corpus.name!r}")
    sentences = tuple(_unify_sentence(s, mapping) for s in corpus)
    schema = frozenset(t.label for s in sentences for t in s if t.label is not None)
    return Corpus(corpus.name, corpus.split, schema, sentences)


def parse_mapping_file(text: str, source: str = "<memory>") -> dict[str, UnificationMap]:
    """Parse a plain-text mapping file into per-dataset maps.

    Format: one "<dataset>TAB<source_label>TAB<unified_label>" per line,
    "#" starts a comment, UTF-8. Unified labels accept both -ization and
    -isation spellings in any casing.
    """
    entries: dict[str, dict[str, str]] = {}
    for number, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(
                f"{source}: expected 3 tab-separated fields, got {len(parts)}",
                line_number=number,
            )
        dataset, source_label, raw_unified = (p.strip() for p in parts)
        if not dataset or not source_label:
            raise ParseError(f"{source}: empty dataset or source label", line_number=number)
        unified = canonical_unified_label(raw_unified)
        if unified is None:
            raise ParseError(
                f"{source}: {raw_unified!r} is not a unified label "
                f"(expected one of {', '.join(UNIFIED_LABELS)})",
                line_number=number,
            )
        per_dataset = entries.setdefault(dataset, {})
        if per_dataset.get(source_label, unified) != unified:
            raise ParseError(
                f"{source}: conflicting targets for {dataset}/{source_label}",
                line_number=number,
            )
        per_dataset[source_label] = unified
    return {dataset: UnificationMap(dataset, mapping) for dataset, mapping in entries.items()}


def load_mapping_file(path: str | Path) -> dict[str, UnificationMap]:
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: invalid UTF-8 ({exc.reason})", offset=exc.start) from None
    return parse_mapping_file(text, source=str(path))


def maps_for(
    datasets: Iterable[str],
    mapping_file: str | Path | None = None,
) -> dict[str, UnificationMap]:
    """Resolve one map per dataset: from a mapping file when given, else built-ins."""
    if mapping_file is not None:
        loaded = load_mapping_file(mapping_file)
        missing = [d for d in datasets if d not in loaded]
        if missing:
            raise ParseError(f"{mapping_file}: no mapping entries for {', '.join(missing)}")
        return {d: loaded[d] for d in datasets}
    return {d: builtin_map(d) for d in datasets}
