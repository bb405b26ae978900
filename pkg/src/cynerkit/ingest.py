"""Raw dataset ingestion and deterministic cleaning.

Each of the four supported datasets ships in its own format; the cleaners
here normalize them to in-memory corpora bit-reproducibly. The toolkit
ships no corpus data (licensing), only descriptors; dataset files are
user-supplied paths.

Cleaned output format (the golden contract): one "token<space>tag" per
line, one blank line between sentences, UTF-8, LF line endings.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from ._kernels import is_wellformed, tag_label
from .corpus import Corpus, Sentence, Token, repair_bio2
from .errors import EmptyFile, ParseError

DATASET_NAMES = ("APTNER", "DNRTI", "ATTACKER", "CYNER")


@dataclass(frozen=True, slots=True)
class RawLine:
    """One whitespace-split input line; blank lines keep an empty fields list."""

    fields: tuple[str, ...]
    line_number: int
    source_file: str = "<memory>"


@dataclass(frozen=True)
class DatasetDescriptor:
    """Built-in facts about one dataset: label inventory, format, size.

    ``declared_size`` is the published token count, used for sanity checks
    when the real files are supplied. The ATTACKER inventory lists only the
    labels the built-in unification consumes; its loader never filters by
    label set, so completeness is not required there.
    """

    name: str
    official_labels: frozenset[str]
    format: str  # "conll" or "json-tokens"
    declared_size: int

    def __post_init__(self):
        object.__setattr__(self, "official_labels", frozenset(self.official_labels))
        if self.format not in ("conll", "json-tokens"):
            raise ValueError(f"unknown format {self.format!r}")


_APTNER_LABELS = frozenset(
    {
        "APT", "SECTEAM", "IDTY", "OS", "EMAIL", "LOC", "TIME", "IP", "DOM", "URL",
        "PROT", "FILE", "TOOL", "MD5", "SHA1", "SHA2", "MAL", "ENCR", "VULNAME",
        "VULID", "ACT",
    }
)

_DNRTI_LABELS = frozenset(
    {
        "HackOrg", "OffAct", "SamFile", "SecTeam", "Tool", "Time", "Purp", "Area",
        "Idus", "Org", "Way", "Exp", "Features",
    }
)

_ATTACKER_LABELS = frozenset(
    {
        "THREAT_ACTOR", "GENERAL_IDENTITY", "INFRASTRUCTURE", "GENERAL_TOOL",
        "ATTACK_TOOL", "VULNERABILITY", "MALWARE",
    }
)

_CYNER_LABELS = frozenset({"Organization", "System", "Vulnerability", "Malware", "Indicator"})


def builtin_descriptors() -> dict[str, DatasetDescriptor]:
    return {
        "APTNER": DatasetDescriptor("APTNER", _APTNER_LABELS, "conll", 260_134),
        "DNRTI": DatasetDescriptor("DNRTI", _DNRTI_LABELS, "conll", 175_220),
        "ATTACKER": DatasetDescriptor("ATTACKER", _ATTACKER_LABELS, "json-tokens", 78_987),
        "CYNER": DatasetDescriptor("CYNER", _CYNER_LABELS, "conll", 106_991),
    }


def split_lines(text: str, source_file: str = "<memory>") -> list[RawLine]:
    """Split raw text into RawLines; any run of whitespace is one separator."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [
        RawLine(tuple(line.split()), number, source_file)
        for number, line in enumerate(lines, start=1)
    ]


def read_raw_file(path: str | Path) -> list[RawLine]:
    """Read a line-oriented file; invalid UTF-8 is a hard error, never replaced."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: invalid UTF-8 ({exc.reason})", offset=exc.start) from None
    return split_lines(text, source_file=str(path))


def _finish_sentence(tokens: list[Token], sentences: list[Sentence]) -> None:
    if tokens:
        sentences.append(repair_bio2(Sentence(tuple(tokens))))
        tokens.clear()


def clean_aptner(
    lines: Sequence[RawLine],
    official_labels: Iterable[str] = _APTNER_LABELS,
    split: str = "train",
) -> Corpus:
    """Clean a raw APTNER split.

    Rules, applied line by line:
      - sentences break exactly after the literal line ". O"; the original
        blank-line breaks are ignored (the ". O" token itself is kept as the
        sentence-final token);
      - a line containing only "O" is discarded;
      - any other single-field line is kept with tag "O";
      - a line with >= 3 fields is corrupt: first field kept, tag "O";
      - a two-field line whose tag is not "O" or B-/I- over an official
        label has its tag replaced by "O".

    Output sentences are BIO2-repaired.
    """
    if not lines:
        raise EmptyFile("clean_aptner: no input lines")
    official = frozenset(official_labels)
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    for line in lines:
        n = len(line.fields)
        if n == 0:
            continue
        if n == 1:
            if line.fields[0] == "O":
                continue
            tokens.append(Token(line.fields[0], "O"))
            continue
        if n >= 3:
            tokens.append(Token(line.fields[0], "O"))
            continue
        text, tag = line.fields
        if tag != "O" and (not is_wellformed(tag) or tag_label(tag) not in official):
            tag = "O"
        tokens.append(Token(text, tag))
        if text == "." and line.fields[1] == "O":
            _finish_sentence(tokens, sentences)
    _finish_sentence(tokens, sentences)
    return Corpus("APTNER", split, official, tuple(sentences))


def clean_dnrti(lines: Sequence[RawLine], split: str = "train") -> Corpus:
    """Clean a raw DNRTI split.

    Blank lines separate sentences; "O"-only lines are discarded; any other
    single-field line is kept with tag "O"; lines with >= 3 fields keep the
    first field with tag "O". Two-field tags are kept verbatim when
    well-formed, otherwise replaced by "O". Output sentences are repaired.
    """
    if not lines:
        raise EmptyFile("clean_dnrti: no input lines")
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    for line in lines:
        n = len(line.fields)
        if n == 0:
            _finish_sentence(tokens, sentences)
            continue
        if n == 1:
            if line.fields[0] == "O":
                continue
            tokens.append(Token(line.fields[0], "O"))
            continue
        if n >= 3:
            tokens.append(Token(line.fields[0], "O"))
            continue
        text, tag = line.fields
        if not is_wellformed(tag):
            tag = "O"
        tokens.append(Token(text, tag))
    _finish_sentence(tokens, sentences)
    schema = frozenset(t.label for s in sentences for t in s if t.label is not None)
    return Corpus("DNRTI", split, schema, tuple(sentences))


@dataclass(frozen=True)
class AttackerFieldMap:
    """Where to find sentences/tokens/tags in the ATTACKER annotation file.

    The published field names vary between releases, so the loader is
    configurable. With ``sentence_list_key`` unset the document root must
    be the sentence list itself.
    """

    tokens_key: str = "tokens"
    tags_key: str = "tags"
    sentence_list_key: str | None = None


def parse_attacker(
    json_bytes: bytes,
    field_map: AttackerFieldMap = AttackerFieldMap(),
    split: str = "train",
) -> Corpus:
    """Parse the ATTACKER token-annotation file.

    Tokens whose text is the explicit single space " " are skipped entirely,
    together with their tags; everything else is preserved in order. The
    result is NOT BIO2-repaired: skipping may orphan an I- tag, and repair
    happens during unification.
    """
    try:
        text = json_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"invalid UTF-8 ({exc.reason})", offset=exc.start) from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        byte_offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"invalid JSON: {exc.msg}", offset=byte_offset) from None

    if field_map.sentence_list_key is not None:
        if not isinstance(document, dict) or field_map.sentence_list_key not in document:
            raise ParseError(f"document has no {field_map.sentence_list_key!r} key")
        entries = document[field_map.sentence_list_key]
    else:
        entries = document
    if not isinstance(entries, list):
        raise ParseError("expected a list of sentence objects")

    sentences: list[Sentence] = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ParseError(f"sentence {index} is not an object")
        try:
            raw_tokens = entry[field_map.tokens_key]
            raw_tags = entry[field_map.tags_key]
        except KeyError as exc:
            raise ParseError(f"sentence {index} lacks field {exc.args[0]!r}") from None
        if len(raw_tokens) != len(raw_tags):
            raise ParseError(f"sentence {index}: {len(raw_tokens)} tokens vs {len(raw_tags)} tags")
        tokens = []
        for text_value, tag in zip(raw_tokens, raw_tags):
            if text_value == " ":
                continue
            if not isinstance(text_value, str) or not isinstance(tag, str):
                raise ParseError(f"sentence {index}: tokens and tags must be strings")
            if not is_wellformed(tag):
                raise ParseError(f"sentence {index}: malformed tag {tag!r}")
            tokens.append(Token(text_value, tag))
        if tokens:
            sentences.append(Sentence(tuple(tokens)))
    schema = frozenset(t.label for s in sentences for t in s if t.label is not None)
    return Corpus("ATTACKER", split, schema, tuple(sentences))


def parse_conll(
    lines: Sequence[RawLine],
    token_col: int = 0,
    tag_col: int = 1,
    pos_col: int | None = None,
    name: str = "CYNER",
    split: str = "train",
) -> Corpus:
    """Generic CoNLL loader: used for CYNER and for re-reading cleaned files.

    Blank lines separate sentences. Malformed tags and short lines are hard
    parse errors carrying the 1-based line number.
    """
    needed = max(token_col, tag_col, pos_col if pos_col is not None else 0) + 1
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    for line in lines:
        if not line.fields:
            if tokens:
                sentences.append(Sentence(tuple(tokens)))
                tokens = []
            continue
        if len(line.fields) < needed:
            raise ParseError(
                f"{line.source_file}: expected at least {needed} columns, got {len(line.fields)}",
                line_number=line.line_number,
            )
        tag = line.fields[tag_col]
        if not is_wellformed(tag):
            raise ParseError(
                f"{line.source_file}: malformed BIO2 tag {tag!r}", line_number=line.line_number
            )
        pos = line.fields[pos_col] if pos_col is not None else None
        tokens.append(Token(line.fields[token_col], tag, pos))
    if tokens:
        sentences.append(Sentence(tuple(tokens)))
    schema = frozenset(t.label for s in sentences for t in s if t.label is not None)
    return Corpus(name, split, schema, tuple(sentences))


def write_conll(corpus: Corpus) -> str:
    """Render a corpus in the golden cleaned format ("token tag", LF, blank line between sentences)."""
    blocks = ["\n".join(f"{t.text} {t.tag}" for t in sentence) for sentence in corpus]
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def write_conll_file(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_bytes(write_conll(corpus).encode("utf-8"))


def read_conll_file(
    path: str | Path,
    name: str,
    split: str,
    token_col: int = 0,
    tag_col: int = 1,
    pos_col: int | None = None,
) -> Corpus:
    return parse_conll(read_raw_file(path), token_col, tag_col, pos_col, name=name, split=split)
