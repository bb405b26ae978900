"""Exception and warning types shared across the toolkit.

Validation problems (bad data semantics) derive from :class:`ValidationError`;
problems reading input bytes derive from :class:`InputError`. The CLI maps the
former to exit code 1 and the latter to exit code 2.
"""


class CynerkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CynerkitError):
    """Input is structurally readable but violates a contract."""


class InputError(CynerkitError):
    """Input bytes could not be read or parsed at all."""


class InvalidTagSequence(ValidationError):
    """A sentence failed BIO2 validation where validity is required."""

    def __init__(self, position: int, message: str | None = None):
        self.position = position
        super().__init__(message or f"invalid BIO2 tag at position {position}; repair first")


class SchemaViolation(ValidationError):
    """A tag's label part is not a member of the corpus schema."""


class SchemaMismatch(ValidationError):
    """A unification map was applied to a corpus from a different dataset."""


class EmptyDistribution(ValidationError):
    """A relative-frequency distribution was requested over zero observations."""


class MissingAnnotation(ValidationError):
    """A feature distribution needs annotations the corpus does not carry."""


class EmptyFile(InputError):
    """A cleaning routine received no input lines."""


class ParseError(InputError):
    """Malformed input file.

    Carries a 1-based line number for line-oriented formats, or a byte
    offset for the token-annotation (JSON) format.
    """

    def __init__(self, message: str, *, line_number: int | None = None, offset: int | None = None):
        self.line_number = line_number
        self.offset = offset
        where = ""
        if line_number is not None:
            where = f" (line {line_number})"
        elif offset is not None:
            where = f" (byte offset {offset})"
        super().__init__(message + where)


class AlignmentError(ValidationError):
    """Prediction file does not align token-for-token with the gold corpus."""

    def __init__(self, sentence_index: int, position: int | None, message: str):
        self.sentence_index = sentence_index
        self.position = position
        at = f"sentence {sentence_index}" + ("" if position is None else f", position {position}")
        super().__init__(f"{message} ({at})")


class EmptyDenominator(ValidationError):
    """A rate was requested over an empty set of relevant tokens."""


class DegenerateInput(ValidationError):
    """Correlation input has zero variance or too few points."""


class MissingPrediction(ValidationError):
    """No prediction file exists for a configured train/eval pairing."""

    def __init__(self, train_name: str, eval_name: str, path: str):
        self.pairing = (train_name, eval_name)
        super().__init__(f"missing prediction file for {train_name} -> {eval_name}: {path}")


class ConfigError(ValidationError):
    """Experiment configuration is incomplete or inconsistent."""


class EmptyTrainAfterDedup(UserWarning):
    """Overlap removal left the training split empty."""
