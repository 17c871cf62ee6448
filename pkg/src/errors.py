"""Exception hierarchy for the topic fusion classifier.

Every error carries the process exit code the CLI reports for it:
2 for invalid inputs, 3 for runtime and numeric failures.
"""

from __future__ import annotations


class TopicFusionError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class InputValidationError(TopicFusionError):
    """Input files, labels or arguments failed validation."""

    exit_code = 2


class NumericError(TopicFusionError):
    """A numeric kernel received inconsistent or non-finite data."""

    exit_code = 3


class ExportError(TopicFusionError):
    """Writing an artifact to disk failed."""

    exit_code = 3


# --- input validation -------------------------------------------------------


class InvalidParameterError(InputValidationError, ValueError):
    def __init__(self, name: str, value: object, expected: str) -> None:
        super().__init__(f"{name}={value!r} is invalid; expected {expected}")
        self.name = name
        self.value = value


class MissingFileError(InputValidationError):
    def __init__(self, path: object) -> None:
        super().__init__(f"File not found: {path}")
        self.path = path


class RulebookParseError(InputValidationError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"Rulebook line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateTopicIdError(InputValidationError):
    def __init__(self, topic_id: int) -> None:
        super().__init__(f"Duplicate topic id {topic_id}")
        self.topic_id = topic_id


class BadPatternError(InputValidationError):
    def __init__(self, topic_id: int, reason: str) -> None:
        super().__init__(f"Topic {topic_id} has an invalid pattern: {reason}")
        self.topic_id = topic_id
        self.reason = reason


class WrongRuleCountError(InputValidationError):
    def __init__(self, found: int, expected: int = 27) -> None:
        super().__init__(f"Expected {expected} rules, found {found}")
        self.found = found
        self.expected = expected


class UnknownLabelError(InputValidationError):
    def __init__(self, name: str) -> None:
        super().__init__(f"Unknown topic label: {name!r}")
        self.name = name


class MalformedLineError(InputValidationError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"Malformed record on line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateDocIdError(InputValidationError):
    def __init__(self, doc_id: str) -> None:
        super().__init__(f"Duplicate document id {doc_id!r}")
        self.doc_id = doc_id


class UnknownVariantError(InputValidationError):
    def __init__(self, variant: object) -> None:
        super().__init__(f"Unknown model variant {variant!r}; expected 1..5")
        self.variant = variant


class EmptyCorpusError(InputValidationError):
    def __init__(self) -> None:
        super().__init__("Cannot build a vocabulary from an empty corpus")


class EmptyDatasetError(InputValidationError):
    def __init__(self) -> None:
        super().__init__("Dataset is empty")


class TooFewSamplesError(InputValidationError):
    def __init__(self, found: int, needed: int) -> None:
        super().__init__(f"Need at least {needed} training samples, found {found}")
        self.found = found
        self.needed = needed


class DimensionMismatchError(InputValidationError):
    def __init__(self, expected: int, found: int, where: str = "") -> None:
        suffix = f" ({where})" if where else ""
        super().__init__(f"Expected dimension {expected}, found {found}{suffix}")
        self.expected = expected
        self.found = found


class UnknownDocIdError(InputValidationError):
    def __init__(self, doc_id: str) -> None:
        super().__init__(f"No precomputed vector for document {doc_id!r}")
        self.doc_id = doc_id


class LengthMismatchError(InputValidationError):
    def __init__(self, left: int, right: int) -> None:
        super().__init__(f"Aligned lists differ in length: {left} != {right}")
        self.left = left
        self.right = right


class InconsistentTestSetsError(InputValidationError):
    def __init__(self, variants: list[int]) -> None:
        super().__init__(f"Variants {variants} were evaluated on different test sets")
        self.variants = variants


# --- numeric ----------------------------------------------------------------


class ShapeMismatchError(NumericError):
    pass


class IdOutOfRangeError(NumericError):
    def __init__(self, index: int, size: int) -> None:
        super().__init__(f"Index {index} outside [0, {size})")
        self.index = index
        self.size = size


class AllPositionsMaskedError(NumericError):
    def __init__(self) -> None:
        super().__init__("Attention mask excludes every key position")


class NonFiniteValueError(NumericError):
    pass


class NonFiniteLossError(NumericError):
    def __init__(self, epoch: int, batch: int) -> None:
        super().__init__(f"Non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class SequenceTooLongError(NumericError):
    def __init__(self, length: int, max_len: int) -> None:
        super().__init__(f"Sequence of {length} tokens exceeds max_seq_len={max_len}")
        self.length = length
        self.max_len = max_len


class ZeroTotalSupportError(NumericError):
    def __init__(self) -> None:
        super().__init__("No class has gold support; weighted metrics are undefined")


class ZeroBaselineError(NumericError, ZeroDivisionError):
    def __init__(self) -> None:
        super().__init__("Relative improvement over a zero baseline score is undefined")


class CheckpointFormatError(NumericError):
    pass
