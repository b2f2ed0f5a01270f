"""Exception types shared across the package."""


class TripletagError(Exception):
    """Base class for every error raised by tripletag."""


class DataError(TripletagError, ValueError):
    """Input data violates a precondition (maps to CLI exit code 2)."""


class EncodingError(DataError):
    """A triplet set cannot be expressed as a tag sequence."""


class OverlappingPrimarySpans(EncodingError):
    pass


class MultipleSecondarySpans(EncodingError):
    pass


class OffsetExceedsM(EncodingError):
    pass


class SpanOutOfBounds(EncodingError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DecodingError(DataError):
    pass


class MalformedSequence(DecodingError):
    pass


class WindowOutOfBounds(DecodingError):
    pass


class IndexOutOfRange(TripletagError, IndexError):
    pass


class TagWindowOutOfBounds(TripletagError, IndexError):
    pass


class InvalidSequence(DataError):
    pass


class TooManySequences(TripletagError):
    pass


class StaleTape(TripletagError, RuntimeError):
    """Backward was requested for a forward pass that no longer matches the parameters."""


class NoTrainableInstances(DataError):
    pass


class SentenceCountMismatch(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonContiguousSpan(ParseError):
    pass


class CheckpointError(DataError):
    pass
