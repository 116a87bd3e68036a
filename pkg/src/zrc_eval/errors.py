"""Exception and warning types shared across the toolkit.

Parse-time errors carry ``path`` and ``line_no`` so the CLI can point at the
offending line; metric-time errors carry whatever identifies the bad input.
"""


class ZrcError(Exception):
    """Base class for all toolkit errors."""


class ZrcWarning(UserWarning):
    """Base class for non-fatal conditions surfaced in reports."""


class ParseError(ZrcError):
    """A file failed to parse; knows where."""

    def __init__(self, message, path=None, line_no=None):
        self.path = path
        self.line_no = line_no
        super().__init__(message)

    def __str__(self):
        where = ""
        if self.path is not None:
            where = f"{self.path}:"
            if self.line_no is not None:
                where += f"{self.line_no}:"
            where += " "
        return where + super().__str__()


class MalformedLine(ParseError):
    pass


class OverlapError(ParseError):
    def __init__(self, utterance_id, line_no, path=None):
        self.utterance_id = utterance_id
        super().__init__(
            f"token in utterance {utterance_id!r} starts before the previous one ends",
            path=path,
            line_no=line_no,
        )


class BoundaryMismatch(ParseError):
    def __init__(self, utterance_id, edge, path=None, line_no=None):
        self.utterance_id = utterance_id
        self.edge = edge
        super().__init__(
            f"word edge {edge:.4f}s in utterance {utterance_id!r} does not land on a phone boundary",
            path=path,
            line_no=line_no,
        )


class DimMismatch(ParseError):
    pass


class NonMonotonicTime(ParseError):
    pass


class EmptyFile(ParseError):
    pass


class UnknownUtterance(ParseError):
    pass


class EmptyClass(ParseError):
    pass


class DuplicateId(ParseError):
    pass


class EmptySlice(ZrcError):
    """No frame timestamp falls inside the requested interval."""


class NegativeEntry(ZrcError):
    """A probability vector contains a negative entry."""


class EmptySequence(ZrcError):
    """An operation needs at least one frame."""


class DegenerateCell(ZrcError):
    """Dropping unusable items left a discrimination cell below minimum size."""


class NoCells(ZrcError):
    """No scorable discrimination cell was found."""


class MissingFeatureFile(ZrcError):
    def __init__(self, utterance_id):
        self.utterance_id = utterance_id
        super().__init__(f"no feature file for utterance {utterance_id!r}")


class NoValidPairs(ZrcError):
    """Every candidate fragment pair was skipped."""


class EmptyDiscoverablePart(ZrcError):
    """The corpus contains no repeated 3..20-gram, so coverage is undefined."""


class EmptyPairSet(ZrcError):
    """A pair set needed by grouping precision/recall is empty."""


class MissingScore(ZrcError):
    def __init__(self, item_id):
        self.item_id = item_id
        super().__init__(f"no score for item {item_id!r}")


class MissingWord(ZrcError):
    def __init__(self, word):
        self.word = word
        super().__init__(f"no embedded token for word {word!r}")


class ConstantInput(ZrcError):
    """Rank correlation is undefined for a constant sequence."""


class LengthMismatch(ZrcError):
    pass


class EmptyInput(ZrcError):
    pass


class ZeroDuration(ZrcError):
    pass


class MissingDuration(ZrcError):
    def __init__(self, utterance_id):
        self.utterance_id = utterance_id
        super().__init__(f"no duration for utterance {utterance_id!r}")


class DuplicateMetric(ZrcError):
    def __init__(self, task, metric):
        self.task = task
        self.metric = metric
        super().__init__(f"duplicate metric {task}.{metric}")


class InvalidSpec(ZrcError):
    """A synthetic-corpus spec violates its constraints."""
