"""Exception hierarchy.

Every error carries the CLI exit code of its family: input problems exit 2,
configuration problems 3, and analysis failures 1.
"""

from __future__ import annotations


class TexturalyzeError(Exception):
    exit_code = 1

    def __init__(self, message, *, source=None, row=None, column=None):
        self.source = source
        self.row = row
        self.column = column
        where = []
        if source is not None:
            where.append(f"file {source}")
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        self.message = message
        super().__init__(message)


class InputError(TexturalyzeError, ValueError):
    exit_code = 2


class ConfigError(TexturalyzeError, ValueError):
    exit_code = 3


class AnalysisError(TexturalyzeError, ArithmeticError):
    exit_code = 1


# ingest
class MalformedHeader(InputError):
    pass


class NonMonotonicTime(InputError):
    pass


class NonNumericCell(InputError):
    pass


class TooFewRows(InputError):
    pass


class DuplicatePair(InputError):
    pass


class OutOfRangeLikert(InputError):
    pass


class UnknownCataAttribute(InputError):
    pass


class MissingColumn(InputError):
    pass


class NoInput(InputError):
    pass


# tpa
class CycleCountMismatch(AnalysisError):
    pass


class DurationMismatch(AnalysisError):
    pass


class DegenerateCycle(AnalysisError):
    pass


class NonPositivePeak(AnalysisError):
    pass


class InsufficientSamples(AnalysisError):
    pass


class NoTimeOverlap(AnalysisError):
    pass


# survey aggregation
class EmptyTable(AnalysisError):
    pass


class UnknownQuestion(AnalysisError):
    pass


class ZeroVariance(AnalysisError):
    pass


# correspondence analysis
class DegenerateTable(AnalysisError):
    pass


# inference
class LengthMismatch(AnalysisError):
    pass


class TooFewPoints(AnalysisError):
    pass


class NonConvergence(AnalysisError):
    pass


class CollinearPredictors(AnalysisError):
    pass


class SingularDesign(AnalysisError):
    pass


class UnfittedModel(AnalysisError):
    pass
