"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (the class name) so the
CLI can print ``error[<code>]: <message>`` without a traceback.
"""
from __future__ import annotations


class EvalRankError(Exception):
    """Base class for all user-facing errors."""

    exit_code = 1

    @property
    def code(self) -> str:
        return type(self).__name__


# taxonomy
class TaxonomyError(EvalRankError):
    pass


class CycleDetected(TaxonomyError):
    pass


class MultipleRoots(TaxonomyError):
    pass


class MissingRoot(TaxonomyError):
    pass


class DanglingParent(TaxonomyError):
    pass


class LevelInversion(TaxonomyError):
    pass


class DuplicateNode(TaxonomyError):
    pass


class UnknownNode(EvalRankError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


# corpus
class ParseError(EvalRankError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaError(EvalRankError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class NonPositiveDim(SchemaError):
    pass


class ReferentialError(EvalRankError):
    def __init__(self, message: str, source: str, target: str):
        super().__init__(f"{message}: {source!r} -> {target!r}")
        self.source = source
        self.target = target


class TemporalError(EvalRankError):
    pass


class DuplicateIntroducer(EvalRankError):
    pass


class UnknownAchievement(EvalRankError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class UnknownInstitution(EvalRankError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


# relations / evolution
class NotOriented(EvalRankError, ValueError):
    pass


class StepOutOfRange(EvalRankError, IndexError):
    pass


class CoherenceError(EvalRankError):
    """Inputs derived from different corpora were combined."""

    exit_code = 2


class GraphCorpusMismatch(CoherenceError):
    pass


# pruning / ranking / baselines
class ConfigError(EvalRankError, ValueError):
    pass


class NoContributors(EvalRankError, ValueError):
    pass


class UndefinedDenominator(EvalRankError, ZeroDivisionError):
    pass


# command line
class UsageError(EvalRankError):
    pass
