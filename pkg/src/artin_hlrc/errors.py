"""Exception hierarchy shared by every module.

Each exception carries an ``exit_code`` so the command-line front end can map
failures to stable process exit statuses without inspecting messages.
"""


class HLRCError(Exception):
    exit_code = 1


class SpecError(HLRCError):
    exit_code = 3


class InvalidCharacteristic(SpecError):
    pass


class UnsupportedDegree(SpecError):
    pass


class DuplicateNode(HLRCError):
    pass


class InconsistentSamples(HLRCError):
    exit_code = 5


class DegenerateFiber(SpecError):
    pass


class InvalidCodeSpec(SpecError):
    pass


class EmptyEvaluationSet(SpecError):
    pass


class DimensionMismatch(SpecError):
    pass


class EmptyCode(SpecError):
    pass


class EnumerationBudgetExceeded(HLRCError):
    exit_code = 6


class RecoveryError(HLRCError):
    exit_code = 5


class InsufficientLowerData(RecoveryError):
    pass


class InsufficientMiddleData(RecoveryError):
    pass


class AmbiguousErasurePattern(RecoveryError):
    pass


class UnrecoverablePosition(RecoveryError):
    pass


class TooFewNodes(SpecError):
    pass


class InvalidScenario(SpecError):
    pass


class MalformedInput(SpecError):
    """An input file parsed as JSON but does not have the expected shape."""
