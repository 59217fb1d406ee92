"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) so the CLI can emit a
machine-readable failure.
"""


class ChqError(Exception):
    def __str__(self) -> str:
        # KeyError would otherwise repr() its message
        return str(self.args[0]) if len(self.args) == 1 else super().__str__()

    @property
    def code(self) -> str:
        return type(self).__name__


# hilbert
class DimensionMismatch(ChqError, ValueError):
    pass


class DegenerateSpan(ChqError, ValueError):
    pass


class DimensionCapExceeded(ChqError, ValueError):
    pass


class NotAProjector(ChqError, ValueError):
    pass


# framework
class InvalidDecomposition(ChqError, ValueError):
    pass


class NonUnitaryStep(ChqError, ValueError):
    pass


class UnnormalizedInitialState(ChqError, ValueError):
    pass


class RaggedTree(ChqError, ValueError):
    pass


class UnknownHistory(ChqError, KeyError):
    pass


class InconsistentFramework(ChqError):
    pass


class NormalizationAnomaly(ChqError):
    pass


# counterfactual
class SingleFrameworkViolation(ChqError):
    pass


class PivotNotAncestor(ChqError, ValueError):
    pass


class MalformedAntecedent(ChqError, ValueError):
    pass


class OutcomesNotAntichain(ChqError, ValueError):
    pass


class ZeroWeightAntecedent(ChqError):
    pass


class ZeroWeightPivot(ChqError):
    pass


class UnknownNode(ChqError, KeyError):
    pass


class AmbiguousNode(ChqError, KeyError):
    pass


# scenarios / search / io
class InvalidProbability(ChqError, ValueError):
    pass


class InvalidParams(ChqError, ValueError):
    pass


class CapExceeded(ChqError):
    pass


class ScenarioFileError(ChqError, ValueError):
    pass
