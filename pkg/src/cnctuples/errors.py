"""Exception hierarchy.

Every failure carries a short machine-readable ``reason`` so the command line
layer can map it to an exit code and a JSON payload without string parsing.
"""


class CncError(Exception):
    """Base class for all library errors."""

    reason = "Error"

    def __init__(self, message="", **details):
        super().__init__(message or self.reason)
        self.details = details

    detail = None

    def to_dict(self):
        out = {"reason": self.reason, "message": str(self)}
        if self.detail is not None:
            out["detail"] = self.detail
        out.update({k: _plain(v) for k, v in self.details.items()})
        return out


def _plain(value):
    if hasattr(value, "item"):
        return value.item()
    return value


class InputError(CncError):
    """Malformed or invalid input (maps to CLI exit code 2)."""

    reason = "InputError"


class NotHermitian(InputError):
    reason = "NotHermitian"


class NotPSD(InputError):
    reason = "NotPSD"


class DimensionMismatch(InputError):
    reason = "DimensionMismatch"


class ColumnCountMismatch(DimensionMismatch):
    reason = "ColumnCountMismatch"


class ShapeMismatch(DimensionMismatch):
    reason = "ShapeMismatch"


class GridMismatch(DimensionMismatch):
    reason = "GridMismatch"


class NonCommuting(InputError):
    reason = "NonCommuting"


class NotRowContraction(InputError):
    reason = "NotRowContraction"


class OutsideBall(InputError):
    reason = "OutsideBall"


class EmptySamples(InputError):
    reason = "EmptySamples"


class ParseError(InputError):
    reason = "ParseError"


class NotCNC(InputError):
    reason = "NotCNC"


class NotInner(InputError):
    reason = "NotInner"


class NotPurelyContractive(InputError):
    reason = "NotPurelyContractive"


class HasReducingPart(InputError):
    reason = "HasReducingPart"


class SizeOverflow(CncError):
    """Ambient dimension above the configured cap (CLI exit code 3)."""

    reason = "SizeOverflow"


class NoSolution(CncError):
    """A decision procedure found no witness (CLI exit code 1).

    ``detail`` refines the failure per instance, e.g. ``WeakFailure`` or
    ``ComplementMismatch``.
    """

    reason = "NoSolution"

    def __init__(self, message="", reason=None, **details):
        super().__init__(message, **details)
        self.detail = reason


class NumericalFailure(CncError):
    """A certificate that should hold analytically did not (exit code 1)."""

    reason = "NumericalFailure"


class NoConvergence(NumericalFailure):
    reason = "NoConvergence"


class SingularResolvent(NumericalFailure):
    reason = "SingularResolvent"


class OracleMismatch(NumericalFailure):
    reason = "OracleMismatch"


class ResidualTooLarge(NumericalFailure):
    reason = "ResidualTooLarge"


class GramMismatch(NumericalFailure):
    reason = "GramMismatch"


class SpanDeficient(NumericalFailure):
    reason = "SpanDeficient"


class IntertwiningFailure(NumericalFailure):
    reason = "IntertwiningFailure"


class CertificationFailure(NumericalFailure):
    reason = "CertificationFailure"
