"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` used by the CLI when
reporting failures on a single line.
"""


class LpkdvError(Exception):
    """Base class for all module errors."""

    code = "ERROR"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def one_line(self):
        """Render ``CODE key=value ... message`` on a single line."""
        parts = [self.code]
        for key in sorted(self.details):
            parts.append(f"{key}={self.details[key]}")
        msg = str(self)
        if msg:
            parts.append(msg.replace("\n", " "))
        return " ".join(parts)


class InvalidParams(LpkdvError, ValueError):
    code = "INVALID_PARAMS"


class SingularQuad(LpkdvError, ArithmeticError):
    """A corner solve hit a vanishing denominator.

    ``cell`` holds the absolute ``(n, m)`` of the lower-left quad corner when
    known.
    """

    code = "SINGULAR_QUAD"

    def __init__(self, message="", cell=None, **details):
        if cell is not None:
            details["cell"] = f"{cell[0]},{cell[1]}"
        super().__init__(message, **details)
        self.cell = cell


class OutOfWindow(LpkdvError, IndexError):
    code = "OUT_OF_WINDOW"


class InvalidSpec(LpkdvError, ValueError):
    code = "INVALID_SPEC"


class Degenerate(InvalidSpec):
    code = "DEGENERATE"


class DivergentDenominator(LpkdvError, ArithmeticError):
    code = "DIVERGENT_DENOMINATOR"


class InvalidW(LpkdvError, ValueError):
    code = "INVALID_W"


class RatioNotConstant(LpkdvError):
    code = "RATIO_NOT_CONSTANT"


class WindowTooSmall(LpkdvError, ValueError):
    code = "WINDOW_TOO_SMALL"


class NoDecay(LpkdvError):
    code = "NO_DECAY"


class PoleAtQ(LpkdvError, ArithmeticError):
    code = "POLE_AT_Q"


class NegativePQSum(LpkdvError, ValueError):
    code = "NEGATIVE_PQ_SUM"


class ZeroDifference(LpkdvError, ArithmeticError):
    code = "ZERO_DIFFERENCE"


class SingularStep(LpkdvError, ArithmeticError):
    code = "SINGULAR_STEP"


class NewtonFailure(LpkdvError):
    """Newton iteration did not converge; ``residual`` is the final max-norm."""

    code = "NEWTON_FAILURE"

    def __init__(self, message="", residual=float("nan"), **details):
        details["residual"] = f"{residual:.3e}"
        super().__init__(message, **details)
        self.residual = residual
