"""Exception hierarchy shared by every solver component."""

from typing import Optional


class HelmholtzError(Exception):
    """Base class for all domain errors raised by the solver."""


class MeshError(HelmholtzError):
    pass


class MeshValidationError(MeshError):
    pass


class MeshFormatError(MeshError):
    """Malformed mesh text file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class NumericalError(HelmholtzError):
    pass


class SingularSystemError(NumericalError):
    def __init__(self, message: str, context: str = ""):
        self.context = context
        super().__init__(f"{message} ({context})" if context else message)


class BubbleResonanceError(NumericalError):
    """An element sub-problem hit a discrete eigenvalue of the sub-mesh."""

    def __init__(self, element: Optional[int], ch: float, detail: str = ""):
        self.element = element
        self.ch = ch
        where = f"element {element}" if element is not None else "element"
        message = (
            f"bubble sub-problem is singular on {where} at c*h_char={ch:.6g}; "
            "change c or N_s slightly"
        )
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class ResonantParameterError(NumericalError):
    """A closed-form coefficient sits on one of its poles."""


class ProblemSizeError(NumericalError):
    pass


class MuTableError(HelmholtzError):
    pass


class OutOfCalibrationError(HelmholtzError):
    """Lookup key lies above the last calibrated row of a μ table."""

    def __init__(self, key: float, clamped_mu: float, n_s: int, kind: str):
        self.key = key
        self.clamped_mu = clamped_mu
        self.n_s = n_s
        self.kind = kind
        super().__init__(
            f"key {key:.6g} is above the calibrated range of the {kind} mu table; "
            f"clamping would use mu={clamped_mu} with N_s={n_s}"
        )


class ConfigError(HelmholtzError):
    """Run configuration is inconsistent (unknown preset, unwritable output, ...)."""
