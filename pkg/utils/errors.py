from typing import List, Optional


class DwellError(Exception):
    """Base class for every error raised by the simulation library"""


class DomainError(DwellError, ValueError):
    """Physical parameters outside the model's validity domain"""


class ConfigError(DwellError):
    """Run configuration rejected; carries one message per offending field"""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalError(DwellError):
    pass


class IntegrationError(NumericalError):
    """Adaptive integrator gave up (step size underflow)"""


class ConvergenceError(NumericalError):
    pass


class BoundaryLeakageError(NumericalError):
    """Grid propagation lost probability into the domain edges"""


class PlotError(DwellError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResultIOError(DwellError):
    pass


class PoorBasisWarning(UserWarning):
    """Initial packet is only partly captured by the truncated oscillator basis"""
