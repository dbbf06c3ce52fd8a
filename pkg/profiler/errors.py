"""
Profiler Errors
Every error derives from a builtin exception so callers can catch either.
"""

from typing import Optional


class ParseError(ValueError):
    """
    Malformed event-log line.
    """

    def __init__(self, message: str, line_number: int, path: Optional[str] = None) -> None:
        """
        Error constructor.
        """
        super().__init__(f"{path or '<events>'}:{line_number}: {message}")
        self.line_number: int = line_number
        self.path: Optional[str] = path


class DimensionError(ValueError):
    """
    Shapes of matrices, vectors or detector banks do not conform.
    """


class TimeOrderError(ValueError):
    """
    An operation was asked to move backwards in time.
    """


class BudgetExhaustedError(RuntimeError):
    """
    The mixture rejection loop ran out of attempts.
    """

    def __init__(self, message: str, closest_distance: float) -> None:
        """
        Error constructor.
        """
        super().__init__(f"{message} (closest distance: {closest_distance:.4f})")
        self.closest_distance: float = closest_distance
