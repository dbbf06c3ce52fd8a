"""
Base Run
Every CLI subcommand is a run with the same three-step lifecycle.
"""

import logging

logger: logging.RootLogger = logging.getLogger(__name__)


class BaseRun:
    """
    Profiler run.
    """

    def __init__(self, **kwargs) -> None:
        """
        Run constructor.
        """

    def __repr__(self) -> str:
        """
        String serializer.
        """
        return self.__class__.__name__

    def load(self) -> None:
        """
        Reading inputs of this run.
        """

    def execute(self) -> None:
        """
        Computing results of this run.
        """

    def export(self) -> None:
        """
        Writing outputs of this run.
        """
