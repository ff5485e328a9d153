"""
Exception hierarchy for cnqe-lab.

Every error that can end a CLI invocation carries the exit code the
command line reports for it.
"""

from typing import Any, Dict


class CnqeError(Exception):
    """Base class for all cnqe-lab failures."""

    exit_code: int = 4

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable error payload emitted by the CLI."""
        return {
            "error": {"type": type(self).__name__, "message": str(self)},
            "exit_code": self.exit_code,
        }


class ConfigError(CnqeError, ValueError):
    """Invalid configuration, unknown kind name or invalid combination."""

    exit_code = 2


class DataError(CnqeError):
    """Missing, malformed or inconsistent dataset files."""

    exit_code = 3


class NumericError(CnqeError, ValueError):
    """Numeric precondition violation or divergence during training."""

    exit_code = 4
