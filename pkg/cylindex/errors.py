"""Exceptions raised by the workbench."""
from __future__ import annotations

from typing import Any, Optional


class WorkbenchError(Exception):
    """Base class for workbench failures."""


class NonFredholmError(WorkbenchError):
    """Raised for the unperturbed operator (s = t = 0) on the open cylinder."""

    def __init__(self, message: str = "s = t = 0: the unperturbed operator is not Fredholm") -> None:
        super().__init__(message)


class IndeterminateSpectrumError(WorkbenchError):
    """An eigenvalue fell between tau_zero and tau_gap; refine R or h."""

    def __init__(self, message: str, report: Optional[Any] = None) -> None:
        super().__init__(message)
        self.report = report


class ModelError(WorkbenchError):
    """Operation applied to a model kind it is not defined for."""


class ConfigError(WorkbenchError):
    """Malformed config file line or override."""
