"""
Error types shared by the library, the CLI and the HTTP service.

Library code raises these; the CLI turns ``exit_code`` into the process exit
status and the service turns them into HTTP errors.
"""

from typing import Optional


class ScanpathError(Exception):
    """Base class. ``detail`` is the user-facing message."""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InputError(ScanpathError, ValueError):
    """Bad input data or arguments (exit code 2)."""

    exit_code = 2


class NumericError(ScanpathError, ArithmeticError):
    """Numerical failure such as NaN/Inf during training (exit code 3)."""

    exit_code = 3


class DatasetFormatError(InputError):
    def __init__(self, detail: str, line_number: Optional[int] = None):
        if line_number is not None:
            detail = f"line {line_number}: {detail}"
        super().__init__(detail)
        self.line_number = line_number


class EmptyDatasetError(InputError):
    def __init__(self, detail: str = "empty dataset"):
        super().__init__(detail)


class ShapeMismatchError(InputError):
    pass


class DegenerateSaliencyError(InputError):
    def __init__(self, detail: str = "degenerate saliency map"):
        super().__init__(detail)


class NonFiniteError(NumericError):
    pass
