"""Custom exception classes for favardlab."""

from typing import Any, Dict, Optional, Sequence

import numpy as np


class FavardError(Exception):
    """Base exception for all favardlab errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for reports."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details
        }


# Input Exceptions
class InputError(FavardError):
    """Base exception for malformed or out-of-range input."""
    pass


class SpecFileError(InputError):
    """Matrix description file could not be parsed or validated."""

    def __init__(
        self,
        path: str,
        reason: str,
        line: Optional[int] = None,
        field: Optional[str] = None
    ):
        where = f" (line {line})" if line is not None else ""
        where += f" (field '{field}')" if field else ""
        super().__init__(
            message=f"Invalid matrix description {path}{where}: {reason}",
            error_code="SPEC_FILE_INVALID",
            details={"path": path, "reason": reason, "line": line, "field": field}
        )


class BandLengthError(InputError):
    """A finite diagonal is shorter than the declared operational length."""

    def __init__(self, offset: int, length: int, required: int):
        super().__init__(
            message=f"Diagonal {offset:+d} has {length} entries, {required} required",
            error_code="BAND_LENGTH",
            details={"offset": offset, "length": length, "required": required}
        )


class IndexRangeError(InputError):
    """Truncation or entry index outside the represented range."""

    def __init__(self, index: int, limit: int, what: str = "truncation order"):
        super().__init__(
            message=f"{what} {index} outside represented range (limit {limit})",
            error_code="INDEX_RANGE",
            details={"index": index, "limit": limit, "what": what}
        )


class SubdiagonalPositivityError(InputError):
    """Jacobi subdiagonal entry is not strictly positive."""

    def __init__(self, index: int, value: float):
        super().__init__(
            message=f"Subdiagonal entry ell[{index}] = {value!r} must be positive",
            error_code="SUBDIAGONAL_NONPOSITIVE",
            details={"index": index, "value": value}
        )


class DarbouxVariantError(InputError):
    """Requested Darboux variant does not exist for the factor counts."""

    def __init__(self, variant: int, lowers: int, uppers: int):
        super().__init__(
            message=(
                f"Darboux variant {variant:+d} needs 1 <= |variant| <= "
                f"{lowers} (lowers) / {uppers} (uppers)"
            ),
            error_code="DARBOUX_VARIANT",
            details={"variant": variant, "lowers": lowers, "uppers": uppers}
        )


# Numerical Exceptions
class NumericalError(FavardError):
    """Base exception for failures of a numerical procedure."""
    pass


class NonFiniteError(NumericalError):
    """Matrix or vector contains NaN or infinite entries."""

    def __init__(self, what: str):
        super().__init__(
            message=f"Non-finite entries in {what}",
            error_code="NON_FINITE",
            details={"what": what}
        )


class EigenSolverError(NumericalError):
    """Dense eigensolver failed to converge or returned a non-real spectrum."""

    def __init__(self, reason: str, size: int):
        super().__init__(
            message=f"Eigenvalue computation failed for size {size}: {reason}",
            error_code="EIGEN_SOLVER",
            details={"reason": reason, "size": size}
        )


class DegenerateSpectrumError(NumericalError):
    """Two eigenvalues of a truncation coincide within tolerance.

    Multiple eigenvalues lead to Jordan chains, which this library does
    not handle.
    """

    def __init__(self, N: int, gap: float, threshold: float):
        super().__init__(
            message=(
                f"Degenerate spectrum at N={N}: minimal gap {gap:.3e} below "
                f"{threshold:.3e} (generalized eigenvectors not supported)"
            ),
            error_code="DEGENERATE_SPECTRUM",
            details={"N": N, "gap": gap, "threshold": threshold}
        )


class DegenerateFactorizationError(NumericalError):
    """Neville elimination met a zero pivot before completion."""

    def __init__(self, row: int, column: int, stage: str):
        super().__init__(
            message=f"Zero pivot at ({row}, {column}) during {stage}",
            error_code="DEGENERATE_FACTORIZATION",
            details={"row": row, "column": column, "stage": stage}
        )


class ExtremeBandError(NumericalError):
    """An outermost band entry vanishes where a recursion divides by it."""

    def __init__(self, row: int, column: int):
        super().__init__(
            message=f"Extreme band entry T[{row}, {column}] vanishes",
            error_code="EXTREME_BAND",
            details={"row": row, "column": column}
        )


class RegularityError(NumericalError):
    """A leading principal minor of the moment matrix is singular."""

    def __init__(self, index: int, pivot: float):
        super().__init__(
            message=f"Moment matrix not regular: pivot {index} = {pivot:.3e}",
            error_code="MOMENT_NOT_REGULAR",
            details={"index": index, "pivot": pivot}
        )


class PoleProximityError(NumericalError):
    """Evaluation point too close to an eigenvalue of the truncation."""

    def __init__(self, z: complex, distance: float):
        super().__init__(
            message=f"Point {z} lies within {distance:.3e} of a pole",
            error_code="POLE_PROXIMITY",
            details={"z": [z.real, z.imag], "distance": distance}
        )


class ShiftSearchExhaustedError(NumericalError):
    """No certified oscillatory shift found below the search ceiling."""

    def __init__(self, N: int, ceiling: float):
        super().__init__(
            message=f"No positive bidiagonal factorization found for N={N} with shift <= {ceiling:.6g}",
            error_code="SHIFT_SEARCH_EXHAUSTED",
            details={"N": N, "ceiling": ceiling}
        )


class ContourError(NumericalError):
    """Contour radius is not usable."""

    def __init__(self, radius: float, reason: str):
        super().__init__(
            message=f"Contour radius {radius!r} rejected: {reason}",
            error_code="CONTOUR_INVALID",
            details={"radius": radius, "reason": reason}
        )


class VerificationError(FavardError):
    """An identity residual exceeds its tolerance."""

    def __init__(
        self,
        check: str,
        residual: float,
        tolerance: float,
        context: Optional[Dict[str, Any]] = None
    ):
        super().__init__(
            message=f"Check '{check}' failed: residual {residual:.3e} exceeds tolerance {tolerance:.3e}",
            error_code="VERIFICATION_FAILED",
            details={
                "check": check,
                "residual": residual,
                "tolerance": tolerance,
                **(context or {})
            }
        )


# Configuration Exceptions
class ConfigurationError(FavardError):
    """Configuration errors."""

    def __init__(self, config_key: str, reason: str):
        super().__init__(
            message=f"Configuration error for '{config_key}': {reason}",
            error_code="CONFIG_ERROR",
            details={"config_key": config_key, "reason": reason}
        )


# Exit codes of the command line front end
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERDICT = 2


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the command line exit code."""
    if isinstance(error, (InputError, ConfigurationError)):
        return EXIT_USAGE
    if isinstance(error, (NumericalError, VerificationError)):
        return EXIT_VERDICT
    return EXIT_USAGE


def require_finite(values: Any, what: str) -> None:
    """Raise NonFiniteError when an array-like holds NaN or inf."""
    if not np.all(np.isfinite(np.asarray(values))):
        raise NonFiniteError(what)


def log_error_with_context(logger, error: FavardError, additional_context: Optional[Dict] = None):
    """Log error with full context information."""
    log_data = {
        "error_type": error.__class__.__name__,
        "error_code": error.error_code,
        "details": error.details
    }

    if additional_context:
        log_data["context"] = additional_context

    logger.error("error_occurred", error_message=error.message, **log_data)


__all__: Sequence[str] = [
    "FavardError",
    "InputError",
    "SpecFileError",
    "BandLengthError",
    "IndexRangeError",
    "SubdiagonalPositivityError",
    "DarbouxVariantError",
    "NumericalError",
    "NonFiniteError",
    "EigenSolverError",
    "DegenerateSpectrumError",
    "DegenerateFactorizationError",
    "ExtremeBandError",
    "RegularityError",
    "PoleProximityError",
    "ShiftSearchExhaustedError",
    "ContourError",
    "VerificationError",
    "ConfigurationError",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_VERDICT",
    "exit_code_for",
    "require_finite",
    "log_error_with_context",
]
