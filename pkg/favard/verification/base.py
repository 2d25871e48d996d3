"""Shared shape of a verification suite result."""

from typing import Any, Dict, List, Optional, Union

import numpy as np
from structlog import get_logger

from favard.bandmat import BandedMatrix
from favard.jacobi import JacobiMatrix
from favard.mixedmop import InitialConditions

logger = get_logger()

Matrix = Union[JacobiMatrix, BandedMatrix]


class BaseVerifier:
    """A suite runs a family of checks and reports PASS, FAIL or SKIP.

    Subclasses implement :meth:`_run` and append to ``self.checks`` through
    :meth:`check` and :meth:`flag`.
    """

    name = "base"

    def __init__(self, tolerance: Optional[float] = None, seed: int = 0):
        self.tolerance_override = tolerance
        self.seed = seed
        self.checks: List[Dict[str, Any]] = []

    def tolerance(self, default: float) -> float:
        return self.tolerance_override if self.tolerance_override is not None else default

    def check(self, label: str, residual: float, tolerance: float, **context) -> bool:
        passed = bool(residual <= tolerance)
        self.checks.append({
            "check": label,
            "status": "PASS" if passed else "FAIL",
            "residual": float(residual),
            "tolerance": float(tolerance),
            **context,
        })
        return passed

    def flag(self, label: str, passed: bool, **context) -> bool:
        self.checks.append({"check": label, "status": "PASS" if passed else "FAIL", **context})
        return passed

    def verify(self, matrix: Matrix, ic: InitialConditions, N: int) -> Dict[str, Any]:
        """Run the suite on truncation order N."""
        self.checks = []
        skipped = self._run(matrix, ic, N, np.random.default_rng(self.seed))
        if skipped:
            return {
                "type": f"{self.name}_verification",
                "status": "SKIP",
                "message": skipped,
                "checks": [],
            }

        failures = [c for c in self.checks if c["status"] == "FAIL"]
        status = "FAIL" if failures else "PASS"
        message = f"{len(self.checks) - len(failures)}/{len(self.checks)} checks passed"
        if failures:
            logger.warning("verification_failed", suite=self.name, N=N, failures=len(failures), first=failures[0]["check"])
        return {
            "type": f"{self.name}_verification",
            "status": status,
            "message": message,
            "checks": self.checks,
        }

    def _run(self, matrix: Matrix, ic: InitialConditions, N: int, rng: np.random.Generator) -> Optional[str]:
        """Append checks; return a reason string to skip the suite."""
        raise NotImplementedError
