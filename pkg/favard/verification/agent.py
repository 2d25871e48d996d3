"""Runs verification suites on one matrix and summarizes their verdicts."""

from typing import Any, Dict, List, Optional, Type

from structlog import get_logger

from favard.exceptions import FavardError, InputError, log_error_with_context
from favard.mixedmop import InitialConditions
from favard.verification.base import BaseVerifier, Matrix
from favard.verification.biorthogonality import BiorthogonalityVerifier
from favard.verification.cd import CDVerifier
from favard.verification.darboux import DarbouxVerifier
from favard.verification.gaussborel import GaussBorelVerifier
from favard.verification.interlacing import InterlacingVerifier

logger = get_logger()

SUITES: Dict[str, Type[BaseVerifier]] = {
    "cd": CDVerifier,
    "interlacing": InterlacingVerifier,
    "biorthogonality": BiorthogonalityVerifier,
    "darboux": DarbouxVerifier,
    "gaussborel": GaussBorelVerifier,
}


class VerificationAgent:
    """Runs the requested suites in a fixed order.

    Input errors propagate; numerical failures inside a suite become an
    ``ERROR`` entry and fail the run.
    """

    def __init__(self, tolerance: Optional[float] = None, seed: int = 0):
        self.tolerance = tolerance
        self.seed = seed

    def run(
        self,
        matrix: Matrix,
        ic: Optional[InitialConditions],
        N: int,
        suites: Optional[List[str]] = None,
    ) -> Dict[str, Any]:
        ic = ic or InitialConditions()
        requested = list(SUITES) if suites is None else list(suites)
        unknown = [s for s in requested if s not in SUITES]
        if unknown:
            raise InputError(
                message=f"Unknown verification suite {unknown[0]!r}",
                error_code="UNKNOWN_SUITE",
                details={"suite": unknown[0], "known": list(SUITES)},
            )

        results = []
        for name in (s for s in SUITES if s in requested):
            results.append(self._run_suite(name, matrix, ic, N))

        failures = [r for r in results if r["status"] in ("FAIL", "ERROR")]
        skipped = [r for r in results if r["status"] == "SKIP"]
        summary = {
            "N": N,
            "seed": self.seed,
            "suites": [s for s in SUITES if s in requested],
            "results": results,
            "summary": {
                "total_suites": len(results),
                "passed": len([r for r in results if r["status"] == "PASS"]),
                "skipped": len(skipped),
                "failures": len(failures),
            },
            "overall_status": "FAIL" if failures else "PASS",
        }
        logger.info(
            "verification_completed",
            N=N,
            status=summary["overall_status"],
            failures=len(failures),
            skipped=len(skipped),
        )
        return summary

    def _run_suite(self, name: str, matrix: Matrix, ic: InitialConditions, N: int) -> Dict[str, Any]:
        verifier = SUITES[name](tolerance=self.tolerance, seed=self.seed)
        try:
            return verifier.verify(matrix, ic, N)
        except InputError:
            raise
        except FavardError as e:
            log_error_with_context(logger, e, {"suite": name, "N": N})
            return {
                "type": f"{name}_verification",
                "status": "ERROR",
                "message": e.message,
                "error": e.to_dict(),
                "checks": [],
            }
