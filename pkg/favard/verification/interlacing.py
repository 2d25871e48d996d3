"""Interlacing of consecutive characteristic polynomials for every order up to N."""

from typing import Optional

import numpy as np

from favard import jacobi, mixedmop
from favard.mixedmop import InitialConditions
from favard.verification.base import BaseVerifier, Matrix


class InterlacingVerifier(BaseVerifier):
    name = "interlacing"

    def _run(self, matrix: Matrix, ic: InitialConditions, N: int, rng: np.random.Generator) -> Optional[str]:
        check = jacobi.interlacing_check if isinstance(matrix, jacobi.JacobiMatrix) else mixedmop.interlacing_check
        for order in range(N + 1):
            report = check(matrix, order)
            self.flag("interlaced", report.interlaced, N=order, violations=list(report.violations))
            self.flag("wronskian_positive", report.wronskian_positive, N=order, minimum=report.wronskian_min)
            self.flag("sign_corollaries", report.sign_checks, N=order)
        return None
