"""Gauss-Borel factorization of the moment matrix (Hankel in the Jacobi case)."""

from typing import Optional

import numpy as np

from favard import jacobi, momentlab
from favard.config import get_tolerance
from favard.mixedmop import InitialConditions
from favard.verification.base import BaseVerifier, Matrix

MAX_DIMENSION = 12


class GaussBorelVerifier(BaseVerifier):
    name = "gaussborel"

    def __init__(self, tolerance: Optional[float] = None, seed: int = 0, dimension: Optional[int] = None):
        super().__init__(tolerance, seed)
        self.dimension = dimension

    def _run(self, matrix: Matrix, ic: InitialConditions, N: int, rng: np.random.Generator) -> Optional[str]:
        n = self.dimension or min(N + 1, MAX_DIMENSION)
        tolerance = self.tolerance(get_tolerance("gauss_borel"))
        if isinstance(matrix, jacobi.JacobiMatrix):
            residual, pivots = self._hankel(matrix, n)
        else:
            result = momentlab.gauss_borel(matrix, ic, n, strict=False)
            residual, pivots = result.residual, result.pivots
        self.check("biorthogonal_factorization", residual, tolerance, n=n)
        self.flag("regular", bool(np.all(pivots != 0)), n=n, pivots=pivots.tolist())
        return None

    @staticmethod
    def _hankel(J: jacobi.JacobiMatrix, n: int):
        """Rows of monic P_k coefficients reduce the Hankel moment matrix to diag(H_k)."""
        H = np.array([[jacobi.moments(J, i + j) for j in range(n)] for i in range(n)])
        pivots = momentlab.leading_pivots(H)
        polys = jacobi.recursion_polys(J, n - 1)
        B = np.zeros((n, n))
        for k in range(n):
            coeffs = polys.P[k].coeffs
            B[k, : len(coeffs)] = coeffs
        D = np.diag(polys.H[:n])
        residual = float(np.max(np.abs(B @ H @ B.T - D)) / np.max(np.abs(D)))
        return residual, pivots
