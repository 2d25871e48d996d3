"""Christoffel-Darboux identities at seeded random point pairs."""

from typing import Optional

import numpy as np

from favard import jacobi, mixedmop
from favard.config import get_tolerance, settings
from favard.mixedmop import InitialConditions
from favard.polycore import real_spectrum
from favard.verification.base import BaseVerifier, Matrix


class CDVerifier(BaseVerifier):
    """Scalar (Jacobi) or generalized (banded) kernel identity, plus confluent positivity."""

    name = "cd"

    def __init__(self, tolerance: Optional[float] = None, seed: int = 0, point_pairs: Optional[int] = None):
        super().__init__(tolerance, seed)
        self.point_pairs = settings["POINT_PAIRS"] if point_pairs is None else point_pairs

    def _run(self, matrix: Matrix, ic: InitialConditions, N: int, rng: np.random.Generator) -> Optional[str]:
        tolerance = self.tolerance(get_tolerance("kernel_identity"))
        lambdas = real_spectrum(matrix.truncate(N))
        low, high = float(lambdas[-1]) - 1.0, float(lambdas[0]) + 1.0
        points = rng.uniform(low, high, size=(self.point_pairs, 2))

        for x, y in points:
            kernel = self._kernel(matrix, ic, N, float(x), float(y))
            self.check("kernel_identity", kernel.relative, tolerance, x=float(x), y=float(y))
            confluent = self._kernel(matrix, ic, N, float(x), float(x))
            self.check("confluent_identity", confluent.relative, tolerance, x=float(x))
            self.flag("confluent_positive", confluent.normalized > 0, x=float(x), value=confluent.normalized)
        return None

    @staticmethod
    def _kernel(matrix: Matrix, ic: InitialConditions, N: int, x: float, y: float):
        if isinstance(matrix, jacobi.JacobiMatrix):
            return jacobi.cd_check(matrix, N, x, y)
        return mixedmop.generalized_cd_check(matrix, N, ic, x, y)
