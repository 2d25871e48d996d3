"""Eigenvector biorthogonality, power reconstruction, discrete biorthogonality,
Christoffel positivity and the total-mass identity."""

from typing import Optional

import numpy as np

from favard import jacobi, mixedmop, momentlab
from favard.config import get_tolerance, settings
from favard.mixedmop import InitialConditions
from favard.verification.base import BaseVerifier, Matrix


class BiorthogonalityVerifier(BaseVerifier):
    name = "biorthogonality"

    def __init__(self, tolerance: Optional[float] = None, seed: int = 0, max_power: Optional[int] = None):
        super().__init__(tolerance, seed)
        self.max_power = settings["MAX_POWER"] if max_power is None else max_power

    def _run(self, matrix: Matrix, ic: InitialConditions, N: int, rng: np.random.Generator) -> Optional[str]:
        if isinstance(matrix, jacobi.JacobiMatrix):
            self._jacobi(matrix, N)
        else:
            self._banded(matrix, ic, N)
        return None

    def _jacobi(self, J: jacobi.JacobiMatrix, N: int) -> None:
        tolerance = self.tolerance(get_tolerance("identity_residual"))
        vectors = jacobi.eigenvector_matrices(J, N, self.max_power)
        self.check("uw_identity", vectors.uw_residual, tolerance, N=N)
        self.check("power_identity", vectors.power_residual, tolerance, N=N)

        G = jacobi.discrete_orthogonality(J, N)
        below = np.tril(G, -1)
        self.check("discrete_orthogonality", float(np.max(np.abs(below))) if N else 0.0, tolerance, N=N)
        data = jacobi.spectral_data(J, N, strict=False)
        self.check("mass_agreement", data.mass_residual, self.tolerance(get_tolerance("mass_agreement")), N=N)
        self.flag("masses_positive", bool(np.all(data.masses > 0)), N=N)
        self.check("total_mass", abs(float(np.sum(data.masses)) - 1.0), tolerance, N=N)

    def _banded(self, T, ic: InitialConditions, N: int) -> None:
        tolerance = self.tolerance(get_tolerance("identity_residual"))
        spectrum = mixedmop.truncation_spectrum(T, N, ic, strict=False, max_power=self.max_power)
        self.check("uw_identity", spectrum.uw_residual, tolerance, N=N)
        self.check("power_identity", spectrum.power_residual, tolerance, N=N)
        self.check("eigen_equation", spectrum.eigen_residual, tolerance, N=N)
        self.check("projector_oracle", spectrum.projector_residual, self.tolerance(get_tolerance("cross_check")), N=N)

        G, magnitudes = mixedmop.discrete_biorthogonality(T, N, ic, spectrum=spectrum, magnitudes=True)
        self.check("discrete_biorthogonality", mixedmop.biorthogonality_residual(G, magnitudes), tolerance, N=N)

        measure = mixedmop.discrete_measure(spectrum, strict=False)
        self.check("bound_identity", measure.mass_residual, self.tolerance(get_tolerance("cross_check")), N=N)
        if T.factors is not None:
            positive_ic = mixedmop.darboux_initial_conditions(T)
            if positive_ic != ic:
                measure = mixedmop.discrete_measure(
                    mixedmop.truncation_spectrum(T, N, positive_ic, strict=False, max_power=0), strict=False
                )
            self.flag("christoffel_positive", measure.positive, N=N, nonpositive=measure.nonpositive_weights())

        radius = 1.1 * float(np.max(np.abs(spectrum.lambdas))) + 1.0
        for n, m in ((0, 0), (0, min(1, N)), (N, N)):
            result = momentlab.contour_biorthogonality_check(T, ic, n, m, N, radius)
            self.check("contour_biorthogonality", result.residual, self.tolerance(get_tolerance("contour")), n=n, m=m)
