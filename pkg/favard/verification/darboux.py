"""Darboux transforms of the factored truncation: isospectrality and eigenvector transport."""

from typing import Optional

import numpy as np

from favard import jacobi, mixedmop
from favard.bandmat import darboux_eigenvectors, darboux_transform, find_oscillatory_shift, neville_factorize
from favard.config import get_tolerance
from favard.exceptions import NumericalError
from favard.mixedmop import InitialConditions
from favard.polycore import dense_charpoly
from favard.verification.base import BaseVerifier, Matrix


def _charpoly_residual(M: np.ndarray, reference: np.ndarray) -> float:
    a = np.array(dense_charpoly(M).coeffs)
    b = np.array(dense_charpoly(reference).coeffs)
    size = max(len(a), len(b))
    a = np.pad(a, (0, size - len(a)))
    b = np.pad(b, (0, size - len(b)))
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


class DarbouxVerifier(BaseVerifier):
    name = "darboux"

    def _run(self, matrix: Matrix, ic: InitialConditions, N: int, rng: np.random.Generator) -> Optional[str]:
        M = matrix.truncate(N)
        try:
            shift = find_oscillatory_shift(matrix, N)
            F = neville_factorize(M + shift * np.eye(N + 1), matrix.p, matrix.q)
        except NumericalError as exc:
            return f"no positive bidiagonal factorization: {exc.message}"
        shifted = M + shift * np.eye(N + 1)
        self.flag("positive_factorization", F.positive, N=N, shift=shift)

        tolerance = self.tolerance(get_tolerance("darboux_charpoly"))
        variants = [a for a in range(1, F.q + 1)] + [-b for b in range(1, F.p + 1)]
        transforms = {v: darboux_transform(F, v) for v in variants}
        for v, M_hat in transforms.items():
            self.check("charpoly_preserved", _charpoly_residual(M_hat, shifted), tolerance, variant=v)

        lambdas, W, U = self._eigenvectors(matrix, ic, N)
        lambdas = lambdas + shift
        eigen_tolerance = self.tolerance(get_tolerance("identity_residual"))
        for k, lam in enumerate(lambdas):
            moved = darboux_eigenvectors(F, W[k], U[:, k])
            sizes = darboux_eigenvectors(F, W[k], U[:, k], magnitudes=True)
            for v, vector in moved.items():
                M_hat = transforms[v]
                if v > 0:
                    residual = vector @ M_hat - lam * vector
                    terms = sizes[v] @ np.abs(M_hat) + abs(lam) * sizes[v]
                else:
                    residual = M_hat @ vector - lam * vector
                    terms = np.abs(M_hat) @ sizes[v] + abs(lam) * sizes[v]
                scale = max(float(np.max(terms)), np.finfo(float).tiny)
                self.check("eigenvector_transport", float(np.max(np.abs(residual))) / scale,
                           eigen_tolerance, variant=v, k=k)
        return None

    @staticmethod
    def _eigenvectors(matrix: Matrix, ic: InitialConditions, N: int):
        if isinstance(matrix, jacobi.JacobiMatrix):
            vectors = jacobi.eigenvector_matrices(matrix, N, max_power=0)
            return vectors.lambdas, vectors.W, vectors.U
        spectrum = mixedmop.truncation_spectrum(matrix, N, ic, strict=False, max_power=0)
        return spectrum.lambdas, spectrum.W, spectrum.U
