"""Moments, moment matrices, Gauss-Borel factorization, second-kind polynomials,
Weyl matrices and Gauss quadrature for banded (2,3) matrices."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from structlog import get_logger

from favard import jacobi
from favard.bandmat import BandedMatrix
from favard.config import get_tolerance
from favard.exceptions import (
    ContourError,
    IndexRangeError,
    PoleProximityError,
    RegularityError,
    VerificationError,
    require_finite,
)
from favard.mixedmop import (
    InitialConditions,
    TruncationSpectrum,
    degrees_of_precision,
    family_values,
    projector_weights,
    recursion_vectors,
    truncation_spectrum,
)
from favard.polycore import (
    QuadratureCheck,
    adjugate,
    balanced_solve,
    dense_eig,
    lu_determinant,
    observed_exact_degree,
    selector,
)

logger = get_logger()

_TINY = np.finfo(float).tiny


def _top_rows_power(T: BandedMatrix, n: int, size: int) -> np.ndarray:
    """Rows 0 and 1 of (T^[size-1])^n by banded row-times-matrix products.

    Only columns reachable by a path of length <= n are touched, so the result
    does not depend on ``size`` once ``size`` covers them.
    """
    rows = np.zeros((2, size))
    rows[0, 0] = rows[1, 1] = 1.0
    for step in range(n):
        reach = min(size - 1, 1 + T.p * (step + 1))
        new = np.zeros_like(rows)
        for j in range(reach + 1):
            for i in range(max(0, j - T.p), min(size - 1, j + T.q) + 1):
                t = T.entry(i, j)
                if t != 0.0:
                    new[:, j] += rows[:, i] * t
        rows = new
    return rows


def moments_from_T(
    T: BandedMatrix, n: int, ic: Optional[InitialConditions] = None, size: Optional[int] = None
) -> np.ndarray:
    """Psi_n = xi^-1 E_2 (T^[M])^n E_3^T nu^-T with M = 2n + 3."""
    ic = ic or InitialConditions()
    if n < 0:
        raise IndexRangeError(n, 0, "moment order")
    size = 2 * n + 4 if size is None else size
    if size > T.n_max or size < 3:
        raise IndexRangeError(size - 1, T.n_max - 1, "moment truncation")
    block = _top_rows_power(T, n, size)[:, :3]
    return ic.xi_inv @ block @ ic.nu_inv.T


def moment_sequence(T: BandedMatrix, count: int, ic: Optional[InitialConditions] = None) -> List[np.ndarray]:
    return [moments_from_T(T, n, ic) for n in range(count)]


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    """Scalar n x n truncation of the interleaved block-Hankel moment matrix.

    Row 2j + b - 1 and column 3k + a - 1 hold (Psi_{j+k})_{b,a}.
    """

    n: int
    entries: np.ndarray
    moments: Tuple[np.ndarray, ...]

    @staticmethod
    def row_index(r: int) -> Tuple[int, int]:
        return r // 2, r % 2 + 1

    @staticmethod
    def column_index(c: int) -> Tuple[int, int]:
        return c // 3, c % 3 + 1


def moment_matrix(T: BandedMatrix, ic: Optional[InitialConditions], n: int) -> MomentMatrix:
    if n < 1:
        raise IndexRangeError(n, 1, "moment matrix dimension")
    ic = ic or InitialConditions()
    top = (n - 1) // 2 + (n - 1) // 3
    psi = moment_sequence(T, top + 1, ic)
    entries = np.empty((n, n))
    for r in range(n):
        j, b = MomentMatrix.row_index(r)
        for c in range(n):
            k, a = MomentMatrix.column_index(c)
            entries[r, c] = psi[j + k][b - 1, a - 1]
    return MomentMatrix(n=n, entries=entries, moments=tuple(psi))


def leading_pivots(M: np.ndarray) -> np.ndarray:
    """Diagonal of the LU factorization without pivoting (Doolittle)."""
    U = np.array(M, dtype=float)
    n = U.shape[0]
    pivots = np.empty(n)
    for k in range(n):
        pivots[k] = U[k, k]
        if pivots[k] == 0.0 or not np.isfinite(pivots[k]):
            raise RegularityError(k, float(pivots[k]))
        U[k + 1:, k:] -= np.outer(U[k + 1:, k] / U[k, k], U[k, k:])
    return pivots


@dataclass(frozen=True, eq=False)
class GaussBorelResult:
    n: int
    lower: np.ndarray
    upper: np.ndarray
    moment: MomentMatrix
    pivots: np.ndarray
    residual: float
    conditioning: float
    roundoff_bound: float = float("nan")

    @property
    def product(self) -> np.ndarray:
        return self.lower @ self.moment.entries @ self.upper


def coefficient_matrices(T: BandedMatrix, ic: Optional[InitialConditions], n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Bmat (row m: coefficients of B_m) and Amat (column m: coefficients of A_m)."""
    families = recursion_vectors(T, max(n - 2, 0), ic)
    Bmat = np.zeros((n, n))
    Amat = np.zeros((n, n))
    for m in range(n):
        for b, poly in enumerate(families.type_ii(m), start=1):
            for j, c in enumerate(poly.coeffs):
                col = 2 * j + b - 1
                if col < n:
                    Bmat[m, col] = c
        for a, poly in enumerate(families.type_i(m), start=1):
            for j, c in enumerate(poly.coeffs):
                row = 3 * j + a - 1
                if row < n:
                    Amat[row, m] = c
    return Bmat, Amat


def gauss_borel(
    T: BandedMatrix, ic: Optional[InitialConditions], n: int, strict: bool = True
) -> GaussBorelResult:
    """Check Bmat M Amat = I for the n x n moment matrix."""
    moment = moment_matrix(T, ic, n)
    pivots = leading_pivots(moment.entries)
    Bmat, Amat = coefficient_matrices(T, ic, n)

    residual = float(np.max(np.abs(Bmat @ moment.entries @ Amat - np.eye(n))))
    conditioning = float(np.max(np.abs(Bmat) @ np.abs(moment.entries) @ np.abs(Amat)))
    roundoff_bound = 1e3 * np.finfo(float).eps * conditioning
    tolerance = get_tolerance("gauss_borel")
    if residual > tolerance:
        context = {"n": n, "conditioning": conditioning, "roundoff_bound": roundoff_bound}
        if strict:
            raise VerificationError("gauss_borel", residual, tolerance, context)
        logger.warning("gauss_borel_margin", residual=residual, **context)
    return GaussBorelResult(
        n=n,
        lower=Bmat,
        upper=Amat,
        moment=moment,
        pivots=pivots,
        residual=residual,
        conditioning=conditioning,
        roundoff_bound=roundoff_bound,
    )


def _as_complex(z) -> complex:
    z = complex(z)
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise PoleProximityError(z, float("nan"))
    return z


def _pole_guard(lambdas: np.ndarray, z: complex) -> float:
    distance = float(np.min(np.abs(z - lambdas))) if len(lambdas) else float("inf")
    scale = max(1.0, float(np.max(np.abs(lambdas))) if len(lambdas) else 1.0)
    if distance <= get_tolerance("pole_proximity") * scale:
        raise PoleProximityError(z, distance)
    return distance


@dataclass(frozen=True, eq=False)
class SecondKindMatrix:
    """P^(1)_{N+1}(z) computed through the adjugate and through Christoffel numbers."""

    N: int
    z: complex
    value: np.ndarray
    christoffel_route: np.ndarray
    residual: float


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), _TINY))


def second_kind_matrix(
    T: BandedMatrix,
    N: int,
    ic: Optional[InitialConditions],
    z,
    spectrum: Optional[TruncationSpectrum] = None,
    strict: bool = True,
) -> SecondKindMatrix:
    z = _as_complex(z)
    ic = ic or InitialConditions()
    spectrum = spectrum or truncation_spectrum(T, N, ic, strict=False)
    M = T.truncate(N)
    size = N + 1

    resolvent_adj = adjugate(z * np.eye(size) - M.astype(complex))
    adj_route = ic.xi_inv @ selector(2, size) @ resolvent_adj @ selector(3, size).T @ ic.nu_inv.T

    lambdas = spectrum.lambdas
    cofactors = np.array([np.prod(z - np.delete(lambdas, k)) for k in range(size)])
    weights = spectrum.rho[:, :, None] * spectrum.mu[:, None, :]
    christoffel_route = np.tensordot(cofactors, weights, axes=1)

    residual = _relative_gap(adj_route, christoffel_route)
    tolerance = get_tolerance("weyl_routes")
    if residual > tolerance:
        if strict:
            raise VerificationError("second_kind_routes", residual, tolerance, {"N": N, "z": [z.real, z.imag]})
        logger.warning("second_kind_routes_disagree", N=N, residual=residual)
    return SecondKindMatrix(N=N, z=z, value=adj_route, christoffel_route=christoffel_route, residual=residual)


@dataclass(frozen=True, eq=False)
class WeylMatrix:
    """S^[N](z), the 2x3 Weyl matrix of the truncation, with its computation routes."""

    N: int
    z: complex
    S: np.ndarray
    partial_fraction: np.ndarray
    resolvent: np.ndarray
    residual: float


def _resolvent_route(M: np.ndarray, ic: InitialConditions, z: complex) -> np.ndarray:
    size = M.shape[0]
    solved = balanced_solve(z * np.eye(size) - M, selector(3, size).T.astype(complex))
    return ic.xi_inv @ selector(2, size) @ solved @ ic.nu_inv.T


def weyl_matrix(
    T: BandedMatrix, N: int, ic: Optional[InitialConditions], z, strict: bool = True
) -> WeylMatrix:
    """P^(1)_{N+1}(z) / P_{N+1}(z), against partial fractions and the resolvent."""
    z = _as_complex(z)
    ic = ic or InitialConditions()
    spectrum = truncation_spectrum(T, N, ic, strict=False)
    _pole_guard(spectrum.lambdas, z)
    M = T.truncate(N)

    second = second_kind_matrix(T, N, ic, z, spectrum=spectrum, strict=False)
    S = second.value / lu_determinant(z * np.eye(N + 1) - M)
    weights = spectrum.rho[:, :, None] * spectrum.mu[:, None, :]
    partial = np.tensordot(1.0 / (z - spectrum.lambdas), weights, axes=1)
    resolvent = _resolvent_route(M, ic, z)

    residual = max(_relative_gap(S, partial), _relative_gap(S, resolvent), _relative_gap(partial, resolvent))
    tolerance = get_tolerance("weyl_routes")
    if residual > tolerance:
        if strict:
            raise VerificationError("weyl_routes", residual, tolerance, {"N": N, "z": [z.real, z.imag]})
        logger.warning("weyl_routes_disagree", N=N, residual=residual)
    return WeylMatrix(N=N, z=z, S=S, partial_fraction=partial, resolvent=resolvent, residual=residual)


@dataclass(frozen=True, eq=False)
class WeylConvergence:
    z: complex
    N_list: Tuple[int, ...]
    values: Tuple[np.ndarray, ...]
    differences: Tuple[float, ...]

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.differences, self.differences[1:]))

    @property
    def flagged(self) -> bool:
        return not self.monotone


def weyl_convergence_probe(
    T: Union[BandedMatrix, "jacobi.JacobiMatrix"],
    ic: Optional[InitialConditions],
    z,
    N_list: Sequence[int],
) -> WeylConvergence:
    """S^[N](z) along N_list with the successive max-norm differences.

    Jacobi matrices give the 1x1 scalar Weyl function.
    """
    z = _as_complex(z)
    ic = ic or InitialConditions()
    values = []
    for N in N_list:
        if isinstance(T, jacobi.JacobiMatrix):
            values.append(np.array([[jacobi.weyl(T, N, z).value]]))
            continue
        M = T.truncate(N)
        eigenvalues, _ = dense_eig(M)
        _pole_guard(eigenvalues, z)
        values.append(_resolvent_route(M, ic, z))
    differences = tuple(float(np.max(np.abs(b - a))) for a, b in zip(values, values[1:]))
    sequence = WeylConvergence(z=z, N_list=tuple(N_list), values=tuple(values), differences=differences)
    if sequence.flagged:
        logger.warning("weyl_convergence_not_monotone", z=[z.real, z.imag], differences=list(differences))
    return sequence


@dataclass(frozen=True, eq=False)
class ContourResult:
    n: int
    m: int
    value: complex
    expected: float
    residual: float
    enclosed_poles: int
    encloses_spectrum: bool


def contour_biorthogonality_check(
    T: BandedMatrix,
    ic: Optional[InitialConditions],
    n: int,
    m: int,
    M_big: int,
    radius: float,
    allow_partial: bool = False,
) -> ContourResult:
    """Residue sum of B_n(z) S^[M_big](z) A_m(z)^T over the poles inside |z| = radius.

    The circle is traversed clockwise, which turns the residue sum of
    1/(z - l_k) into +1 per enclosed pole. A circle that misses part of the
    spectrum of T^[M_big] is a ContourError unless ``allow_partial``, in which
    case the sum runs over the enclosed poles only (zero when none are).
    """
    if not np.isfinite(radius) or radius <= 0:
        raise ContourError(radius, "radius must be positive and finite")
    if not (0 <= n <= M_big and 0 <= m <= M_big):
        raise IndexRangeError(max(n, m), M_big, "biorthogonality index")
    ic = ic or InitialConditions()
    values, weights = projector_weights(T.truncate(M_big), ic)
    inside = np.abs(values) < radius
    expected = float(n == m)
    if not allow_partial and not np.all(inside):
        outside = float(np.max(np.abs(values[~inside])))
        raise ContourError(radius, f"an eigenvalue of modulus {outside:.6g} lies outside the circle")
    if not np.any(inside):
        return ContourResult(n, m, 0j, expected, expected, 0, False)

    poles = values[inside]
    A, B = family_values(T, max(n, m), ic, poles)
    total = 0j
    for idx, k in enumerate(np.flatnonzero(inside)):
        total += B[:, n, idx] @ weights[k] @ A[:, m, idx]
    enclosed = int(np.count_nonzero(inside))
    return ContourResult(
        n=n,
        m=m,
        value=complex(total),
        expected=expected,
        residual=abs(total - expected),
        enclosed_poles=enclosed,
        encloses_spectrum=enclosed == len(values),
    )


def gauss_quadrature_check(
    T: BandedMatrix,
    ic: Optional[InitialConditions],
    N: int,
    a: int,
    b: int,
    spectrum: Optional[TruncationSpectrum] = None,
) -> QuadratureCheck:
    """Exactness of sum_k rho_{k,b} mu_{k,a} l_k^n against (Psi_n)_{b,a}.

    Degrees 0 .. d_{b,a}(N) + 1 are compared; the last one tests optimality.
    """
    if a not in (1, 2, 3) or b not in (1, 2):
        raise IndexRangeError(max(a, b), 3, "measure entry")
    ic = ic or InitialConditions()
    spectrum = spectrum or truncation_spectrum(T, N, ic, strict=False)
    degree = degrees_of_precision(N, a, b)
    weights = spectrum.rho[:, b - 1] * spectrum.mu[:, a - 1]

    residuals = []
    for n in range(degree + 2):
        powers = spectrum.lambdas ** n
        quad = float(np.sum(weights * powers))
        exact = float(moments_from_T(T, n, ic)[b - 1, a - 1])
        scale = max(float(np.sum(np.abs(weights) * np.abs(powers))), abs(exact), _TINY)
        residuals.append(abs(quad - exact) / scale)
    observed = observed_exact_degree(residuals, get_tolerance("quadrature_exact"))
    return QuadratureCheck(N=N, a=a, b=b, degree=degree, observed=observed, residuals=tuple(residuals))


def quadrature_table(
    T: BandedMatrix, ic: Optional[InitialConditions], N: int
) -> Dict[Tuple[int, int], QuadratureCheck]:
    """All six (b, a) entries, keyed (b, a)."""
    ic = ic or InitialConditions()
    spectrum = truncation_spectrum(T, N, ic, strict=False)
    return {
        (b, a): gauss_quadrature_check(T, ic, N, a, b, spectrum=spectrum)
        for b in (1, 2)
        for a in (1, 2, 3)
    }


def moment_series_weyl(T: BandedMatrix, ic: Optional[InitialConditions], z, terms: int) -> np.ndarray:
    """Truncated generating function sum_{n < terms} Psi_n / z^(n+1)."""
    z = _as_complex(z)
    ic = ic or InitialConditions()
    total = np.zeros((2, 3), dtype=complex)
    for n, psi in enumerate(moment_sequence(T, terms, ic)):
        total += psi / z ** (n + 1)
    require_finite(total, "moment series")
    return total
