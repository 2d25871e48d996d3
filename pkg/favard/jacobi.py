"""Jacobi matrices: recursion polynomials, masses, Christoffel-Darboux kernels,
step functions and the scalar Weyl function of a truncation.

Conventions: J[n, n] = m_n, J[n, n+1] = 1, J[n, n-1] = ell_n with ell_0 = 1,
so that P_{n+1} = (x - m_n) P_n - ell_n P_{n-1} and H_n = ell_1 ... ell_n.
Polynomials are evaluated pointwise through the recurrence; monomial
coefficients are only produced for the Poly-valued operations.
"""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import scipy.linalg
from structlog import get_logger

from favard.bandmat import BandedMatrix, Generator, _generate
from favard.config import get_tolerance
from favard.exceptions import (
    BandLengthError,
    IndexRangeError,
    PoleProximityError,
    SubdiagonalPositivityError,
    VerificationError,
    require_finite,
)
from favard.polycore import (
    IdentityCheck,
    InterlacingReport,
    Poly,
    QuadratureCheck,
    check_simple,
    interlacing_violations,
    observed_exact_degree,
    real_spectrum,
)

logger = get_logger()


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    """Tridiagonal matrix with unit superdiagonal, known on indices 0..n_max-1.

    ``ell[0]`` is the convention value and is ignored; ``ell[n]`` sits at
    (n, n-1).
    """

    m: Generator
    ell: Generator
    n_max: int

    p = 1
    q = 1

    def __post_init__(self):
        if self.n_max < 1:
            raise IndexRangeError(self.n_max, 1, "operational length")
        for name, gen in (("m", self.m), ("ell", self.ell)):
            if not callable(gen) and len(gen) < self.n_max:
                raise BandLengthError(0 if name == "m" else -1, len(gen), self.n_max)
        require_finite(_generate(self.m, self.n_max), "Jacobi diagonal")
        ell = _generate(self.ell, self.n_max)
        require_finite(ell, "Jacobi subdiagonal")
        for j in range(1, self.n_max):
            if not ell[j] > 0:
                raise SubdiagonalPositivityError(j, float(ell[j]))

    @classmethod
    def constant(cls, m0: float, ell0: float, n_max: int = 128) -> "JacobiMatrix":
        return cls(m=[float(m0)] * n_max, ell=[1.0] + [float(ell0)] * (n_max - 1), n_max=n_max)

    def diag(self, n: int) -> float:
        return float(self.m(n) if callable(self.m) else self.m[n])

    def sub(self, n: int) -> float:
        if n == 0:
            return 1.0
        return float(self.ell(n) if callable(self.ell) else self.ell[n])

    def entry(self, i: int, j: int) -> float:
        if j == i:
            return self.diag(i)
        if j == i + 1:
            return 1.0
        if j == i - 1:
            return self.sub(i)
        return 0.0

    def _check(self, N: int, extra: int = 0) -> None:
        if not 0 <= N < self.n_max - extra:
            raise IndexRangeError(N, self.n_max - 1 - extra)

    def truncate(self, N: int) -> np.ndarray:
        self._check(N)
        size = N + 1
        M = np.diag([self.diag(n) for n in range(size)])
        if size > 1:
            M += np.diag(np.ones(size - 1), 1)
            M += np.diag([self.sub(n) for n in range(1, size)], -1)
        return M

    def shift(self, s: float) -> "JacobiMatrix":
        return JacobiMatrix(
            m=[self.diag(n) + s for n in range(self.n_max)],
            ell=[self.sub(n) for n in range(self.n_max)],
            n_max=self.n_max,
        )

    def norm1(self, N: int) -> float:
        return float(np.max(np.sum(np.abs(self.truncate(N)), axis=0)))

    def to_banded(self) -> BandedMatrix:
        return BandedMatrix(
            p=1,
            q=1,
            bands={
                -1: [self.sub(n) for n in range(1, self.n_max)],
                0: [self.diag(n) for n in range(self.n_max)],
                1: [1.0] * (self.n_max - 1),
            },
            n_max=self.n_max,
        )

    def h_products(self, N: int) -> np.ndarray:
        """H_0..H_N."""
        return np.cumprod([1.0] + [self.sub(n) for n in range(1, N + 1)])


@dataclass(frozen=True)
class RecursionPolys:
    P: Tuple[Poly, ...]
    H: Tuple[float, ...]
    Q: Tuple[Poly, ...]


@dataclass(frozen=True, eq=False)
class JacobiSpectralData:
    """Eigenvalues of J^[N] (descending) with their masses.

    ``christoffel`` holds the numbers sum_l P_l(lambda_k)^2 / H_l, whose
    reciprocals reproduce the masses; ``golub_welsch`` are the squared first
    components of the orthonormal eigenvectors of the symmetrized truncation.
    """

    N: int
    lambdas: np.ndarray
    masses: np.ndarray
    christoffel: np.ndarray
    golub_welsch: np.ndarray
    mass_residual: float


@dataclass(frozen=True)
class ScalarWeyl:
    z: complex
    value: complex
    partial_fraction: complex
    residual: float


def _run(J: JacobiMatrix, x, prev, cur, n_from: int, n_to: int) -> list:
    """Apply y_{n+1} = (x - m_n) y_n - ell_n y_{n-1} for n in [n_from, n_to)."""
    seq = [prev, cur]
    for n in range(n_from, n_to):
        seq.append((x - J.diag(n)) * seq[-1] - J.sub(n) * seq[-2])
    return seq


def recursion_polys(J: JacobiMatrix, N: int) -> RecursionPolys:
    J._check(N)
    one = Poly.constant(1.0)
    P = _run(J, Poly.x(), Poly(), one, 0, N + 1)[1:]
    H = J.h_products(N)
    Q = [P[n] / H[n] for n in range(N + 1)]
    return RecursionPolys(P=tuple(P), H=tuple(float(h) for h in H), Q=tuple(Q))


def second_kind(J: JacobiMatrix, N: int) -> Poly:
    """P^(1)_{N+1} from P^(1)_0 = 0, P^(1)_1 = 1; the characteristic polynomial of rows 1..N."""
    J._check(N)
    return _run(J, Poly.x(), Poly(), Poly.constant(1.0), 1, N + 1)[-1]


def truncated_polys(J: JacobiMatrix, N: int) -> List[Poly]:
    """P^[k]_{N+1} = det(xI - J[k..N, k..N]) for k = 0..N+1, by backward recurrence."""
    J._check(N)
    x = Poly.x()
    polys = {N + 1: Poly.constant(1.0)}
    for k in range(N, -1, -1):
        term = (x - J.diag(k)) * polys[k + 1]
        if k + 2 <= N + 1:
            term = term - J.sub(k + 1) * polys[k + 2]
        polys[k] = term
    return [polys[k] for k in range(N + 2)]


def _values(J: JacobiMatrix, N: int, x) -> Tuple[np.ndarray, np.ndarray]:
    """P_0..P_{N+1} and their derivatives at the points x."""
    x = np.atleast_1d(np.asarray(x))
    dtype = np.result_type(x, float)
    P = np.zeros((N + 2,) + x.shape, dtype=dtype)
    dP = np.zeros_like(P)
    P[0] = 1.0
    for n in range(N + 1):
        prev = P[n - 1] if n >= 1 else 0.0
        dprev = dP[n - 1] if n >= 1 else 0.0
        ell = J.sub(n) if n >= 1 else 0.0
        P[n + 1] = (x - J.diag(n)) * P[n] - ell * prev
        dP[n + 1] = P[n] + (x - J.diag(n)) * dP[n] - ell * dprev
    return P, dP


def symmetrizer(J: JacobiMatrix, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """H^{1/2} as a vector and the symmetric truncation H^{-1/2} J^[N] H^{1/2}."""
    J._check(N)
    h_sqrt = np.sqrt(J.h_products(N))
    off = np.sqrt([J.sub(n) for n in range(1, N + 1)])
    S = np.diag([J.diag(n) for n in range(N + 1)]) + np.diag(off, 1) + np.diag(off, -1)
    return h_sqrt, S


def _symmetric_eigh(J: JacobiMatrix, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of the symmetrized truncation."""
    d = np.array([J.diag(n) for n in range(N + 1)])
    if N == 0:
        return d.copy(), np.ones((1, 1))
    e = np.sqrt([J.sub(n) for n in range(1, N + 1)])
    w, v = scipy.linalg.eigh_tridiagonal(d, e)
    return w[::-1], v[:, ::-1]


def golub_welsch_masses(J: JacobiMatrix, N: int) -> np.ndarray:
    J._check(N)
    _, v = _symmetric_eigh(J, N)
    return v[0, :] ** 2


def spectral_data(J: JacobiMatrix, N: int, strict: bool = True) -> JacobiSpectralData:
    """Masses mu_k = H_N / (P_N(lambda_k) P'_{N+1}(lambda_k)).

    This is P^(1)_{N+1} / P'_{N+1} with the second-kind value taken from the
    Casoratian P_{N+1} P^(1)_N - P_N P^(1)_{N+1} = -H_N, which keeps every
    factor a dominant recurrence value. The residual is the larger of the
    relative gap to 1 / christoffel and the absolute gap to Golub-Welsch.
    """
    J._check(N)
    lambdas, vectors = _symmetric_eigh(J, N)
    check_simple(lambdas, N)

    P, dP = _values(J, N, lambdas)
    H = J.h_products(N)
    masses = H[N] / (P[N] * dP[N + 1])
    christoffel = np.sum(P[: N + 1] ** 2 / H[:, None], axis=0)
    golub_welsch = vectors[0, :] ** 2

    relative = float(np.max(np.abs(masses * christoffel - 1.0)))
    absolute = float(np.max(np.abs(masses - golub_welsch)))
    mass_residual = max(relative, absolute)
    tolerance = get_tolerance("mass_agreement")
    if mass_residual > tolerance:
        if strict:
            raise VerificationError("mass_agreement", mass_residual, tolerance, {"N": N})
        logger.warning("mass_formulas_disagree", N=N, relative=relative, absolute=absolute)
    logger.debug("jacobi_spectrum_computed", N=N, mass_residual=mass_residual)

    return JacobiSpectralData(
        N=N,
        lambdas=lambdas,
        masses=masses,
        christoffel=christoffel,
        golub_welsch=golub_welsch,
        mass_residual=mass_residual,
    )


def cd_check(J: JacobiMatrix, N: int, x: float, y: float) -> IdentityCheck:
    """Christoffel-Darboux identity; the confluent form is used when x == y."""
    J._check(N)
    H = J.h_products(N)
    P, dP = _values(J, N, np.array([x, y], dtype=float))
    Px, Py = P[:, 0], P[:, 1]
    terms = Px[: N + 1] * Py[: N + 1] / H
    lhs = float(np.sum(terms))
    if x == y:
        rhs = float((dP[N + 1, 0] * Px[N] - dP[N, 0] * Px[N + 1]) / H[N])
        scale = float(abs(dP[N + 1, 0] * Px[N]) + abs(dP[N, 0] * Px[N + 1])) / H[N]
    else:
        rhs = float((Px[N + 1] * Py[N] - Px[N] * Py[N + 1]) / (H[N] * (x - y)))
        scale = float(abs(Px[N + 1] * Py[N]) + abs(Px[N] * Py[N + 1])) / (H[N] * abs(x - y))
    scale = max(scale, float(np.sum(np.abs(terms))), np.finfo(float).tiny)
    return IdentityCheck(lhs=lhs, rhs=rhs, residual=abs(lhs - rhs), scale=scale, confluent=x == y)


def step_function(data: JacobiSpectralData, x):
    """Right-continuous distribution function of the discrete measure."""
    ascending = data.lambdas[::-1]
    cumulative = np.concatenate([[0.0], np.cumsum(data.masses[::-1])])
    idx = np.searchsorted(ascending, x, side="right")
    return cumulative[idx]


def _weyl_ratio(J: JacobiMatrix, N: int, z: complex) -> complex:
    """P^(1)_{N+1}(z) / P_{N+1}(z), both recurrences rescaled jointly to avoid overflow."""
    p_prev, p_cur = 0j, 1.0 + 0j
    s_prev, s_cur = 0j, 0j
    for n in range(N + 1):
        a = z - J.diag(n)
        ell = J.sub(n) if n >= 1 else 0.0
        p_prev, p_cur = p_cur, a * p_cur - ell * p_prev
        if n == 0:
            s_prev, s_cur = s_cur, 1.0 + 0j
        else:
            s_prev, s_cur = s_cur, a * s_cur - ell * s_prev
        scale = max(abs(p_cur), abs(p_prev), 1e-300)
        p_prev, p_cur, s_prev, s_cur = p_prev / scale, p_cur / scale, s_prev / scale, s_cur / scale
    return s_cur / p_cur


def _pole_guard(lambdas: np.ndarray, z: complex) -> None:
    distance = float(np.min(np.abs(z - lambdas)))
    scale = max(1.0, float(np.max(np.abs(lambdas))))
    if distance <= get_tolerance("pole_proximity") * scale:
        raise PoleProximityError(z, distance)


def weyl(J: JacobiMatrix, N: int, z: complex) -> ScalarWeyl:
    """S^[N](z) as a ratio of polynomials, cross-checked against partial fractions."""
    z = complex(z)
    data = spectral_data(J, N)
    _pole_guard(data.lambdas, z)
    value = _weyl_ratio(J, N, z)
    partial = complex(np.sum(data.masses / (z - data.lambdas)))
    residual = abs(value - partial) / max(abs(partial), np.finfo(float).tiny)
    if residual > get_tolerance("weyl_routes"):
        logger.warning("weyl_routes_disagree", N=N, z=str(z), residual=residual)
    return ScalarWeyl(z=z, value=value, partial_fraction=partial, residual=residual)


@dataclass(frozen=True, eq=False)
class JacobiEigenvectors:
    U: np.ndarray
    W: np.ndarray
    lambdas: np.ndarray
    uw_residual: float
    power_residual: float


def eigenvector_matrices(J: JacobiMatrix, N: int, max_power: int = 10) -> JacobiEigenvectors:
    """u_k = (P_0..P_N)(lambda_k) as columns, w_k = mu_k (Q_0..Q_N)(lambda_k) as rows.

    Residuals are measured after the similarity H^{-1/2} . H^{1/2} (and
    mu^{-1/2} . mu^{1/2} for W U), where both products are orthonormal.
    """
    data = spectral_data(J, N)
    P, _ = _values(J, N, data.lambdas)
    H = J.h_products(N)
    U = P[: N + 1]
    W = (data.masses[:, None] * (P[: N + 1] / H[:, None]).T)
    identity = np.eye(N + 1)
    h_sqrt = np.sqrt(H)
    m_sqrt = np.sqrt(np.abs(data.masses))
    left = (U @ W - identity) * h_sqrt[None, :] / h_sqrt[:, None]
    right = (W @ U - identity) * m_sqrt[None, :] / m_sqrt[:, None]
    uw_residual = float(max(np.max(np.abs(left)), np.max(np.abs(right))))

    _, S = symmetrizer(J, N)
    norm = max(np.linalg.norm(S, 1), 1.0)
    T = J.truncate(N)
    power_residual = 0.0
    D = np.diag(data.lambdas)
    for n in range(1, min(N, max_power) + 1):
        lhs = U @ np.linalg.matrix_power(D, n) @ W
        rhs = np.linalg.matrix_power(T, n)
        gap = (lhs - rhs) * h_sqrt[None, :] / h_sqrt[:, None]
        power_residual = max(power_residual, float(np.max(np.abs(gap))) / norm ** n)
    return JacobiEigenvectors(U=U, W=W, lambdas=data.lambdas, uw_residual=uw_residual, power_residual=power_residual)


def resolvent(J: JacobiMatrix, N: int, z: complex) -> np.ndarray:
    """(zI - J^[N])^{-1} = U (zI - D)^{-1} W, checked against a dense solve."""
    vectors = eigenvector_matrices(J, N, max_power=0)
    _pole_guard(vectors.lambdas, complex(z))
    R = vectors.U @ np.diag(1.0 / (z - vectors.lambdas)) @ vectors.W
    dense = np.linalg.inv(z * np.eye(N + 1) - J.truncate(N))
    residual = float(np.max(np.abs(R - dense)) / max(np.max(np.abs(dense)), np.finfo(float).tiny))
    tolerance = get_tolerance("identity_residual")
    if residual > tolerance:
        raise VerificationError("jacobi_resolvent", residual, tolerance, {"N": N})
    return R


def discrete_orthogonality(J: JacobiMatrix, N: int) -> np.ndarray:
    """G[n, k] = sum_j P_n(lambda_j) mu_j lambda_j^k, relative to sum_j |P_n mu_j lambda_j^k|.

    Entries with k < n vanish.
    """
    data = spectral_data(J, N)
    P, _ = _values(J, N, data.lambdas)
    powers = data.lambdas[None, :] ** np.arange(N + 1)[:, None]
    terms = P[: N + 1, None, :] * data.masses[None, None, :] * powers[None, :, :]
    scale = np.maximum(np.sum(np.abs(terms), axis=2), np.finfo(float).tiny)
    return np.sum(terms, axis=2) / scale


def moments(J: JacobiMatrix, n: int) -> float:
    """e_0^T J^n e_0 from the smallest truncation that contains every path of length n."""
    M = n // 2
    J._check(M)
    T = J.truncate(M)
    row = np.zeros(M + 1)
    row[0] = 1.0
    for _ in range(n):
        row = row @ T
    return float(row[0])


def measure_moment(data: JacobiSpectralData, n: int) -> float:
    return float(np.sum(data.masses * data.lambdas ** n))


def shift_bound(J: JacobiMatrix, N_list: Iterable[int]) -> float:
    """sup of |negative eigenvalues| over the given truncations (zero if none)."""
    bound = 0.0
    for N in N_list:
        lambdas, _ = _symmetric_eigh(J, N)
        bound = max(bound, float(-np.min(lambdas)))
    return bound


def interlacing_check(J: JacobiMatrix, N: int, grid_points: int = 100) -> InterlacingReport:
    """Zeros of P_{N+1} interlace those of P_N and of P^(1)_{N+1}; Wronskian positivity."""
    J._check(N)
    outer, _ = _symmetric_eigh(J, N)
    inner = _symmetric_eigh(J, N - 1)[0] if N >= 1 else np.array([])
    second = real_spectrum(J.truncate(N)[1:, 1:], "deflated truncation") if N >= 1 else np.array([])

    violations = interlacing_violations(outer, inner, "P_N")
    violations += interlacing_violations(outer, second, "second_kind")
    interlaced = not violations

    span = float(outer[0] - outer[-1]) + 1.0
    grid = np.linspace(outer[-1] - 0.1 * span, outer[0] + 0.1 * span, grid_points)
    P, dP = _values(J, N, grid)
    wronskian = dP[N + 1] * P[N] - dP[N] * P[N + 1]
    wronskian_min = float(np.min(wronskian))
    if wronskian_min <= 0:
        k = int(np.argmin(wronskian))
        violations.append({"against": "wronskian", "witness": float(grid[k]), "value": wronskian_min})

    sign_ok = True
    P_out, dP_out = _values(J, N, outer)
    if np.any(dP_out[N + 1] * P_out[N] <= 0):
        sign_ok = False
        violations.append({"against": "sign_at_outer_zeros"})
    if N >= 1:
        P_in, dP_in = _values(J, N, inner)
        if np.any(P_in[N + 1] * dP_in[N] >= 0):
            sign_ok = False
            violations.append({"against": "sign_at_inner_zeros"})

    return InterlacingReport(
        N=N,
        outer=outer,
        inner=inner,
        interlaced=interlaced,
        wronskian_min=wronskian_min,
        wronskian_positive=wronskian_min > 0,
        sign_checks=sign_ok,
        violations=tuple(violations),
    )


def quadrature_check(J: JacobiMatrix, N: int) -> QuadratureCheck:
    """Gauss quadrature on the N+1 zeros of P_{N+1}: exact through degree 2N+1."""
    data = spectral_data(J, N)
    degree = 2 * N + 1
    J._check((degree + 1) // 2)
    residuals = []
    for n in range(degree + 2):
        powers = data.lambdas ** n
        quad = float(np.sum(data.masses * powers))
        exact = moments(J, n)
        scale = max(float(np.sum(data.masses * np.abs(powers))), abs(exact), np.finfo(float).tiny)
        residuals.append(abs(quad - exact) / scale)
    observed = observed_exact_degree(residuals, get_tolerance("quadrature_exact"))
    return QuadratureCheck(N=N, a=1, b=1, degree=degree, observed=observed, residuals=tuple(residuals))
