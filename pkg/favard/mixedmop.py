"""Mixed multiple orthogonal polynomials of a banded (2,3) matrix.

Type II vectors B_n = (B^1_n, B^2_n) satisfy T B = x B (right eigen-sequence),
type I vectors A_n = (A^1_n, A^2_n, A^3_n) satisfy A T = x A (left
eigen-sequence). Their values at the eigenvalues normalize the left and right
eigenvectors of the truncations T^[N], from which the Christoffel numbers and
the 2x3 discrete spectral measure are assembled.

Every recurrence here runs in two flavours from a single implementation: with
``Poly`` values (coefficients) and with numpy arrays (pointwise values at the
eigenvalues or at sample points).
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from structlog import get_logger

from favard.bandmat import BandedMatrix, _generate
from favard.config import get_tolerance, settings
from favard.exceptions import (
    ExtremeBandError,
    IndexRangeError,
    InputError,
    VerificationError,
    require_finite,
)
from favard.polycore import (
    IdentityCheck,
    InterlacingReport,
    Poly,
    check_simple,
    dense_charpoly,
    dense_eig,
    interlacing_violations,
    poly_det,
    real_eigensystem,
    real_spectrum,
    root_product,
    root_product_derivative,
)

logger = get_logger()


def degree_law_i(n: int, a: int) -> int:
    """deg A^a_n = ceil((n + 2 - a) / 3) - 1."""
    return -(-(n + 2 - a) // 3) - 1


def degree_law_ii(n: int, b: int) -> int:
    """deg B^b_n = ceil((n + 2 - b) / 2) - 1."""
    return -(-(n + 2 - b) // 2) - 1


def degrees_of_precision(N: int, a: int, b: int) -> int:
    """d_{b,a}(N) = ceil((N + 2 - a) / 3) + ceil((N + 2 - b) / 2) - 1."""
    return -(-(N + 2 - a) // 3) - (-(N + 2 - b) // 2) - 1


@dataclass(frozen=True)
class InitialConditions:
    """Unit lower-triangular initial condition matrices nu (3x3) and xi (2x2)."""

    nu11: float = 0.0
    nu12: float = 0.0
    nu22: float = 0.0
    xi1: float = 0.0

    def __post_init__(self):
        require_finite([self.nu11, self.nu12, self.nu22, self.xi1], "initial conditions")

    @property
    def nu(self) -> np.ndarray:
        return np.array([[1.0, 0.0, 0.0], [self.nu11, 1.0, 0.0], [self.nu12, self.nu22, 1.0]])

    @property
    def xi(self) -> np.ndarray:
        return np.array([[1.0, 0.0], [self.xi1, 1.0]])

    @property
    def nu_inv(self) -> np.ndarray:
        return scipy.linalg.solve_triangular(self.nu, np.eye(3), lower=True, unit_diagonal=True)

    @property
    def xi_inv(self) -> np.ndarray:
        return scipy.linalg.solve_triangular(self.xi, np.eye(2), lower=True, unit_diagonal=True)

    @property
    def is_identity(self) -> bool:
        return self.nu11 == self.nu12 == self.nu22 == self.xi1 == 0.0

    def to_dict(self) -> dict:
        return {"nu11": self.nu11, "nu12": self.nu12, "nu22": self.nu22, "xi1": self.xi1}


def head_selector(N: int) -> np.ndarray:
    """Top-left 2x3 block of I_{N+1}, zero padded when N + 1 < 3."""
    E = np.zeros((2, 3))
    k = min(2, N + 1)
    E[:k, :k] = np.eye(k)
    return E


def bound_matrix(ic: InitialConditions, N: int) -> np.ndarray:
    """Total mass of the discrete measure: xi^-1 E nu^-T."""
    return ic.xi_inv @ head_selector(N) @ ic.nu_inv.T


def darboux_initial_conditions(T: BandedMatrix) -> InitialConditions:
    """Initial conditions under which every weight rho_{k,b} mu_{k,a} is positive.

    For T = L_1 L_2 L_3 Delta U_2 U_1 the rows of nu^-1 and xi^-1 are chosen so
    that mu_2, mu_3 and rho_2 are positive multiples of the first components
    of the left eigenvectors w L_1, w L_1 L_2 and of the right eigenvector
    U_1 u. Those belong to the oscillatory Darboux transforms, whose spectral
    projectors have positive (0, 0) entries, and the rank-one weights
    rho_k mu_k^T then share one sign.
    """
    if T.factors is None:
        raise InputError(
            message="Darboux initial conditions need a matrix built from its bidiagonal factors",
            error_code="NO_FACTORS",
        )
    lowers, _, uppers = T.factors
    if len(lowers) != 3 or len(uppers) != 2:
        raise InputError(
            message=f"Expected 3 lower and 2 upper factors, got {len(lowers)} and {len(uppers)}",
            error_code="BAND_SHAPE",
            details={"lowers": len(lowers), "uppers": len(uppers)},
        )
    l1 = _generate(lowers[0], 2)
    l2 = _generate(lowers[1], 1)
    u1 = _generate(uppers[0], 1)
    entries = {"L1[0]": l1[0], "L1[1]": l1[1], "L2[0]": l2[0], "U1[0]": u1[0]}
    nonpositive = {name: float(v) for name, v in entries.items() if not v > 0}
    if nonpositive:
        raise InputError(
            message="Darboux initial conditions need positive leading factor entries",
            error_code="FACTOR_SIGN",
            details=nonpositive,
        )

    a = 1.0 / l1[0]
    b = 1.0 / (l2[0] * l1[1])
    c = (l1[0] + l2[0]) / (l2[0] * l1[1])
    return InitialConditions(nu11=-a, nu12=a * c - b, nu22=-c, xi1=-1.0 / u1[0])


def _require_23(T: BandedMatrix) -> None:
    if (T.p, T.q) != (2, 3):
        raise InputError(
            message=f"Mixed multiple orthogonality needs a (2,3) banded matrix, got ({T.p},{T.q})",
            error_code="BAND_SHAPE",
            details={"p": T.p, "q": T.q},
        )


def _require_order(T: BandedMatrix, N: int) -> None:
    if N < 0 or N + 2 >= T.n_max:
        raise IndexRangeError(N, T.n_max - 3)


def extreme_products(T: BandedMatrix, N: int) -> Tuple[float, float]:
    """alpha_N = prod T[i+3, i] and beta_N = (-1)^N prod T[i, i+2] over i < N."""
    low, high = T.extreme_entries(N)
    alpha = float(np.prod(low[:N]))
    beta = float((-1) ** N * np.prod(high[:N]))
    return alpha, beta


def _type_ii_run(T: BandedMatrix, N: int, ic: InitialConditions, x, zero, one) -> List[list]:
    """B[b][n] for n <= N + 1 from rows 0..N-1 of T B = x B."""
    B = [[one, ic.xi1 * one], [zero, one]]
    for n in range(N):
        pivot = T.entry(n, n + 2)
        if pivot == 0.0:
            raise ExtremeBandError(n, n + 2)
        couplings = [(m, T.entry(n, m)) for m in range(max(0, n - 3), n + 2)]
        for family in B:
            acc = x * family[n]
            for m, t in couplings:
                if t != 0.0:
                    acc = acc - t * family[m]
            family.append(acc / pivot)
    return B


def _type_i_run(T: BandedMatrix, N: int, ic: InitialConditions, x, zero, one) -> List[list]:
    """A[a][n] for n <= N + 2 from columns 0..N-1 of A T = x A."""
    nu = ic.nu
    A = [[nu[n, a] * one if nu[n, a] != 0.0 else zero for n in range(3)] for a in range(3)]
    for n in range(N):
        pivot = T.entry(n + 3, n)
        if pivot == 0.0:
            raise ExtremeBandError(n + 3, n)
        couplings = [(m, T.entry(m, n)) for m in range(max(0, n - 2), n + 3)]
        for family in A:
            acc = x * family[n]
            for m, t in couplings:
                if t != 0.0:
                    acc = acc - t * family[m]
            family.append(acc / pivot)
    return A


@dataclass(frozen=True, eq=False)
class RecursionFamilies:
    """A[a-1][n] for n <= N + 2 and B[b-1][n] for n <= N + 1, as polynomials."""

    N: int
    A: Tuple[Tuple[Poly, ...], ...]
    B: Tuple[Tuple[Poly, ...], ...]
    matrix: BandedMatrix
    ic: InitialConditions

    def type_i(self, n: int) -> Tuple[Poly, Poly, Poly]:
        return tuple(family[n] for family in self.A)

    def type_ii(self, n: int) -> Tuple[Poly, Poly]:
        return tuple(family[n] for family in self.B)


def _verify_degrees(families: RecursionFamilies) -> None:
    laws = [(family, degree_law_i, a + 1, 3) for a, family in enumerate(families.A)]
    laws += [(family, degree_law_ii, b + 1, 2) for b, family in enumerate(families.B)]
    for family, law, index, generated_from in laws:
        for n, poly in enumerate(family):
            expected = law(n, index)
            if poly.degree > expected:
                raise VerificationError(
                    "degree_law",
                    float(poly.degree - expected),
                    0.0,
                    {"n": n, "index": index, "degree": poly.degree, "expected": expected},
                )
            if n >= generated_from and poly.degree < expected:
                logger.warning("degree_below_law", n=n, index=index, degree=poly.degree, expected=expected)


def recursion_vectors(T: BandedMatrix, N: int, ic: Optional[InitialConditions] = None) -> RecursionFamilies:
    """Type I and type II recursion polynomials up to the indices truncation N needs."""
    _require_23(T)
    _require_order(T, N)
    ic = ic or InitialConditions()
    x, zero, one = Poly.x(), Poly(), Poly.constant(1.0)
    A = _type_i_run(T, N, ic, x, zero, one)
    B = _type_ii_run(T, N, ic, x, zero, one)
    families = RecursionFamilies(
        N=N,
        A=tuple(tuple(f) for f in A),
        B=tuple(tuple(f) for f in B),
        matrix=T,
        ic=ic,
    )
    _verify_degrees(families)
    return families


def family_values(
    T: BandedMatrix, N: int, ic: Optional[InitialConditions], x
) -> Tuple[np.ndarray, np.ndarray]:
    """Pointwise families: A of shape (3, N+3, K) and B of shape (2, N+2, K)."""
    _require_23(T)
    _require_order(T, N)
    ic = ic or InitialConditions()
    x = np.atleast_1d(np.asarray(x))
    dtype = np.result_type(x, float)
    x = x.astype(dtype)
    zero, one = np.zeros_like(x), np.ones_like(x)
    A = np.array(_type_i_run(T, N, ic, x, zero, one))
    B = np.array(_type_ii_run(T, N, ic, x, zero, one))
    return A, B


def char_polys(T: BandedMatrix, N: int) -> List[Poly]:
    """P_0 .. P_{N+1}, with P_n the characteristic polynomial of T^[n-1]."""
    if N + 1 > T.n_max:
        raise IndexRangeError(N, T.n_max - 1)
    return [Poly.constant(1.0)] + [dense_charpoly(T.truncate(n)) for n in range(N + 1)]


@dataclass(frozen=True, eq=False)
class DeterminantalPolys:
    N: int
    Q: Tuple[Poly, ...]
    R: Tuple[Poly, ...]
    alpha: float
    beta: float
    type_i_residual: float
    type_ii_residual: float

    @property
    def consistent(self) -> bool:
        tol = get_tolerance("charpoly_identity")
        return self.type_i_residual <= tol and self.type_ii_residual <= tol


def _coefficient_residual(p: Poly, reference: Poly) -> float:
    n = max(len(p.coeffs), len(reference.coeffs))
    diff = max(abs(p.coefficient(j) - reference.coefficient(j)) for j in range(n))
    return diff / max(abs(c) for c in reference.coeffs)


def determinantal_polys(
    T: BandedMatrix, N: int, ic: Optional[InitialConditions] = None
) -> DeterminantalPolys:
    """Q_{n,N} = det(A_n; A_{N+1}; A_{N+2}) and R_{n,N} = det(B_n; B_{N+1})."""
    families = recursion_vectors(T, N, ic)
    tail_a = [families.type_i(N + 1), families.type_i(N + 2)]
    tail_b = families.type_ii(N + 1)

    Q = [poly_det([families.type_i(n)] + tail_a).trimmed() for n in range(N + 1)] + [Poly(), Poly()]
    R = [poly_det([families.type_ii(n), tail_b]).trimmed() for n in range(N + 1)] + [Poly()]

    alpha, beta = extreme_products(T, N)
    P_N = dense_charpoly(T.truncate(N - 1)) if N >= 1 else Poly.constant(1.0)
    result = DeterminantalPolys(
        N=N,
        Q=tuple(Q),
        R=tuple(R),
        alpha=alpha,
        beta=beta,
        type_i_residual=_coefficient_residual(alpha * Q[N], P_N),
        type_ii_residual=_coefficient_residual(beta * R[N], P_N),
    )
    if not result.consistent:
        logger.warning(
            "determinantal_identity_inconsistent",
            N=N,
            type_i=result.type_i_residual,
            type_ii=result.type_ii_residual,
        )
    return result


@dataclass(frozen=True, eq=False)
class TruncationSpectrum:
    """Biorthonormal eigen-decomposition of T^[N].

    Rows of ``W`` are left eigenvectors, columns of ``U`` right eigenvectors,
    both indexed by the descending eigenvalues. ``w_head`` and ``u_head`` hold
    the first three (two) components even when N + 1 is smaller; the extra
    components are zero, as are the determinants with repeated rows.
    """

    N: int
    lambdas: np.ndarray
    W: np.ndarray
    U: np.ndarray
    alpha: float
    beta: float
    ic: InitialConditions
    w_head: np.ndarray
    u_head: np.ndarray
    a_tail: np.ndarray
    b_tail: np.ndarray
    pn: np.ndarray
    dp: np.ndarray
    uw_residual: float
    power_residual: float
    eigen_residual: float
    mu: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None
    projector_residual: float = float("nan")
    determinantal_residual: float = float("nan")

    @property
    def size(self) -> int:
        return self.N + 1

    @property
    def matrix(self) -> np.ndarray:
        return self.U @ np.diag(self.lambdas) @ self.W


def _lower_spectrum(T: BandedMatrix, N: int) -> np.ndarray:
    """Eigenvalues of T^[N-1] (empty for N = 0), the zeros of P_N."""
    if N == 0:
        return np.array([])
    values, _ = dense_eig(T.truncate(N - 1))
    return values


def _power_residual(M: np.ndarray, U: np.ndarray, lambdas: np.ndarray, W: np.ndarray, max_power: int) -> float:
    norm = max(np.linalg.norm(M, 1), np.finfo(float).tiny)
    worst = 0.0
    power = np.eye(M.shape[0])
    for n in range(1, max_power + 1):
        power = power @ M
        diff = U @ (lambdas[:, None] ** n * W) - power
        worst = max(worst, float(np.max(np.abs(diff))) / norm ** n)
    return worst


def projector_weights(M: np.ndarray, ic: InitialConditions) -> Tuple[np.ndarray, np.ndarray]:
    """Oracle weights xi^-1 P_k[:2, :3] nu^-T from a generic left/right eigensolver.

    Returns the descending (real parts of the) eigenvalues and the (K, 2, 3)
    weights; the spectral projectors P_k do not depend on eigenvector scaling.
    """
    values, left, right = scipy.linalg.eig(M, left=True, right=True)
    order = np.lexsort((-values.imag, -values.real))
    values, left, right = values[order], left[:, order], right[:, order]
    size = M.shape[0]
    rows, cols = min(2, size), min(3, size)
    weights = np.zeros((size, 2, 3), dtype=complex)
    for k in range(size):
        y = left[:, k].conj()
        x = right[:, k]
        head = np.zeros((2, 3), dtype=complex)
        head[:rows, :cols] = np.outer(x[:rows], y[:cols]) / (y @ x)
        weights[k] = ic.xi_inv @ head @ ic.nu_inv.T
    return values, weights


def _permanent3(blocks: np.ndarray) -> np.ndarray:
    """Permanents of a stack of 3x3 matrices."""
    a = blocks
    return (
        a[:, 0, 0] * (a[:, 1, 1] * a[:, 2, 2] + a[:, 1, 2] * a[:, 2, 1])
        + a[:, 0, 1] * (a[:, 1, 0] * a[:, 2, 2] + a[:, 1, 2] * a[:, 2, 0])
        + a[:, 0, 2] * (a[:, 1, 0] * a[:, 2, 1] + a[:, 1, 1] * a[:, 2, 0])
    )


def _spectrum_pieces(T: BandedMatrix, N: int, ic: InitialConditions, lambdas: np.ndarray):
    """Determinantal values Q_{n,N}, R_{n,N} at the points, the tails they are
    built from, and the sizes of the products each determinant sums."""
    A, B = family_values(T, N, ic, lambdas)
    K = len(lambdas)
    width_w, width_u = max(N + 1, 3), max(N + 1, 2)

    a_tail = np.stack([A[:, N + 1, :].T, A[:, N + 2, :].T], axis=1)
    Qv = np.zeros((width_w, K))
    Qmag = np.zeros((width_w, K))
    for n in range(N + 1):
        blocks = np.concatenate([A[:, n, :].T[:, None, :], a_tail], axis=1)
        Qv[n] = np.linalg.det(blocks)
        Qmag[n] = _permanent3(np.abs(blocks))

    b_tail = B[:, N + 1, :].T
    Rv = np.zeros((width_u, K))
    Rmag = np.zeros((width_u, K))
    for n in range(N + 1):
        Rv[n] = B[0, n, :] * b_tail[:, 1] - B[1, n, :] * b_tail[:, 0]
        Rmag[n] = np.abs(B[0, n, :] * b_tail[:, 1]) + np.abs(B[1, n, :] * b_tail[:, 0])
    return Qv, Rv, a_tail, b_tail, Qmag, Rmag


def truncation_spectrum(
    T: BandedMatrix,
    N: int,
    ic: Optional[InitialConditions] = None,
    strict: bool = True,
    max_power: Optional[int] = None,
) -> TruncationSpectrum:
    """Eigenvalues and biorthonormal left/right eigenvectors of T^[N].

    Directions come from the dense left/right eigensolver on the balanced
    truncation. Each right eigenvector is scaled so that its first two
    components match beta (R_{0,N}, R_{1,N})(l_k), which only involve the
    dominant values B^b_{N+1}(l_k); each left eigenvector is then fixed by
    w_k u_k = 1. The fully determinantal vectors, beta R_{n-1,N}(l_k), are
    kept as the diagnostic ``determinantal_residual``. Identity residuals are
    measured in the balanced coordinates D^-1 T^[N] D.
    """
    _require_23(T)
    _require_order(T, N)
    ic = ic or InitialConditions()
    M = T.truncate(N)
    lambdas, X, Y, d = real_eigensystem(M)
    check_simple(lambdas, N)

    _, Rv, a_tail, b_tail, _, _ = _spectrum_pieces(T, N, ic, lambdas)
    alpha, beta = extreme_products(T, N)
    pn = np.real(root_product(_lower_spectrum(T, N), lambdas))
    dp = np.array([np.prod(lam - np.delete(lambdas, k)) for k, lam in enumerate(lambdas)])

    rows = min(2, N + 1)
    target = beta * Rv[:rows]
    head = X[:rows]
    U = X * (np.sum(head * target, axis=0) / np.sum(head ** 2, axis=0))[None, :]
    W = (Y / np.einsum("ik,ik->k", Y, U)[None, :]).T
    require_finite(W, "left eigenvectors")
    require_finite(U, "right eigenvectors")

    u_head = np.zeros((2, N + 1))
    u_head[:rows] = U[:rows]
    w_head = np.zeros((N + 1, 3))
    w_head[:, : min(3, N + 1)] = W[:, : min(3, N + 1)]
    determinantal = beta * Rv[: N + 1]
    determinantal_residual = float(np.max(np.abs(determinantal - U) / np.max(np.abs(U), axis=0)[None, :]))

    Ub = U / d[:, None]
    column = np.linalg.norm(Ub, axis=0)
    Ub, Wb = Ub / column[None, :], (W * d[None, :]) * column[:, None]
    Mb = M * d[None, :] / d[:, None]
    identity = np.eye(N + 1)
    uw_residual = float(max(np.max(np.abs(Ub @ Wb - identity)), np.max(np.abs(Wb @ Ub - identity))))
    max_power = settings["MAX_POWER"] if max_power is None else max_power
    power_residual = _power_residual(Mb, Ub, lambdas, Wb, min(N, max_power))
    norm = max(np.linalg.norm(Mb, 1), np.finfo(float).tiny)
    eigen_residual = float(max(
        np.max(np.abs(Mb @ Ub - Ub * lambdas[None, :])) / (norm * np.max(np.abs(Ub))),
        np.max(np.abs(Wb @ Mb - lambdas[:, None] * Wb)) / (norm * np.max(np.abs(Wb))),
    ))

    spectrum = TruncationSpectrum(
        N=N,
        lambdas=lambdas,
        W=W,
        U=U,
        alpha=alpha,
        beta=beta,
        ic=ic,
        w_head=w_head,
        u_head=u_head,
        a_tail=a_tail,
        b_tail=b_tail,
        pn=pn,
        dp=dp,
        uw_residual=uw_residual,
        power_residual=power_residual,
        eigen_residual=eigen_residual,
        determinantal_residual=determinantal_residual,
    )
    logger.debug(
        "truncation_spectrum_computed",
        N=N,
        uw_residual=uw_residual,
        power_residual=power_residual,
        determinantal_residual=determinantal_residual,
    )

    tolerance = get_tolerance("identity_residual")
    if uw_residual > tolerance or power_residual > tolerance:
        if strict:
            raise VerificationError(
                "uw_identity",
                max(uw_residual, power_residual),
                tolerance,
                {"N": N, "uw_residual": uw_residual, "power_residual": power_residual},
            )
        logger.warning("uw_identity_margin", N=N, uw_residual=uw_residual, power_residual=power_residual)

    numbers = christoffel_numbers(spectrum, strict=strict)
    _, oracle = projector_weights(M, ic)
    weights = numbers.rho[:, :, None] * numbers.mu[:, None, :]
    projector_residual = float(np.max(np.abs(weights - oracle)) / max(np.max(np.abs(weights)), np.finfo(float).tiny))
    return replace(spectrum, mu=numbers.mu, rho=numbers.rho, projector_residual=projector_residual)


@dataclass(frozen=True, eq=False)
class ChristoffelNumbers:
    """mu (K, 3) and rho (K, 2), with the minor-formula values they were checked against."""

    mu: np.ndarray
    rho: np.ndarray
    minor_mu: np.ndarray
    minor_rho: np.ndarray
    residual: float


def _cross_magnitude(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sum of the absolute products entering each component of a x b."""
    i, j = [1, 2, 0], [2, 0, 1]
    return np.abs(a[:, i] * b[:, j]) + np.abs(a[:, j] * b[:, i])


def christoffel_numbers(
    spectrum: TruncationSpectrum, ic: Optional[InitialConditions] = None, strict: bool = True
) -> ChristoffelNumbers:
    """mu_k = nu^-1 w_k[:3], rho_k = xi^-1 u_k[:2]; cross-checked by 2x2 minors.

    The minor form of mu is a cross product of A_{N+1} and A_{N+2}, which
    cancels; its residual is taken relative to the size of the products.
    """
    ic = ic or spectrum.ic
    mu = (ic.nu_inv @ spectrum.w_head.T).T
    rho = (ic.xi_inv @ spectrum.u_head).T

    scale = spectrum.alpha / (spectrum.pn * spectrum.dp)
    a_next, a_last = spectrum.a_tail[:, 0, :], spectrum.a_tail[:, 1, :]
    minor_mu = scale[:, None] * np.cross(a_next, a_last)
    minor_rho = spectrum.beta * np.stack([spectrum.b_tail[:, 1], -spectrum.b_tail[:, 0]], axis=1)

    tiny = np.finfo(float).tiny
    mu_scale = np.abs(scale) * np.max(_cross_magnitude(a_next, a_last), axis=1)
    rho_scale = np.max(np.abs(minor_rho), axis=1)
    residual = max(
        float(np.max(np.max(np.abs(mu - minor_mu), axis=1) / np.maximum(mu_scale, tiny))),
        float(np.max(np.max(np.abs(rho - minor_rho), axis=1) / np.maximum(rho_scale, tiny))),
    )
    tolerance = get_tolerance("cross_check")
    if residual > tolerance:
        if strict:
            raise VerificationError("christoffel_minors", residual, tolerance, {"N": spectrum.N})
        logger.warning("christoffel_minors_disagree", N=spectrum.N, residual=residual)
    return ChristoffelNumbers(mu=mu, rho=rho, minor_mu=minor_mu, minor_rho=minor_rho, residual=residual)


@dataclass(frozen=True, eq=False)
class DiscreteMeasureMatrix:
    """Rank-one 2x3 masses rho_k mu_k^T at the eigenvalues of T^[N]."""

    N: int
    support: np.ndarray
    weights: np.ndarray
    bound: np.ndarray
    mass_residual: float

    def step(self, x):
        """psi_{b,a}(x): right-continuous sums of the masses at nodes <= x.

        Scalar x gives a 2x3 matrix, an array of points a (len, 2, 3) stack.
        """
        ascending = self.support[::-1]
        cumulative = np.concatenate([np.zeros((1, 2, 3)), np.cumsum(self.weights[::-1], axis=0)])
        return cumulative[np.searchsorted(ascending, x, side="right")]

    def entry(self, b: int, a: int, x):
        return self.step(x)[..., b - 1, a - 1]

    @property
    def total_mass(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def moment(self, n: int) -> np.ndarray:
        return np.tensordot(self.support ** n, self.weights, axes=1)

    @property
    def positive(self) -> bool:
        return bool(np.all(self.weights > 0))

    def nonpositive_weights(self) -> List[dict]:
        found = np.argwhere(self.weights <= 0)
        return [
            {"k": int(k), "b": int(b) + 1, "a": int(a) + 1, "value": float(self.weights[k, b, a])}
            for k, b, a in found
        ]


def discrete_measure(
    spectrum: TruncationSpectrum,
    numbers: Optional[ChristoffelNumbers] = None,
    strict: bool = True,
) -> DiscreteMeasureMatrix:
    mu = spectrum.mu if numbers is None else numbers.mu
    rho = spectrum.rho if numbers is None else numbers.rho
    weights = rho[:, :, None] * mu[:, None, :]
    bound = bound_matrix(spectrum.ic, spectrum.N)

    scale = max(float(np.max(np.abs(weights).sum(axis=0))), np.finfo(float).tiny)
    mass_residual = float(np.max(np.abs(weights.sum(axis=0) - bound))) / scale
    tolerance = get_tolerance("cross_check")
    if mass_residual > tolerance:
        if strict:
            raise VerificationError("bound_identity", mass_residual, tolerance, {"N": spectrum.N})
        logger.warning("bound_identity_margin", N=spectrum.N, residual=mass_residual)
    return DiscreteMeasureMatrix(
        N=spectrum.N,
        support=spectrum.lambdas,
        weights=weights,
        bound=bound,
        mass_residual=mass_residual,
    )


def _char_values(T: BandedMatrix, N: int, x: np.ndarray):
    """P_N, P_{N+1} and their derivatives at x, from the truncation spectra."""
    upper, _ = dense_eig(T.truncate(N))
    lower = _lower_spectrum(T, N)
    return (
        np.real(root_product(lower, x)),
        np.real(root_product(upper, x)),
        np.real(root_product_derivative(lower, x)),
        np.real(root_product_derivative(upper, x)),
    )


def generalized_cd_check(
    T: BandedMatrix, N: int, ic: Optional[InitialConditions], x: float, y: float
) -> IdentityCheck:
    """sum_n Q_{n,N}(x) R_{n,N}(y) against the two-term Christoffel-Darboux form.

    ``normalizer`` is alpha_N beta_N, so ``normalized`` is the Wronskian in the
    confluent case.
    """
    ic = ic or InitialConditions()
    points = np.array([x, y], dtype=float)
    Qv, Rv, _, _, Qmag, Rmag = _spectrum_pieces(T, N, ic, points)
    terms = Qv[: N + 1, 0] * Rv[: N + 1, 1]
    lhs = float(np.sum(terms))
    kernel_size = float(np.sum(Qmag[: N + 1, 0] * Rmag[: N + 1, 1]))

    alpha, beta = extreme_products(T, N)
    ab = alpha * beta
    pn, pn1, dpn, dpn1 = _char_values(T, N, points)
    if x == y:
        parts = (dpn1[0] * pn[0], dpn[0] * pn1[0])
        rhs = float((parts[0] - parts[1]) / ab)
        spread = (abs(parts[0]) + abs(parts[1])) / abs(ab)
    else:
        parts = (pn1[0] * pn[1], pn[0] * pn1[1])
        rhs = float((parts[0] - parts[1]) / (ab * (x - y)))
        spread = (abs(parts[0]) + abs(parts[1])) / abs(ab * (x - y))
    scale = max(kernel_size, spread, np.finfo(float).tiny)
    return IdentityCheck(
        lhs=lhs, rhs=rhs, residual=abs(lhs - rhs), scale=scale, confluent=x == y, normalizer=ab
    )


def interlacing_check(T: BandedMatrix, N: int, grid_points: Optional[int] = None) -> InterlacingReport:
    """Interlacing of the zeros of P_{N+1} and P_N, Wronskian positivity, sign corollaries."""
    grid_points = settings["GRID_POINTS"] if grid_points is None else grid_points
    outer = real_spectrum(T.truncate(N))
    inner = real_spectrum(T.truncate(N - 1)) if N >= 1 else np.array([])

    violations = interlacing_violations(outer, inner, "P_N")
    interlaced = not violations

    span = float(outer[0] - outer[-1]) + 1.0
    grid = np.linspace(outer[-1] - 0.1 * span, outer[0] + 0.1 * span, grid_points)
    wronskian = (
        root_product_derivative(outer, grid) * root_product(inner, grid)
        - root_product_derivative(inner, grid) * root_product(outer, grid)
    )
    wronskian_min = float(np.min(wronskian))
    if wronskian_min <= 0:
        k = int(np.argmin(wronskian))
        violations.append({"against": "wronskian", "witness": float(grid[k]), "value": wronskian_min})

    sign_ok = True
    if np.any(root_product_derivative(outer, outer) * root_product(inner, outer) <= 0):
        sign_ok = False
        violations.append({"against": "sign_at_outer_zeros"})
    if N >= 1 and np.any(root_product(outer, inner) * root_product_derivative(inner, inner) >= 0):
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


def discrete_biorthogonality(
    T: BandedMatrix,
    N: int,
    ic: Optional[InitialConditions] = None,
    spectrum: Optional[TruncationSpectrum] = None,
    magnitudes: bool = False,
):
    """G[n, m] = sum_k B_n(l_k) rho_k mu_k^T A_m(l_k)^T for n, m <= N; ideally I.

    With ``magnitudes`` the table of summed term magnitudes is returned as
    well, as ``(G, M)``; :func:`biorthogonality_residual` uses it to measure
    each entry against the size of the terms it cancels.
    """
    ic = ic or (spectrum.ic if spectrum is not None else InitialConditions())
    spectrum = spectrum or truncation_spectrum(T, N, ic, strict=False)
    A, B = family_values(T, N, ic, spectrum.lambdas)
    b_rho = np.einsum("bnk,kb->nk", B[:, : N + 1, :], spectrum.rho)
    a_mu = np.einsum("ank,ka->nk", A[:, : N + 1, :], spectrum.mu)
    G = b_rho @ a_mu.T
    if not magnitudes:
        return G
    b_mag = np.einsum("bnk,kb->nk", np.abs(B[:, : N + 1, :]), np.abs(spectrum.rho))
    a_mag = np.einsum("ank,ka->nk", np.abs(A[:, : N + 1, :]), np.abs(spectrum.mu))
    return G, b_mag @ a_mag.T


def biorthogonality_residual(G: np.ndarray, magnitudes: Optional[np.ndarray] = None) -> float:
    """Max deviation of G from I, entrywise relative to ``max(M, 1)`` when given."""
    deviation = np.abs(G - np.eye(G.shape[0]))
    if magnitudes is not None:
        deviation = deviation / np.maximum(magnitudes, 1.0)
    return float(np.max(deviation))
