"""Dense real polynomials and the brute-force dense-matrix oracle.

Everything in the library that is a polynomial (P_n, P^(1)_n, A^a_n, B^b_n,
Q_{n,N}, R_{n,N}) is a :class:`Poly`. Spectra of truncations are located with
:func:`dense_eig`; :func:`dense_charpoly` is the oracle the recursion-based
families are compared against.
"""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from structlog import get_logger

from favard.config import get_tolerance
from favard.exceptions import DegenerateSpectrumError, EigenSolverError, InputError, require_finite

logger = get_logger()

Scalar = Union[int, float, complex, np.number]
DenseMatrix = np.ndarray


@dataclass(frozen=True)
class Poly:
    """Real polynomial, coefficients in ascending degree.

    Trailing exact zeros are dropped on construction, so the zero polynomial
    is ``Poly(())``. Roundoff-level leading terms are removed only by
    :meth:`trimmed`, because recursion families legitimately carry tiny
    leading coefficients.
    """

    coeffs: Tuple[float, ...] = ()

    __array_ufunc__ = None

    def __post_init__(self):
        values = [float(c) for c in self.coeffs]
        while values and values[-1] == 0.0:
            values.pop()
        object.__setattr__(self, "coeffs", tuple(values))

    @classmethod
    def constant(cls, c: float) -> "Poly":
        return cls((c,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0.0, 1.0))

    @classmethod
    def from_roots(cls, roots: Iterable[Scalar]) -> "Poly":
        """Monic polynomial with the given roots (real part of the expansion)."""
        roots = np.asarray(list(roots))
        if roots.size == 0:
            return cls((1.0,))
        return cls(tuple(np.real(np.poly(roots))[::-1]))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> float:
        return self.coeffs[-1] if self.coeffs else 0.0

    def coefficient(self, j: int) -> float:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0.0

    def trimmed(self, rtol: float = None) -> "Poly":
        """Drop leading coefficients below ``rtol`` times the largest one."""
        if not self.coeffs:
            return self
        rtol = get_tolerance("coefficient_trim") if rtol is None else rtol
        values = list(self.coeffs)
        cutoff = rtol * max(abs(c) for c in values)
        while values and abs(values[-1]) <= cutoff:
            values.pop()
        return Poly(tuple(values))

    def derivative(self) -> "Poly":
        return poly_derivative(self)

    def allclose(self, other: "Poly", rtol: float = 1e-9) -> bool:
        """Coefficient-wise comparison relative to the largest coefficient of either."""
        n = max(len(self.coeffs), len(other.coeffs))
        if n == 0:
            return True
        a = np.array([self.coefficient(j) for j in range(n)])
        b = np.array([other.coefficient(j) for j in range(n)])
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
        return bool(np.max(np.abs(a - b)) <= rtol * scale)

    def __call__(self, x):
        return poly_eval(self, x)

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self.coefficient(j) + other.coefficient(j) for j in range(n)))

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly()
            return Poly(tuple(np.convolve(self.coeffs, other.coeffs)))
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Poly(tuple(c * float(other) for c in self.coeffs))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Poly(tuple(c / float(other) for c in self.coeffs))
        return NotImplemented

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"


def _as_poly(value) -> "Poly":
    if isinstance(value, Poly):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Poly((float(value),))
    return NotImplemented


def poly_eval(p: Poly, x):
    """Horner evaluation; works elementwise on arrays and for complex x."""
    result = 0.0 * x
    if not p.coeffs:
        return result
    result = result + p.coeffs[-1]
    for c in reversed(p.coeffs[:-1]):
        result = result * x + c
    return result


def poly_derivative(p: Poly) -> Poly:
    return Poly(tuple(j * c for j, c in enumerate(p.coeffs))[1:])


def poly_det(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a 2x2 or 3x3 matrix of polynomials by cofactor expansion."""
    n = len(rows)
    if n == 2:
        (a, b), (c, d) = rows
        return a * d - b * c
    if n == 3:
        total = Poly()
        for j in range(3):
            minor = [[rows[i][k] for k in range(3) if k != j] for i in (1, 2)]
            term = rows[0][j] * poly_det(minor)
            total = total + term if j % 2 == 0 else total - term
        return total
    raise InputError(
        message=f"poly_det supports 2x2 and 3x3, got {n}x{n}",
        error_code="UNSUPPORTED_SIZE",
        details={"size": n},
    )


def as_dense(M, what: str = "matrix") -> DenseMatrix:
    """Validate a square finite array and return it as a float (or complex) ndarray."""
    A = np.asarray(M)
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(
            message=f"{what} must be square, got shape {A.shape}",
            error_code="NOT_SQUARE",
            details={"shape": list(A.shape)},
        )
    require_finite(A, what)
    return A


def dense_charpoly(M) -> Poly:
    """det(xI - M) as the monic product over the eigenvalues of M."""
    A = as_dense(M, "dense_charpoly input")
    if A.shape[0] == 0:
        return Poly((1.0,))
    values = _eigvals(A)
    coeffs = np.real(np.poly(values))[::-1].copy()
    coeffs[-1] = 1.0
    return Poly(tuple(coeffs))


def _eigvals(A: np.ndarray) -> np.ndarray:
    try:
        values = scipy.linalg.eigvals(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(str(exc), A.shape[0])
    if not np.all(np.isfinite(values)):
        raise EigenSolverError("non-finite eigenvalues", A.shape[0])
    return values


def dense_eig(M) -> Tuple[np.ndarray, dict]:
    """Eigenvalues sorted by descending real part (ties: descending imaginary part).

    Returns the eigenvalues and diagnostics with per-eigenvalue condition
    numbers ``1/|y^H x|`` for unit left/right eigenvectors.
    """
    A = as_dense(M, "dense_eig input")
    n = A.shape[0]
    try:
        w, vl, vr = scipy.linalg.eig(A, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(str(exc), n)
    if not np.all(np.isfinite(w)):
        raise EigenSolverError("non-finite eigenvalues", n)

    order = np.lexsort((-w.imag, -w.real))
    overlap = np.abs(np.einsum("ij,ij->j", vl.conj(), vr))
    condition = 1.0 / np.maximum(overlap, np.finfo(float).tiny)

    diagnostics = {
        "size": n,
        "condition": condition[order],
        "max_imag": float(np.max(np.abs(w.imag))) if n else 0.0,
    }
    logger.debug("dense_eig", size=n, max_condition=float(np.max(condition)) if n else 1.0)
    return w[order], diagnostics


def real_spectrum(M, what: str = "truncation") -> np.ndarray:
    """Real eigenvalues in descending order; complex pairs are an EigenSolverError."""
    values, diagnostics = dense_eig(M)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    if diagnostics["max_imag"] > get_tolerance("complex_part") * scale:
        raise EigenSolverError(
            f"non-real eigenvalues in {what} (max |imag| = {diagnostics['max_imag']:.3e})",
            values.size,
        )
    return np.sort(values.real)[::-1]


def real_eigensystem(M, what: str = "truncation") -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Real eigenvalues (descending) with right and left eigenvectors of M.

    The eigensolver runs on the balanced matrix D^-1 M D; the returned
    columns satisfy M x_k = l_k x_k and y_k^T M = l_k y_k^T in the original
    coordinates. The balancing vector d is returned so that callers can
    measure residuals in the balanced coordinates.
    """
    A = as_dense(M, "real_eigensystem input")
    n = A.shape[0]
    balanced, scaling = scipy.linalg.matrix_balance(A, permute=False, separate=True)
    d = scaling[0]
    try:
        w, vl, vr = scipy.linalg.eig(balanced, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(str(exc), n)
    if not np.all(np.isfinite(w)):
        raise EigenSolverError("non-finite eigenvalues", n)
    scale = max(1.0, float(np.max(np.abs(w)))) if n else 1.0
    max_imag = float(np.max(np.abs(w.imag))) if n else 0.0
    if max_imag > get_tolerance("complex_part") * scale:
        raise EigenSolverError(f"non-real eigenvalues in {what} (max |imag| = {max_imag:.3e})", n)

    order = np.argsort(-w.real)
    right = d[:, None] * np.real(vr[:, order])
    left = np.real(vl[:, order]) / d[:, None]
    return w.real[order], right, left, d


def root_product(roots: np.ndarray, x) -> np.ndarray:
    """Evaluate prod_l (x - roots_l) elementwise over x."""
    x = np.atleast_1d(np.asarray(x))
    if len(roots) == 0:
        return np.ones_like(x, dtype=np.result_type(x, float))
    return np.prod(x[:, None] - np.asarray(roots)[None, :], axis=1)


def root_product_derivative(roots: np.ndarray, x) -> np.ndarray:
    """Derivative of :func:`root_product`: sum over k of prod_{l != k} (x - roots_l)."""
    x = np.atleast_1d(np.asarray(x))
    roots = np.asarray(roots)
    total = np.zeros_like(x, dtype=np.result_type(x, roots, float))
    for k in range(len(roots)):
        total = total + root_product(np.delete(roots, k), x)
    return total


def lu_determinant(A) -> Scalar:
    """Determinant via partial-pivoting LU."""
    A = np.asarray(A)
    if A.shape[0] == 0:
        return 1.0
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    swaps = int(np.sum(piv != np.arange(A.shape[0])))
    return np.prod(np.diag(lu)) * (-1.0) ** swaps


def adjugate(A) -> np.ndarray:
    """Adjugate through the SVD, well defined for singular A."""
    A = np.asarray(A)
    n = A.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=A.dtype)
    U, s, Vh = np.linalg.svd(A)
    phase = np.linalg.det(U) * np.linalg.det(Vh)
    cofactors = np.array([np.prod(np.delete(s, i)) for i in range(n)])
    adj = phase * (Vh.conj().T * cofactors) @ U.conj().T
    return adj if np.iscomplexobj(A) else adj.real


def balanced_solve(A, B) -> np.ndarray:
    """Solve A X = B after a diagonal balancing similarity D^-1 A D."""
    A = np.asarray(A)
    balanced, scaling = scipy.linalg.matrix_balance(A, permute=False, separate=True)
    d = scaling[0]
    Y = scipy.linalg.solve(balanced, np.asarray(B) / d[:, None])
    return d[:, None] * Y


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of an identity evaluated independently."""

    lhs: float
    rhs: float
    residual: float
    scale: float
    confluent: bool = False
    normalizer: float = 1.0

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual

    @property
    def normalized(self) -> float:
        """rhs times the sign-fixing normalizer; positive for a confluent kernel of an oscillatory truncation."""
        return self.rhs * self.normalizer


def selector(rows: int, size: int) -> np.ndarray:
    """The rows x size matrix with ones at (i, i) for i < min(rows, size)."""
    E = np.zeros((rows, size))
    for i in range(min(rows, size)):
        E[i, i] = 1.0
    return E


@dataclass(frozen=True, eq=False)
class InterlacingReport:
    """Zeros of consecutive characteristic polynomials and the Wronskian sign test."""

    N: int
    outer: np.ndarray
    inner: np.ndarray
    interlaced: bool
    wronskian_min: float
    wronskian_positive: bool
    sign_checks: bool
    violations: Tuple[dict, ...] = ()

    @property
    def ok(self) -> bool:
        return self.interlaced and self.wronskian_positive and self.sign_checks


def interlacing_violations(outer: np.ndarray, inner: np.ndarray, against: str = "P_N") -> List[dict]:
    """Strict alternation outer[0] > inner[0] > outer[1] > ... > inner[-1] > outer[-1].

    Both arrays descending, ``len(outer) == len(inner) + 1``.
    """
    violations = []
    if len(outer) != len(inner) + 1:
        return [{"against": against, "reason": "zero count mismatch",
                 "outer": len(outer), "inner": len(inner)}]
    for i, b in enumerate(inner):
        if not outer[i] > b > outer[i + 1]:
            violations.append({
                "against": against,
                "index": i,
                "witness": float(b),
                "bracket": [float(outer[i + 1]), float(outer[i])],
            })
    return violations


def check_simple(lambdas: np.ndarray, N: int) -> None:
    """Raise DegenerateSpectrumError when two descending eigenvalues nearly coincide."""
    if len(lambdas) < 2:
        return
    scale = max(1.0, float(np.max(np.abs(lambdas))))
    gap = float(np.min(np.abs(np.diff(lambdas))))
    threshold = get_tolerance("degenerate_gap") * scale
    if gap < threshold:
        raise DegenerateSpectrumError(N, gap, threshold)


@dataclass(frozen=True)
class QuadratureCheck:
    """Exactness of an N-node quadrature for one measure entry, degree by degree."""

    N: int
    a: int
    b: int
    degree: int
    observed: int
    residuals: Tuple[float, ...]

    @property
    def exact(self) -> bool:
        return self.observed >= self.degree

    @property
    def optimality_residual(self) -> float:
        return self.residuals[self.degree + 1] if len(self.residuals) > self.degree + 1 else float("nan")

    @property
    def optimal(self) -> bool:
        return self.optimality_residual > get_tolerance("optimality_gap")


def observed_exact_degree(residuals: Sequence[float], tolerance: float) -> int:
    """Largest n with residuals[0..n] all below tolerance; -1 if residuals[0] fails."""
    observed = -1
    for n, r in enumerate(residuals):
        if not r < tolerance:
            break
        observed = n
    return observed
