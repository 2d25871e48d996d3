"""Banded matrices: truncation, shifts, Neville bidiagonal factorization,
oscillation certificates and Darboux transformations."""

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from structlog import get_logger

from favard.config import get_tolerance, settings
from favard.exceptions import (
    BandLengthError,
    DarbouxVariantError,
    DegenerateFactorizationError,
    IndexRangeError,
    InputError,
    ShiftSearchExhaustedError,
    VerificationError,
    require_finite,
)
from favard.polycore import as_dense

logger = get_logger()

Generator = Union[Callable[[int], float], Sequence[float]]

_ZERO_FACTOR = 64 * np.finfo(float).eps


def _generate(gen: Generator, length: int) -> np.ndarray:
    if callable(gen):
        return np.array([float(gen(k)) for k in range(length)])
    return np.asarray(gen[:length], dtype=float)


@dataclass(frozen=True, eq=False)
class BandedMatrix:
    """Semi-infinite banded matrix known on rows and columns 0..n_max-1.

    ``bands[d]`` generates diagonal offset ``d`` (``d > 0`` above the main
    diagonal) from its top-left end, either as a callable or a finite list.
    Matrices built by :func:`from_factors` keep the factor entries in
    ``factors`` as (lowers, delta, uppers); a shift drops them.
    """

    p: int
    q: int
    bands: Mapping[int, Generator]
    n_max: int
    factors: Optional[Tuple[Tuple[Generator, ...], Generator, Tuple[Generator, ...]]] = None

    def __post_init__(self):
        if self.n_max < 1:
            raise IndexRangeError(self.n_max, 1, "operational length")
        for d, gen in self.bands.items():
            if not -self.q <= d <= self.p:
                raise InputError(
                    message=f"Diagonal offset {d:+d} outside band (-{self.q}, +{self.p})",
                    error_code="BAND_OFFSET",
                    details={"offset": d, "p": self.p, "q": self.q},
                )
            required = max(self.n_max - abs(d), 0)
            if not callable(gen) and len(gen) < required:
                raise BandLengthError(d, len(gen), required)
            require_finite(_generate(gen, required), f"diagonal {d:+d}")
        object.__setattr__(self, "bands", dict(self.bands))

    @property
    def is_jacobi(self) -> bool:
        return self.p == 1 and self.q == 1

    def entry(self, i: int, j: int) -> float:
        if not (0 <= i < self.n_max and 0 <= j < self.n_max):
            raise IndexRangeError(max(i, j), self.n_max - 1, "entry index")
        gen = self.bands.get(j - i)
        if gen is None:
            return 0.0
        k = min(i, j)
        return float(gen(k) if callable(gen) else gen[k])

    def truncate(self, N: int) -> np.ndarray:
        if not 0 <= N < self.n_max:
            raise IndexRangeError(N, self.n_max - 1)
        size = N + 1
        M = np.zeros((size, size))
        for d, gen in self.bands.items():
            length = size - abs(d)
            if length > 0:
                M += np.diag(_generate(gen, length), d)
        return M

    def shift(self, s: float) -> "BandedMatrix":
        bands = dict(self.bands)
        gen = bands.get(0)
        if gen is None:
            bands[0] = [float(s)] * self.n_max
        elif callable(gen):
            bands[0] = lambda k, base=gen: float(base(k)) + s
        else:
            bands[0] = [float(v) + s for v in gen]
        return BandedMatrix(p=self.p, q=self.q, bands=bands, n_max=self.n_max)

    def norm1(self, N: int) -> float:
        return float(np.max(np.sum(np.abs(self.truncate(N)), axis=0)))

    def extreme_entries(self, N: int) -> Tuple[np.ndarray, np.ndarray]:
        """Outermost sub- and superdiagonal entries T[n+q, n], T[n, n+p] for n <= N."""
        low = np.array([self.entry(n + self.q, n) for n in range(N + 1)])
        high = np.array([self.entry(n, n + self.p) for n in range(N + 1)])
        return low, high


def truncate(T: BandedMatrix, N: int) -> np.ndarray:
    return T.truncate(N)


def shift(T: BandedMatrix, s: float) -> BandedMatrix:
    return T.shift(s)


def _unit_bidiagonal(gen: Generator, size: int, lower: bool) -> np.ndarray:
    entries = _generate(gen, max(size - 1, 0))
    return np.eye(size) + np.diag(entries, -1 if lower else 1)


def from_factors(
    lowers: Sequence[Generator],
    delta: Generator,
    uppers: Sequence[Generator],
    n_max: int,
) -> BandedMatrix:
    """Banded matrix L_1...L_q . Delta . U_p...U_1 from bidiagonal factor entries.

    ``lowers[k-1][i]`` sits at (i+1, i) of L_k and ``uppers[j-1][i]`` at
    (i, i+1) of U_j. Lower-times-upper products truncate exactly, so the
    n_max leading block of the semi-infinite product is the dense product.
    """
    factors = [_unit_bidiagonal(g, n_max, lower=True) for g in lowers]
    factors.append(np.diag(_generate(delta, n_max)))
    factors += [_unit_bidiagonal(g, n_max, lower=False) for g in reversed(uppers)]
    product = reduce(np.matmul, factors)
    q, p = len(lowers), len(uppers)
    bands = {d: np.diagonal(product, d).tolist() for d in range(-q, p + 1)}
    return BandedMatrix(p=p, q=q, bands=bands, n_max=n_max, factors=(tuple(lowers), delta, tuple(uppers)))


def _unit(i: int) -> float:
    return 1.0


def t1_matrix(n_max: int = 128) -> BandedMatrix:
    """Reference (2,3) matrix with every bidiagonal parameter equal to one."""
    return from_factors([_unit] * 3, _unit, [_unit] * 2, n_max)


@dataclass(frozen=True, eq=False)
class BidiagonalFactorization:
    """Unit bidiagonal factors of a truncation, ordered L_1...L_q . Delta . U_p...U_1.

    ``lowers[k-1][i]`` is the (i+1, i) entry of L_k; its first ``q-k``
    entries are structural zeros. ``uppers[j-1][i]`` is the (i, i+1) entry of
    U_j; its first ``p-j`` entries are structural zeros.
    """

    lowers: Tuple[np.ndarray, ...]
    delta: np.ndarray
    uppers: Tuple[np.ndarray, ...]
    positive: bool
    violations: Tuple[dict, ...] = ()
    residual: float = 0.0

    @property
    def size(self) -> int:
        return len(self.delta)

    @property
    def q(self) -> int:
        return len(self.lowers)

    @property
    def p(self) -> int:
        return len(self.uppers)

    def lower_matrix(self, k: int) -> np.ndarray:
        return np.eye(self.size) + np.diag(self.lowers[k - 1], -1)

    def upper_matrix(self, j: int) -> np.ndarray:
        return np.eye(self.size) + np.diag(self.uppers[j - 1], 1)

    def factor_sequence(self) -> List[np.ndarray]:
        seq = [self.lower_matrix(k) for k in range(1, self.q + 1)]
        seq.append(np.diag(self.delta))
        seq += [self.upper_matrix(j) for j in range(self.p, 0, -1)]
        return seq

    def reassemble(self) -> np.ndarray:
        return reduce(np.matmul, self.factor_sequence())


def _neville_eliminate(A: np.ndarray, width: int, stage: str) -> Tuple[np.ndarray, np.ndarray]:
    """Adjacent-row elimination of the ``width`` subdiagonals, bottom-up per column."""
    A = A.copy()
    n = A.shape[0]
    multipliers = np.zeros((n, n))
    cutoff = _ZERO_FACTOR * max(float(np.max(np.abs(A))), np.finfo(float).tiny) if n else 0.0
    for k in range(n - 1):
        for i in range(min(n - 1, k + width), k, -1):
            target = A[i, k]
            if abs(target) <= cutoff:
                A[i, k] = 0.0
                continue
            pivot = A[i - 1, k]
            if abs(pivot) <= cutoff:
                raise DegenerateFactorizationError(i - 1, k, stage)
            m = target / pivot
            multipliers[i, k] = m
            A[i, k:] -= m * A[i - 1, k:]
            A[i, k] = 0.0
    return multipliers, A


def _group_by_distance(multipliers: np.ndarray, width: int) -> List[np.ndarray]:
    """F_d entries (d = 1..width): position (t+1, t) holds multiplier[t+1, t+1-d]."""
    n = multipliers.shape[0]
    groups = []
    for d in range(1, width + 1):
        entries = np.zeros(max(n - 1, 0))
        for t in range(d - 1, n - 1):
            entries[t] = multipliers[t + 1, t + 1 - d]
        groups.append(entries)
    return groups


def _positivity_violations(F: "BidiagonalFactorization") -> List[dict]:
    violations = []
    for k, entries in enumerate(F.lowers, start=1):
        for t in range(F.q - k, len(entries)):
            if not entries[t] > 0:
                violations.append({"factor": f"L{k}", "index": t, "value": float(entries[t])})
    for i, d in enumerate(F.delta):
        if not d > 0:
            violations.append({"factor": "Delta", "index": i, "value": float(d)})
    for j in range(F.p, 0, -1):
        entries = F.uppers[j - 1]
        for t in range(F.p - j, len(entries)):
            if not entries[t] > 0:
                violations.append({"factor": f"U{j}", "index": t, "value": float(entries[t])})
    return violations


def neville_factorize(M, p: int, q: int) -> BidiagonalFactorization:
    """Bidiagonal factorization of a (p, q)-banded truncation by Neville elimination.

    Raises DegenerateFactorizationError on a zero pivot. A factorization with
    nonpositive parameters is returned with ``positive=False`` and the
    offending entries listed in ``violations``.
    """
    A = as_dense(M, "neville_factorize input").astype(float)
    n = A.shape[0]
    lower_mult, U = _neville_eliminate(A, q, "lower elimination")

    scale = max(float(np.max(np.abs(A))), np.finfo(float).tiny)
    pivots = np.diag(U).copy()
    for i, d in enumerate(pivots):
        if abs(d) <= _ZERO_FACTOR * scale:
            raise DegenerateFactorizationError(i, i, "pivot")

    unit_upper = U / pivots[:, None]
    upper_mult, _ = _neville_eliminate(unit_upper.T, p, "upper elimination")

    # L_k = F_{q+1-k}, U_j = G_{p+1-j}
    lowers = tuple(reversed(_group_by_distance(lower_mult, q)))
    uppers = tuple(reversed(_group_by_distance(upper_mult, p)))

    F = BidiagonalFactorization(lowers=lowers, delta=pivots, uppers=uppers, positive=False)
    residual = float(np.max(np.abs(F.reassemble() - A))) if n else 0.0
    tolerance = get_tolerance("reassembly")
    if residual > tolerance * scale:
        raise VerificationError("neville_reassembly", residual / scale, tolerance, {"size": n})

    violations = _positivity_violations(F)
    if violations:
        logger.info("factorization_not_positive", size=n, first=violations[0])
    return BidiagonalFactorization(
        lowers=lowers,
        delta=pivots,
        uppers=uppers,
        positive=not violations,
        violations=tuple(violations),
        residual=residual / scale,
    )


@dataclass(frozen=True)
class OscillationVerdict:
    """Outcome of the oscillation test; ``clause`` names the failed condition."""

    oscillatory: bool
    clause: Optional[str] = None
    reason: str = ""
    position: Optional[Tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.oscillatory

    def to_dict(self) -> dict:
        return {
            "oscillatory": self.oscillatory,
            "clause": self.clause,
            "reason": self.reason,
            "position": list(self.position) if self.position else None,
        }


def is_oscillatory(M) -> OscillationVerdict:
    """Totally nonnegative, nonsingular and with positive first off-diagonals."""
    A = as_dense(M, "is_oscillatory input").astype(float)
    n = A.shape[0]
    width = max(n - 1, 0)
    try:
        F = neville_factorize(A, width, width)
    except DegenerateFactorizationError as exc:
        clause = "nonsingular" if exc.details["stage"] == "pivot" else "totally_nonnegative"
        return OscillationVerdict(
            False, clause, exc.message, (exc.details["row"], exc.details["column"])
        )

    for i, d in enumerate(F.delta):
        if d < 0:
            return OscillationVerdict(False, "totally_nonnegative", f"negative pivot {d:.6g}", (i, i))
    for name, group in (("L", F.lowers), ("U", F.uppers)):
        for k, entries in enumerate(group, start=1):
            negative = np.flatnonzero(entries < 0)
            if negative.size:
                t = int(negative[0])
                return OscillationVerdict(
                    False,
                    "totally_nonnegative",
                    f"negative Neville multiplier {entries[t]:.6g} in {name}{k}",
                    (t + 1, t) if name == "L" else (t, t + 1),
                )

    for i in range(n - 1):
        if not A[i + 1, i] > 0:
            return OscillationVerdict(False, "off_diagonal", "subdiagonal entry not positive", (i + 1, i))
        if not A[i, i + 1] > 0:
            return OscillationVerdict(False, "off_diagonal", "superdiagonal entry not positive", (i, i + 1))
    return OscillationVerdict(True)


def _certified(M: np.ndarray, p: int, q: int) -> bool:
    try:
        return neville_factorize(M, p, q).positive
    except DegenerateFactorizationError:
        return False


def find_oscillatory_shift(T, N: int) -> float:
    """Smallest shift (on a bisection grid) giving a positive bidiagonal factorization.

    Positivity is assumed monotone in the shift; the returned value is
    certified, the bracket below it is not.
    """
    M = T.truncate(N)
    identity = np.eye(N + 1)
    norm = float(np.max(np.sum(np.abs(M), axis=0)))
    resolution = settings["SHIFT_RESOLUTION_FACTOR"] * (1.0 + norm)
    ceiling = settings["SHIFT_CEILING_FACTOR"] * max(norm, 1.0)

    if _certified(M, T.p, T.q):
        return 0.0
    if not _certified(M + ceiling * identity, T.p, T.q):
        raise ShiftSearchExhaustedError(N, ceiling)

    # double the bracket from below before bisecting
    lo, hi = 0.0, resolution
    while hi < ceiling and not _certified(M + hi * identity, T.p, T.q):
        lo, hi = hi, min(2.0 * hi, ceiling)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if _certified(M + mid * identity, T.p, T.q):
            hi = mid
        else:
            lo = mid
    logger.info("oscillatory_shift_found", N=N, shift=hi, resolution=resolution)
    return hi


def _check_variant(F: BidiagonalFactorization, variant: int) -> None:
    if variant == 0 or (variant > 0 and variant > F.q) or (variant < 0 and -variant > F.p):
        raise DarbouxVariantError(variant, F.q, F.p)


def darboux_transform(F: BidiagonalFactorization, variant: int) -> np.ndarray:
    """Cyclic permutation of the factor sequence.

    ``+a`` moves L_1...L_a to the back; ``-b`` moves U_b...U_1 to the front.
    """
    _check_variant(F, variant)
    seq = F.factor_sequence()
    seq = seq[variant:] + seq[:variant]
    return reduce(np.matmul, seq)


def darboux_eigenvectors(
    F: BidiagonalFactorization, w: np.ndarray, u: np.ndarray, magnitudes: bool = False
) -> Dict[int, np.ndarray]:
    """Transport a left eigenvector ``w`` and right eigenvector ``u`` of the
    factored truncation to eigenvectors of each Darboux transform.

    With ``magnitudes`` the absolute factors act on |w| and |u|, giving the
    size of the products each transported entry is summed from.
    """
    view = np.abs if magnitudes else np.asarray
    out: Dict[int, np.ndarray] = {}
    left = view(np.asarray(w, dtype=float))
    for a in range(1, F.q + 1):
        left = left @ view(F.lower_matrix(a))
        out[a] = left
    right = view(np.asarray(u, dtype=float))
    for b in range(1, F.p + 1):
        right = view(F.upper_matrix(b)) @ right
        out[-b] = right
    return out
