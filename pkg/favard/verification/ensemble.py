"""Seeded random test matrices: banded matrices with positive bidiagonal
factorization and bounded Jacobi matrices."""

from typing import Iterator, List, Optional, Tuple

import numpy as np

from favard.bandmat import BandedMatrix, from_factors
from favard.config import settings
from favard.exceptions import InputError
from favard.jacobi import JacobiMatrix


def _factor_range(low: Optional[float], high: Optional[float]) -> Tuple[float, float]:
    default_low, default_high = settings["FACTOR_RANGE"]
    return (default_low if low is None else low, default_high if high is None else high)


def random_pbf(
    rng: np.random.Generator, n_max: int, low: Optional[float] = None, high: Optional[float] = None
) -> BandedMatrix:
    """L_1 L_2 L_3 Delta U_2 U_1 with every parameter uniform in [low, high]."""
    low, high = _factor_range(low, high)
    lowers = [rng.uniform(low, high, n_max - 1).tolist() for _ in range(3)]
    delta = rng.uniform(low, high, n_max).tolist()
    uppers = [rng.uniform(low, high, n_max - 1).tolist() for _ in range(2)]
    return from_factors(lowers, delta, uppers, n_max)


def random_jacobi(
    rng: np.random.Generator, n_max: int, low: Optional[float] = None, high: Optional[float] = None
) -> JacobiMatrix:
    """Diagonal uniform in [-1, 1], subdiagonal uniform in [low, high]."""
    low, high = _factor_range(low, high)
    m = rng.uniform(-1.0, 1.0, n_max).tolist()
    ell = [1.0] + rng.uniform(low, high, n_max - 1).tolist()
    return JacobiMatrix(m=m, ell=ell, n_max=n_max)


def pbf_ensemble(size: Optional[int] = None, n_max: int = 32, seed: Optional[int] = None) -> List[BandedMatrix]:
    rng = np.random.default_rng(settings["SEED"] if seed is None else seed)
    count = settings["ENSEMBLE_SIZE"] if size is None else size
    return [random_pbf(rng, n_max) for _ in range(count)]


def jacobi_ensemble(size: Optional[int] = None, n_max: int = 48, seed: Optional[int] = None) -> List[JacobiMatrix]:
    rng = np.random.default_rng(settings["SEED"] if seed is None else seed)
    count = settings["ENSEMBLE_SIZE"] if size is None else size
    return [random_jacobi(rng, n_max) for _ in range(count)]


def iter_ensemble(kind: str, size: Optional[int] = None, n_max: int = 32, seed: Optional[int] = None) -> Iterator:
    if kind == "pbf":
        yield from pbf_ensemble(size, n_max, seed)
    elif kind == "jacobi":
        yield from jacobi_ensemble(size, n_max, seed)
    else:
        raise InputError(
            message=f"Unknown ensemble kind {kind!r}",
            error_code="ENSEMBLE_KIND",
            details={"kind": kind, "known": ["pbf", "jacobi"]},
        )
