"""Pytest configuration and shared fixtures."""

import json
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import numpy as np
import pytest

from favard.bandmat import t1_matrix
from favard.jacobi import JacobiMatrix
from favard.mixedmop import InitialConditions
from favard.verification.ensemble import random_jacobi, random_pbf

SPEC_DIR = project_root / "data" / "specs"


@pytest.fixture(scope="session")
def t1():
    """The (2,3) matrix whose bidiagonal parameters are all one."""
    return t1_matrix(64)


@pytest.fixture(scope="session")
def chebyshev():
    """Jacobi matrix with m = 0 and ell = 1; moments are Catalan numbers."""
    return JacobiMatrix.constant(0.0, 1.0, n_max=64)


@pytest.fixture
def identity_ic():
    return InitialConditions()


@pytest.fixture
def skewed_ic():
    """Non-trivial initial conditions."""
    return InitialConditions(nu11=0.3, nu12=-0.2, nu22=0.5, xi1=0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def random_pbf_matrix(rng):
    return random_pbf(rng, 32)


@pytest.fixture
def random_jacobi_matrix(rng):
    return random_jacobi(rng, 48)


@pytest.fixture(scope="session")
def spec_dir() -> Path:
    return SPEC_DIR


@pytest.fixture
def write_spec(tmp_path):
    """Write a dict (or raw text) as a matrix description file and return its path."""
    def _write(content, name: str = "spec.json") -> Path:
        path = tmp_path / name
        text = content if isinstance(content, str) else json.dumps(content, indent=2)
        path.write_text(text, encoding="utf-8")
        return path
    return _write


@pytest.fixture
def banded23_spec():
    """A small banded23 description built from the all-ones factorization, truncated to 8."""
    product = t1_matrix(8).truncate(7)
    bands = {}
    for d in range(-3, 3):
        key = "0" if d == 0 else f"{d:+d}"
        bands[key] = np.diagonal(product, d).tolist()
    return {"kind": "banded23", "n_max": 8, "bands": bands}
