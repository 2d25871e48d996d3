"""favardlab: spectral Favard theory for banded matrices with positive bidiagonal factorization."""

__version__ = "0.3.0"
