"""Verification suites: self-checks of the spectral identities on a matrix or an ensemble."""

from favard.verification.agent import SUITES, VerificationAgent

__all__ = ["SUITES", "VerificationAgent"]
